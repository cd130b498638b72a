#include "hearth/access.hpp"

#include <algorithm>

namespace hearth::access {

std::string_view to_string(Portal portal) {
  switch (portal) {
    case Portal::MainDoor: return "main_door";
    case Portal::Garage: return "garage";
  }
  return "?";
}

std::optional<Portal> parse_portal(std::string_view name) {
  if (name == "main_door") return Portal::MainDoor;
  if (name == "garage") return Portal::Garage;
  return std::nullopt;
}

DeviceKind portal_device_kind(Portal portal) {
  return portal == Portal::Garage ? DeviceKind::GarageDoor : DeviceKind::Door;
}

std::optional<Portal> portal_of_kind(DeviceKind kind) {
  if (kind == DeviceKind::Door) return Portal::MainDoor;
  if (kind == DeviceKind::GarageDoor) return Portal::Garage;
  return std::nullopt;
}

void AccessPolicy::validate() const {
  if (auto_close_after <= 0) throw ArgumentError("auto_close_after must be > 0");
  for (const auto& [card, portals] : allow_list) {
    if (card.empty()) throw ArgumentError("card number must be non-empty");
    if (!std::all_of(card.begin(), card.end(), [](char c) { return c >= '0' && c <= '9'; }))
      throw ArgumentError("card number '" + card + "' must be decimal digits");
    if (portals.empty()) throw ArgumentError("card '" + card + "' grants no portals");
  }
}

std::string_view to_string(Decision decision) {
  return decision == Decision::Allow ? "allow" : "deny";
}

Decision validate_card(std::string_view card, Portal portal, const AccessPolicy& policy) {
  auto it = policy.allow_list.find(card);
  if (it == policy.allow_list.end()) return Decision::Deny;
  return it->second.contains(portal) ? Decision::Allow : Decision::Deny;
}

Json to_json(const AuditEntry& e) {
  return Json{{"reader", e.reader},
              {"card", e.card},
              {"decision", to_string(e.decision)},
              {"portal", to_string(e.portal)}};
}

std::uint64_t CloseTimers::arm(Portal portal, Timestamp now, Duration after) {
  const std::uint64_t generation = next_generation_++;
  timers_[portal] = CloseTimer{generation, now + after};
  return generation;
}

void CloseTimers::disarm(Portal portal) { timers_.erase(portal); }

std::optional<CloseTimer> CloseTimers::find(Portal portal) const {
  auto it = timers_.find(portal);
  if (it == timers_.end()) return std::nullopt;
  return it->second;
}

bool auto_close_check(bool portal_open, const CloseTimers& timers, Portal portal,
                      std::uint64_t generation, Timestamp now) {
  auto timer = timers.find(portal);
  if (!timer || timer->generation != generation) return false;
  return portal_open && now >= timer->deadline;
}

}  // namespace hearth::access
