// RFID access control: allow-list validation, portal mapping and the
// auto-close timer bookkeeping. The gateway drives these from swipes.
#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>

#include "hearth/domain.hpp"

namespace hearth::access {

enum class Portal { MainDoor, Garage };

std::string_view to_string(Portal portal);
std::optional<Portal> parse_portal(std::string_view name);

/// Door guards the main door, GarageDoor the garage.
DeviceKind portal_device_kind(Portal portal);
std::optional<Portal> portal_of_kind(DeviceKind kind);

struct AccessPolicy {
  std::map<std::string, std::set<Portal>, std::less<>> allow_list;
  Duration auto_close_after = 30 * kSecond;

  /// Throws ArgumentError on an empty or non-decimal card number, an entry
  /// with no portals, or auto_close_after <= 0.
  void validate() const;
};

enum class Decision { Allow, Deny };
std::string_view to_string(Decision decision);

/// Allow iff the card is enrolled for this portal. Unknown cards deny.
Decision validate_card(std::string_view card, Portal portal, const AccessPolicy& policy);

struct AuditEntry {
  Timestamp time = 0;
  std::string reader;  // DeviceId of the reader
  std::string card;
  Decision decision = Decision::Deny;
  Portal portal = Portal::MainDoor;
};

Json to_json(const AuditEntry& entry);

/// One pending auto-close per portal. Every new authorization bumps the
/// generation so older timers become no-ops.
struct CloseTimer {
  std::uint64_t generation = 0;
  Timestamp deadline = 0;
};

class CloseTimers {
 public:
  /// Arm (or re-arm) the timer for `portal`; returns the new generation.
  std::uint64_t arm(Portal portal, Timestamp now, Duration after);
  void disarm(Portal portal);
  std::optional<CloseTimer> find(Portal portal) const;
  const std::map<Portal, CloseTimer>& all() const noexcept { return timers_; }

 private:
  std::map<Portal, CloseTimer> timers_;
  std::uint64_t next_generation_ = 1;
};

/// True when a timer of `generation` expiring at `now` should close the
/// portal: it is still the current timer, its deadline has passed and the
/// portal is open.
bool auto_close_check(bool portal_open, const CloseTimers& timers, Portal portal,
                      std::uint64_t generation, Timestamp now);

}  // namespace hearth::access
