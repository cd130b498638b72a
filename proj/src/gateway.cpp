#include "hearth/gateway.hpp"

#include <sodium.h>

#include <algorithm>
#include <cstdio>
#include <stdexcept>

namespace hearth::gateway {

namespace {

void ensure_sodium() {
  static const int status = sodium_init();
  if (status < 0) throw std::runtime_error("libsodium failed to initialise");
}

using Hash = std::array<unsigned char, crypto_generichash_BYTES>;

Hash blake2b(std::string_view message, std::string_view key = {}) {
  ensure_sodium();
  Hash out{};
  crypto_generichash(out.data(), out.size(), reinterpret_cast<const unsigned char*>(message.data()),
                     message.size(),
                     key.empty() ? nullptr : reinterpret_cast<const unsigned char*>(key.data()),
                     key.size());
  return out;
}

std::string as_bytes(const Hash& h) { return std::string(h.begin(), h.end()); }

/// Per-user key so equal passwords of different users hash differently.
std::string password_hash(std::string_view username, std::string_view password) {
  const Hash key = blake2b(std::string("hearth-account:") + std::string(username));
  return as_bytes(blake2b(password, std::string_view(reinterpret_cast<const char*>(key.data()),
                                                     key.size())));
}

bool same(const std::string& a, const std::string& b) {
  return a.size() == b.size() && sodium_memcmp(a.data(), b.data(), a.size()) == 0;
}

double seconds(Timestamp t) { return static_cast<double>(t) / static_cast<double>(kSecond); }

std::string hex_token(Rng& rng) {
  char buf[33];
  std::snprintf(buf, sizeof buf, "%016llx%016llx", static_cast<unsigned long long>(rng.next_u64()),
                static_cast<unsigned long long>(rng.next_u64()));
  return buf;
}

}  // namespace

std::string secret_digest(std::string_view secret) {
  const Hash h = blake2b(secret);
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out;
  for (unsigned char c : h) {
    out += kHex[c >> 4];
    out += kHex[c & 15];
  }
  return out;
}

void CredentialStore::add_account(std::string_view username, std::string_view password) {
  if (username.empty()) throw ArgumentError("username must be non-empty");
  accounts_.insert_or_assign(std::string(username), password_hash(username, password));
}

void CredentialStore::set_join_secret(std::string_view secret) {
  if (secret.empty()) throw ArgumentError("join secret must be non-empty");
  join_hash_ = as_bytes(blake2b(secret, "hearth-join"));
}

bool CredentialStore::verify_account(std::string_view username, std::string_view password) const {
  const std::string candidate = password_hash(username, password);
  auto it = accounts_.find(username);
  // Compare against a throwaway hash for unknown users so both failure
  // paths do the same work.
  const std::string expected = it != accounts_.end() ? it->second : password_hash("", "\x01");
  const bool match = same(candidate, expected);
  return match && it != accounts_.end();
}

bool CredentialStore::verify_join_secret(std::string_view secret) const {
  if (join_hash_.empty()) return false;
  return same(as_bytes(blake2b(secret, "hearth-join")), join_hash_);
}

void GatewayConfig::validate() const {
  if (join_secret.empty()) throw ArgumentError("join_secret must be non-empty");
  if (session_ttl <= 0) throw ArgumentError("session_ttl must be > 0");
  if (lockout_threshold < 1) throw ArgumentError("lockout_threshold must be >= 1");
  if (command_retry_after <= 0 || motion_idle_after <= 0 || offline_after <= 0)
    throw ArgumentError("gateway durations must be > 0");
  access.validate();
}

std::string_view to_string(RegistrationStatus status) {
  return status == RegistrationStatus::Online ? "online" : "offline";
}

Json to_json(const DeviceView& v) {
  const auto& d = v.registration.descriptor;
  Json j{{"id", d.id.str()},
         {"display_name", d.display_name},
         {"kind", to_string(d.kind)},
         {"logical_address", d.logical_address},
         {"registered_at", v.registration.registered_at},
         {"status", to_string(v.registration.status)},
         {"attributes", to_json(v.state.attributes)},
         {"last_update", v.state.last_update}};
  if (!d.binding.empty()) j["binding"] = d.binding;
  return j;
}

Json to_json(const CommandAck& ack) {
  return Json{{"cmd", ack.command_id},
              {"msg", ack.message_id},
              {"outcome", ack.delivered ? "delivered" : "dropped"}};
}

// ---------------------------------------------------------------------------

Gateway::Gateway(GatewayConfig config, GatewayHost& host)
    : config_(std::move(config)), host_(host), session_rng_(Rng::derive(config_.seed, "session")) {
  config_.validate();
  credentials_.set_join_secret(config_.join_secret);
  for (const auto& a : config_.accounts) credentials_.add_account(a.username, a.password);
}

void Gateway::go_down() {
  if (!up_) return;
  up_ = false;
  host_.log(RecordKind::Lifecycle, {{"event", "gateway_down"}});
}

void Gateway::go_up() {
  if (up_) return;
  up_ = true;
  const auto seq = host_.log(RecordKind::Lifecycle, {{"event", "gateway_up"}});
  record_alert(Alert{host_.now(), Severity::Warning, AlertCategory::System,
                     std::string(kGatewaySource), "gateway restarted after an outage"},
               seq);
  // Timers that expired during the outage were dropped; catch up now.
  for (auto& [id, entry] : entries_)
    if (entry.registration.descriptor.kind == DeviceKind::MotionDetector) check_idle(entry);
  const auto timers = timers_.all();
  for (const auto& [portal, timer] : timers)
    if (timer.deadline <= host_.now()) check_auto_close(portal, timer.generation);
}

void Gateway::handle_message(const simnet::Message& m) {
  if (!up_) return ignore(m, "gateway_down");
  switch (m.kind) {
    case simnet::MessageKind::Join: return handle_join(m);
    case simnet::MessageKind::Reading: return handle_reading(m);
    case simnet::MessageKind::Ack: return handle_ack(m);
    default: return ignore(m, "unexpected_kind");
  }
}

void Gateway::ignore(const simnet::Message& m, std::string_view reason) {
  host_.log(RecordKind::Lifecycle,
            {{"event", "message_ignored"}, {"msg", m.id}, {"reason", reason}});
}

void Gateway::handle_join(const simnet::Message& m) {
  const Json& p = m.payload;
  const std::string name = p.value("name", "");
  const std::string address = m.src;
  auto kind = parse_device_kind(p.value("kind", ""));
  auto reject = [&](std::string_view reason) {
    const auto seq = host_.log(RecordKind::Lifecycle, {{"event", "join_rejected"},
                                                       {"name", name},
                                                       {"kind", p.value("kind", "")},
                                                       {"address", address},
                                                       {"reason", reason}});
    host_.send({std::string(simnet::kGatewayEndpoint), address, simnet::MessageKind::JoinAck,
                {{"accepted", false}, {"reason", reason}}});
    return seq;
  };

  if (!credentials_.verify_join_secret(p.value("secret", ""))) {
    const auto seq = reject("bad_secret");
    record_alert(Alert{host_.now(), Severity::Critical, AlertCategory::Security,
                       std::string(kGatewaySource),
                       "join with bad secret from " + address + " ('" + name + "')"},
                 seq);
    return;
  }
  if (!kind || name.empty()) {
    reject("bad_request");
    return;
  }
  for (auto& [id, entry] : entries_) {
    const auto& d = entry.registration.descriptor;
    if (d.display_name != name) continue;
    if (d.logical_address == address && d.kind == *kind) {
      // Retry after a lost join_ack: answer again with the same identity.
      host_.send({std::string(simnet::kGatewayEndpoint), address, simnet::MessageKind::JoinAck,
                  {{"accepted", true},
                   {"device", id.str()},
                   {"registered_at", entry.registration.registered_at}}});
    } else {
      reject("duplicate_name");
    }
    return;
  }

  DeviceId id = device_id_for_ordinal(next_ordinal_++);
  Entry entry{Registration{DeviceDescriptor{id, name, *kind, address, p.value("binding", "")},
                           host_.now(), RegistrationStatus::Online},
              initial_state(*kind, host_.now())};
  entry.last_seen = host_.now();
  entry.internal_change = host_.now();
  host_.log(RecordKind::Lifecycle, {{"event", "registered"},
                                    {"device", id.str()},
                                    {"name", name},
                                    {"kind", to_string(*kind)},
                                    {"address", address},
                                    {"binding", entry.registration.descriptor.binding},
                                    {"registered_at", host_.now()}});
  entries_.emplace(id, std::move(entry));
  host_.send({std::string(simnet::kGatewayEndpoint), address, simnet::MessageKind::JoinAck,
              {{"accepted", true}, {"device", id.str()}, {"registered_at", host_.now()}}});
}

Gateway::Entry* Gateway::find_entry(std::string_view id_or_name) {
  for (auto& [id, entry] : entries_)
    if (id.str() == id_or_name || entry.registration.descriptor.display_name == id_or_name)
      return &entry;
  return nullptr;
}

Gateway::Entry* Gateway::find_entry_by_address(std::string_view address) {
  for (auto& [id, entry] : entries_)
    if (entry.registration.descriptor.logical_address == address) return &entry;
  return nullptr;
}

std::vector<std::pair<std::string, AttributeValue>> Gateway::merge(Entry& entry,
                                                                    const Json& values) {
  std::vector<std::pair<std::string, AttributeValue>> changes;
  const auto& schema = schema_of(entry.registration.descriptor.kind);
  for (const auto& [name, raw] : values.items()) {
    const AttributeSpec* spec = schema.find(name);
    if (!spec || spec->access == Access::Internal) continue;
    AttributeValue v = attribute_value_from_json(raw);
    check_value_against(*spec, v);
    auto it = entry.state.attributes.find(name);
    if (it->second == v) continue;
    changes.emplace_back(name, it->second);
    it->second = std::move(v);
  }
  if (!changes.empty()) entry.state.last_update = std::max(entry.state.last_update, host_.now());
  return changes;
}

void Gateway::handle_reading(const simnet::Message& m) {
  Entry* entry = find_entry_by_address(m.src);
  if (!entry || entry->registration.descriptor.id.str() != m.payload.value("device", ""))
    return ignore(m, "unregistered");
  entry->last_seen = host_.now();
  if (m.send_time < entry->last_message_sent) return ignore(m, "stale");
  entry->last_message_sent = m.send_time;
  std::vector<std::pair<std::string, AttributeValue>> changes;
  try {
    changes = merge(*entry, m.payload.at("values"));
  } catch (const std::exception&) {
    return ignore(m, "malformed");
  }
  const bool first = !entry->reported;
  entry->reported = true;
  std::optional<std::uint64_t> cause;
  if (m.payload.contains("reading_seq")) cause = m.payload["reading_seq"].get<std::uint64_t>();
  if (first || !changes.empty()) react_to_changes(*entry, changes, cause);
}

void Gateway::handle_ack(const simnet::Message& m) {
  Entry* entry = find_entry_by_address(m.src);
  if (!entry) return ignore(m, "unregistered");
  entry->last_seen = host_.now();
  const auto cmd = m.payload.value("cmd", std::uint64_t{0});
  for (auto it = pending_.begin(); it != pending_.end();) {
    if (it->second.command_id == cmd) {
      it = pending_.erase(it);
    } else {
      ++it;
    }
  }
  if (m.send_time < entry->last_message_sent) return;
  entry->last_message_sent = m.send_time;
  std::vector<std::pair<std::string, AttributeValue>> changes;
  try {
    changes = merge(*entry, m.payload.at("values"));
  } catch (const std::exception&) {
    return ignore(m, "malformed");
  }
  entry->reported = true;
  std::optional<std::uint64_t> cause;
  if (m.payload.contains("applied_seq") && !m.payload["applied_seq"].is_null())
    cause = m.payload["applied_seq"].get<std::uint64_t>();
  if (!changes.empty()) react_to_changes(*entry, changes, cause);
}

void Gateway::set_internal(Entry& entry, AttributeMap values) {
  Json changed = Json::object();
  for (auto& [name, value] : values) {
    auto it = entry.state.attributes.find(name);
    if (it->second == value) continue;
    changed[name] = to_json(value);
    it->second = std::move(value);
  }
  if (changed.empty()) return;
  entry.internal_change = host_.now();
  entry.state.last_update = std::max(entry.state.last_update, host_.now());
  host_.log(RecordKind::Reading, {{"device", entry.registration.descriptor.id.str()},
                                  {"values", std::move(changed)},
                                  {"source", kGatewaySource}});
}

void Gateway::react_to_changes(Entry& entry,
                               const std::vector<std::pair<std::string, AttributeValue>>& changes,
                               std::optional<std::uint64_t> cause) {
  const auto& d = entry.registration.descriptor;
  const auto& attrs = entry.state.attributes;
  for (const auto& [name, before] : changes) {
    const AttributeValue& after = attrs.find(name)->second;
    switch (d.kind) {
      case DeviceKind::FireMonitor:
        if (name == "fire" && after.as_bool()) {
          record_alert({host_.now(), Severity::Critical, AlertCategory::Fire, d.id.str(),
                        "fire detected by " + d.display_name},
                       cause);
        } else if (name == "fire") {
          record_alert({host_.now(), Severity::Info, AlertCategory::Fire, d.id.str(),
                        "fire cleared at " + d.display_name},
                       cause);
        }
        break;
      case DeviceKind::SmokeDetector:
        if (name == "smoke" && after.as_bool())
          record_alert({host_.now(), Severity::Warning, AlertCategory::Fire, d.id.str(),
                        "smoke detected by " + d.display_name},
                       cause);
        break;
      case DeviceKind::WaterLevelMonitor:
        if (name == "level" && after.as_number() >= config_.water_high_pct &&
            before.as_number() < config_.water_high_pct)
          record_alert({host_.now(), Severity::Warning, AlertCategory::Water, d.id.str(),
                        "water level high at " + d.display_name},
                       cause);
        break;
      case DeviceKind::MotionDetector:
        if (name == "motion") {
          // Both edges restart the idle clock; only a falling edge can lead
          // to idle.
          AttributeMap internal;
          internal["last_motion_at"] = AttributeValue::number(seconds(host_.now()));
          if (after.as_bool()) internal["idle"] = AttributeValue::boolean(false);
          set_internal(entry, std::move(internal));
          if (!after.as_bool())
            host_.schedule_timer({{"timer", "idle"}, {"device", d.id.str()}},
                                 config_.motion_idle_after);
        }
        break;
      default: break;
    }
  }
  evaluate_rules(cause);
}

void Gateway::check_idle(Entry& entry) {
  const auto& attrs = entry.state.attributes;
  if (attrs.at("motion").as_bool() || attrs.at("idle").as_bool()) return;
  const double last = attrs.at("last_motion_at").as_number();
  if (last < 0) return;
  const auto since = host_.now() - static_cast<Timestamp>(last * static_cast<double>(kSecond) + 0.5);
  if (since < config_.motion_idle_after) return;
  set_internal(entry, {{"idle", AttributeValue::boolean(true)}});
  evaluate_rules(std::nullopt);
}

void Gateway::handle_timer(const Json& payload) {
  if (!up_) return;  // re-checked by go_up()
  const std::string timer = payload.value("timer", "");
  if (timer == "idle") {
    if (Entry* e = find_entry(payload.value("device", ""))) check_idle(*e);
  } else if (timer == "auto_close") {
    auto portal = access::parse_portal(payload.value("portal", ""));
    if (portal) check_auto_close(*portal, payload.value("generation", std::uint64_t{0}));
  }
}

void Gateway::tick() {
  if (!up_) return;
  evaluate_rules(std::nullopt);
}

// ---------------------------------------------------------------------------
// Rules

rules::WorldSnapshot Gateway::rule_snapshot() const {
  rules::WorldSnapshot snap;
  for (const auto& [id, entry] : entries_) {
    const auto& d = entry.registration.descriptor;
    const auto& schema = schema_of(d.kind);
    for (const auto& spec : schema.attributes) {
      // Sensor values are unknown until the device has reported once.
      if (spec.access == Access::ReadOnly && !entry.reported) continue;
      snap.set(d.display_name, spec.name, entry.state.attributes.at(spec.name));
    }
  }
  return snap;
}

void Gateway::evaluate_rules(std::optional<std::uint64_t> trigger_seq) {
  if (config_.rules.empty()) return;
  const auto result = rules::evaluate_all(config_.rules, rule_snapshot());
  const Json trigger = trigger_seq ? Json(*trigger_seq) : Json(nullptr);

  std::map<std::string, std::string, std::less<>> failing;
  for (const auto& f : result.failures) failing[f.rule] = f.message;
  for (const auto& c : result.commands)
    if (!find_entry(c.target.device)) failing.emplace(c.rule, c.target.device + " is not registered");
  for (const auto& [rule, message] : failing) {
    auto it = rule_errors_.find(rule);
    if (it != rule_errors_.end() && it->second == message) continue;
    rule_errors_.insert_or_assign(rule, message);
    host_.log(RecordKind::Lifecycle,
              {{"event", "rule_error"}, {"rule", rule}, {"message", message}, {"trigger_seq", trigger}});
  }
  for (auto it = rule_errors_.begin(); it != rule_errors_.end();)
    it = failing.contains(it->first) ? std::next(it) : rule_errors_.erase(it);

  for (const auto& c : result.commands) {
    Entry* entry = find_entry(c.target.device);
    if (!entry) continue;
    const DeviceId& id = entry->registration.descriptor.id;
    const auto key = std::make_pair(id, c.target.attribute);
    auto p = pending_.find(key);
    const bool in_flight =
        p != pending_.end() && host_.now() - p->second.issued_at < config_.command_retry_after;
    if (in_flight) {
      if (p->second.value == c.value) continue;
    } else if (entry->state.attributes.at(c.target.attribute) == c.value) {
      continue;
    }
    issue_command(*entry, c.target.attribute, c.value, "rule:" + c.rule, trigger_seq);
    for (const auto& s : result.shadowed) {
      if (s.command.target != c.target) continue;
      host_.log(RecordKind::Lifecycle, {{"event", "shadowed"},
                                        {"rule", s.command.rule},
                                        {"device", id.str()},
                                        {"attribute", c.target.attribute},
                                        {"value", to_json(s.command.value)},
                                        {"by_rule", s.by_rule},
                                        {"trigger_seq", trigger}});
    }
  }
}

CommandAck Gateway::issue_command(Entry& entry, std::string_view attribute,
                                  const AttributeValue& value, const std::string& origin,
                                  std::optional<std::uint64_t> trigger_seq) {
  const auto& d = entry.registration.descriptor;
  const std::uint64_t cmd = next_command_id_++;
  const simnet::Message m = host_.send({std::string(simnet::kGatewayEndpoint), d.logical_address,
                                        simnet::MessageKind::Command,
                                        {{"cmd", cmd},
                                         {"device", d.id.str()},
                                         {"attribute", attribute},
                                         {"value", to_json(value)}}});
  host_.log(RecordKind::Command, {{"event", "issued"},
                                  {"cmd", cmd},
                                  {"msg", m.id},
                                  {"device", d.id.str()},
                                  {"attribute", attribute},
                                  {"value", to_json(value)},
                                  {"origin", origin},
                                  {"trigger_seq", trigger_seq ? Json(*trigger_seq) : Json(nullptr)},
                                  {"outcome", m.dropped() ? "dropped" : "delivered"}});
  pending_[{d.id, std::string(attribute)}] = Pending{value, host_.now(), cmd};
  return CommandAck{cmd, m.id, !m.dropped()};
}

// ---------------------------------------------------------------------------
// Alerts and clients

std::uint64_t Gateway::record_alert(Alert alert, std::optional<std::uint64_t> cause_seq) {
  alert.time = host_.now();
  const auto seq = host_.log(RecordKind::Alert,
                             {{"severity", to_string(alert.severity)},
                              {"category", to_string(alert.category)},
                              {"source", alert.source},
                              {"message", alert.message},
                              {"cause_seq", cause_seq ? Json(*cause_seq) : Json(nullptr)}});
  alerts_.push_back(std::move(alert));
  return seq;
}

SessionToken Gateway::authenticate_client(std::string_view username, std::string_view password) {
  if (!up_) throw AuthError(AuthError::Reason::Unavailable, "gateway unavailable");
  if (credentials_.verify_account(username, password)) {
    if (auto it = login_failures_.find(username); it != login_failures_.end())
      login_failures_.erase(it);
    SessionToken token{hex_token(session_rng_), std::string(username),
                       host_.now() + config_.session_ttl};
    sessions_.insert_or_assign(token.value, Session{token.username, token.expires_at});
    host_.log(RecordKind::Lifecycle, {{"event", "session_opened"},
                                      {"user", token.username},
                                      {"expires_at", token.expires_at}});
    return token;
  }
  auto it = login_failures_.find(username);
  if (it == login_failures_.end()) it = login_failures_.emplace(std::string(username), 0).first;
  const int consecutive = ++it->second;
  const auto seq = host_.log(RecordKind::Lifecycle, {{"event", "login_failed"},
                                                     {"user", username},
                                                     {"consecutive", consecutive}});
  if (consecutive % config_.lockout_threshold == 0) {
    record_alert(Alert{host_.now(), Severity::Warning, AlertCategory::Security,
                       std::string(kGatewaySource),
                       std::to_string(consecutive) + " consecutive failed logins for '" +
                           std::string(username) + "'"},
                 seq);
  }
  throw AuthError(AuthError::Reason::Invalid, "invalid credentials");
}

std::string Gateway::validate_session(std::string_view token) const {
  auto it = sessions_.find(token);
  if (it == sessions_.end()) throw AuthError(AuthError::Reason::Invalid, "invalid session");
  if (host_.now() >= it->second.expires_at)
    throw AuthError(AuthError::Reason::Expired, "expired");
  return it->second.username;
}

std::vector<DeviceView> Gateway::directory() const {
  std::vector<DeviceView> out;
  out.reserve(entries_.size());
  for (const auto& [id, entry] : entries_) {
    DeviceView v{entry.registration, entry.state};
    v.registration.status = host_.now() - entry.last_seen > config_.offline_after
                                ? RegistrationStatus::Offline
                                : RegistrationStatus::Online;
    out.push_back(std::move(v));
  }
  return out;
}

std::vector<DeviceView> Gateway::list_devices(std::string_view token) const {
  validate_session(token);
  return directory();
}

std::optional<DeviceId> Gateway::find_by_name(std::string_view display_name) const {
  for (const auto& [id, entry] : entries_)
    if (entry.registration.descriptor.display_name == display_name) return id;
  return std::nullopt;
}

std::map<DeviceId, InternalState> Gateway::internal_states() const {
  std::map<DeviceId, InternalState> out;
  for (const auto& [id, entry] : entries_) {
    InternalState s;
    for (const auto& spec : schema_of(entry.registration.descriptor.kind).attributes)
      if (spec.access == Access::Internal) s.attributes[spec.name] = entry.state.attributes.at(spec.name);
    s.last_change = entry.internal_change;
    out.emplace(id, std::move(s));
  }
  return out;
}

CommandAck Gateway::dispatch_command(std::string_view token, const DeviceId& device,
                                     std::string_view attribute, const AttributeValue& value) {
  const std::string user = validate_session(token);
  if (!up_) throw CommandError("unavailable", "gateway unavailable");
  auto it = entries_.find(device);
  if (it == entries_.end()) throw CommandError("unknown device", "unknown device " + device.str());
  Entry& entry = it->second;
  const auto kind = entry.registration.descriptor.kind;
  const AttributeSpec* spec = schema_of(kind).find(attribute);
  if (!spec)
    throw CommandError("unknown attribute", std::string(to_string(kind)) + " has no attribute '" +
                                                std::string(attribute) + "'");
  if (spec->access != Access::Writable)
    throw CommandError("read-only", "attribute '" + std::string(attribute) + "' is read-only");
  try {
    check_value_against(*spec, value);
  } catch (const TypeError& e) {
    throw CommandError("type", e.what());
  }
  const CommandAck ack = issue_command(entry, attribute, value, "client:" + user, std::nullopt);
  if (auto portal = access::portal_of_kind(kind); portal && attribute == "open" && value.as_bool())
    arm_close_timer(*portal);
  return ack;
}

// ---------------------------------------------------------------------------
// Access control

Gateway::Entry* Gateway::portal_entry(access::Portal portal) {
  for (auto& [id, entry] : entries_)
    if (entry.registration.descriptor.kind == access::portal_device_kind(portal)) return &entry;
  return nullptr;
}

bool Gateway::portal_open(const Entry& entry) const {
  const auto key = std::make_pair(entry.registration.descriptor.id, std::string("open"));
  auto p = pending_.find(key);
  if (p != pending_.end() && host_.now() - p->second.issued_at < config_.command_retry_after)
    return p->second.value.as_bool();
  return entry.state.attributes.at("open").as_bool();
}

void Gateway::arm_close_timer(access::Portal portal) {
  const auto generation = timers_.arm(portal, host_.now(), config_.access.auto_close_after);
  host_.schedule_timer(
      {{"timer", "auto_close"}, {"portal", to_string(portal)}, {"generation", generation}},
      config_.access.auto_close_after);
}

void Gateway::check_auto_close(access::Portal portal, std::uint64_t generation) {
  Entry* entry = portal_entry(portal);
  auto timer = timers_.find(portal);
  if (!entry || !timer || timer->generation != generation) return;
  if (!access::auto_close_check(portal_open(*entry), timers_, portal, generation, host_.now())) {
    if (host_.now() >= timer->deadline) timers_.disarm(portal);
    return;
  }
  issue_command(*entry, "open", AttributeValue::boolean(false), "auto_close", std::nullopt);
  // Keep the same generation alive so a lost close command is retried.
  host_.schedule_timer(
      {{"timer", "auto_close"}, {"portal", to_string(portal)}, {"generation", generation}},
      config_.command_retry_after);
}

SwipeResult Gateway::on_swipe(std::string_view reader, std::string_view card) {
  Entry* entry = find_entry(reader);
  if (!entry || entry->registration.descriptor.kind != DeviceKind::RfidReader)
    throw ArgumentError("'" + std::string(reader) + "' is not a registered RFID reader");
  const auto& d = entry->registration.descriptor;
  auto portal = access::parse_portal(d.binding);
  if (!portal) throw ArgumentError("reader " + d.id.str() + " is not bound to a portal");

  SwipeResult result;
  result.portal = *portal;
  result.decision = up_ ? access::validate_card(card, *portal, config_.access)
                        : access::Decision::Deny;
  Json audit = to_json(access::AuditEntry{host_.now(), d.id.str(), std::string(card),
                                          result.decision, *portal});
  audit["event"] = "audit";
  if (!up_) audit["reason"] = "gateway_down";
  result.audit_seq = host_.log(RecordKind::Lifecycle, std::move(audit));
  set_internal(*entry, {{"last_card", AttributeValue::string(std::string(card))}});

  if (result.decision == access::Decision::Deny) {
    const bool known = config_.access.allow_list.contains(card);
    record_alert(Alert{host_.now(), Severity::Warning, AlertCategory::Security, d.id.str(),
                       (known ? "RFID card " + std::string(card) + " not authorized for "
                              : "unknown RFID card " + std::string(card) + " at ") +
                           std::string(to_string(*portal))},
                 result.audit_seq);
    return result;
  }
  if (Entry* door = portal_entry(*portal)) {
    result.command = issue_command(*door, "open", AttributeValue::boolean(true), "access",
                                   result.audit_seq);
    arm_close_timer(*portal);
  }
  return result;
}

}  // namespace hearth::gateway
