#include "hearth/home.hpp"

#include <algorithm>

namespace hearth {

using scenario::StimulusType;
using simnet::MessageKind;

namespace {

constexpr Duration kTickPeriod = kSecond;
constexpr Duration kHeartbeatPeriod = 10 * kSecond;
constexpr Duration kJoinRetry = kSecond;

Json non_internal(const DeviceState& state, DeviceKind kind) {
  Json out = Json::object();
  for (const auto& spec : schema_of(kind).attributes)
    if (spec.access != Access::Internal) out[spec.name] = to_json(state.attributes.at(spec.name));
  return out;
}

}  // namespace

Home::Home(scenario::Scenario s)
    : scenario_(std::move(s)), transport_(scenario_.net), env_(scenario_.environment) {
  env_.validate();
  gateway::GatewayHost& host = *this;
  gateway_ = std::make_unique<gateway::Gateway>(scenario_.gateway_config(), host);
  for (const auto& spec : scenario_.devices)
    add_device(spec, spec.secret.value_or(scenario_.join_secret));
}

Home::~Home() = default;

Home::DeviceModel& Home::add_device(scenario::DeviceSpec spec, std::string secret) {
  if (by_address_.contains(spec.address))
    throw ArgumentError("address '" + spec.address + "' already in use");
  auto model = std::make_unique<DeviceModel>();
  model->spec = std::move(spec);
  model->secret = std::move(secret);
  DeviceModel& ref = *model;
  by_address_.emplace(ref.spec.address, &ref);
  devices_.push_back(std::move(model));
  return ref;
}

// ---------------------------------------------------------------------------
// Host services

std::uint64_t Home::log(RecordKind kind, Json payload) {
  LogRecord r{next_seq_, now(), kind, std::move(payload)};
  if (log_) log_->append(r);
  ++next_seq_;
  for (const auto& obs : observers_) obs(r);
  if (keep_records_) records_.push_back(std::move(r));
  return next_seq_ - 1;
}

simnet::Message Home::send(simnet::MessageDraft draft) {
  simnet::Message m = transport_.send(std::move(draft), now());
  Json payload;
  if (m.kind == MessageKind::Reading) {
    payload = {{"reading_seq", m.payload.value("reading_seq", Json(nullptr))}};
  } else if (m.kind == MessageKind::Join) {
    payload = m.payload;
    payload.erase("secret");
    payload["secret_digest"] = gateway::secret_digest(m.payload.value("secret", ""));
  } else {
    payload = m.payload;
  }
  Json rec{{"msg", m.id},
           {"src", m.src},
           {"dst", m.dst},
           {"mkind", to_string(m.kind)},
           {"outcome", m.dropped() ? "dropped" : "delivered"},
           {"payload", std::move(payload)}};
  if (!m.dropped()) {
    rec["deliver_t"] = *m.deliver_time;
    rec["latency"] = m.latency();
    latency_samples_.push_back(m.latency());
    in_flight_.emplace(m.id, m);
    scheduler_.schedule(m.dst, {{"type", "deliver"}, {"msg", m.id}}, m.latency());
  } else {
    ++dropped_;
  }
  log(RecordKind::Message, std::move(rec));
  return m;
}

void Home::schedule_timer(Json payload, Duration delay) {
  scheduler_.schedule(std::string(simnet::kGatewayEndpoint),
                      {{"type", "timer"}, {"timer", std::move(payload)}}, delay);
}

// ---------------------------------------------------------------------------
// Run control

void Home::start() {
  if (started_) return;
  started_ = true;
  const auto& s = scenario_;
  log(RecordKind::Lifecycle,
      {{"event", "run_start"},
       {"scenario", s.name},
       {"seed", s.seed},
       {"duration", s.duration},
       {"config",
        {{"lockout_threshold", s.lockout_threshold},
         {"auto_close_after", s.access.auto_close_after},
         {"session_ttl", s.session_ttl},
         {"latency_base", s.net.latency_base},
         {"latency_jitter", s.net.latency_jitter},
         {"loss_probability", s.net.loss_probability},
         {"join_secret_digest", gateway::secret_digest(s.join_secret)},
         {"rules", s.rules_source}}}});
  for (auto& d : devices_) send_join(*d);
  for (std::size_t i = 0; i < s.timeline.size(); ++i)
    scheduler_.schedule(std::string(simnet::kEnvironmentTarget),
                        {{"type", "stimulus"}, {"index", i}}, s.timeline[i].t);
  scheduler_.schedule(std::string(simnet::kEnvironmentTarget), {{"type", "tick"}}, kTickPeriod);
}

void Home::run_until(Timestamp t) {
  if (!started_) start();
  while (auto next = scheduler_.next_fire_time()) {
    if (*next > t) break;
    auto step = scheduler_.step();
    for (const auto& ev : step->fired) dispatch(ev);
  }
  if (t > now()) scheduler_.advance_to(t);
}

void Home::finish() {
  if (finished_) return;
  if (!started_) start();
  finished_ = true;
  log(RecordKind::Lifecycle, {{"event", "run_end"}, {"duration", now()}});
}

void Home::run() {
  start();
  run_until(scenario_.duration);
  finish();
}

void Home::dispatch(const simnet::SimEvent& ev) {
  if (ev.target == simnet::kEnvironmentTarget) return on_environment_event(ev.payload);
  const std::string type = ev.payload.at("type").get<std::string>();
  if (ev.target == simnet::kGatewayEndpoint) {
    if (type == "timer") return gateway_->handle_timer(ev.payload.at("timer"));
    auto it = in_flight_.find(ev.payload.at("msg").get<std::uint64_t>());
    const simnet::Message m = std::move(it->second);
    in_flight_.erase(it);
    return gateway_->handle_message(m);
  }
  auto dev = by_address_.find(ev.target);
  if (dev == by_address_.end()) throw IntegrityError("event for unknown target " + ev.target);
  on_device_event(*dev->second, ev.payload);
}

// ---------------------------------------------------------------------------
// Environment

devices::ActuatorSnapshot Home::actuators(Timestamp t) const {
  devices::ActuatorSnapshot a;
  for (const auto& d : devices_) {
    if (d->phase != DeviceModel::Phase::Registered) continue;
    auto on = [&](const char* attr) {
      auto it = d->state.attributes.find(attr);
      return it != d->state.attributes.end() && it->second.as_bool();
    };
    switch (d->spec.kind) {
      case DeviceKind::AirConditioner: a.ac_on = a.ac_on || on("on"); break;
      case DeviceKind::Furnace: a.furnace_on = a.furnace_on || on("on"); break;
      case DeviceKind::LawnSprinkler: a.lawn_sprinkler_on = a.lawn_sprinkler_on || on("on"); break;
      case DeviceKind::FireSprinkler:
        if (on("on")) {
          a.fire_sprinkler_on = true;
          a.fire_sprinkler_on_for = std::max(a.fire_sprinkler_on_for, t - d->on_since);
        }
        break;
      default: break;
    }
  }
  return a;
}

void Home::advance_environment(Timestamp t) {
  if (t <= env_time_) return;
  const bool was_burning = env_.fire_active;
  env_.outdoor_temp = scenario_.outdoor.at(env_time_);
  env_ = devices::step_environment(env_, actuators(t), scenario_.thermal, scenario_.hazard,
                                   t - env_time_);
  env_time_ = t;
  env_.outdoor_temp = scenario_.outdoor.at(t);
  if (was_burning && !env_.fire_active)
    log(RecordKind::Lifecycle, {{"event", "fire_extinguished"}});
}

void Home::sample_sensors() {
  for (auto& d : devices_) {
    if (d->phase != DeviceModel::Phase::Registered || schema_of(d->spec.kind).actuator) continue;
    const DeviceDescriptor desc{*d->id, d->spec.name, d->spec.kind, d->spec.address,
                                d->spec.binding};
    AttributeMap values = devices::read_sensor(desc, env_, scenario_.hazard);
    const bool changed = std::any_of(values.begin(), values.end(), [&](const auto& kv) {
      return d->state.attributes.at(kv.first) != kv.second;
    });
    if (changed) publish(*d, values);
  }
}

void Home::on_environment_event(const Json& p) {
  const std::string type = p.at("type").get<std::string>();
  if (type == "tick") {
    advance_environment(now());
    sample_sensors();
    gateway_->tick();
    scheduler_.schedule(std::string(simnet::kEnvironmentTarget), {{"type", "tick"}}, kTickPeriod);
  } else if (type == "stimulus") {
    const auto& st = scenario_.timeline.at(p.at("index").get<std::size_t>());
    apply_stimulus(st.type, st.args);
  } else if (type == "motion_end") {
    const std::string zone = p.at("zone").get<std::string>();
    advance_environment(now());
    auto it = motion_until_.find(zone);
    if (it != motion_until_.end() && now() >= it->second) {
      motion_until_.erase(it);
      env_.motion_zones.erase(zone);
      sample_sensors();
    }
  } else if (type == "extinguish_check") {
    advance_environment(now());
    sample_sensors();
  }
}

void Home::note_gateway_state() {
  if (gateway_->up() != gateway_was_up_) {
    gateway_was_up_ = gateway_->up();
    up_changes_.emplace_back(now(), gateway_was_up_);
  }
}

Json Home::apply_stimulus(StimulusType type, const Json& args) {
  Json rec = args;
  if (rec.contains("password")) rec.erase("password");
  if (rec.contains("secret")) {
    rec["secret_digest"] = gateway::secret_digest(rec["secret"].get<std::string>());
    rec.erase("secret");
  }
  rec["event"] = "stimulus";
  rec["type"] = to_string(type);
  log(RecordKind::Lifecycle, std::move(rec));
  auto failed = [&](const std::string& why) {
    log(RecordKind::Lifecycle,
        {{"event", "stimulus_failed"}, {"type", to_string(type)}, {"error", why}});
    return Json{{"ok", false}, {"error", why}};
  };

  try {
    switch (type) {
      case StimulusType::FireStart:
      case StimulusType::FireStop:
        advance_environment(now());
        env_.fire_active = type == StimulusType::FireStart;
        sample_sensors();
        break;
      case StimulusType::Motion: {
        const std::string zone = args.at("zone").get<std::string>();
        const Duration length =
            static_cast<Duration>(args.value("duration_s", 5.0) * static_cast<double>(kSecond));
        advance_environment(now());
        env_.motion_zones.insert(zone);
        auto& until = motion_until_[zone];
        until = std::max(until, now() + length);
        scheduler_.schedule(std::string(simnet::kEnvironmentTarget),
                            {{"type", "motion_end"}, {"zone", zone}}, length);
        sample_sensors();
        break;
      }
      case StimulusType::Rain:
        advance_environment(now());
        env_.water_level_pct =
            std::clamp(env_.water_level_pct + args.at("delta").get<double>(), 0.0, 100.0);
        sample_sensors();
        break;
      case StimulusType::Swipe: {
        const auto r = gateway_->on_swipe(args.at("reader").get<std::string>(),
                                          args.at("card").get<std::string>());
        Json out{{"ok", true},
                 {"decision", access::to_string(r.decision)},
                 {"portal", access::to_string(r.portal)},
                 {"audit_seq", r.audit_seq}};
        if (r.command) out["command"] = to_json(*r.command);
        return out;
      }
      case StimulusType::GatewayDown:
        gateway_->go_down();
        note_gateway_state();
        break;
      case StimulusType::GatewayUp:
        gateway_->go_up();
        note_gateway_state();
        break;
      case StimulusType::Join: {
        scenario::DeviceSpec spec;
        spec.name = args.at("name").get<std::string>();
        auto kind = parse_device_kind(args.at("kind").get<std::string>());
        if (!kind) throw ArgumentError("unknown device kind");
        spec.kind = *kind;
        spec.address = args.at("address").get<std::string>();
        spec.binding = args.value("binding", "");
        send_join(add_device(std::move(spec), args.at("secret").get<std::string>()));
        break;
      }
      case StimulusType::Login: {
        const std::string user = args.at("user").get<std::string>();
        try {
          scripted_tokens_[user] =
              gateway_->authenticate_client(user, args.at("password").get<std::string>()).value;
        } catch (const gateway::AuthError& e) {
          return Json{{"ok", false}, {"error", e.what()}};
        }
        break;
      }
      case StimulusType::ClientCommand: {
        const std::string user = args.at("user").get<std::string>();
        auto token = scripted_tokens_.find(user);
        if (token == scripted_tokens_.end()) return failed("no session for '" + user + "'");
        auto id = gateway_->find_by_name(args.at("device").get<std::string>());
        if (!id) return failed("device not registered");
        const auto ack = gateway_->dispatch_command(token->second, *id,
                                                    args.at("attribute").get<std::string>(),
                                                    attribute_value_from_json(args.at("value")));
        return Json{{"ok", true}, {"command", to_json(ack)}};
      }
    }
  } catch (const gateway::AuthError& e) {
    return failed(e.what());
  } catch (const gateway::CommandError& e) {
    return failed(e.code());
  } catch (const Json::exception& e) {
    throw ArgumentError(std::string("bad stimulus arguments: ") + e.what());
  }
  return Json{{"ok", true}};
}

// ---------------------------------------------------------------------------
// Devices

void Home::send_join(DeviceModel& d) {
  send({d.spec.address, std::string(simnet::kGatewayEndpoint), MessageKind::Join,
        {{"name", d.spec.name},
         {"kind", to_string(d.spec.kind)},
         {"binding", d.spec.binding},
         {"secret", d.secret}}});
  scheduler_.schedule(d.spec.address, {{"type", "join_retry"}}, kJoinRetry);
}

void Home::publish(DeviceModel& d, const AttributeMap& values) {
  bool changed = false;
  for (const auto& [name, value] : values) {
    auto it = d.state.attributes.find(name);
    if (it->second == value) continue;
    it->second = value;
    changed = true;
  }
  if (changed) d.state.last_update = std::max(d.state.last_update, now());
  const Json json = to_json(values);
  const auto seq = log(RecordKind::Reading,
                       {{"device", d.id->str()}, {"values", json}, {"source", d.id->str()}});
  send({d.spec.address, std::string(simnet::kGatewayEndpoint), MessageKind::Reading,
        {{"device", d.id->str()}, {"values", json}, {"reading_seq", seq}}});
}

void Home::on_device_event(DeviceModel& d, const Json& p) {
  const std::string type = p.at("type").get<std::string>();
  if (type == "deliver") {
    auto it = in_flight_.find(p.at("msg").get<std::uint64_t>());
    const simnet::Message m = std::move(it->second);
    in_flight_.erase(it);
    on_device_message(d, m);
  } else if (type == "join_retry") {
    if (d.phase == DeviceModel::Phase::Joining) send_join(d);
  } else if (type == "heartbeat") {
    if (d.phase != DeviceModel::Phase::Registered) return;
    AttributeMap current;
    for (const auto& spec : schema_of(d.spec.kind).attributes)
      if (spec.access != Access::Internal) current[spec.name] = d.state.attributes.at(spec.name);
    publish(d, current);
    scheduler_.schedule(d.spec.address, {{"type", "heartbeat"}}, kHeartbeatPeriod);
  }
}

void Home::on_device_message(DeviceModel& d, const simnet::Message& m) {
  switch (m.kind) {
    case MessageKind::JoinAck: {
      if (d.phase != DeviceModel::Phase::Joining) return;
      if (!m.payload.value("accepted", false)) {
        d.phase = DeviceModel::Phase::Rejected;
        return;
      }
      d.phase = DeviceModel::Phase::Registered;
      d.id = DeviceId(m.payload.at("device").get<std::string>());
      d.state = initial_state(d.spec.kind, m.payload.at("registered_at").get<Timestamp>());
      AttributeMap first;
      if (schema_of(d.spec.kind).actuator) {
        for (const auto& spec : schema_of(d.spec.kind).attributes)
          if (spec.access != Access::Internal) first[spec.name] = d.state.attributes.at(spec.name);
      } else {
        first = devices::read_sensor({*d.id, d.spec.name, d.spec.kind, d.spec.address,
                                      d.spec.binding},
                                     env_, scenario_.hazard);
      }
      publish(d, first);
      scheduler_.schedule(d.spec.address, {{"type", "heartbeat"}}, kHeartbeatPeriod);
      return;
    }
    case MessageKind::Command:
      if (d.phase == DeviceModel::Phase::Registered) apply_command(d, m);
      return;
    default: return;
  }
}

void Home::apply_command(DeviceModel& d, const simnet::Message& m) {
  const auto cmd = m.payload.at("cmd").get<std::uint64_t>();
  const std::string attribute = m.payload.at("attribute").get<std::string>();
  Json ack{{"cmd", cmd}, {"device", d.id->str()}, {"applied_seq", nullptr}};
  try {
    const AttributeValue value = attribute_value_from_json(m.payload.at("value"));
    // Actuator changes alter the physics from this instant on.
    advance_environment(now());
    const bool was_on = d.spec.kind == DeviceKind::FireSprinkler &&
                        d.state.attributes.at("on").as_bool();
    auto result = devices::apply_command(d.state, d.spec.kind, attribute, value, now());
    if (result.changed) {
      d.state = std::move(result.state);
      ack["applied_seq"] = log(RecordKind::Command, {{"event", "applied"},
                                                     {"cmd", cmd},
                                                     {"device", d.id->str()},
                                                     {"attribute", attribute},
                                                     {"value", to_json(value)}});
      if (d.spec.kind == DeviceKind::FireSprinkler) {
        const bool on = d.state.attributes.at("on").as_bool();
        if (on && !was_on) {
          d.on_since = now();
          scheduler_.schedule(std::string(simnet::kEnvironmentTarget),
                              {{"type", "extinguish_check"}}, scenario_.hazard.extinguish_after);
        } else if (!on) {
          d.on_since = -1;
        }
      }
    }
  } catch (const TypeError& e) {
    ack["error"] = e.what();
  }
  ack["values"] = non_internal(d.state, d.spec.kind);
  send({d.spec.address, std::string(simnet::kGatewayEndpoint), MessageKind::Ack, std::move(ack)});
}

// ---------------------------------------------------------------------------
// Snapshots

simnet::RunMetrics Home::metrics() const {
  simnet::RunMetrics m;
  m.uptime_fraction = persistence::uptime_from_transitions(up_changes_, now());
  m.latency_samples = latency_samples_;
  m.dropped_count = dropped_;
  for (const auto& a : gateway_->alerts()) ++m.alert_count_by_category[a.category];
  return m;
}

persistence::HomeSnapshot Home::snapshot() const {
  persistence::HomeSnapshot s;
  const auto internals = gateway_->internal_states();
  for (const auto& view : gateway_->directory()) {
    const auto& desc = view.registration.descriptor;
    s.registrations.emplace(desc.id,
                            persistence::RegistrationRecord{desc, view.registration.registered_at});
    DeviceState state = initial_state(desc.kind, view.registration.registered_at);
    auto model = by_address_.find(desc.logical_address);
    if (model != by_address_.end() && model->second->id == desc.id) state = model->second->state;
    const auto& internal = internals.at(desc.id);
    for (const auto& [name, value] : internal.attributes) state.attributes[name] = value;
    state.last_update = std::max(state.last_update, internal.last_change);
    s.devices.emplace(desc.id, std::move(state));
  }
  for (const auto& a : gateway_->alerts()) ++s.alert_counts[a.category];
  s.metrics = metrics();
  s.horizon = now();
  return s;
}

}  // namespace hearth
