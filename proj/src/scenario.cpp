#include "hearth/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>

#ifndef HEARTH_DEFAULT_SCENARIO_DIR
#define HEARTH_DEFAULT_SCENARIO_DIR "scenarios"
#endif

namespace hearth::scenario {

namespace {

std::string join_lines(const std::vector<std::string>& lines) {
  std::string out = "invalid scenario:";
  for (const auto& l : lines) out += "\n  " + l;
  return out;
}

}  // namespace

ScenarioError::ScenarioError(std::vector<std::string> diagnostics)
    : Error(join_lines(diagnostics)), diagnostics_(std::move(diagnostics)) {}

namespace {

constexpr std::pair<StimulusType, std::string_view> kStimulusNames[] = {
    {StimulusType::FireStart, "fire_start"},
    {StimulusType::FireStop, "fire_stop"},
    {StimulusType::Motion, "motion"},
    {StimulusType::Rain, "rain"},
    {StimulusType::Swipe, "swipe"},
    {StimulusType::GatewayDown, "gateway_down"},
    {StimulusType::GatewayUp, "gateway_up"},
    {StimulusType::Join, "join"},
    {StimulusType::Login, "login"},
    {StimulusType::ClientCommand, "client_command"},
};

}  // namespace

std::string_view to_string(StimulusType type) {
  for (const auto& [t, name] : kStimulusNames)
    if (t == type) return name;
  return "?";
}

std::optional<StimulusType> parse_stimulus_type(std::string_view name) {
  for (const auto& [t, n] : kStimulusNames)
    if (n == name) return t;
  return std::nullopt;
}

double OutdoorSchedule::at(Timestamp t) const {
  if (points.empty()) return 0.0;
  if (t <= points.front().first) return points.front().second;
  if (t >= points.back().first) return points.back().second;
  auto hi = std::upper_bound(points.begin(), points.end(), t,
                             [](Timestamp x, const auto& p) { return x < p.first; });
  auto lo = std::prev(hi);
  const double f = static_cast<double>(t - lo->first) / static_cast<double>(hi->first - lo->first);
  return lo->second + f * (hi->second - lo->second);
}

const DeviceSpec* Scenario::find_device(std::string_view n) const {
  for (const auto& d : devices)
    if (d.name == n) return &d;
  return nullptr;
}

gateway::GatewayConfig Scenario::gateway_config() const {
  gateway::GatewayConfig cfg;
  cfg.join_secret = join_secret;
  cfg.session_ttl = session_ttl;
  cfg.lockout_threshold = lockout_threshold;
  cfg.accounts = accounts;
  cfg.access = access;
  cfg.rules = rules;
  cfg.seed = seed;
  return cfg;
}

// ---------------------------------------------------------------------------

namespace {

Duration seconds_to_ns(double s) { return static_cast<Duration>(std::llround(s * 1e9)); }

/// Collects diagnostics while walking the document.
class Reader {
 public:
  std::vector<std::string> diags;

  void error(const std::string& path, const std::string& message) {
    diags.push_back(path + ": " + message);
  }

  const Json* object(const Json& parent, const std::string& path, std::string_view key,
                     bool required) {
    const Json* j = member(parent, path, key, required);
    if (j && !j->is_object()) {
      error(join(path, key), "expected an object");
      return nullptr;
    }
    return j;
  }

  const Json* array(const Json& parent, const std::string& path, std::string_view key,
                    bool required) {
    const Json* j = member(parent, path, key, required);
    if (j && !j->is_array()) {
      error(join(path, key), "expected an array");
      return nullptr;
    }
    return j;
  }

  std::optional<std::string> string(const Json& parent, const std::string& path,
                                    std::string_view key, bool required, bool non_empty = true) {
    const Json* j = member(parent, path, key, required);
    if (!j) return std::nullopt;
    if (!j->is_string()) {
      error(join(path, key), "expected a string");
      return std::nullopt;
    }
    auto s = j->get<std::string>();
    if (non_empty && s.empty()) {
      error(join(path, key), "must be non-empty");
      return std::nullopt;
    }
    return s;
  }

  /// Reads a finite number; `check` returns an error message or empty.
  template <typename Check>
  std::optional<double> number(const Json& parent, const std::string& path, std::string_view key,
                               bool required, Check check) {
    const Json* j = member(parent, path, key, required);
    if (!j) return std::nullopt;
    if (!j->is_number()) {
      error(join(path, key), "expected a number");
      return std::nullopt;
    }
    const double v = j->get<double>();
    if (!std::isfinite(v)) {
      error(join(path, key), "must be finite");
      return std::nullopt;
    }
    if (std::string msg = check(v); !msg.empty()) {
      error(join(path, key), msg);
      return std::nullopt;
    }
    return v;
  }

  std::optional<double> number(const Json& parent, const std::string& path, std::string_view key,
                               bool required) {
    return number(parent, path, key, required, [](double) { return std::string(); });
  }

  static std::string join(const std::string& path, std::string_view key) {
    return path.empty() ? std::string(key) : path + "." + std::string(key);
  }

  static std::string index(const std::string& path, std::size_t i) {
    return path + "[" + std::to_string(i) + "]";
  }

 private:
  const Json* member(const Json& parent, const std::string& path, std::string_view key,
                     bool required) {
    auto it = parent.find(key);
    if (it == parent.end()) {
      if (required) error(join(path, key), "required");
      return nullptr;
    }
    return &*it;
  }
};

auto positive = [](double v) { return v > 0 ? std::string() : std::string("must be > 0"); };
auto non_negative = [](double v) { return v >= 0 ? std::string() : std::string("must be >= 0"); };
auto fraction_0_1 = [](double v) {
  return v >= 0 && v < 1 ? std::string() : std::string("must be in [0, 1)");
};
auto percent = [](double v) {
  return v >= 0 && v <= 100 ? std::string() : std::string("must be in [0, 100]");
};

void read_meta(Reader& r, const Json& doc, Scenario& s) {
  const Json* meta = r.object(doc, "", "meta", true);
  if (!meta) return;
  if (auto n = r.string(*meta, "meta", "name", true)) s.name = *n;
  auto seed = meta->find("seed");
  if (seed == meta->end()) {
    r.error("meta.seed", "required");
  } else if (!seed->is_number_unsigned()) {
    r.error("meta.seed", "expected a non-negative integer");
  } else {
    s.seed = seed->get<std::uint64_t>();
  }
  if (auto d = r.number(*meta, "meta", "duration_s", true, positive)) s.duration = seconds_to_ns(*d);
}

void read_net(Reader& r, const Json& doc, Scenario& s) {
  const Json* net = r.object(doc, "", "net", false);
  if (!net) return;
  if (auto v = r.number(*net, "net", "latency_base_ms", false, positive))
    s.net.latency_base = static_cast<Duration>(std::llround(*v * 1e6));
  if (auto v = r.number(*net, "net", "latency_jitter_ms", false, non_negative))
    s.net.latency_jitter = static_cast<Duration>(std::llround(*v * 1e6));
  if (auto v = r.number(*net, "net", "loss_probability", false, fraction_0_1))
    s.net.loss_probability = *v;
}

void read_gateway(Reader& r, const Json& doc, Scenario& s) {
  const Json* gw = r.object(doc, "", "gateway", true);
  if (!gw) return;
  if (auto v = r.string(*gw, "gateway", "join_secret", true)) s.join_secret = *v;
  if (auto v = r.number(*gw, "gateway", "session_ttl_s", false, positive))
    s.session_ttl = seconds_to_ns(*v);
  if (auto v = r.number(*gw, "gateway", "lockout_threshold", false, [](double x) {
        return x >= 1 && x == std::floor(x) ? std::string() : std::string("must be an integer >= 1");
      }))
    s.lockout_threshold = static_cast<int>(*v);
  if (const Json* accounts = r.array(*gw, "gateway", "accounts", false)) {
    std::set<std::string> seen;
    for (std::size_t i = 0; i < accounts->size(); ++i) {
      const std::string path = Reader::index("gateway.accounts", i);
      const Json& a = (*accounts)[i];
      if (!a.is_object()) {
        r.error(path, "expected an object");
        continue;
      }
      auto user = r.string(a, path, "username", true);
      auto pass = r.string(a, path, "password", true);
      if (user && !seen.insert(*user).second) r.error(path + ".username", "duplicate username");
      if (user && pass) s.accounts.push_back({*user, *pass});
    }
  }
}

void read_environment(Reader& r, const Json& doc, Scenario& s) {
  const Json* env = r.object(doc, "", "environment", false);
  const std::string p = "environment";
  if (env) {
    if (auto v = r.number(*env, p, "indoor_temp", false)) s.environment.indoor_temp = *v;
    if (auto v = r.number(*env, p, "water_level_pct", false, percent))
      s.environment.water_level_pct = *v;
    if (auto v = r.number(*env, p, "smoke_ppm", false, non_negative)) s.environment.smoke_ppm = *v;
    if (auto v = r.number(*env, p, "outdoor_temp", false))
      s.outdoor.points = {{0, *v}};
    if (const Json* sched = r.array(*env, p, "outdoor_schedule", false)) {
      s.outdoor.points.clear();
      for (std::size_t i = 0; i < sched->size(); ++i) {
        const std::string path = Reader::index(p + ".outdoor_schedule", i);
        const Json& pt = (*sched)[i];
        if (!pt.is_array() || pt.size() != 2 || !pt[0].is_number() || !pt[1].is_number()) {
          r.error(path, "expected [t_s, temperature]");
          continue;
        }
        const Timestamp t = seconds_to_ns(pt[0].get<double>());
        if (t < 0) r.error(path, "time must be >= 0");
        if (!s.outdoor.points.empty() && t <= s.outdoor.points.back().first)
          r.error(path, "times must be strictly increasing");
        s.outdoor.points.emplace_back(t, pt[1].get<double>());
      }
      if (sched->empty()) r.error(p + ".outdoor_schedule", "must have at least one point");
    }
    if (const Json* th = r.object(*env, p, "thermal", false)) {
      const std::string tp = p + ".thermal";
      if (auto v = r.number(*th, tp, "k_leak", false)) s.thermal.k_leak = *v;
      if (auto v = r.number(*th, tp, "q_ac", false)) s.thermal.q_ac = *v;
      if (auto v = r.number(*th, tp, "q_furnace", false)) s.thermal.q_furnace = *v;
      if (auto v = r.number(*th, tp, "q_fire", false)) s.thermal.q_fire = *v;
      try {
        s.thermal.validate();
      } catch (const ArgumentError& e) {
        r.error(tp, e.what());
      }
    }
    if (const Json* hz = r.object(*env, p, "hazard", false)) {
      const std::string hp = p + ".hazard";
      auto& h = s.hazard;
      if (auto v = r.number(*hz, hp, "smoke_rise_ppm_per_min", false)) h.smoke_rise_ppm_per_min = *v;
      if (auto v = r.number(*hz, hp, "smoke_decay_per_min", false)) h.smoke_decay_per_min = *v;
      if (auto v = r.number(*hz, hp, "smoke_threshold_ppm", false)) h.smoke_threshold_ppm = *v;
      if (auto v = r.number(*hz, hp, "evaporation_pct_per_min", false)) h.evaporation_pct_per_min = *v;
      if (auto v = r.number(*hz, hp, "sprinkler_pct_per_min", false)) h.sprinkler_pct_per_min = *v;
      if (auto v = r.number(*hz, hp, "extinguish_after_s", false, positive))
        h.extinguish_after = seconds_to_ns(*v);
      try {
        h.validate();
      } catch (const ArgumentError& e) {
        r.error(hp, e.what());
      }
    }
    if (const Json* tc = r.object(*env, p, "thermostat", false)) {
      const std::string cp = p + ".thermostat";
      if (auto v = r.number(*tc, cp, "ac_on_above", false)) s.thermostat.ac_on_above = *v;
      if (auto v = r.number(*tc, cp, "furnace_on_below", false)) s.thermostat.furnace_on_below = *v;
      if (auto v = r.number(*tc, cp, "hysteresis", false)) s.thermostat.hysteresis = *v;
      try {
        s.thermostat.validate();
      } catch (const ArgumentError& e) {
        r.error(cp, e.what());
      }
    }
    if (const Json* lw = r.object(*env, p, "lawn", false)) {
      const std::string lp = p + ".lawn";
      if (auto v = r.number(*lw, lp, "on_below_pct", false)) s.lawn.on_below_pct = *v;
      if (auto v = r.number(*lw, lp, "off_above_pct", false)) s.lawn.off_above_pct = *v;
      try {
        s.lawn.validate();
      } catch (const ArgumentError& e) {
        r.error(lp, e.what());
      }
    }
  }
  if (s.outdoor.points.empty()) s.outdoor.points = {{0, s.environment.indoor_temp}};
  s.environment.outdoor_temp = s.outdoor.at(0);
}

void read_devices(Reader& r, const Json& doc, Scenario& s) {
  const Json* devs = r.array(doc, "", "devices", true);
  if (!devs) return;
  std::set<std::string> names;
  std::set<std::string> addresses;
  for (std::size_t i = 0; i < devs->size(); ++i) {
    const std::string path = Reader::index("devices", i);
    const Json& d = (*devs)[i];
    if (!d.is_object()) {
      r.error(path, "expected an object");
      continue;
    }
    DeviceSpec spec;
    bool ok = true;
    if (auto n = r.string(d, path, "name", true)) {
      spec.name = *n;
      if (!names.insert(*n).second) {
        r.error(path + ".name", "duplicate device name '" + *n + "'");
        ok = false;
      }
    } else {
      ok = false;
    }
    if (auto k = r.string(d, path, "kind", true)) {
      if (auto kind = parse_device_kind(*k)) {
        spec.kind = *kind;
      } else {
        r.error(path + ".kind", "unknown device kind '" + *k + "'");
        ok = false;
      }
    } else {
      ok = false;
    }
    spec.address = r.string(d, path, "address", false).value_or(spec.name);
    if (spec.address == simnet::kGatewayEndpoint || spec.address == simnet::kEnvironmentTarget) {
      r.error(path + ".address", "'" + spec.address + "' is reserved");
      ok = false;
    } else if (!spec.address.empty() && !addresses.insert(spec.address).second) {
      r.error(path + ".address", "duplicate address '" + spec.address + "'");
      ok = false;
    }
    spec.binding = r.string(d, path, "binding", false, false).value_or("");
    if (ok) {
      if (spec.kind == DeviceKind::MotionDetector && spec.binding.empty()) {
        r.error(path + ".binding", "motion detectors need a zone");
        ok = false;
      } else if (spec.kind == DeviceKind::RfidReader && !access::parse_portal(spec.binding)) {
        r.error(path + ".binding", "RFID readers need a portal (main_door or garage)");
        ok = false;
      } else if (spec.kind != DeviceKind::MotionDetector && spec.kind != DeviceKind::RfidReader &&
                 !spec.binding.empty()) {
        r.error(path + ".binding", "only motion detectors and RFID readers take a binding");
        ok = false;
      }
    }
    if (d.contains("secret")) spec.secret = r.string(d, path, "secret", false, false);
    if (ok) s.devices.push_back(std::move(spec));
  }
}

void read_access(Reader& r, const Json& doc, Scenario& s) {
  const Json* acc = r.object(doc, "", "access", false);
  if (!acc) return;
  if (auto v = r.number(*acc, "access", "auto_close_after_s", false, positive))
    s.access.auto_close_after = seconds_to_ns(*v);
  const Json* list = r.array(*acc, "access", "allow_list", false);
  if (!list) return;
  for (std::size_t i = 0; i < list->size(); ++i) {
    const std::string path = Reader::index("access.allow_list", i);
    const Json& e = (*list)[i];
    if (!e.is_object()) {
      r.error(path, "expected an object");
      continue;
    }
    auto card = r.string(e, path, "card", true);
    if (card && !std::all_of(card->begin(), card->end(), [](char c) { return c >= '0' && c <= '9'; })) {
      r.error(path + ".card", "card numbers are decimal digits");
      card.reset();
    }
    if (card && s.access.allow_list.contains(*card)) {
      r.error(path + ".card", "duplicate card '" + *card + "'");
      card.reset();
    }
    std::set<access::Portal> portals;
    if (const Json* ps = r.array(e, path, "portals", true)) {
      for (std::size_t k = 0; k < ps->size(); ++k) {
        const Json& p = (*ps)[k];
        auto portal = p.is_string() ? access::parse_portal(p.get<std::string>()) : std::nullopt;
        if (!portal) {
          r.error(Reader::index(path + ".portals", k), "expected main_door or garage");
        } else {
          portals.insert(*portal);
        }
      }
      if (ps->empty()) r.error(path + ".portals", "must name at least one portal");
    }
    if (card && !portals.empty()) s.access.allow_list.emplace(*card, std::move(portals));
  }
}

void read_rules(Reader& r, const Json& doc, Scenario& s, const std::filesystem::path& base_dir) {
  const Json* sec = r.object(doc, "", "rules", false);
  std::vector<std::pair<std::string, std::string>> sources;  // (field path, text)
  if (sec) {
    if (auto it = sec->find("standard_pack"); it != sec->end()) {
      std::vector<rules::PackGroup> groups;
      bool use = false;
      if (it->is_boolean()) {
        use = it->get<bool>();
        groups = {rules::PackGroup::Fire, rules::PackGroup::Climate, rules::PackGroup::Lawn,
                  rules::PackGroup::Motion};
      } else if (it->is_array()) {
        use = true;
        for (std::size_t i = 0; i < it->size(); ++i) {
          const Json& g = (*it)[i];
          auto group = g.is_string() ? rules::parse_pack_group(g.get<std::string>()) : std::nullopt;
          if (!group) {
            r.error(Reader::index("rules.standard_pack", i),
                    "expected one of fire, climate, lawn, motion");
          } else {
            groups.push_back(*group);
          }
        }
      } else {
        r.error("rules.standard_pack", "expected a boolean or an array of group names");
      }
      if (use) {
        try {
          sources.emplace_back("rules.standard_pack",
                               rules::standard_pack(s.thermostat, s.lawn, groups));
        } catch (const ArgumentError& e) {
          r.error("rules.standard_pack", e.what());
        }
      }
    }
    if (auto it = sec->find("inline"); it != sec->end()) {
      if (it->is_string()) {
        sources.emplace_back("rules.inline", it->get<std::string>());
      } else if (it->is_array()) {
        for (std::size_t i = 0; i < it->size(); ++i) {
          if ((*it)[i].is_string()) {
            sources.emplace_back(Reader::index("rules.inline", i), (*it)[i].get<std::string>());
          } else {
            r.error(Reader::index("rules.inline", i), "expected a string");
          }
        }
      } else {
        r.error("rules.inline", "expected a string or an array of strings");
      }
    }
    if (const Json* files = r.array(*sec, "rules", "files", false)) {
      for (std::size_t i = 0; i < files->size(); ++i) {
        const std::string path = Reader::index("rules.files", i);
        if (!(*files)[i].is_string()) {
          r.error(path, "expected a path");
          continue;
        }
        std::filesystem::path f = (*files)[i].get<std::string>();
        if (f.is_relative()) f = base_dir / f;
        std::ifstream in(f);
        if (!in) {
          r.error(path, "cannot read " + f.string());
          continue;
        }
        std::stringstream buf;
        buf << in.rdbuf();
        sources.emplace_back(path, buf.str());
      }
    }
  }

  rules::DirectorySchema directory;
  for (const auto& d : s.devices) directory.emplace(d.name, d.kind);
  std::set<std::string> seen;
  for (const auto& [path, text] : sources) {
    std::vector<rules::RuleAst> parsed;
    try {
      parsed = rules::parse_rules(text);
    } catch (const rules::ParseError& e) {
      r.error(path, e.what());
      continue;
    }
    for (auto& rule : parsed) {
      if (!seen.insert(rule.name).second) {
        r.error(path, "duplicate rule name '" + rule.name + "'");
        continue;
      }
      const auto errors = rules::typecheck_rule(rule, directory);
      for (const auto& e : errors) r.error(path, rules::to_string(e));
      for (const auto& a : rule.actions) {
        auto it = directory.find(a.target.device);
        if (it != directory.end() && access::portal_of_kind(it->second) &&
            a.target.attribute == "open" && a.value == AttributeValue::boolean(true)) {
          r.error(path, "rule '" + rule.name + "' opens a portal; portals open only through "
                        "access control or an authenticated client command");
        }
      }
      if (errors.empty()) s.rules.push_back(std::move(rule));
    }
    s.rules_source += text;
    if (!text.empty() && text.back() != '\n') s.rules_source += '\n';
  }
}

void read_timeline(Reader& r, const Json& doc, Scenario& s) {
  const Json* tl = r.array(doc, "", "timeline", false);
  if (!tl) return;
  for (std::size_t i = 0; i < tl->size(); ++i) {
    const std::string path = Reader::index("timeline", i);
    const Json& e = (*tl)[i];
    if (!e.is_object()) {
      r.error(path, "expected an object");
      continue;
    }
    const std::size_t before = r.diags.size();
    Stimulus st;
    if (auto t = r.number(e, path, "t_s", true, non_negative)) st.t = seconds_to_ns(*t);
    auto type_name = r.string(e, path, "type", true);
    std::optional<StimulusType> type;
    if (type_name) {
      type = parse_stimulus_type(*type_name);
      if (!type) r.error(path + ".type", "unknown stimulus '" + *type_name + "'");
    }
    if (!type) continue;
    st.type = *type;
    auto need_device = [&](std::string_view key, std::optional<DeviceKind> kind) {
      auto n = r.string(e, path, key, true);
      if (!n) return;
      const DeviceSpec* d = s.find_device(*n);
      if (!d) {
        r.error(Reader::join(path, key), "unknown device '" + *n + "'");
      } else if (kind && d->kind != *kind) {
        r.error(Reader::join(path, key), "'" + *n + "' is not a " + std::string(to_string(*kind)));
      } else {
        st.args[std::string(key)] = *n;
      }
    };
    switch (*type) {
      case StimulusType::FireStart:
      case StimulusType::FireStop:
      case StimulusType::GatewayDown:
      case StimulusType::GatewayUp: break;
      case StimulusType::Motion: {
        if (auto z = r.string(e, path, "zone", true)) st.args["zone"] = *z;
        st.args["duration_s"] = r.number(e, path, "duration_s", false, positive).value_or(5.0);
        break;
      }
      case StimulusType::Rain:
        if (auto d = r.number(e, path, "delta", true)) st.args["delta"] = *d;
        break;
      case StimulusType::Swipe:
        if (auto c = r.string(e, path, "card", true)) st.args["card"] = *c;
        need_device("reader", DeviceKind::RfidReader);
        break;
      case StimulusType::Join: {
        auto n = r.string(e, path, "name", true);
        auto k = r.string(e, path, "kind", true);
        auto secret = r.string(e, path, "secret", true, false);
        auto addr = r.string(e, path, "address", true);
        if (k && !parse_device_kind(*k)) r.error(path + ".kind", "unknown device kind '" + *k + "'");
        if (addr) {
          for (const auto& d : s.devices)
            if (d.address == *addr) r.error(path + ".address", "address used by '" + d.name + "'");
          if (*addr == simnet::kGatewayEndpoint || *addr == simnet::kEnvironmentTarget)
            r.error(path + ".address", "'" + *addr + "' is reserved");
        }
        if (n && k && secret && addr)
          st.args = {{"name", *n}, {"kind", *k}, {"secret", *secret}, {"address", *addr}};
        break;
      }
      case StimulusType::Login: {
        auto u = r.string(e, path, "user", true);
        auto p = r.string(e, path, "password", true, false);
        if (u && p) st.args = {{"user", *u}, {"password", *p}};
        break;
      }
      case StimulusType::ClientCommand: {
        if (auto u = r.string(e, path, "user", true)) st.args["user"] = *u;
        need_device("device", std::nullopt);
        auto attr = r.string(e, path, "attribute", true);
        auto v = e.find("value");
        if (v == e.end()) {
          r.error(path + ".value", "required");
        } else if (attr && st.args.contains("device")) {
          const DeviceSpec* d = s.find_device(st.args["device"].get<std::string>());
          const AttributeSpec* spec = schema_of(d->kind).find(*attr);
          if (!spec) {
            r.error(path + ".attribute", "unknown attribute '" + *attr + "'");
          } else {
            try {
              check_value_against(*spec, attribute_value_from_json(*v));
              st.args["attribute"] = *attr;
              st.args["value"] = *v;
            } catch (const std::exception& ex) {
              r.error(path + ".value", ex.what());
            }
          }
        }
        break;
      }
    }
    if (r.diags.size() == before) s.timeline.push_back(std::move(st));
  }
  std::stable_sort(s.timeline.begin(), s.timeline.end(),
                   [](const Stimulus& a, const Stimulus& b) { return a.t < b.t; });
  bool down = false;
  for (const auto& st : s.timeline) {
    if (st.type == StimulusType::GatewayDown) {
      if (down) r.error("timeline", "gateway_down while the gateway is already down");
      down = true;
    } else if (st.type == StimulusType::GatewayUp) {
      if (!down) r.error("timeline", "gateway_up while the gateway is already up");
      down = false;
    }
  }
}

void check_timeline_bounds(Reader& r, const Scenario& s) {
  for (std::size_t i = 0; i < s.timeline.size(); ++i) {
    if (s.timeline[i].t > s.duration) {
      r.error("timeline", std::string(to_string(s.timeline[i].type)) + " at " +
                              std::to_string(s.timeline[i].t / kSecond) +
                              " s is after the end of the run");
    }
  }
}

}  // namespace

Scenario parse_scenario(const Json& doc, const std::filesystem::path& base_dir) {
  if (!doc.is_object()) throw ScenarioError({"(root): expected a JSON object"});
  Reader r;
  Scenario s;
  read_meta(r, doc, s);
  read_net(r, doc, s);
  read_gateway(r, doc, s);
  read_environment(r, doc, s);
  read_devices(r, doc, s);
  read_access(r, doc, s);
  read_rules(r, doc, s, base_dir);
  read_timeline(r, doc, s);
  if (s.duration > 0) check_timeline_bounds(r, s);
  if (!r.diags.empty()) throw ScenarioError(std::move(r.diags));
  s.net.seed = s.seed;
  return s;
}

Scenario load_scenario(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ScenarioError({path.string() + ": cannot read file"});
  std::stringstream buf;
  buf << in.rdbuf();
  Json doc;
  try {
    doc = Json::parse(buf.str());
  } catch (const Json::parse_error& e) {
    throw ScenarioError({path.string() + ": byte " + std::to_string(e.byte) + ": invalid JSON"});
  }
  return parse_scenario(doc, path.parent_path());
}

std::filesystem::path resolve_scenario(std::string_view arg) {
  std::filesystem::path direct(arg);
  std::error_code ec;
  if (std::filesystem::is_regular_file(direct, ec)) return direct;
  const char* env = std::getenv("HEARTH_SCENARIO_DIR");
  const std::filesystem::path dir = env && *env ? env : HEARTH_DEFAULT_SCENARIO_DIR;
  for (const auto& candidate : {dir / (std::string(arg) + ".json"), dir / std::string(arg)})
    if (std::filesystem::is_regular_file(candidate, ec)) return candidate;
  return direct;
}

void apply_overrides(Scenario& s, std::optional<std::uint64_t> seed,
                     std::optional<Duration> duration) {
  if (seed) {
    s.seed = *seed;
    s.net.seed = *seed;
  }
  if (duration) {
    Reader r;
    if (*duration <= 0) r.error("--duration", "must be > 0");
    s.duration = *duration;
    check_timeline_bounds(r, s);
    if (!r.diags.empty()) throw ScenarioError(std::move(r.diags));
  }
}

}  // namespace hearth::scenario
