// Scenario files: one JSON document describing the home, network, rules and
// timed stimuli of a reproducible run. docs/SCENARIO.md lists every field.
#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "hearth/access.hpp"
#include "hearth/devices.hpp"
#include "hearth/domain.hpp"
#include "hearth/gateway.hpp"
#include "hearth/rules.hpp"
#include "hearth/simnet.hpp"

namespace hearth::scenario {

/// Every problem found in a scenario, one "field.path: message" each.
class ScenarioError : public Error {
 public:
  explicit ScenarioError(std::vector<std::string> diagnostics);
  const std::vector<std::string>& diagnostics() const noexcept { return diagnostics_; }

 private:
  std::vector<std::string> diagnostics_;
};

struct DeviceSpec {
  std::string name;
  DeviceKind kind = DeviceKind::Light;
  std::string address;
  std::string binding;
  /// Overrides the gateway's join secret (to script a misconfigured device).
  std::optional<std::string> secret;
};

enum class StimulusType {
  FireStart,
  FireStop,
  Motion,
  Rain,
  Swipe,
  GatewayDown,
  GatewayUp,
  Join,
  Login,
  ClientCommand,
};

std::string_view to_string(StimulusType type);
std::optional<StimulusType> parse_stimulus_type(std::string_view name);

struct Stimulus {
  Timestamp t = 0;
  StimulusType type = StimulusType::FireStart;
  /// Type-specific fields, already validated (see docs/SCENARIO.md).
  Json args = Json::object();
};

/// Piecewise-linear outdoor temperature; held constant outside the points.
struct OutdoorSchedule {
  std::vector<std::pair<Timestamp, double>> points;
  double at(Timestamp t) const;
};

struct Scenario {
  std::string name;
  std::uint64_t seed = 0;
  Duration duration = 0;
  simnet::NetConfig net;

  std::string join_secret;
  Duration session_ttl = 30 * kMinute;
  int lockout_threshold = 3;
  std::vector<gateway::Account> accounts;

  devices::Environment environment;
  OutdoorSchedule outdoor;
  devices::ThermalParams thermal;
  devices::HazardParams hazard;
  devices::ThermostatConfig thermostat;
  rules::LawnConfig lawn;

  std::vector<DeviceSpec> devices;
  access::AccessPolicy access;
  std::string rules_source;
  std::vector<rules::RuleAst> rules;
  std::vector<Stimulus> timeline;

  const DeviceSpec* find_device(std::string_view name) const;
  gateway::GatewayConfig gateway_config() const;
};

/// Validate a parsed document. Relative rule-file paths resolve against
/// `base_dir`. Throws ScenarioError listing every problem.
Scenario parse_scenario(const Json& doc, const std::filesystem::path& base_dir = {});
Scenario load_scenario(const std::filesystem::path& path);

/// `arg` as a path if it names a file, else a bundled scenario name looked
/// up in HEARTH_SCENARIO_DIR (or the compiled-in default).
std::filesystem::path resolve_scenario(std::string_view arg);

/// Apply CLI overrides and re-validate the timeline against the new
/// duration.
void apply_overrides(Scenario& s, std::optional<std::uint64_t> seed,
                     std::optional<Duration> duration);

}  // namespace hearth::scenario
