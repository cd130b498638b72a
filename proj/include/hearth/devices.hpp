// Device behaviour models and the lumped physical environment of the home.
#pragma once

#include <set>
#include <string>

#include "hearth/domain.hpp"

namespace hearth::devices {

struct Environment {
  double indoor_temp = 22.0;   // °C
  double outdoor_temp = 22.0;  // °C, scripted by the scenario
  bool fire_active = false;
  double smoke_ppm = 0.0;
  double water_level_pct = 50.0;
  std::set<std::string, std::less<>> motion_zones;

  /// Throws ArgumentError on non-finite temperatures, negative smoke or a
  /// water level outside [0, 100].
  void validate() const;

  friend bool operator==(const Environment&, const Environment&) = default;
};

/// Thermal coupling. Rates are per simulated minute.
struct ThermalParams {
  double k_leak = 0.05;      // 1/min, pull towards outdoor
  double q_ac = -0.8;        // °C/min while AC runs
  double q_furnace = 0.8;    // °C/min while furnace runs
  double q_fire = 2.0;       // °C/min while a fire burns

  void validate() const;
};

/// Smoke, water and extinguishing constants. Scenario-overridable.
struct HazardParams {
  double smoke_rise_ppm_per_min = 150.0;
  double smoke_decay_per_min = 0.10;
  double smoke_threshold_ppm = 200.0;
  double evaporation_pct_per_min = 0.5;
  double sprinkler_pct_per_min = 5.0;
  Duration extinguish_after = 2 * kMinute;

  void validate() const;
};

/// What the physics needs to know about actuators during one step.
struct ActuatorSnapshot {
  bool ac_on = false;
  bool furnace_on = false;
  bool fire_sprinkler_on = false;
  bool lawn_sprinkler_on = false;
  /// Continuous fire-sprinkler run time at the end of the step.
  Duration fire_sprinkler_on_for = 0;
};

/// One forward-Euler step of length `dt`. Throws ArgumentError if dt <= 0.
Environment step_environment(const Environment& env, const ActuatorSnapshot& actuators,
                             const ThermalParams& thermal, const HazardParams& hazard,
                             Duration dt);

/// Deterministic projection of the environment onto a sensor's read-only
/// attributes. Throws ArgumentError for actuator kinds.
AttributeMap read_sensor(const DeviceDescriptor& device, const Environment& env,
                         const HazardParams& hazard = {});

struct ThermostatConfig {
  double ac_on_above = 28.0;
  double furnace_on_below = 18.0;
  double hysteresis = 1.0;

  /// ac_on_above - hysteresis must exceed furnace_on_below + hysteresis.
  void validate() const;
};

struct ClimateOutputs {
  bool ac_on = false;
  bool furnace_on = false;

  friend bool operator==(const ClimateOutputs&, const ClimateOutputs&) = default;
};

/// Bang-bang climate control with a dead band: AC on above 28 °C and off at
/// or below 27 °C, furnace on below 18 °C and off at or above 19 °C (for the
/// default config). Never returns both on.
ClimateOutputs thermostat_decide(double temp, ClimateOutputs current,
                                 const ThermostatConfig& cfg);

struct ApplyResult {
  DeviceState state;
  bool changed = false;
};

/// Set a writable attribute. Setting the current value is a no-op that
/// leaves last_update untouched. Throws TypeError on schema violations.
ApplyResult apply_command(const DeviceState& state, DeviceKind kind, std::string_view attribute,
                          const AttributeValue& value, Timestamp now);

}  // namespace hearth::devices
