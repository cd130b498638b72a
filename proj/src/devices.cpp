#include "hearth/devices.hpp"

#include <algorithm>
#include <cmath>

namespace hearth::devices {

void Environment::validate() const {
  if (!std::isfinite(indoor_temp) || !std::isfinite(outdoor_temp))
    throw ArgumentError("environment temperatures must be finite");
  if (!(smoke_ppm >= 0.0)) throw ArgumentError("smoke_ppm must be >= 0");
  if (!(water_level_pct >= 0.0 && water_level_pct <= 100.0))
    throw ArgumentError("water_level_pct must be in [0, 100]");
}

void ThermalParams::validate() const {
  if (!(k_leak > 0.0)) throw ArgumentError("k_leak must be > 0");
  if (!(q_ac < 0.0 && q_furnace > 0.0)) throw ArgumentError("require q_ac < 0 < q_furnace");
  if (!(q_fire >= 0.0)) throw ArgumentError("q_fire must be >= 0");
}

void HazardParams::validate() const {
  if (!(smoke_rise_ppm_per_min >= 0.0) || !(smoke_decay_per_min >= 0.0 && smoke_decay_per_min <= 1.0))
    throw ArgumentError("invalid smoke rates");
  if (!(smoke_threshold_ppm > 0.0)) throw ArgumentError("smoke threshold must be > 0");
  if (!(evaporation_pct_per_min >= 0.0) || !(sprinkler_pct_per_min >= 0.0))
    throw ArgumentError("invalid water rates");
  if (extinguish_after <= 0) throw ArgumentError("extinguish_after must be > 0");
}

Environment step_environment(const Environment& env, const ActuatorSnapshot& act,
                             const ThermalParams& thermal, const HazardParams& hazard,
                             Duration dt) {
  if (dt <= 0) throw ArgumentError("step_environment: dt must be > 0");
  const double minutes = static_cast<double>(dt) / static_cast<double>(kMinute);
  Environment next = env;

  double dtemp = thermal.k_leak * (env.outdoor_temp - env.indoor_temp);
  if (act.ac_on) dtemp += thermal.q_ac;
  if (act.furnace_on) dtemp += thermal.q_furnace;
  if (env.fire_active) dtemp += thermal.q_fire;
  next.indoor_temp = env.indoor_temp + minutes * dtemp;

  if (env.fire_active) {
    next.smoke_ppm = env.smoke_ppm + minutes * hazard.smoke_rise_ppm_per_min;
  } else {
    next.smoke_ppm = env.smoke_ppm - minutes * hazard.smoke_decay_per_min * env.smoke_ppm;
  }
  next.smoke_ppm = std::max(0.0, next.smoke_ppm);

  double dwater = -hazard.evaporation_pct_per_min;
  if (act.lawn_sprinkler_on) dwater += hazard.sprinkler_pct_per_min;
  next.water_level_pct = std::clamp(env.water_level_pct + minutes * dwater, 0.0, 100.0);

  if (env.fire_active && act.fire_sprinkler_on &&
      act.fire_sprinkler_on_for >= hazard.extinguish_after) {
    next.fire_active = false;
  }
  return next;
}

AttributeMap read_sensor(const DeviceDescriptor& device, const Environment& env,
                         const HazardParams& hazard) {
  AttributeMap out;
  switch (device.kind) {
    case DeviceKind::Thermostat:
      out["temperature"] = AttributeValue::number(env.indoor_temp, Unit::Celsius);
      break;
    case DeviceKind::FireMonitor:
      out["fire"] = AttributeValue::boolean(env.fire_active);
      break;
    case DeviceKind::SmokeDetector:
      out["smoke"] = AttributeValue::boolean(env.smoke_ppm >= hazard.smoke_threshold_ppm);
      out["level"] = AttributeValue::number(env.smoke_ppm, Unit::Ppm);
      break;
    case DeviceKind::WaterLevelMonitor:
      out["level"] = AttributeValue::number(env.water_level_pct, Unit::Percent);
      break;
    case DeviceKind::MotionDetector:
      out["motion"] = AttributeValue::boolean(env.motion_zones.contains(device.binding));
      out["zone"] = AttributeValue::string(device.binding);
      break;
    case DeviceKind::RfidReader:
      out["portal"] = AttributeValue::string(device.binding);
      break;
    default:
      throw ArgumentError("read_sensor: " + std::string(to_string(device.kind)) +
                          " is not a sensor");
  }
  return out;
}

void ThermostatConfig::validate() const {
  if (!(hysteresis >= 0.0)) throw ArgumentError("hysteresis must be >= 0");
  if (!(ac_on_above - hysteresis > furnace_on_below + hysteresis))
    throw ArgumentError("thermostat bands overlap");
}

ClimateOutputs thermostat_decide(double temp, ClimateOutputs current, const ThermostatConfig& cfg) {
  if (temp > cfg.ac_on_above) return {true, false};
  if (temp < cfg.furnace_on_below) return {false, true};
  ClimateOutputs next;
  next.ac_on = current.ac_on && temp > cfg.ac_on_above - cfg.hysteresis;
  next.furnace_on = current.furnace_on && temp < cfg.furnace_on_below + cfg.hysteresis;
  if (next.ac_on && next.furnace_on) next.furnace_on = false;
  return next;
}

ApplyResult apply_command(const DeviceState& state, DeviceKind kind, std::string_view attribute,
                          const AttributeValue& value, Timestamp now) {
  const auto& schema = schema_of(kind);
  const AttributeSpec* spec = schema.find(attribute);
  if (!spec) {
    throw TypeError(std::string(to_string(kind)) + " has no attribute '" + std::string(attribute) +
                    "'");
  }
  if (spec->access != Access::Writable) {
    throw TypeError("attribute '" + std::string(attribute) + "' is read-only");
  }
  check_value_against(*spec, value);
  ApplyResult result{state, false};
  auto it = result.state.attributes.find(attribute);
  if (it != result.state.attributes.end() && it->second == value) return result;
  result.state.attributes.insert_or_assign(std::string(attribute), value);
  result.state.last_update = std::max(state.last_update, now);
  result.changed = true;
  return result;
}

}  // namespace hearth::devices
