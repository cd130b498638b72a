#include "hearth/domain.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>

namespace hearth {

DeviceId::DeviceId(std::string value) : value_(std::move(value)) {
  if (value_.empty()) throw ArgumentError("device id must be non-empty");
}

DeviceId device_id_for_ordinal(std::uint32_t ordinal) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "d-%04u", ordinal);
  return DeviceId(buf);
}

namespace {

struct KindName {
  DeviceKind kind;
  std::string_view name;
};

constexpr std::array<KindName, 16> kKindNames{{
    {DeviceKind::Thermostat, "Thermostat"},
    {DeviceKind::AirConditioner, "AirConditioner"},
    {DeviceKind::Furnace, "Furnace"},
    {DeviceKind::FireMonitor, "FireMonitor"},
    {DeviceKind::SmokeDetector, "SmokeDetector"},
    {DeviceKind::FireSprinkler, "FireSprinkler"},
    {DeviceKind::Siren, "Siren"},
    {DeviceKind::Window, "Window"},
    {DeviceKind::MotionDetector, "MotionDetector"},
    {DeviceKind::Webcam, "Webcam"},
    {DeviceKind::Light, "Light"},
    {DeviceKind::WaterLevelMonitor, "WaterLevelMonitor"},
    {DeviceKind::LawnSprinkler, "LawnSprinkler"},
    {DeviceKind::RfidReader, "RfidReader"},
    {DeviceKind::Door, "Door"},
    {DeviceKind::GarageDoor, "GarageDoor"},
}};

constexpr std::array<DeviceKind, 16> kAllKinds = [] {
  std::array<DeviceKind, 16> out{};
  for (std::size_t i = 0; i < kKindNames.size(); ++i) out[i] = kKindNames[i].kind;
  return out;
}();

}  // namespace

std::span<const DeviceKind> all_device_kinds() { return kAllKinds; }

std::string_view to_string(DeviceKind kind) {
  for (const auto& k : kKindNames)
    if (k.kind == kind) return k.name;
  return "Unknown";
}

std::optional<DeviceKind> parse_device_kind(std::string_view name) {
  for (const auto& k : kKindNames)
    if (k.name == name) return k.kind;
  return std::nullopt;
}

std::string_view unit_symbol(Unit unit) {
  switch (unit) {
    case Unit::None: return "";
    case Unit::Celsius: return "C";
    case Unit::Percent: return "%";
    case Unit::Ppm: return "ppm";
  }
  return "";
}

std::optional<Unit> parse_unit(std::string_view symbol) {
  if (symbol.empty()) return Unit::None;
  if (symbol == "C") return Unit::Celsius;
  if (symbol == "%") return Unit::Percent;
  if (symbol == "ppm") return Unit::Ppm;
  return std::nullopt;
}

std::string_view to_string(ValueType type) {
  switch (type) {
    case ValueType::Boolean: return "boolean";
    case ValueType::Number: return "number";
    case ValueType::String: return "string";
  }
  return "?";
}

// ---------------------------------------------------------------------------

AttributeValue AttributeValue::boolean(bool b) {
  AttributeValue v;
  v.value_ = b;
  return v;
}

AttributeValue AttributeValue::number(double value, Unit unit) {
  if (!std::isfinite(value)) throw TypeError("attribute numbers must be finite");
  AttributeValue v;
  v.value_ = value;
  v.unit_ = unit;
  return v;
}

AttributeValue AttributeValue::string(std::string s) {
  AttributeValue v;
  v.value_ = std::move(s);
  return v;
}

ValueType AttributeValue::type() const noexcept {
  switch (value_.index()) {
    case 0: return ValueType::Boolean;
    case 1: return ValueType::Number;
    default: return ValueType::String;
  }
}

bool AttributeValue::as_bool() const {
  if (auto* b = std::get_if<bool>(&value_)) return *b;
  throw TypeError("value is not a boolean");
}

double AttributeValue::as_number() const {
  if (auto* d = std::get_if<double>(&value_)) return *d;
  throw TypeError("value is not a number");
}

const std::string& AttributeValue::as_string() const {
  if (auto* s = std::get_if<std::string>(&value_)) return *s;
  throw TypeError("value is not a string");
}

std::string describe(const AttributeValue& value) {
  switch (value.type()) {
    case ValueType::Boolean: return value.as_bool() ? "true" : "false";
    case ValueType::Number: {
      Json j = value.as_number();
      return j.dump() + std::string(unit_symbol(value.unit()));
    }
    case ValueType::String: return Json(value.as_string()).dump();
  }
  return {};
}

Json to_json(const AttributeValue& value) {
  switch (value.type()) {
    case ValueType::Boolean: return value.as_bool();
    case ValueType::String: return value.as_string();
    case ValueType::Number:
      if (value.unit() == Unit::None) return value.as_number();
      return Json{{"unit", unit_symbol(value.unit())}, {"value", value.as_number()}};
  }
  return nullptr;
}

AttributeValue attribute_value_from_json(const Json& j) {
  if (j.is_boolean()) return AttributeValue::boolean(j.get<bool>());
  if (j.is_string()) return AttributeValue::string(j.get<std::string>());
  if (j.is_number()) return AttributeValue::number(j.get<double>());
  if (j.is_object() && j.contains("value") && j["value"].is_number()) {
    Unit unit = Unit::None;
    if (auto it = j.find("unit"); it != j.end()) {
      if (!it->is_string()) throw TypeError("unit must be a string");
      auto parsed = parse_unit(it->get<std::string>());
      if (!parsed) throw TypeError("unknown unit '" + it->get<std::string>() + "'");
      unit = *parsed;
    }
    return AttributeValue::number(j["value"].get<double>(), unit);
  }
  throw TypeError("not an attribute value: " + j.dump());
}

std::string_view to_string(CompareOp op) {
  switch (op) {
    case CompareOp::Eq: return "=";
    case CompareOp::Ne: return "!=";
    case CompareOp::Lt: return "<";
    case CompareOp::Le: return "<=";
    case CompareOp::Gt: return ">";
    case CompareOp::Ge: return ">=";
  }
  return "?";
}

bool compare_values(const AttributeValue& a, const AttributeValue& b, CompareOp op) {
  if (a.type() != b.type()) {
    throw TypeError("cannot compare " + std::string(to_string(a.type())) + " with " +
                    std::string(to_string(b.type())));
  }
  if (a.type() == ValueType::Number) {
    if (a.unit() != b.unit()) {
      throw TypeError("unit mismatch: '" + std::string(unit_symbol(a.unit())) + "' vs '" +
                      std::string(unit_symbol(b.unit())) + "'");
    }
    const double x = a.as_number();
    const double y = b.as_number();
    switch (op) {
      case CompareOp::Eq: return x == y;
      case CompareOp::Ne: return x != y;
      case CompareOp::Lt: return x < y;
      case CompareOp::Le: return x <= y;
      case CompareOp::Gt: return x > y;
      case CompareOp::Ge: return x >= y;
    }
  }
  if (op != CompareOp::Eq && op != CompareOp::Ne) {
    throw TypeError("operator " + std::string(to_string(op)) + " is not defined for " +
                    std::string(to_string(a.type())) + " values");
  }
  const bool equal = a == b;
  return op == CompareOp::Eq ? equal : !equal;
}

// ---------------------------------------------------------------------------
// Schemas

const AttributeSpec* KindSchema::find(std::string_view name) const {
  for (const auto& a : attributes)
    if (a.name == name) return &a;
  return nullptr;
}

namespace {

AttributeSpec flag(std::string name, Access access, bool initial = false) {
  return {std::move(name), ValueType::Boolean, Unit::None, access,
          AttributeValue::boolean(initial)};
}

AttributeSpec quantity(std::string name, Unit unit, Access access, double initial = 0.0) {
  return {std::move(name), ValueType::Number, unit, access,
          AttributeValue::number(initial, unit)};
}

AttributeSpec text(std::string name, Access access) {
  return {std::move(name), ValueType::String, Unit::None, access, AttributeValue::string("")};
}

std::vector<KindSchema> build_schemas() {
  using enum Access;
  std::vector<KindSchema> s;
  s.push_back({DeviceKind::Thermostat, false, {quantity("temperature", Unit::Celsius, ReadOnly)}});
  s.push_back({DeviceKind::AirConditioner, true, {flag("on", Writable)}});
  s.push_back({DeviceKind::Furnace, true, {flag("on", Writable)}});
  s.push_back({DeviceKind::FireMonitor, false, {flag("fire", ReadOnly)}});
  s.push_back({DeviceKind::SmokeDetector, false,
               {flag("smoke", ReadOnly), quantity("level", Unit::Ppm, ReadOnly)}});
  s.push_back({DeviceKind::FireSprinkler, true, {flag("on", Writable)}});
  s.push_back({DeviceKind::Siren, true, {flag("on", Writable)}});
  s.push_back({DeviceKind::Window, true, {flag("open", Writable)}});
  s.push_back({DeviceKind::MotionDetector, false,
               {flag("motion", ReadOnly), text("zone", ReadOnly),
                quantity("last_motion_at", Unit::None, Internal, -1.0),
                flag("idle", Internal, true)}});
  s.push_back({DeviceKind::Webcam, true, {flag("recording", Writable)}});
  s.push_back({DeviceKind::Light, true, {flag("on", Writable)}});
  s.push_back({DeviceKind::WaterLevelMonitor, false,
               {quantity("level", Unit::Percent, ReadOnly)}});
  s.push_back({DeviceKind::LawnSprinkler, true, {flag("on", Writable)}});
  s.push_back({DeviceKind::RfidReader, false, {text("portal", ReadOnly), text("last_card", Internal)}});
  s.push_back({DeviceKind::Door, true, {flag("open", Writable)}});
  s.push_back({DeviceKind::GarageDoor, true, {flag("open", Writable)}});
  return s;
}

}  // namespace

const KindSchema& schema_of(DeviceKind kind) {
  static const std::vector<KindSchema> schemas = build_schemas();
  for (const auto& s : schemas)
    if (s.kind == kind) return s;
  throw ArgumentError("no schema for device kind");
}

void check_value_against(const AttributeSpec& spec, const AttributeValue& value) {
  if (value.type() != spec.type) {
    throw TypeError("attribute '" + spec.name + "' expects " + std::string(to_string(spec.type)) +
                    ", got " + std::string(to_string(value.type())));
  }
  if (spec.type == ValueType::Number && value.unit() != spec.unit) {
    throw TypeError("attribute '" + spec.name + "' expects unit '" +
                    std::string(unit_symbol(spec.unit)) + "', got '" +
                    std::string(unit_symbol(value.unit())) + "'");
  }
}

DeviceState initial_state(DeviceKind kind, Timestamp now) {
  DeviceState state;
  for (const auto& a : schema_of(kind).attributes) state.attributes.emplace(a.name, a.initial);
  state.last_update = now;
  return state;
}

Json to_json(const AttributeMap& attributes) {
  Json out = Json::object();
  for (const auto& [name, value] : attributes) out[name] = to_json(value);
  return out;
}

AttributeMap attribute_map_from_json(const Json& j) {
  if (!j.is_object()) throw TypeError("attribute map must be an object");
  AttributeMap out;
  for (const auto& [name, value] : j.items()) out.emplace(name, attribute_value_from_json(value));
  return out;
}

// ---------------------------------------------------------------------------

std::string_view to_string(Severity severity) {
  switch (severity) {
    case Severity::Info: return "info";
    case Severity::Warning: return "warning";
    case Severity::Critical: return "critical";
  }
  return "?";
}

std::string_view to_string(AlertCategory category) {
  switch (category) {
    case AlertCategory::Security: return "security";
    case AlertCategory::Fire: return "fire";
    case AlertCategory::Water: return "water";
    case AlertCategory::System: return "system";
  }
  return "?";
}

std::optional<Severity> parse_severity(std::string_view name) {
  for (auto s : {Severity::Info, Severity::Warning, Severity::Critical})
    if (to_string(s) == name) return s;
  return std::nullopt;
}

std::optional<AlertCategory> parse_alert_category(std::string_view name) {
  for (auto c : {AlertCategory::Security, AlertCategory::Fire, AlertCategory::Water,
                 AlertCategory::System})
    if (to_string(c) == name) return c;
  return std::nullopt;
}

std::string_view to_string(RecordKind kind) {
  switch (kind) {
    case RecordKind::Reading: return "reading";
    case RecordKind::Command: return "command";
    case RecordKind::Alert: return "alert";
    case RecordKind::Lifecycle: return "lifecycle";
    case RecordKind::Message: return "message";
  }
  return "?";
}

std::optional<RecordKind> parse_record_kind(std::string_view name) {
  for (auto k : {RecordKind::Reading, RecordKind::Command, RecordKind::Alert,
                 RecordKind::Lifecycle, RecordKind::Message})
    if (to_string(k) == name) return k;
  return std::nullopt;
}

// ---------------------------------------------------------------------------
// Record codec

namespace {

bool all_finite(const Json& j) {
  switch (j.type()) {
    case Json::value_t::number_float: return std::isfinite(j.get<double>());
    case Json::value_t::object:
    case Json::value_t::array:
      return std::all_of(j.begin(), j.end(), [](const Json& v) { return all_finite(v); });
    default: return true;
  }
}

}  // namespace

std::string encode_record(const LogRecord& record) {
  if (!all_finite(record.payload)) throw EncodeError("payload contains a non-finite number");
  Json j = Json::object();
  j["seq"] = record.seq;
  j["t"] = record.t;
  j["kind"] = to_string(record.kind);
  j["payload"] = record.payload;
  try {
    // std::map-backed objects give sorted keys; dump() escapes control
    // characters, so the result never contains a raw newline.
    return j.dump();
  } catch (const Json::type_error& e) {
    throw EncodeError(std::string("cannot encode record: ") + e.what());
  }
}

LogRecord decode_record(std::string_view line) {
  if (line.empty()) throw DecodeError("empty line", 0);
  Json j;
  try {
    j = Json::parse(line.begin(), line.end());
  } catch (const Json::parse_error& e) {
    // parse_error::byte is 1-based and points one past the offending char.
    const std::size_t offset = e.byte == 0 ? 0 : e.byte - 1;
    throw DecodeError("malformed record at byte " + std::to_string(offset), offset);
  }
  if (!j.is_object()) throw DecodeError("record must be a JSON object", 0);
  for (const char* key : {"seq", "t", "kind", "payload"}) {
    if (!j.contains(key)) throw DecodeError(std::string("missing required key '") + key + "'");
  }
  LogRecord r;
  const Json& seq = j["seq"];
  if (!seq.is_number_unsigned()) throw DecodeError("'seq' must be a non-negative integer");
  r.seq = seq.get<std::uint64_t>();
  const Json& t = j["t"];
  if (!t.is_number_integer() || t.get<std::int64_t>() < 0)
    throw DecodeError("'t' must be a non-negative integer");
  r.t = t.get<std::int64_t>();
  const Json& kind = j["kind"];
  if (!kind.is_string()) throw DecodeError("'kind' must be a string");
  auto parsed = parse_record_kind(kind.get<std::string>());
  if (!parsed) throw DecodeError("unknown record kind '" + kind.get<std::string>() + "'");
  r.kind = *parsed;
  r.payload = j["payload"];
  return r;
}

}  // namespace hearth
