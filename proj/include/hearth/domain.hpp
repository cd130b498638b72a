// Shared vocabulary for the simulated home: identities, typed attribute
// values, per-kind attribute schemas, alerts and log records.
#pragma once

#include <compare>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "json.hpp"

namespace hearth {

using Json = nlohmann::json;

/// Simulated time in integer nanoseconds since the start of a run.
using Timestamp = std::int64_t;
using Duration = std::int64_t;

inline constexpr Duration kNanosecond = 1;
inline constexpr Duration kMicrosecond = 1'000;
inline constexpr Duration kMillisecond = 1'000'000;
inline constexpr Duration kSecond = 1'000'000'000;
inline constexpr Duration kMinute = 60 * kSecond;
inline constexpr Duration kHour = 60 * kMinute;

// ---------------------------------------------------------------------------
// Errors

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Bad argument to an operation (negative delay, wrong device kind, ...).
class ArgumentError : public Error {
 public:
  using Error::Error;
};

/// Tag or unit mismatch, ordering on non-numeric values, schema violations.
class TypeError : public Error {
 public:
  using Error::Error;
};

class EncodeError : public Error {
 public:
  using Error::Error;
};

/// Raised by decode_record. `offset` is the byte offset within the line
/// where parsing failed, or npos when the failure is semantic.
class DecodeError : public Error {
 public:
  DecodeError(const std::string& what, std::size_t offset = npos)
      : Error(what), offset_(offset) {}
  static constexpr std::size_t npos = static_cast<std::size_t>(-1);
  std::size_t offset() const noexcept { return offset_; }

 private:
  std::size_t offset_;
};

/// Append-only or sequencing contract broken.
class IntegrityError : public Error {
 public:
  using Error::Error;
};

// ---------------------------------------------------------------------------
// Identities

class DeviceId {
 public:
  explicit DeviceId(std::string value);

  const std::string& str() const noexcept { return value_; }

  friend auto operator<=>(const DeviceId&, const DeviceId&) = default;
  friend bool operator==(const DeviceId&, const DeviceId&) = default;

 private:
  std::string value_;
};

/// "d-" + zero-padded registration ordinal, e.g. d-0001.
DeviceId device_id_for_ordinal(std::uint32_t ordinal);

enum class DeviceKind {
  Thermostat,
  AirConditioner,
  Furnace,
  FireMonitor,
  SmokeDetector,
  FireSprinkler,
  Siren,
  Window,
  MotionDetector,
  Webcam,
  Light,
  WaterLevelMonitor,
  LawnSprinkler,
  RfidReader,
  Door,
  GarageDoor,
};

std::span<const DeviceKind> all_device_kinds();
std::string_view to_string(DeviceKind kind);
std::optional<DeviceKind> parse_device_kind(std::string_view name);

// ---------------------------------------------------------------------------
// Attribute values

enum class Unit { None, Celsius, Percent, Ppm };

/// Symbol used in logs and the rule language: "", "C", "%", "ppm".
std::string_view unit_symbol(Unit unit);
std::optional<Unit> parse_unit(std::string_view symbol);

enum class ValueType { Boolean, Number, String };
std::string_view to_string(ValueType type);

class AttributeValue {
 public:
  AttributeValue() : value_(false) {}

  static AttributeValue boolean(bool b);
  /// Throws TypeError for non-finite numbers.
  static AttributeValue number(double value, Unit unit = Unit::None);
  static AttributeValue string(std::string s);

  ValueType type() const noexcept;
  Unit unit() const noexcept { return unit_; }

  bool as_bool() const;
  double as_number() const;
  const std::string& as_string() const;

  friend bool operator==(const AttributeValue&, const AttributeValue&) = default;

 private:
  std::variant<bool, double, std::string> value_;
  Unit unit_ = Unit::None;
};

/// Human-readable form, e.g. `true`, `28.5C`, `"1001"`.
std::string describe(const AttributeValue& value);

/// Canonical JSON: booleans and strings as-is, unitless numbers as plain
/// numbers, numbers with a unit as {"unit": "C", "value": 28.5}.
Json to_json(const AttributeValue& value);
AttributeValue attribute_value_from_json(const Json& j);

enum class CompareOp { Eq, Ne, Lt, Le, Gt, Ge };
std::string_view to_string(CompareOp op);

/// Total-order comparison for numbers of the same unit; only = and != for
/// booleans and strings. Throws TypeError on tag or unit mismatch.
bool compare_values(const AttributeValue& a, const AttributeValue& b,
                    CompareOp op);

// ---------------------------------------------------------------------------
// Kind schemas

enum class Access {
  ReadOnly,  // reported by the device
  Writable,  // actuator setting, accepts commands
  Internal,  // derived and maintained by the gateway
};

struct AttributeSpec {
  std::string name;
  ValueType type;
  Unit unit;
  Access access;
  AttributeValue initial;
};

struct KindSchema {
  DeviceKind kind;
  bool actuator;
  std::vector<AttributeSpec> attributes;

  const AttributeSpec* find(std::string_view name) const;
};

const KindSchema& schema_of(DeviceKind kind);

/// Throws TypeError unless `value` matches the declared type and unit.
void check_value_against(const AttributeSpec& spec, const AttributeValue& value);

// ---------------------------------------------------------------------------
// Devices

struct DeviceDescriptor {
  DeviceId id;
  std::string display_name;
  DeviceKind kind;
  std::string logical_address;
  /// Motion zone for motion detectors, portal for RFID readers; empty
  /// otherwise.
  std::string binding;

  friend bool operator==(const DeviceDescriptor&,
                         const DeviceDescriptor&) = default;
};

using AttributeMap = std::map<std::string, AttributeValue, std::less<>>;

struct DeviceState {
  AttributeMap attributes;
  Timestamp last_update = 0;

  friend bool operator==(const DeviceState&, const DeviceState&) = default;
};

/// State with every schema attribute at its initial value.
DeviceState initial_state(DeviceKind kind, Timestamp now = 0);

Json to_json(const AttributeMap& attributes);
AttributeMap attribute_map_from_json(const Json& j);

// ---------------------------------------------------------------------------
// Alerts and log records

enum class Severity { Info, Warning, Critical };
enum class AlertCategory { Security, Fire, Water, System };

std::string_view to_string(Severity severity);
std::string_view to_string(AlertCategory category);
std::optional<Severity> parse_severity(std::string_view name);
std::optional<AlertCategory> parse_alert_category(std::string_view name);

inline constexpr std::string_view kGatewaySource = "gateway";

struct Alert {
  Timestamp time = 0;
  Severity severity = Severity::Info;
  AlertCategory category = AlertCategory::System;
  std::string source{kGatewaySource};
  std::string message;

  friend bool operator==(const Alert&, const Alert&) = default;
};

enum class RecordKind { Reading, Command, Alert, Lifecycle, Message };
std::string_view to_string(RecordKind kind);
std::optional<RecordKind> parse_record_kind(std::string_view name);

struct LogRecord {
  std::uint64_t seq = 0;
  Timestamp t = 0;
  RecordKind kind = RecordKind::Lifecycle;
  Json payload = Json::object();

  friend bool operator==(const LogRecord&, const LogRecord&) = default;
};

/// One newline-free line with sorted keys. Throws EncodeError if the
/// payload holds a non-finite number or invalid UTF-8.
std::string encode_record(const LogRecord& record);

/// Inverse of encode_record; unknown top-level keys are ignored.
LogRecord decode_record(std::string_view line);

}  // namespace hearth
