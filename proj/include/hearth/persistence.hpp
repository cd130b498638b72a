// Append-only JSON Lines event log, log reading with corruption
// diagnostics, replay to a final home snapshot, and the readings store.
//
// Durability: every append is flushed to the OS immediately so concurrent
// readers always see a prefix of whole lines. fsync(2) runs every
// kSyncEvery records, on sync() and on close().
#pragma once

#include <cstdio>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "hearth/domain.hpp"
#include "hearth/simnet.hpp"

namespace hearth::persistence {

class IoError : public Error {
 public:
  using Error::Error;
};

class EventLog {
 public:
  static constexpr std::uint64_t kSyncEvery = 4096;

  /// Create or truncate `path`. Throws IoError.
  explicit EventLog(const std::filesystem::path& path);
  ~EventLog();
  EventLog(const EventLog&) = delete;
  EventLog& operator=(const EventLog&) = delete;

  /// Requires record.seq == next_seq(); throws IntegrityError otherwise and
  /// IoError when the write fails. Prior bytes are never touched.
  void append(const LogRecord& record);
  void sync();
  void close();

  std::uint64_t next_seq() const noexcept { return next_seq_; }
  const std::filesystem::path& path() const noexcept { return path_; }

 private:
  std::filesystem::path path_;
  std::FILE* file_ = nullptr;
  std::uint64_t next_seq_ = 0;
  std::uint64_t unsynced_ = 0;
};

/// A line that does not decode, or breaks the seq sequence.
class CorruptLogError : public Error {
 public:
  CorruptLogError(std::uint64_t seq, std::uint64_t byte_offset, const std::string& detail);
  /// The seq the bad line was expected to carry.
  std::uint64_t seq() const noexcept { return seq_; }
  /// Absolute offset in the file where decoding failed.
  std::uint64_t byte_offset() const noexcept { return offset_; }

 private:
  std::uint64_t seq_;
  std::uint64_t offset_;
};

/// Stream every record to `visit` in order. Throws IoError when the file
/// cannot be opened and CorruptLogError on the first bad line.
void scan_log(const std::filesystem::path& path, const std::function<void(const LogRecord&)>& visit);
std::vector<LogRecord> read_log(const std::filesystem::path& path);

// ---------------------------------------------------------------------------
// Replay

struct RegistrationRecord {
  DeviceDescriptor descriptor;
  Timestamp registered_at = 0;

  friend bool operator==(const RegistrationRecord&, const RegistrationRecord&) = default;
};

/// Final state of a run, reconstructible from the log alone.
struct HomeSnapshot {
  std::map<DeviceId, RegistrationRecord> registrations;
  std::map<DeviceId, DeviceState> devices;
  std::map<AlertCategory, std::uint64_t> alert_counts;
  simnet::RunMetrics metrics;
  Timestamp horizon = 0;

  friend bool operator==(const HomeSnapshot&, const HomeSnapshot&) = default;
};

Json to_json(const HomeSnapshot& snapshot);

/// Uptime over [0, horizon] from gateway_down / gateway_up transitions; an
/// outage still open at the horizon counts up to the horizon.
double uptime_from_transitions(const std::vector<std::pair<Timestamp, bool>>& up_changes,
                               Timestamp horizon);

/// Incremental replay so large logs need not be held in memory.
class Replayer {
 public:
  /// Throws IntegrityError when a record contradicts the ones before it.
  void add(const LogRecord& record);
  HomeSnapshot finish() const;

 private:
  HomeSnapshot snap_;
  std::vector<std::pair<Timestamp, bool>> up_changes_;
  std::optional<Timestamp> run_end_;
  Timestamp last_t_ = 0;
};

HomeSnapshot replay(const std::vector<LogRecord>& records);

// ---------------------------------------------------------------------------
// Readings

struct ReadingPoint {
  Timestamp t = 0;
  AttributeValue value;

  friend bool operator==(const ReadingPoint&, const ReadingPoint&) = default;
};

struct ReadingSeries {
  std::string device;
  std::string attribute;
  std::vector<ReadingPoint> points;
};

/// Index over the reading records of a log. Points sharing a timestamp
/// collapse to the last value logged at that instant.
class ReadingStore {
 public:
  void add(const LogRecord& record);
  static ReadingStore from_records(const std::vector<LogRecord>& records);

  /// Points with t0 <= t <= t1. Unknown device or attribute gives an empty
  /// series; t0 > t1 throws ArgumentError.
  ReadingSeries query(std::string_view device, std::string_view attribute, Timestamp t0,
                      Timestamp t1) const;

 private:
  std::map<std::pair<std::string, std::string>, std::vector<ReadingPoint>> series_;
};

ReadingSeries query_readings(const ReadingStore& store, std::string_view device,
                             std::string_view attribute, Timestamp t0, Timestamp t1);

}  // namespace hearth::persistence
