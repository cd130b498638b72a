#include "hearth/persistence.hpp"

#include <unistd.h>

#include <cerrno>
#include <cstring>
#include <fstream>

namespace hearth::persistence {

EventLog::EventLog(const std::filesystem::path& path) : path_(path) {
  if (path.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(path.parent_path(), ec);
  }
  file_ = std::fopen(path.c_str(), "wb");
  if (!file_) throw IoError("cannot open log " + path.string() + ": " + std::strerror(errno));
}

EventLog::~EventLog() {
  try {
    close();
  } catch (...) {
  }
}

void EventLog::append(const LogRecord& record) {
  if (!file_) throw IoError("log " + path_.string() + " is closed");
  if (record.seq != next_seq_) {
    throw IntegrityError("append: expected seq " + std::to_string(next_seq_) + ", got " +
                         std::to_string(record.seq));
  }
  std::string line = encode_record(record);
  line += '\n';
  if (std::fwrite(line.data(), 1, line.size(), file_) != line.size() || std::fflush(file_) != 0)
    throw IoError("write to " + path_.string() + " failed: " + std::strerror(errno));
  ++next_seq_;
  if (++unsynced_ >= kSyncEvery) sync();
}

void EventLog::sync() {
  if (!file_) return;
  if (std::fflush(file_) != 0 || ::fsync(fileno(file_)) != 0)
    throw IoError("fsync of " + path_.string() + " failed: " + std::strerror(errno));
  unsynced_ = 0;
}

void EventLog::close() {
  if (!file_) return;
  sync();
  std::fclose(file_);
  file_ = nullptr;
}

// ---------------------------------------------------------------------------

CorruptLogError::CorruptLogError(std::uint64_t seq, std::uint64_t byte_offset,
                                 const std::string& detail)
    : Error("corrupt log at seq " + std::to_string(seq) + ", byte offset " +
            std::to_string(byte_offset) + ": " + detail),
      seq_(seq),
      offset_(byte_offset) {}

void scan_log(const std::filesystem::path& path,
              const std::function<void(const LogRecord&)>& visit) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open log " + path.string());
  std::string line;
  std::uint64_t offset = 0;
  std::uint64_t expected = 0;
  while (std::getline(in, line)) {
    const bool had_newline = !in.eof();
    LogRecord r;
    try {
      r = decode_record(line);
    } catch (const DecodeError& e) {
      const std::uint64_t at = offset + (e.offset() == DecodeError::npos ? 0 : e.offset());
      throw CorruptLogError(expected, at,
                            std::string(e.what()) + (had_newline ? "" : " (truncated last line)"));
    }
    if (r.seq != expected) {
      throw CorruptLogError(expected, offset,
                            "seq " + std::to_string(r.seq) + " out of sequence");
    }
    visit(r);
    ++expected;
    offset += line.size() + (had_newline ? 1 : 0);
  }
}

std::vector<LogRecord> read_log(const std::filesystem::path& path) {
  std::vector<LogRecord> out;
  scan_log(path, [&](const LogRecord& r) { out.push_back(r); });
  return out;
}

// ---------------------------------------------------------------------------

double uptime_from_transitions(const std::vector<std::pair<Timestamp, bool>>& up_changes,
                               Timestamp horizon) {
  if (horizon <= 0) return 1.0;
  std::vector<simnet::Interval> down;
  Timestamp down_since = -1;
  for (const auto& [t, up] : up_changes) {
    if (!up && down_since < 0) down_since = t;
    if (up && down_since >= 0) {
      down.push_back({down_since, std::min(t, horizon)});
      down_since = -1;
    }
  }
  if (down_since >= 0 && down_since < horizon) down.push_back({down_since, horizon});
  return simnet::uptime_fraction(down, horizon);
}

namespace {

DeviceState& device_of(HomeSnapshot& snap, const Json& payload, std::uint64_t seq) {
  const DeviceId id(payload.at("device").get<std::string>());
  auto it = snap.devices.find(id);
  if (it == snap.devices.end())
    throw IntegrityError("record " + std::to_string(seq) + " names unregistered device " + id.str());
  return it->second;
}

void set_attribute(DeviceState& state, DeviceKind kind, const std::string& name,
                   const AttributeValue& value, Timestamp t) {
  const AttributeSpec* spec = schema_of(kind).find(name);
  if (!spec) throw IntegrityError("unknown attribute '" + name + "'");
  check_value_against(*spec, value);
  auto it = state.attributes.find(name);
  if (it->second == value) return;
  it->second = value;
  state.last_update = std::max(state.last_update, t);
}

}  // namespace

void Replayer::add(const LogRecord& r) {
  if (r.t < last_t_) throw IntegrityError("record " + std::to_string(r.seq) + " goes back in time");
  last_t_ = r.t;
  const Json& p = r.payload;
  try {
    switch (r.kind) {
      case RecordKind::Lifecycle: {
        const std::string event = p.value("event", "");
        if (event == "registered") {
          auto kind = parse_device_kind(p.at("kind").get<std::string>());
          if (!kind) throw IntegrityError("bad kind in record " + std::to_string(r.seq));
          DeviceId id(p.at("device").get<std::string>());
          const Timestamp at = p.at("registered_at").get<Timestamp>();
          snap_.registrations.insert_or_assign(
              id, RegistrationRecord{DeviceDescriptor{id, p.at("name").get<std::string>(), *kind,
                                                      p.at("address").get<std::string>(),
                                                      p.value("binding", "")},
                                     at});
          snap_.devices.insert_or_assign(id, initial_state(*kind, at));
        } else if (event == "gateway_down") {
          up_changes_.emplace_back(r.t, false);
        } else if (event == "gateway_up") {
          up_changes_.emplace_back(r.t, true);
        } else if (event == "run_end") {
          run_end_ = r.t;
        }
        break;
      }
      case RecordKind::Reading: {
        DeviceState& state = device_of(snap_, p, r.seq);
        const auto kind = snap_.registrations.at(DeviceId(p.at("device").get<std::string>()))
                              .descriptor.kind;
        for (const auto& [name, raw] : p.at("values").items())
          set_attribute(state, kind, name, attribute_value_from_json(raw), r.t);
        break;
      }
      case RecordKind::Command: {
        if (p.value("event", "") != "applied") break;
        DeviceState& state = device_of(snap_, p, r.seq);
        const auto kind = snap_.registrations.at(DeviceId(p.at("device").get<std::string>()))
                              .descriptor.kind;
        set_attribute(state, kind, p.at("attribute").get<std::string>(),
                      attribute_value_from_json(p.at("value")), r.t);
        break;
      }
      case RecordKind::Alert: {
        auto category = parse_alert_category(p.at("category").get<std::string>());
        if (!category) throw IntegrityError("bad alert category in record " + std::to_string(r.seq));
        ++snap_.alert_counts[*category];
        ++snap_.metrics.alert_count_by_category[*category];
        break;
      }
      case RecordKind::Message: {
        if (p.at("outcome").get<std::string>() == "delivered") {
          snap_.metrics.latency_samples.push_back(p.at("latency").get<Duration>());
        } else {
          ++snap_.metrics.dropped_count;
        }
        break;
      }
    }
  } catch (const Json::exception& e) {
    throw IntegrityError("record " + std::to_string(r.seq) + ": " + e.what());
  } catch (const TypeError& e) {
    throw IntegrityError("record " + std::to_string(r.seq) + ": " + e.what());
  }
}

HomeSnapshot Replayer::finish() const {
  HomeSnapshot out = snap_;
  out.horizon = run_end_.value_or(last_t_);
  out.metrics.uptime_fraction = uptime_from_transitions(up_changes_, out.horizon);
  return out;
}

HomeSnapshot replay(const std::vector<LogRecord>& records) {
  Replayer r;
  for (const auto& rec : records) r.add(rec);
  return r.finish();
}

Json to_json(const HomeSnapshot& s) {
  Json regs = Json::object();
  for (const auto& [id, reg] : s.registrations) {
    regs[id.str()] = {{"display_name", reg.descriptor.display_name},
                      {"kind", to_string(reg.descriptor.kind)},
                      {"logical_address", reg.descriptor.logical_address},
                      {"binding", reg.descriptor.binding},
                      {"registered_at", reg.registered_at}};
  }
  Json devices = Json::object();
  for (const auto& [id, state] : s.devices)
    devices[id.str()] = {{"attributes", to_json(state.attributes)},
                         {"last_update", state.last_update}};
  Json alerts = Json::object();
  for (const auto& [category, count] : s.alert_counts) alerts[std::string(to_string(category))] = count;
  const auto p99 = simnet::nearest_rank(s.metrics.latency_samples, 99);
  return Json{{"registrations", regs},
              {"devices", devices},
              {"alert_counts", alerts},
              {"horizon", s.horizon},
              {"metrics",
               {{"uptime_fraction", s.metrics.uptime_fraction},
                {"delivered", s.metrics.latency_samples.size()},
                {"dropped", s.metrics.dropped_count},
                {"latency_p99_ns", p99 ? Json(*p99) : Json(nullptr)}}}};
}

// ---------------------------------------------------------------------------

void ReadingStore::add(const LogRecord& r) {
  if (r.kind != RecordKind::Reading) return;
  const std::string device = r.payload.at("device").get<std::string>();
  for (const auto& [name, raw] : r.payload.at("values").items()) {
    auto& points = series_[{device, name}];
    AttributeValue v = attribute_value_from_json(raw);
    if (!points.empty() && points.back().t == r.t) {
      points.back().value = std::move(v);
    } else {
      points.push_back({r.t, std::move(v)});
    }
  }
}

ReadingStore ReadingStore::from_records(const std::vector<LogRecord>& records) {
  ReadingStore store;
  for (const auto& r : records) store.add(r);
  return store;
}

ReadingSeries ReadingStore::query(std::string_view device, std::string_view attribute,
                                  Timestamp t0, Timestamp t1) const {
  if (t0 > t1) throw ArgumentError("query_readings: t0 > t1");
  ReadingSeries out{std::string(device), std::string(attribute), {}};
  auto it = series_.find({out.device, out.attribute});
  if (it == series_.end()) return out;
  const auto& pts = it->second;
  auto lo = std::lower_bound(pts.begin(), pts.end(), t0,
                             [](const ReadingPoint& p, Timestamp t) { return p.t < t; });
  auto hi = std::upper_bound(pts.begin(), pts.end(), t1,
                             [](Timestamp t, const ReadingPoint& p) { return t < p.t; });
  out.points.assign(lo, hi);
  return out;
}

ReadingSeries query_readings(const ReadingStore& store, std::string_view device,
                             std::string_view attribute, Timestamp t0, Timestamp t1) {
  return store.query(device, attribute, t0, t1);
}

}  // namespace hearth::persistence
