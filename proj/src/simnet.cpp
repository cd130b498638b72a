#include "hearth/simnet.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <sstream>

namespace hearth::simnet {

EventId Scheduler::schedule(std::string target, Json payload, Duration delay) {
  if (delay < 0) throw ArgumentError("schedule: negative delay");
  const EventId id = next_id_++;
  heap_.push_back(SimEvent{id, now_ + delay, std::move(target), std::move(payload)});
  std::push_heap(heap_.begin(), heap_.end(), Later{});
  return id;
}

std::optional<Scheduler::Step> Scheduler::step() {
  if (heap_.empty()) return std::nullopt;
  Step out;
  out.now = heap_.front().fire_at;
  while (!heap_.empty() && heap_.front().fire_at == out.now) {
    std::pop_heap(heap_.begin(), heap_.end(), Later{});
    out.fired.push_back(std::move(heap_.back()));
    heap_.pop_back();
  }
  now_ = out.now;
  return out;
}

void Scheduler::advance_to(Timestamp t) {
  if (t < now_) throw ArgumentError("advance_to: time is in the past");
  if (!heap_.empty() && heap_.front().fire_at < t)
    throw ArgumentError("advance_to: would skip a pending event");
  now_ = t;
}

std::optional<Timestamp> Scheduler::next_fire_time() const {
  if (heap_.empty()) return std::nullopt;
  return heap_.front().fire_at;
}

// ---------------------------------------------------------------------------

void NetConfig::validate() const {
  if (latency_base <= 0) throw ArgumentError("latency_base must be > 0");
  if (latency_jitter < 0) throw ArgumentError("latency_jitter must be >= 0");
  if (!(loss_probability >= 0.0 && loss_probability < 1.0))
    throw ArgumentError("loss_probability must be in [0, 1)");
}

Duration sample_latency(const NetConfig& cfg, Rng& rng) {
  const double u = rng.uniform();
  const auto extra = static_cast<Duration>(std::floor(u * static_cast<double>(cfg.latency_jitter)));
  return cfg.latency_base + extra;
}

namespace {

constexpr std::array<std::pair<MessageKind, std::string_view>, 6> kMessageKinds{{
    {MessageKind::Join, "join"},
    {MessageKind::JoinAck, "join_ack"},
    {MessageKind::Reading, "reading"},
    {MessageKind::Command, "command"},
    {MessageKind::Ack, "ack"},
    {MessageKind::Alert, "alert"},
}};

}  // namespace

std::string_view to_string(MessageKind kind) {
  for (const auto& [k, name] : kMessageKinds)
    if (k == kind) return name;
  return "?";
}

std::optional<MessageKind> parse_message_kind(std::string_view name) {
  for (const auto& [k, n] : kMessageKinds)
    if (n == name) return k;
  return std::nullopt;
}

Json to_json(const Message& m) {
  Json j{{"id", m.id},
         {"src", m.src},
         {"dst", m.dst},
         {"kind", to_string(m.kind)},
         {"payload", m.payload},
         {"send_time", m.send_time}};
  if (m.deliver_time) j["deliver_time"] = *m.deliver_time;
  return j;
}

Message message_from_json(const Json& j) {
  Message m;
  m.id = j.at("id").get<std::uint64_t>();
  m.src = j.at("src").get<std::string>();
  m.dst = j.at("dst").get<std::string>();
  auto kind = parse_message_kind(j.at("kind").get<std::string>());
  if (!kind) throw ArgumentError("unknown message kind");
  m.kind = *kind;
  m.payload = j.at("payload");
  m.send_time = j.at("send_time").get<Timestamp>();
  if (j.contains("deliver_time")) m.deliver_time = j["deliver_time"].get<Timestamp>();
  return m;
}

Transport::Transport(NetConfig cfg) : cfg_(cfg), rng_(Rng::derive(cfg.seed, "transport")) {
  cfg_.validate();
}

Message Transport::send(MessageDraft draft, Timestamp now) {
  if (draft.src == draft.dst) throw ArgumentError("send: src and dst must differ");
  Message m;
  m.id = next_message_id_++;
  m.src = std::move(draft.src);
  m.dst = std::move(draft.dst);
  m.kind = draft.kind;
  m.payload = std::move(draft.payload);
  m.send_time = now;
  const double loss_draw = rng_.uniform();
  const Duration latency = sample_latency(cfg_, rng_);
  ++sent_;
  if (loss_draw < cfg_.loss_probability) {
    ++dropped_;
  } else {
    m.deliver_time = now + latency;
    ++delivered_;
  }
  return m;
}

// ---------------------------------------------------------------------------

double uptime_fraction(std::span<const Interval> down_intervals, Duration horizon) {
  if (horizon <= 0) throw ArgumentError("uptime_fraction: horizon must be > 0");
  std::vector<Interval> sorted(down_intervals.begin(), down_intervals.end());
  std::sort(sorted.begin(), sorted.end(),
            [](const Interval& a, const Interval& b) { return a.begin < b.begin; });
  Duration down = 0;
  Timestamp previous_end = 0;
  for (const auto& iv : sorted) {
    if (iv.end < iv.begin) throw ArgumentError("uptime_fraction: inverted interval");
    if (iv.begin < 0 || iv.end > horizon)
      throw ArgumentError("uptime_fraction: interval outside [0, horizon]");
    if (iv.begin < previous_end) throw ArgumentError("uptime_fraction: overlapping intervals");
    down += iv.end - iv.begin;
    previous_end = iv.end;
  }
  return static_cast<double>(horizon - down) / static_cast<double>(horizon);
}

std::optional<Duration> nearest_rank(std::vector<Duration> samples, int percent) {
  if (samples.empty()) return std::nullopt;
  if (percent < 1 || percent > 100) throw ArgumentError("percentile must be in 1..100");
  const std::size_t n = samples.size();
  std::size_t rank = (static_cast<std::size_t>(percent) * n + 99) / 100;
  rank = std::clamp<std::size_t>(rank, 1, n);
  std::nth_element(samples.begin(), samples.begin() + static_cast<std::ptrdiff_t>(rank - 1),
                   samples.end());
  return samples[rank - 1];
}

std::string_view to_string(TargetStatus status) {
  switch (status) {
    case TargetStatus::Pass: return "PASS";
    case TargetStatus::Fail: return "FAIL";
    case TargetStatus::NotMeasured: return "NOT MEASURED";
  }
  return "?";
}

Report run_report(const RunMetrics& metrics, const MetricsTargets& targets) {
  Report r;
  r.targets = targets;
  r.uptime_fraction = metrics.uptime_fraction;
  r.uptime = metrics.uptime_fraction >= targets.uptime_min ? TargetStatus::Pass : TargetStatus::Fail;
  r.latency_p50 = nearest_rank(metrics.latency_samples, 50);
  r.latency_p95 = nearest_rank(metrics.latency_samples, 95);
  r.latency_p99 = nearest_rank(metrics.latency_samples, 99);
  if (r.latency_p99) {
    r.latency = *r.latency_p99 < targets.latency_p99_max ? TargetStatus::Pass : TargetStatus::Fail;
  }
  r.delivered_count = metrics.latency_samples.size();
  r.dropped_count = metrics.dropped_count;
  r.alert_count_by_category = metrics.alert_count_by_category;
  return r;
}

namespace {

double to_ms(Duration d) { return static_cast<double>(d) / static_cast<double>(kMillisecond); }

Json optional_ms(const std::optional<Duration>& d) {
  return d ? Json(to_ms(*d)) : Json(nullptr);
}

std::string fmt_ms(const std::optional<Duration>& d) {
  if (!d) return "-";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3f ms", to_ms(*d));
  return buf;
}

}  // namespace

Json to_json(const Report& r) {
  Json alerts = Json::object();
  for (auto c : {AlertCategory::Security, AlertCategory::Fire, AlertCategory::Water,
                 AlertCategory::System}) {
    auto it = r.alert_count_by_category.find(c);
    alerts[std::string(to_string(c))] = it == r.alert_count_by_category.end() ? 0 : it->second;
  }
  return Json{
      {"uptime",
       {{"value", r.uptime_fraction},
        {"target_min", r.targets.uptime_min},
        {"status", to_string(r.uptime)}}},
      {"latency_ms",
       {{"p50", optional_ms(r.latency_p50)},
        {"p95", optional_ms(r.latency_p95)},
        {"p99", optional_ms(r.latency_p99)},
        {"target_p99_max", to_ms(r.targets.latency_p99_max)},
        {"status", to_string(r.latency)}}},
      {"messages", {{"delivered", r.delivered_count}, {"dropped", r.dropped_count}}},
      {"alerts", alerts},
      {"pass", r.all_pass()},
  };
}

std::string to_text(const Report& r) {
  std::ostringstream out;
  char buf[128];
  out << "metric                 value            target        status\n";
  std::snprintf(buf, sizeof buf, "uptime_fraction        %-16.6f >= %-10.4f %s\n",
                r.uptime_fraction, r.targets.uptime_min, std::string(to_string(r.uptime)).c_str());
  out << buf;
  std::snprintf(buf, sizeof buf, "latency_p99            %-16s < %-11s %s\n",
                fmt_ms(r.latency_p99).c_str(), fmt_ms(r.targets.latency_p99_max).c_str(),
                std::string(to_string(r.latency)).c_str());
  out << buf;
  std::snprintf(buf, sizeof buf, "latency_p50            %s\n", fmt_ms(r.latency_p50).c_str());
  out << buf;
  std::snprintf(buf, sizeof buf, "latency_p95            %s\n", fmt_ms(r.latency_p95).c_str());
  out << buf;
  out << "messages_delivered     " << r.delivered_count << "\n";
  out << "messages_dropped       " << r.dropped_count << "\n";
  for (const auto& [category, count] : r.alert_count_by_category) {
    std::snprintf(buf, sizeof buf, "alerts.%-15s %llu\n", std::string(to_string(category)).c_str(),
                  static_cast<unsigned long long>(count));
    out << buf;
  }
  return out.str();
}

// ---------------------------------------------------------------------------

void Mailbox::post(Action action) {
  std::lock_guard lock(mu_);
  queue_.push_back(std::move(action));
}

std::size_t Mailbox::drain() {
  std::deque<Action> batch;
  {
    std::lock_guard lock(mu_);
    batch.swap(queue_);
  }
  for (auto& action : batch) action();
  return batch.size();
}

}  // namespace hearth::simnet
