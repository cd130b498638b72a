// Discrete-event engine: virtual clock, FIFO-stable event queue, lossy
// message transport with sampled latency, and run metrics.
#pragma once

#include <cstdint>
#include <deque>
#include <functional>
#include <map>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "hearth/domain.hpp"
#include "hearth/rng.hpp"

namespace hearth::simnet {

using EventId = std::uint64_t;

inline constexpr std::string_view kGatewayEndpoint = "gateway";
inline constexpr std::string_view kEnvironmentTarget = "environment";

struct SimEvent {
  EventId id = 0;
  Timestamp fire_at = 0;
  std::string target;
  Json payload;
};

class Scheduler {
 public:
  struct Step {
    Timestamp now;
    std::vector<SimEvent> fired;
  };

  Timestamp now() const noexcept { return now_; }

  /// Queue `payload` for `target` at now + delay. Throws ArgumentError
  /// when delay is negative.
  EventId schedule(std::string target, Json payload, Duration delay);

  /// Jump the clock to the earliest fire_at and return every event due at
  /// exactly that instant, in id order. nullopt when idle.
  std::optional<Step> step();

  /// Move the clock forward to `t` without firing anything. Throws
  /// ArgumentError if t is in the past or an event is due before t.
  void advance_to(Timestamp t);

  std::optional<Timestamp> next_fire_time() const;
  bool idle() const noexcept { return heap_.empty(); }
  std::size_t pending() const noexcept { return heap_.size(); }

 private:
  struct Later {
    bool operator()(const SimEvent& a, const SimEvent& b) const noexcept {
      return a.fire_at != b.fire_at ? a.fire_at > b.fire_at : a.id > b.id;
    }
  };

  Timestamp now_ = 0;
  EventId next_id_ = 1;
  std::vector<SimEvent> heap_;
};

// ---------------------------------------------------------------------------
// Transport

struct NetConfig {
  Duration latency_base = 2 * kMillisecond;
  Duration latency_jitter = 6 * kMillisecond;
  double loss_probability = 0.0;
  std::uint64_t seed = 0;

  /// Throws ArgumentError when base <= 0, jitter < 0 or loss outside [0,1).
  void validate() const;
};

/// latency_base + floor(u * latency_jitter), u uniform in [0,1).
Duration sample_latency(const NetConfig& cfg, Rng& rng);

enum class MessageKind { Join, JoinAck, Reading, Command, Ack, Alert };
std::string_view to_string(MessageKind kind);
std::optional<MessageKind> parse_message_kind(std::string_view name);

struct MessageDraft {
  std::string src;
  std::string dst;
  MessageKind kind = MessageKind::Reading;
  Json payload = Json::object();
};

struct Message {
  std::uint64_t id = 0;
  std::string src;
  std::string dst;
  MessageKind kind = MessageKind::Reading;
  Json payload;
  Timestamp send_time = 0;
  /// Empty when the message was dropped.
  std::optional<Timestamp> deliver_time;

  bool dropped() const noexcept { return !deliver_time.has_value(); }
  Duration latency() const { return deliver_time.value() - send_time; }
};

Json to_json(const Message& message);
Message message_from_json(const Json& j);

/// Loss and latency sampling over one deterministic stream. Every send
/// draws exactly two uniforms (loss, then latency) so the latency sequence
/// does not depend on the configured loss probability.
class Transport {
 public:
  explicit Transport(NetConfig cfg);

  /// Throws ArgumentError when src == dst.
  Message send(MessageDraft draft, Timestamp now);

  const NetConfig& config() const noexcept { return cfg_; }
  std::uint64_t sent() const noexcept { return sent_; }
  std::uint64_t delivered() const noexcept { return delivered_; }
  std::uint64_t dropped() const noexcept { return dropped_; }

 private:
  NetConfig cfg_;
  Rng rng_;
  std::uint64_t next_message_id_ = 1;
  std::uint64_t sent_ = 0;
  std::uint64_t delivered_ = 0;
  std::uint64_t dropped_ = 0;
};

// ---------------------------------------------------------------------------
// Metrics

struct Interval {
  Timestamp begin = 0;
  Timestamp end = 0;
};

/// (horizon - total down time) / horizon. Throws ArgumentError when
/// intervals overlap, are inverted, or leave [0, horizon].
double uptime_fraction(std::span<const Interval> down_intervals, Duration horizon);

/// Nearest-rank percentile (1..100) of `samples`. nullopt when empty.
std::optional<Duration> nearest_rank(std::vector<Duration> samples, int percent);

struct MetricsTargets {
  double uptime_min = 0.99;
  Duration latency_p99_max = 10 * kMillisecond;
};

struct RunMetrics {
  double uptime_fraction = 1.0;
  std::vector<Duration> latency_samples;
  std::uint64_t dropped_count = 0;
  std::map<AlertCategory, std::uint64_t> alert_count_by_category;

  friend bool operator==(const RunMetrics&, const RunMetrics&) = default;
};

enum class TargetStatus { Pass, Fail, NotMeasured };
std::string_view to_string(TargetStatus status);

struct Report {
  double uptime_fraction = 1.0;
  TargetStatus uptime = TargetStatus::NotMeasured;
  std::optional<Duration> latency_p50;
  std::optional<Duration> latency_p95;
  std::optional<Duration> latency_p99;
  TargetStatus latency = TargetStatus::NotMeasured;
  std::uint64_t delivered_count = 0;
  std::uint64_t dropped_count = 0;
  std::map<AlertCategory, std::uint64_t> alert_count_by_category;
  MetricsTargets targets;

  /// True unless some target failed; "not measured" does not fail a run.
  bool all_pass() const noexcept {
    return uptime != TargetStatus::Fail && latency != TargetStatus::Fail;
  }
};

Report run_report(const RunMetrics& metrics, const MetricsTargets& targets = {});

Json to_json(const Report& report);
std::string to_text(const Report& report);

// ---------------------------------------------------------------------------

/// Ordered hand-off of external inputs (API calls, UI actions) into the
/// single-threaded engine. Producers post from any thread; the engine drains
/// at its own virtual-time boundaries.
class Mailbox {
 public:
  using Action = std::function<void()>;

  void post(Action action);
  /// Runs every queued action in arrival order; returns how many ran.
  std::size_t drain();

 private:
  std::mutex mu_;
  std::deque<Action> queue_;
};

}  // namespace hearth::simnet
