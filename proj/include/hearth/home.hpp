// The simulated home: one deterministic engine owning the clock, the
// transport, the physical environment, every device model and the gateway.
// All log records originate here.
#pragma once

#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "hearth/devices.hpp"
#include "hearth/gateway.hpp"
#include "hearth/persistence.hpp"
#include "hearth/scenario.hpp"
#include "hearth/simnet.hpp"

namespace hearth {

class Home final : private gateway::GatewayHost {
 public:
  using RecordObserver = std::function<void(const LogRecord&)>;

  explicit Home(scenario::Scenario scenario);
  ~Home() override;
  Home(const Home&) = delete;
  Home& operator=(const Home&) = delete;

  /// Optional durable sink; must outlive the run.
  void attach_log(persistence::EventLog* log) { log_ = log; }
  /// Called synchronously for every record, in seq order.
  void add_observer(RecordObserver observer) { observers_.push_back(std::move(observer)); }
  /// Keep every record in memory (off by default; day-long runs are large).
  void keep_records(bool keep) { keep_records_ = keep; }
  const std::vector<LogRecord>& records() const noexcept { return records_; }

  /// Log run_start and queue the roster joins, ticks and timeline.
  void start();
  /// Process every event due at or before t, then move the clock to t.
  void run_until(Timestamp t);
  /// Log run_end at the current instant. Further calls do nothing.
  void finish();
  /// start(), run_until(duration), finish().
  void run();
  bool started() const noexcept { return started_; }
  bool finished() const noexcept { return finished_; }

  Timestamp now() const override { return scheduler_.now(); }
  gateway::Gateway& gateway() noexcept { return *gateway_; }
  const gateway::Gateway& gateway() const noexcept { return *gateway_; }
  const devices::Environment& environment() const noexcept { return env_; }
  const scenario::Scenario& scenario() const noexcept { return scenario_; }
  std::uint64_t next_seq() const noexcept { return next_seq_; }

  /// Inject a stimulus at the current instant. Returns a type-specific
  /// result (for swipes: decision, portal and command outcome). Throws
  /// ArgumentError when the arguments do not fit the stimulus.
  Json apply_stimulus(scenario::StimulusType type, const Json& args);

  /// Final state built from the live objects, for comparison with replay.
  persistence::HomeSnapshot snapshot() const;
  simnet::RunMetrics metrics() const;

 private:
  struct DeviceModel {
    scenario::DeviceSpec spec;
    std::string secret;
    enum class Phase { Joining, Registered, Rejected } phase = Phase::Joining;
    std::optional<DeviceId> id;
    DeviceState state;
    Timestamp on_since = -1;  // fire sprinkler continuous-run start
  };

  // GatewayHost
  std::uint64_t log(RecordKind kind, Json payload) override;
  simnet::Message send(simnet::MessageDraft draft) override;
  void schedule_timer(Json payload, Duration delay) override;

  void dispatch(const simnet::SimEvent& event);
  void on_environment_event(const Json& payload);
  void on_device_event(DeviceModel& device, const Json& payload);
  void on_device_message(DeviceModel& device, const simnet::Message& m);

  void send_join(DeviceModel& device);
  void publish(DeviceModel& device, const AttributeMap& values);
  void apply_command(DeviceModel& device, const simnet::Message& m);

  void advance_environment(Timestamp t);
  void sample_sensors();
  devices::ActuatorSnapshot actuators(Timestamp t) const;
  DeviceModel& add_device(scenario::DeviceSpec spec, std::string secret);
  void note_gateway_state();

  scenario::Scenario scenario_;
  simnet::Scheduler scheduler_;
  simnet::Transport transport_;
  std::unique_ptr<gateway::Gateway> gateway_;
  devices::Environment env_;
  Timestamp env_time_ = 0;
  std::map<std::string, Timestamp, std::less<>> motion_until_;

  std::vector<std::unique_ptr<DeviceModel>> devices_;
  std::map<std::string, DeviceModel*, std::less<>> by_address_;
  std::map<std::uint64_t, simnet::Message> in_flight_;
  std::map<std::string, std::string, std::less<>> scripted_tokens_;

  persistence::EventLog* log_ = nullptr;
  std::vector<RecordObserver> observers_;
  bool keep_records_ = false;
  std::vector<LogRecord> records_;
  std::uint64_t next_seq_ = 0;

  std::vector<Duration> latency_samples_;
  std::uint64_t dropped_ = 0;
  std::vector<std::pair<Timestamp, bool>> up_changes_;
  bool gateway_was_up_ = true;
  bool started_ = false;
  bool finished_ = false;
};

}  // namespace hearth
