// The Home Gateway: device registration behind a shared join secret,
// client sessions, the device directory, command routing, the rule engine
// loop, RFID decisions and the alert store.
//
// The gateway never touches the clock, transport or log directly; it talks
// to the engine through GatewayHost so the same logic runs headless and
// behind the HTTP front-end.
#pragma once

#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "hearth/access.hpp"
#include "hearth/domain.hpp"
#include "hearth/rng.hpp"
#include "hearth/rules.hpp"
#include "hearth/simnet.hpp"

namespace hearth::gateway {

class GatewayHost {
 public:
  virtual ~GatewayHost() = default;
  virtual Timestamp now() const = 0;
  /// Append a record stamped with now(); returns its seq.
  virtual std::uint64_t log(RecordKind kind, Json payload) = 0;
  /// Hand a message to the transport. The host logs the message record
  /// and schedules delivery.
  virtual simnet::Message send(simnet::MessageDraft draft) = 0;
  /// Call Gateway::handle_timer(payload) after `delay`.
  virtual void schedule_timer(Json payload, Duration delay) = 0;
};

// ---------------------------------------------------------------------------
// Credentials

/// Hex BLAKE2b-256 of a secret. Logged instead of the secret itself.
std::string secret_digest(std::string_view secret);

/// Password and join-secret verification. Stores only keyed hashes and
/// compares them in constant time.
class CredentialStore {
 public:
  void add_account(std::string_view username, std::string_view password);
  void set_join_secret(std::string_view secret);

  /// Same work and same answer shape for unknown users and bad passwords.
  bool verify_account(std::string_view username, std::string_view password) const;
  bool verify_join_secret(std::string_view secret) const;

 private:
  std::map<std::string, std::string, std::less<>> accounts_;  // username -> hash
  std::string join_hash_;
};

struct Account {
  std::string username;
  std::string password;
};

struct GatewayConfig {
  std::string join_secret;
  Duration session_ttl = 30 * kMinute;
  int lockout_threshold = 3;
  std::vector<Account> accounts;
  access::AccessPolicy access;
  std::vector<rules::RuleAst> rules;
  /// A rule command whose ack has not arrived after this long is reissued.
  Duration command_retry_after = kSecond;
  /// motion_detector.idle turns true this long after motion stops.
  Duration motion_idle_after = 60 * kSecond;
  /// Devices silent for longer than this are listed offline.
  Duration offline_after = 30 * kSecond;
  double water_high_pct = 90.0;
  std::uint64_t seed = 0;

  void validate() const;
};

// ---------------------------------------------------------------------------

enum class RegistrationStatus { Online, Offline };
std::string_view to_string(RegistrationStatus status);

struct Registration {
  DeviceDescriptor descriptor;
  Timestamp registered_at = 0;
  RegistrationStatus status = RegistrationStatus::Online;
};

struct DeviceView {
  Registration registration;
  DeviceState state;
};

Json to_json(const DeviceView& view);

class AuthError : public Error {
 public:
  enum class Reason { Invalid, Expired, Unavailable };
  AuthError(Reason reason, const std::string& message) : Error(message), reason_(reason) {}
  Reason reason() const noexcept { return reason_; }

 private:
  Reason reason_;
};

/// `code` is one of: "unknown device", "unknown attribute", "read-only",
/// "type", "unavailable".
class CommandError : public Error {
 public:
  CommandError(std::string code, const std::string& message)
      : Error(message), code_(std::move(code)) {}
  const std::string& code() const noexcept { return code_; }

 private:
  std::string code_;
};

struct SessionToken {
  std::string value;
  std::string username;
  Timestamp expires_at = 0;
};

struct Session {
  std::string username;
  Timestamp expires_at = 0;
};

struct CommandAck {
  std::uint64_t command_id = 0;
  std::uint64_t message_id = 0;
  bool delivered = false;
};

Json to_json(const CommandAck& ack);

struct SwipeResult {
  access::Decision decision = access::Decision::Deny;
  access::Portal portal = access::Portal::MainDoor;
  std::uint64_t audit_seq = 0;
  std::optional<CommandAck> command;
};

/// Gateway-maintained attributes of one device and when they last changed.
struct InternalState {
  AttributeMap attributes;
  Timestamp last_change = 0;
};

class Gateway {
 public:
  Gateway(GatewayConfig config, GatewayHost& host);

  bool up() const noexcept { return up_; }
  void go_down();
  void go_up();

  /// Entry point for every message addressed to the gateway.
  void handle_message(const simnet::Message& message);
  void handle_timer(const Json& payload);
  /// Periodic level-triggered rule pass.
  void tick();

  SessionToken authenticate_client(std::string_view username, std::string_view password);
  /// Username owning `token`; throws AuthError when unknown or expired.
  std::string validate_session(std::string_view token) const;
  std::vector<DeviceView> list_devices(std::string_view token) const;
  CommandAck dispatch_command(std::string_view token, const DeviceId& device,
                              std::string_view attribute, const AttributeValue& value);
  /// `reader` is a DeviceId or display name of a registered RfidReader;
  /// anything else throws ArgumentError.
  SwipeResult on_swipe(std::string_view reader, std::string_view card);
  std::uint64_t record_alert(Alert alert, std::optional<std::uint64_t> cause_seq);

  // Read access for snapshots and tests.
  std::vector<DeviceView> directory() const;
  std::optional<DeviceId> find_by_name(std::string_view display_name) const;
  const std::vector<Alert>& alerts() const noexcept { return alerts_; }
  const std::map<std::string, Session, std::less<>>& sessions() const noexcept {
    return sessions_;
  }
  std::map<DeviceId, InternalState> internal_states() const;
  const access::CloseTimers& close_timers() const noexcept { return timers_; }
  const GatewayConfig& config() const noexcept { return config_; }

 private:
  struct Entry {
    Registration registration;
    DeviceState state;
    bool reported = false;
    Timestamp last_seen = 0;
    Timestamp last_message_sent = -1;
    Timestamp internal_change = 0;
  };

  struct Pending {
    AttributeValue value;
    Timestamp issued_at = 0;
    std::uint64_t command_id = 0;
  };

  void handle_join(const simnet::Message& m);
  void handle_reading(const simnet::Message& m);
  void handle_ack(const simnet::Message& m);
  void ignore(const simnet::Message& m, std::string_view reason);

  /// Merge reported values into the view; returns the changed attributes
  /// with their previous values.
  std::vector<std::pair<std::string, AttributeValue>> merge(Entry& entry, const Json& values);
  void react_to_changes(Entry& entry,
                        const std::vector<std::pair<std::string, AttributeValue>>& changes,
                        std::optional<std::uint64_t> cause_seq);
  void set_internal(Entry& entry, AttributeMap values);

  void evaluate_rules(std::optional<std::uint64_t> trigger_seq);
  rules::WorldSnapshot rule_snapshot() const;
  CommandAck issue_command(Entry& entry, std::string_view attribute, const AttributeValue& value,
                           const std::string& origin, std::optional<std::uint64_t> trigger_seq);

  void check_idle(Entry& entry);
  void check_auto_close(access::Portal portal, std::uint64_t generation);
  void arm_close_timer(access::Portal portal);
  Entry* portal_entry(access::Portal portal);
  bool portal_open(const Entry& entry) const;

  Entry* find_entry(std::string_view id_or_name);
  Entry* find_entry_by_address(std::string_view address);

  GatewayConfig config_;
  GatewayHost& host_;
  CredentialStore credentials_;
  Rng session_rng_;
  bool up_ = true;

  std::map<DeviceId, Entry> entries_;
  std::uint32_t next_ordinal_ = 1;
  std::vector<Alert> alerts_;
  std::map<std::string, Session, std::less<>> sessions_;
  std::map<std::string, int, std::less<>> login_failures_;
  std::map<std::pair<DeviceId, std::string>, Pending> pending_;
  std::map<std::string, std::string, std::less<>> rule_errors_;
  access::CloseTimers timers_;
  std::uint64_t next_command_id_ = 1;
};

}  // namespace hearth::gateway
