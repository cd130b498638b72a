// Log-scanning property checkers. Each one reads records in seq order and
// reports every violation it finds; an empty list means the property holds.
// They depend only on the log vocabulary, never on gateway internals.
#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "hearth/domain.hpp"

namespace hearth::verify {

using Problems = std::vector<std::string>;

/// Device ids and kinds from `registered` records.
class Roster {
 public:
  void add(const LogRecord& r);
  std::optional<DeviceKind> kind_of(const std::string& id) const;
  std::vector<std::string> ids_of(DeviceKind kind) const;

 private:
  std::map<std::string, DeviceKind> kinds_;
};

/// Safety: every portal open transition is caused by an allow audit entry
/// for that portal or by a client command from a user holding a live
/// session. Liveness: a portal closes within auto_close_after of its last
/// authorization plus the network allowance (max latency, one retry period
/// per lost close command, and any gateway outage in between).
class AccessVerifier {
 public:
  explicit AccessVerifier(Duration retry_after = kSecond) : retry_after_(retry_after) {}
  void add(const LogRecord& r);
  Problems finish(Timestamp horizon);

 private:
  struct Portal {
    bool open = false;
    Timestamp authorized_at = -1;
    Timestamp opened_at = -1;
    int lost_closes = 0;
    bool flagged = false;
  };
  void check_deadline(const std::string& device, Portal& p, Timestamp t);

  Duration retry_after_;
  Duration auto_close_after_ = 30 * kSecond;
  Duration max_latency_ = 0;
  Roster roster_;
  std::map<std::uint64_t, Json> audits_;          // seq -> audit payload
  std::map<std::uint64_t, Json> issued_;          // cmd -> issued payload
  std::map<std::string, Timestamp> sessions_;     // user -> latest expiry
  std::map<std::string, Portal> portals_;         // device id -> state
  std::vector<std::pair<Timestamp, Timestamp>> outages_;
  std::optional<Timestamp> down_since_;
  Problems problems_;
};

struct ThermostatFindings {
  Problems problems;
  std::size_t ac_on_commands = 0;
  std::size_t furnace_on_commands = 0;
  std::size_t both_on_instants = 0;
};

/// Recomputes, from thermostat readings alone, which reading must switch
/// the AC or furnace on or off, and compares with the rule commands issued.
class ThermostatVerifier {
 public:
  ThermostatVerifier(double ac_on_above = 28.0, double furnace_on_below = 18.0,
                     double hysteresis = 1.0)
      : ac_above_(ac_on_above), furnace_below_(furnace_on_below), hysteresis_(hysteresis) {}
  void add(const LogRecord& r);
  ThermostatFindings finish();

 private:
  double ac_above_, furnace_below_, hysteresis_;
  Roster roster_;
  bool oracle_ac_ = false, oracle_furnace_ = false;
  std::vector<std::pair<bool, std::uint64_t>> expected_ac_, expected_furnace_;  // (on, seq)
  std::vector<std::pair<bool, std::optional<std::uint64_t>>> actual_ac_, actual_furnace_;
  bool ac_applied_ = false, furnace_applied_ = false;
  std::size_t both_on_ = 0;
};

/// Indoor temperature (thermostat readings) stays in [lo, hi] from `after`.
class ComfortVerifier {
 public:
  ComfortVerifier(Timestamp after, double lo, double hi) : after_(after), lo_(lo), hi_(hi) {}
  void add(const LogRecord& r);
  Problems finish() const;
  double min_seen() const noexcept { return min_; }
  double max_seen() const noexcept { return max_; }
  std::size_t samples() const noexcept { return samples_; }

 private:
  Timestamp after_;
  double lo_, hi_;
  Roster roster_;
  double min_ = 1e9, max_ = -1e9;
  std::size_t samples_ = 0;
  Problems problems_;
};

struct FireFindings {
  Problems problems;
  std::optional<Timestamp> detected_at;
  std::optional<Timestamp> sprinkler_on_at;
  std::optional<Timestamp> extinguished_at;
};

/// First fire reading -> sprinkler on, siren on, window open issued within
/// `window`; fire_extinguished exactly `extinguish_after` after the
/// sprinkler started.
class FireVerifier {
 public:
  FireVerifier(Duration window = kSecond, Duration extinguish_after = 2 * kMinute)
      : window_(window), extinguish_after_(extinguish_after) {}
  void add(const LogRecord& r);
  FireFindings finish() const;

 private:
  Duration window_, extinguish_after_;
  Roster roster_;
  std::optional<std::uint64_t> fire_seq_;
  std::optional<Timestamp> fire_t_;
  std::set<std::string> responded_;  // "sprinkler", "siren", "window"
  std::optional<Timestamp> sprinkler_on_;
  std::optional<Timestamp> extinguished_;
};

/// Every registration follows a delivered join from the same address that
/// carried the configured secret (compared by digest).
class RegistrationVerifier {
 public:
  void add(const LogRecord& r);
  Problems finish() const { return problems_; }
  std::size_t registrations() const noexcept { return registrations_; }

 private:
  std::string expected_digest_;
  std::map<std::string, bool> good_join_from_;  // address -> seen
  std::size_t registrations_ = 0;
  Problems problems_;
};

struct AttackTally {
  std::size_t bad_join_alerts = 0;
  std::size_t lockout_alerts = 0;
  std::size_t swipe_alerts = 0;
  std::size_t other_security_alerts = 0;
  std::size_t bad_joins = 0;
  std::size_t login_failures = 0;
  std::size_t denied_swipes = 0;
};

/// Security alerts grouped by the kind of record named in cause_seq.
class AttackVerifier {
 public:
  void add(const LogRecord& r);
  AttackTally finish() const { return tally_; }

 private:
  std::map<std::uint64_t, std::string> causes_;  // seq -> kind of attack
  AttackTally tally_;
};

}  // namespace hearth::verify
