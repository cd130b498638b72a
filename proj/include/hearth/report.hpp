// Run summaries computed from an event log alone: the metric report plus
// attack detection and time-to-first-registration.
#pragma once

#include <optional>
#include <set>
#include <string>

#include "hearth/domain.hpp"
#include "hearth/persistence.hpp"
#include "hearth/simnet.hpp"

namespace hearth::report {

struct LogSummary {
  std::string scenario;
  std::optional<std::uint64_t> seed;
  /// False for an empty log (or one without run_start): nothing measured.
  bool measured = false;
  simnet::Report report;
  std::uint64_t attacks = 0;
  std::uint64_t attacks_detected = 0;
  /// detected / attacks; empty when no attack was injected.
  std::optional<double> detection_rate;
  std::optional<Duration> time_to_first_registration;
  std::uint64_t security_alerts = 0;

  /// Targets all pass (or are not measured) and every attack was detected.
  bool pass() const noexcept {
    return report.all_pass() && attacks_detected == attacks;
  }
};

/// An attack is a rejected bad-secret join, every lockout_threshold-th
/// consecutive login failure, or a denied swipe. It counts as detected
/// when a security alert names it as its cause.
class Summarizer {
 public:
  void add(const LogRecord& record);
  LogSummary finish() const;

 private:
  persistence::Replayer replay_;
  bool measured_ = false;
  std::string scenario_;
  std::optional<std::uint64_t> seed_;
  int lockout_threshold_ = 3;
  std::set<std::uint64_t> attacks_;
  std::set<std::uint64_t> detected_;
  std::uint64_t security_alerts_ = 0;
  std::optional<Timestamp> first_registration_;
};

LogSummary summarize(const std::vector<LogRecord>& records);
LogSummary summarize_file(const std::filesystem::path& path);

Json to_json(const LogSummary& summary);
std::string to_text(const LogSummary& summary);

}  // namespace hearth::report
