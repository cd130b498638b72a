#include "hearth/report.hpp"

#include <cstdio>
#include <sstream>

namespace hearth::report {

void Summarizer::add(const LogRecord& r) {
  replay_.add(r);
  const Json& p = r.payload;
  switch (r.kind) {
    case RecordKind::Lifecycle: {
      const std::string event = p.value("event", "");
      if (event == "run_start") {
        measured_ = true;
        scenario_ = p.value("scenario", "");
        if (p.contains("seed")) seed_ = p["seed"].get<std::uint64_t>();
        if (p.contains("config"))
          lockout_threshold_ = p["config"].value("lockout_threshold", lockout_threshold_);
      } else if (event == "join_rejected" && p.value("reason", "") == "bad_secret") {
        attacks_.insert(r.seq);
      } else if (event == "login_failed" &&
                 p.value("consecutive", 0) % lockout_threshold_ == 0) {
        attacks_.insert(r.seq);
      } else if (event == "audit" && p.value("decision", "") == "deny") {
        attacks_.insert(r.seq);
      } else if (event == "registered" && !first_registration_) {
        first_registration_ = r.t;
      }
      break;
    }
    case RecordKind::Alert:
      if (p.value("category", "") == "security") {
        ++security_alerts_;
        const Json& cause = p.value("cause_seq", Json(nullptr));
        if (cause.is_number_unsigned() && attacks_.contains(cause.get<std::uint64_t>()))
          detected_.insert(cause.get<std::uint64_t>());
      }
      break;
    default: break;
  }
}

LogSummary Summarizer::finish() const {
  LogSummary s;
  s.scenario = scenario_;
  s.seed = seed_;
  s.measured = measured_;
  const auto snap = replay_.finish();
  s.report = simnet::run_report(snap.metrics);
  if (!measured_ || snap.horizon <= 0) s.report.uptime = simnet::TargetStatus::NotMeasured;
  s.attacks = attacks_.size();
  s.attacks_detected = detected_.size();
  if (s.attacks > 0)
    s.detection_rate = static_cast<double>(s.attacks_detected) / static_cast<double>(s.attacks);
  s.time_to_first_registration = first_registration_;
  s.security_alerts = security_alerts_;
  return s;
}

LogSummary summarize(const std::vector<LogRecord>& records) {
  Summarizer s;
  for (const auto& r : records) s.add(r);
  return s.finish();
}

LogSummary summarize_file(const std::filesystem::path& path) {
  Summarizer s;
  persistence::scan_log(path, [&](const LogRecord& r) { s.add(r); });
  return s.finish();
}

Json to_json(const LogSummary& s) {
  Json j = simnet::to_json(s.report);
  j["scenario"] = s.scenario;
  j["seed"] = s.seed ? Json(*s.seed) : Json(nullptr);
  j["measured"] = s.measured;
  j["attacks"] = {{"injected", s.attacks},
                  {"detected", s.attacks_detected},
                  {"detection_rate", s.detection_rate ? Json(*s.detection_rate) : Json(nullptr)},
                  {"security_alerts", s.security_alerts}};
  j["time_to_first_registration_ms"] =
      s.time_to_first_registration
          ? Json(static_cast<double>(*s.time_to_first_registration) / kMillisecond)
          : Json(nullptr);
  if (!s.measured) j["uptime"]["value"] = nullptr;
  j["pass"] = s.pass();
  return j;
}

std::string to_text(const LogSummary& s) {
  std::ostringstream out;
  if (!s.scenario.empty()) out << "scenario               " << s.scenario << "\n";
  if (!s.measured) out << "(empty log: nothing measured)\n";
  out << simnet::to_text(s.report);
  char buf[128];
  if (s.detection_rate) {
    std::snprintf(buf, sizeof buf, "attack_detection       %llu/%llu (%.1f%%)\n",
                  static_cast<unsigned long long>(s.attacks_detected),
                  static_cast<unsigned long long>(s.attacks), *s.detection_rate * 100.0);
  } else {
    std::snprintf(buf, sizeof buf, "attack_detection       no attacks injected\n");
  }
  out << buf;
  if (s.time_to_first_registration) {
    std::snprintf(buf, sizeof buf, "first_registration     %.3f ms\n",
                  static_cast<double>(*s.time_to_first_registration) / kMillisecond);
  } else {
    std::snprintf(buf, sizeof buf, "first_registration     NOT MEASURED\n");
  }
  out << buf;
  out << "overall                " << (s.pass() ? "PASS" : "FAIL") << "\n";
  return out.str();
}

}  // namespace hearth::report
