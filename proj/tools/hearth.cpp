// hearth: run, serve, replay and report on simulated homes.
//
// Exit codes: 0 all targets pass, 1 a target failed, 2 bad scenario or
// arguments, 3 integrity error, corrupt log or I/O failure.

#include <CLI11.hpp>

#include <atomic>
#include <chrono>
#include <csignal>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <thread>

#include "hearth/api.hpp"
#include "hearth/home.hpp"
#include "hearth/persistence.hpp"
#include "hearth/report.hpp"
#include "hearth/scenario.hpp"

namespace {

using namespace hearth;

constexpr int kExitPass = 0;
constexpr int kExitTargetFailed = 1;
constexpr int kExitSchema = 2;
constexpr int kExitIntegrity = 3;

std::atomic<bool> g_interrupted{false};

void on_signal(int) { g_interrupted = true; }

std::filesystem::path default_log_path(const scenario::Scenario& s, std::string_view suffix = "") {
  const char* dir = std::getenv("HEARTH_LOG_DIR");
  const std::filesystem::path base = dir && *dir ? dir : "logs";
  return base / (s.name + "-" + std::to_string(s.seed) + std::string(suffix) + ".jsonl");
}

std::optional<scenario::Scenario> load(const std::string& arg, std::optional<std::uint64_t> seed,
                                       std::optional<double> duration_s) {
  try {
    auto s = scenario::load_scenario(scenario::resolve_scenario(arg));
    std::optional<Duration> d;
    if (duration_s) d = static_cast<Duration>(*duration_s * static_cast<double>(kSecond));
    scenario::apply_overrides(s, seed, d);
    return s;
  } catch (const scenario::ScenarioError& e) {
    std::cerr << "scenario invalid:\n";
    for (const auto& line : e.diagnostics()) std::cerr << "  " << line << "\n";
    return std::nullopt;
  }
}

int cmd_run(const std::string& scenario_arg, std::optional<std::uint64_t> seed,
            std::optional<double> duration_s, std::string log_arg) {
  auto s = load(scenario_arg, seed, duration_s);
  if (!s) return kExitSchema;
  const std::filesystem::path log_path = log_arg.empty() ? default_log_path(*s) : std::filesystem::path(log_arg);
  try {
    {
      persistence::EventLog log(log_path);
      Home home(std::move(*s));
      home.attach_log(&log);
      home.run();
      log.close();
    }
    const auto summary = report::summarize_file(log_path);
    const auto report_path = std::filesystem::path(log_path.string() + ".report.json");
    std::ofstream out(report_path);
    out << report::to_json(summary).dump(2) << "\n";
    if (!out) throw persistence::IoError("cannot write " + report_path.string());
    std::cout << report::to_text(summary);
    std::cout << "log                    " << log_path.string() << "\n";
    return summary.pass() ? kExitPass : kExitTargetFailed;
  } catch (const IntegrityError& e) {
    std::cerr << "integrity error: " << e.what() << "\n";
  } catch (const persistence::IoError& e) {
    std::cerr << "i/o error: " << e.what() << "\n";
  } catch (const persistence::CorruptLogError& e) {
    std::cerr << e.what() << "\n";
  }
  return kExitIntegrity;
}

int cmd_serve(const std::string& scenario_arg, const std::string& host, int port, double pace,
              std::string log_arg) {
  auto s = load(scenario_arg, std::nullopt, std::nullopt);
  if (!s) return kExitSchema;
  api::ServeOptions opts;
  opts.host = host;
  opts.port = port;
  opts.pace = pace;
  opts.log_path = log_arg.empty() ? default_log_path(*s, "-serve") : std::filesystem::path(log_arg);
  try {
    api::ApiServer server(std::move(*s), opts);
    server.start();
    std::cerr << "serving on http://" << host << ":" << server.port() << " (log "
              << opts.log_path.string() << ")\n";
    std::signal(SIGINT, on_signal);
    std::signal(SIGTERM, on_signal);
    while (!g_interrupted) std::this_thread::sleep_for(std::chrono::milliseconds(100));
    server.stop();
    std::cerr << "stopped; log flushed\n";
    return kExitPass;
  } catch (const persistence::IoError& e) {
    std::cerr << "serve: " << e.what() << "\n";
  } catch (const IntegrityError& e) {
    std::cerr << "integrity error: " << e.what() << "\n";
  }
  return kExitIntegrity;
}

int cmd_replay(const std::string& log_path, const std::string& out_path) {
  try {
    persistence::Replayer replayer;
    std::unique_ptr<persistence::EventLog> out;
    if (!out_path.empty()) out = std::make_unique<persistence::EventLog>(out_path);
    persistence::scan_log(log_path, [&](const LogRecord& r) {
      replayer.add(r);
      if (out) out->append(r);
    });
    if (out) out->close();
    std::cout << persistence::to_json(replayer.finish()).dump(2) << "\n";
    return kExitPass;
  } catch (const persistence::CorruptLogError& e) {
    std::cerr << e.what() << "\n";
  } catch (const IntegrityError& e) {
    std::cerr << "integrity error: " << e.what() << "\n";
  } catch (const persistence::IoError& e) {
    std::cerr << "i/o error: " << e.what() << "\n";
  }
  return kExitIntegrity;
}

int cmd_report(const std::string& log_path, bool json) {
  try {
    const auto summary = report::summarize_file(log_path);
    if (json) {
      std::cout << report::to_json(summary).dump(2) << "\n";
    } else {
      std::cout << report::to_text(summary);
    }
    return summary.pass() ? kExitPass : kExitTargetFailed;
  } catch (const persistence::CorruptLogError& e) {
    std::cerr << e.what() << "\n";
  } catch (const IntegrityError& e) {
    std::cerr << "integrity error: " << e.what() << "\n";
  } catch (const persistence::IoError& e) {
    std::cerr << "i/o error: " << e.what() << "\n";
  }
  return kExitIntegrity;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"hearth: deterministic smart-home simulator and gateway"};
  app.require_subcommand(1);

  std::string scenario_arg, log_arg, out_arg, host = "127.0.0.1";
  std::optional<std::uint64_t> seed;
  std::optional<double> duration_s;
  int port = 8080;
  double pace = 1.0;
  bool json = false;

  auto* run = app.add_subcommand("run", "Run a scenario headless to its duration");
  run->add_option("--scenario", scenario_arg, "Scenario file or bundled name")->required();
  run->add_option("--seed", seed, "Override the scenario seed");
  run->add_option("--duration", duration_s, "Override the duration (virtual seconds)");
  run->add_option("--log", log_arg, "Event log path (default $HEARTH_LOG_DIR/<name>-<seed>.jsonl)");

  auto* serve = app.add_subcommand("serve", "Run a scenario paced and serve the gateway API");
  serve->add_option("--scenario", scenario_arg, "Scenario file or bundled name")->required();
  serve->add_option("--port", port, "TCP port (0 picks a free one)")->required();
  serve->add_option("--host", host, "Listen address");
  serve->add_option("--pace", pace, "Virtual seconds per real second (0 = unpaced)")
      ->check(CLI::NonNegativeNumber);
  serve->add_option("--log", log_arg, "Event log path");

  auto* replay = app.add_subcommand("replay", "Rebuild the final state from a log");
  replay->add_option("--log", log_arg, "Event log")->required();
  replay->add_option("--out", out_arg, "Write the re-encoded log here");

  auto* rep = app.add_subcommand("report", "Summarize a log against the metric targets");
  rep->add_option("--log", log_arg, "Event log")->required();
  rep->add_flag("--json", json, "Print JSON instead of a table");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitSchema;
  }

  if (run->parsed()) return cmd_run(scenario_arg, seed, duration_s, log_arg);
  if (serve->parsed()) return cmd_serve(scenario_arg, host, port, pace, log_arg);
  if (replay->parsed()) return cmd_replay(log_arg, out_arg);
  return cmd_report(log_arg, json);
}
