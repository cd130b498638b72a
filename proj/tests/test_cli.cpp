#include <gtest/gtest.h>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <sys/wait.h>

#include "hearth/domain.hpp"

namespace fs = std::filesystem;
using hearth::Json;

namespace {

struct Result {
  int code = -1;
  std::string out;
};

/// Runs the hearth binary with `args`; stdout is captured, stderr dropped.
Result hearth_cli(const std::string& args) {
  const std::string cmd = std::string(HEARTH_CLI) + " " + args + " 2>/dev/null";
  Result r;
  FILE* pipe = ::popen(cmd.c_str(), "r");
  if (!pipe) return r;
  char buf[4096];
  while (const auto n = std::fread(buf, 1, sizeof buf, pipe)) r.out.append(buf, n);
  const int status = ::pclose(pipe);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

std::string scenario(const std::string& name) {
  return (fs::path(HEARTH_TEST_SCENARIO_DIR) / (name + ".json")).string();
}

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("hearth-cli-" + std::to_string(::getpid()) + "-" +
            ::testing::UnitTest::GetInstance()->current_test_info()->name());
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }
  fs::path dir_;
};

}  // namespace

TEST_F(Cli, RunWritesLogAndReport) {
  const auto log = dir_ / "fire.jsonl";
  const auto r = hearth_cli("run --scenario " + scenario("fire-demo") + " --log " + log.string());
  EXPECT_EQ(r.code, 0) << r.out;
  EXPECT_NE(r.out.find("overall                PASS"), std::string::npos) << r.out;
  ASSERT_TRUE(fs::exists(log));
  std::ifstream in(log.string() + ".report.json");
  const Json report = Json::parse(in);
  EXPECT_EQ(report["pass"], true);
  EXPECT_EQ(report["scenario"], "fire-demo");
  EXPECT_EQ(report["uptime"]["status"], "PASS");

  const auto j = hearth_cli("report --json --log " + log.string());
  EXPECT_EQ(j.code, 0);
  EXPECT_EQ(Json::parse(j.out), report);

  const auto copy = dir_ / "copy.jsonl";
  const auto rep = hearth_cli("replay --log " + log.string() + " --out " + copy.string());
  EXPECT_EQ(rep.code, 0);
  EXPECT_TRUE(Json::parse(rep.out).contains("devices"));
  std::ifstream a(log), b(copy);
  std::stringstream sa, sb;
  sa << a.rdbuf();
  sb << b.rdbuf();
  EXPECT_TRUE(sa.str() == sb.str());
}

TEST_F(Cli, AttacksDemoDetectsEveryAttack) {
  const auto log = dir_ / "attacks.jsonl";
  const auto r = hearth_cli("run --scenario attacks-demo --log " + log.string());
  EXPECT_EQ(r.code, 0) << r.out;
  const auto j = hearth_cli("report --json --log " + log.string());
  const Json report = Json::parse(j.out);
  EXPECT_GE(report["attacks"]["security_alerts"].get<int>(), 3);
  EXPECT_EQ(report["attacks"]["injected"], report["attacks"]["detected"]);
  EXPECT_EQ(report["attacks"]["detection_rate"], 1.0);
}

TEST_F(Cli, SeedAndDurationOverrides) {
  const auto a = dir_ / "a.jsonl", b = dir_ / "b.jsonl";
  EXPECT_EQ(hearth_cli("run --scenario " + scenario("fire-demo") + " --seed 5 --duration 60 --log " + a.string()).code, 0);
  EXPECT_EQ(hearth_cli("run --scenario " + scenario("fire-demo") + " --seed 5 --duration 60 --log " + b.string()).code, 0);
  std::ifstream fa(a), fb(b);
  std::string first, other;
  std::getline(fa, first);
  std::getline(fb, other);
  EXPECT_EQ(first, other);
  const Json start = Json::parse(first);
  EXPECT_EQ(start["payload"]["seed"], 5);
  std::stringstream sa, sb;
  sa << fa.rdbuf();
  sb << fb.rdbuf();
  EXPECT_TRUE(sa.str() == sb.str());
}

TEST_F(Cli, FailingTargetExitsOne) {
  // Gateway down for 5 % of the run: uptime below 0.99.
  const auto path = dir_ / "down.json";
  std::ofstream(path) << R"({
    "meta": {"name": "down", "seed": 1, "duration_s": 100},
    "gateway": {"join_secret": "k"},
    "devices": [{"name": "light", "kind": "Light"}],
    "timeline": [{"t_s": 10, "type": "gateway_down"}, {"t_s": 15, "type": "gateway_up"}]
  })";
  const auto log = dir_ / "down.jsonl";
  const auto r = hearth_cli("run --scenario " + path.string() + " --log " + log.string());
  EXPECT_EQ(r.code, 1) << r.out;
  EXPECT_EQ(hearth_cli("report --log " + log.string()).code, 1);
}

TEST_F(Cli, BadScenarioOrArgumentsExitTwo) {
  const auto path = dir_ / "bad.json";
  std::ofstream(path) << R"({"meta": {"name": "bad", "duration_s": -1}, "devices": []})";
  EXPECT_EQ(hearth_cli("run --scenario " + path.string()).code, 2);
  EXPECT_EQ(hearth_cli("run --scenario no-such-scenario").code, 2);
  EXPECT_EQ(hearth_cli("run").code, 2);
  EXPECT_EQ(hearth_cli("launch --scenario x").code, 2);
  EXPECT_EQ(hearth_cli("").code, 2);
  EXPECT_EQ(hearth_cli("serve --scenario fire-demo --port 0 --pace -1").code, 2);
}

TEST_F(Cli, CorruptLogExitsThree) {
  const auto log = dir_ / "good.jsonl";
  ASSERT_EQ(hearth_cli("run --scenario " + scenario("fire-demo") + " --duration 90 --log " + log.string()).code, 0);
  std::ifstream in(log);
  std::vector<std::string> lines;
  for (std::string l; std::getline(in, l);) lines.push_back(l);
  ASSERT_GT(lines.size(), 3u);

  const auto garbage = dir_ / "garbage.jsonl";
  {
    std::ofstream out(garbage);
    out << lines[0] << "\n{not json\n";
  }
  EXPECT_EQ(hearth_cli("replay --log " + garbage.string()).code, 3);
  EXPECT_EQ(hearth_cli("report --log " + garbage.string()).code, 3);

  const auto gap = dir_ / "gap.jsonl";
  {
    std::ofstream out(gap);
    out << lines[0] << "\n" << lines[2] << "\n";
  }
  EXPECT_EQ(hearth_cli("report --log " + gap.string()).code, 3);
  EXPECT_EQ(hearth_cli("report --log " + (dir_ / "missing.jsonl").string()).code, 3);
}

TEST_F(Cli, EmptyLogIsNotMeasured) {
  const auto log = dir_ / "empty.jsonl";
  std::ofstream(log).close();
  const auto r = hearth_cli("report --json --log " + log.string());
  EXPECT_EQ(r.code, 0);
  const Json j = Json::parse(r.out);
  EXPECT_EQ(j["measured"], false);
  EXPECT_EQ(j["uptime"]["status"], "NOT MEASURED");
}
