#include <gtest/gtest.h>
#include <unistd.h>

#include <algorithm>
#include <filesystem>
#include <fstream>

#include "hearth/scenario.hpp"

using namespace hearth;
using namespace hearth::scenario;
namespace fs = std::filesystem;

namespace {

Json minimal() {
  return Json::parse(R"({
    "meta": {"name": "t", "seed": 5, "duration_s": 100},
    "gateway": {"join_secret": "k", "accounts": [{"username": "admin", "password": "pw"}]},
    "devices": [
      {"name": "thermostat", "kind": "Thermostat"},
      {"name": "ac", "kind": "AirConditioner", "address": "ac-addr"},
      {"name": "front_reader", "kind": "RfidReader", "binding": "main_door"},
      {"name": "front_door", "kind": "Door"}
    ],
    "access": {"auto_close_after_s": 10, "allow_list": [{"card": "1001", "portals": ["main_door"]}]},
    "rules": {"inline": "rule c: when thermostat.temperature > 28C then set ac.on = true\n"},
    "timeline": [
      {"t_s": 50, "type": "swipe", "reader": "front_reader", "card": "1001"},
      {"t_s": 10, "type": "gateway_down"},
      {"t_s": 20, "type": "gateway_up"}
    ]
  })");
}

std::vector<std::string> diagnostics_of(const Json& doc) {
  try {
    parse_scenario(doc);
  } catch (const ScenarioError& e) {
    return e.diagnostics();
  }
  return {};
}

bool mentions(const std::vector<std::string>& diags, std::string_view needle) {
  return std::any_of(diags.begin(), diags.end(),
                     [&](const std::string& d) { return d.find(needle) != std::string::npos; });
}

}  // namespace

TEST(Scenario, MinimalParses) {
  const auto s = parse_scenario(minimal());
  EXPECT_EQ(s.name, "t");
  EXPECT_EQ(s.seed, 5u);
  EXPECT_EQ(s.net.seed, 5u);
  EXPECT_EQ(s.duration, 100 * kSecond);
  ASSERT_EQ(s.devices.size(), 4u);
  EXPECT_EQ(s.devices[0].address, "thermostat");  // defaults to the name
  EXPECT_EQ(s.devices[1].address, "ac-addr");
  EXPECT_EQ(s.access.auto_close_after, 10 * kSecond);
  ASSERT_EQ(s.rules.size(), 1u);
  ASSERT_EQ(s.timeline.size(), 3u);
  EXPECT_EQ(s.timeline[0].type, StimulusType::GatewayDown);  // sorted by time
  EXPECT_EQ(s.timeline[2].args["card"], "1001");
  EXPECT_EQ(s.net.loss_probability, 0.0);
  const auto gc = s.gateway_config();
  EXPECT_EQ(gc.join_secret, "k");
  EXPECT_EQ(gc.rules.size(), 1u);
  EXPECT_NE(s.find_device("ac"), nullptr);
  EXPECT_EQ(s.find_device("nope"), nullptr);
}

TEST(Scenario, CollectsEveryDiagnosticWithFieldPath) {
  auto doc = minimal();
  doc["meta"].erase("duration_s");
  doc["net"] = {{"loss_probability", 1.5}};
  doc["devices"][1]["kind"] = "Toaster";
  doc["devices"][2]["binding"] = "attic";
  doc["devices"].push_back({{"name", "thermostat"}, {"kind", "Light"}});
  doc["access"]["allow_list"][0]["card"] = "12x";
  const auto d = diagnostics_of(doc);
  EXPECT_TRUE(mentions(d, "meta.duration_s")) << d.size();
  EXPECT_TRUE(mentions(d, "net.loss_probability"));
  EXPECT_TRUE(mentions(d, "devices[1].kind"));
  EXPECT_TRUE(mentions(d, "devices[2].binding"));
  EXPECT_TRUE(mentions(d, "devices[4].name"));
  EXPECT_TRUE(mentions(d, "access.allow_list[0].card"));
  EXPECT_GE(d.size(), 6u);
}

TEST(Scenario, RuleProblemsAreDiagnostics) {
  auto doc = minimal();
  doc["rules"]["inline"] = "rule c: when thermostat.temperature > 28% then set ghost.on = true\n";
  auto d = diagnostics_of(doc);
  EXPECT_TRUE(mentions(d, "unit mismatch"));
  EXPECT_TRUE(mentions(d, "unknown device 'ghost'"));
  doc["rules"]["inline"] = "rule c: when true then set front_door.open = true\n";
  EXPECT_TRUE(mentions(diagnostics_of(doc), "opens a portal"));
  doc["rules"]["inline"] = "rule c: when true then set front_door.open = false\n";
  EXPECT_TRUE(diagnostics_of(doc).empty());
  doc["rules"]["inline"] = "rule c: when then\n";
  EXPECT_TRUE(mentions(diagnostics_of(doc), "rules.inline"));
  doc["rules"] = {{"standard_pack", {"pool"}}};
  EXPECT_TRUE(mentions(diagnostics_of(doc), "rules.standard_pack[0]"));
}

TEST(Scenario, StandardPackNeedsItsDevices) {
  auto doc = minimal();
  doc["rules"] = {{"standard_pack", {"climate"}}};
  // The climate group references a furnace this home lacks.
  EXPECT_TRUE(mentions(diagnostics_of(doc), "furnace"));
  doc["devices"].push_back({{"name", "furnace"}, {"kind", "Furnace"}});
  EXPECT_TRUE(diagnostics_of(doc).empty());
  EXPECT_EQ(parse_scenario(doc).rules.size(), 4u);
}

TEST(Scenario, TimelineValidation) {
  auto doc = minimal();
  doc["timeline"] = Json::array({
      {{"t_s", 1}, {"type", "explode"}},
      {{"t_s", 2}, {"type", "swipe"}, {"reader", "front_door"}, {"card", "1"}},
      {{"t_s", 500}, {"type", "fire_start"}},
      {{"t_s", 3}, {"type", "gateway_up"}},
      {{"t_s", 4}, {"type", "client_command"}, {"user", "admin"}, {"device", "ac"}, {"attribute", "on"}, {"value", 3}},
      {{"t_s", 5}, {"type", "join"}, {"name", "x"}, {"kind", "Webcam"}, {"secret", "bad"}, {"address", "gateway"}},
  });
  const auto d = diagnostics_of(doc);
  EXPECT_TRUE(mentions(d, "timeline[0].type"));
  EXPECT_TRUE(mentions(d, "is not a RfidReader"));
  EXPECT_TRUE(mentions(d, "after the end of the run"));
  EXPECT_TRUE(mentions(d, "already up"));
  EXPECT_TRUE(mentions(d, "timeline[4].value"));
  EXPECT_TRUE(mentions(d, "reserved"));
}

TEST(Scenario, StimulusNamesRoundTrip) {
  for (auto t : {StimulusType::FireStart, StimulusType::FireStop, StimulusType::Motion, StimulusType::Rain,
                 StimulusType::Swipe, StimulusType::GatewayDown, StimulusType::GatewayUp, StimulusType::Join,
                 StimulusType::Login, StimulusType::ClientCommand})
    EXPECT_EQ(parse_stimulus_type(to_string(t)), t);
  EXPECT_FALSE(parse_stimulus_type("earthquake"));
}

TEST(Scenario, OutdoorScheduleInterpolates) {
  OutdoorSchedule s{{{0, 10.0}, {100, 30.0}}};
  EXPECT_DOUBLE_EQ(s.at(-5), 10.0);
  EXPECT_DOUBLE_EQ(s.at(25), 15.0);
  EXPECT_DOUBLE_EQ(s.at(100), 30.0);
  EXPECT_DOUBLE_EQ(s.at(1000), 30.0);
  auto doc = minimal();
  doc["environment"] = {{"outdoor_schedule", {{0, 10}, {50, 20}}}};
  EXPECT_DOUBLE_EQ(parse_scenario(doc).outdoor.at(25 * kSecond), 15.0);
  doc["environment"] = {{"outdoor_schedule", {{50, 10}, {0, 20}}}};
  EXPECT_FALSE(diagnostics_of(doc).empty());
}

TEST(Scenario, OverridesRevalidate) {
  auto s = parse_scenario(minimal());
  apply_overrides(s, 99, std::nullopt);
  EXPECT_EQ(s.seed, 99u);
  EXPECT_EQ(s.net.seed, 99u);
  EXPECT_THROW(apply_overrides(s, std::nullopt, 30 * kSecond), ScenarioError);
  EXPECT_THROW(apply_overrides(s, std::nullopt, 0), ScenarioError);
  apply_overrides(s, std::nullopt, 60 * kSecond);
  EXPECT_EQ(s.duration, 60 * kSecond);
}

TEST(Scenario, FilesAndResolution) {
  const fs::path dir = fs::temp_directory_path() / ("hearth-scn-" + std::to_string(::getpid()));
  fs::create_directories(dir);
  std::ofstream(dir / "extra.rules") << "rule extra: when true then set ac.on = false\n";
  auto doc = minimal();
  doc["rules"]["files"] = {"extra.rules", "missing.rules"};
  std::ofstream(dir / "s.json") << doc.dump();
  try {
    load_scenario(dir / "s.json");
    ADD_FAILURE();
  } catch (const ScenarioError& e) {
    EXPECT_TRUE(mentions(e.diagnostics(), "rules.files[1]"));
    EXPECT_FALSE(mentions(e.diagnostics(), "rules.files[0]"));
  }
  doc["rules"]["files"] = {"extra.rules"};
  std::ofstream(dir / "s.json", std::ios::trunc) << doc.dump();
  EXPECT_EQ(load_scenario(dir / "s.json").rules.size(), 2u);
  std::ofstream(dir / "bad.json") << "{ nope";
  EXPECT_THROW(load_scenario(dir / "bad.json"), ScenarioError);
  EXPECT_THROW(load_scenario(dir / "absent.json"), ScenarioError);
  EXPECT_EQ(resolve_scenario((dir / "s.json").string()), dir / "s.json");
  fs::remove_all(dir);
}

TEST(Scenario, BundledScenariosAllLoad) {
  for (const char* name : {"demo-home", "fire-demo", "attacks-demo", "uptime-demo", "thermostat-day"}) {
    const auto s = load_scenario(fs::path(HEARTH_TEST_SCENARIO_DIR) / (std::string(name) + ".json"));
    EXPECT_EQ(s.name, name);
    EXPECT_GT(s.duration, 0);
  }
}
