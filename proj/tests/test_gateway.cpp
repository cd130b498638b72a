#include <gtest/gtest.h>

#include "hearth/gateway.hpp"

using namespace hearth;
using namespace hearth::gateway;
using simnet::Message;
using simnet::MessageKind;

namespace {

constexpr const char* kSecret = "s3cret";

struct FakeHost : GatewayHost {
  Timestamp t = 0;
  std::vector<LogRecord> records;
  std::vector<Message> sent;
  std::vector<std::pair<Json, Timestamp>> timers;  // payload, fire_at
  bool drop_next = false;

  Timestamp now() const override { return t; }
  std::uint64_t log(RecordKind kind, Json payload) override {
    records.push_back({records.size() + 1, t, kind, std::move(payload)});
    return records.size();
  }
  Message send(simnet::MessageDraft d) override {
    Message m;
    m.id = sent.size() + 1;
    m.src = d.src;
    m.dst = d.dst;
    m.kind = d.kind;
    m.payload = d.payload;
    m.send_time = t;
    if (!drop_next) m.deliver_time = t + kMillisecond;
    drop_next = false;
    sent.push_back(m);
    return m;
  }
  void schedule_timer(Json payload, Duration delay) override { timers.emplace_back(payload, t + delay); }

  std::vector<Json> events(std::string_view name) const {
    std::vector<Json> out;
    for (const auto& r : records)
      if (r.payload.value("event", "") == name) out.push_back(r.payload);
    return out;
  }
  std::vector<Json> issued() const {
    std::vector<Json> out;
    for (const auto& r : records)
      if (r.kind == RecordKind::Command && r.payload.value("event", "") == "issued") out.push_back(r.payload);
    return out;
  }
  std::vector<LogRecord> alerts() const {
    std::vector<LogRecord> out;
    for (const auto& r : records)
      if (r.kind == RecordKind::Alert) out.push_back(r);
    return out;
  }
};

std::uint64_t g_msg = 1000;

Message incoming(const std::string& src, MessageKind kind, Json payload, Timestamp t) {
  Message m;
  m.id = ++g_msg;
  m.src = src;
  m.dst = "gateway";
  m.kind = kind;
  m.payload = std::move(payload);
  m.send_time = t;
  m.deliver_time = t + kMillisecond;
  return m;
}

GatewayConfig config(std::string rules_text = "") {
  GatewayConfig c;
  c.join_secret = kSecret;
  c.accounts = {{"admin", "pw"}};
  c.access.allow_list["1001"] = {access::Portal::MainDoor, access::Portal::Garage};
  c.access.allow_list["2002"] = {access::Portal::Garage};
  if (!rules_text.empty()) c.rules = rules::parse_rules(rules_text);
  return c;
}

struct Fixture {
  FakeHost host;
  Gateway gw;
  explicit Fixture(GatewayConfig c = config()) : gw(std::move(c), host) {}

  std::string join(const std::string& name, DeviceKind kind, const std::string& address,
                   const std::string& binding = "", const std::string& secret = kSecret) {
    gw.handle_message(incoming(address, MessageKind::Join,
                               {{"name", name}, {"kind", to_string(kind)}, {"secret", secret}, {"binding", binding}},
                               host.t));
    const auto id = gw.find_by_name(name);
    return id ? id->str() : "";
  }
  void report(const std::string& address, const std::string& device, Json values, std::uint64_t seq) {
    gw.handle_message(incoming(address, MessageKind::Reading,
                               {{"device", device}, {"values", values}, {"reading_seq", seq}}, host.t));
  }
  void ack(const std::string& address, std::uint64_t cmd, Json values) {
    gw.handle_message(incoming(address, MessageKind::Ack, {{"cmd", cmd}, {"values", values}}, host.t));
  }
  void fire_due_timers() {
    auto due = host.timers;
    host.timers.clear();
    for (auto& [payload, at] : due) {
      if (at <= host.t) gw.handle_timer(payload);
      else host.timers.emplace_back(payload, at);
    }
  }
};

Json celsius(double v) { return to_json(AttributeValue::number(v, Unit::Celsius)); }

}  // namespace

TEST(Credentials, DigestIsBlake2b256) {
  EXPECT_EQ(secret_digest("abc"), "bddd813c634239723171ef3fee98579b94964e3bb1cb3e427262c8c068d52319");
}

TEST(Credentials, Verification) {
  CredentialStore s;
  EXPECT_FALSE(s.verify_join_secret("anything"));
  s.set_join_secret("k");
  s.add_account("u", "p");
  EXPECT_TRUE(s.verify_join_secret("k"));
  EXPECT_FALSE(s.verify_join_secret("K"));
  EXPECT_TRUE(s.verify_account("u", "p"));
  EXPECT_FALSE(s.verify_account("u", "q"));
  EXPECT_FALSE(s.verify_account("v", "p"));
  EXPECT_FALSE(s.verify_account("", "\x01"));
  EXPECT_THROW(s.set_join_secret(""), ArgumentError);
  EXPECT_THROW(s.add_account("", "p"), ArgumentError);
}

TEST(Config, Validation) {
  auto c = config();
  EXPECT_NO_THROW(c.validate());
  c.join_secret.clear();
  EXPECT_THROW(c.validate(), ArgumentError);
  c = config();
  c.lockout_threshold = 0;
  EXPECT_THROW(c.validate(), ArgumentError);
  c = config();
  c.command_retry_after = 0;
  EXPECT_THROW(c.validate(), ArgumentError);
}

TEST(Join, GoodSecretRegistersWithOrdinalId) {
  Fixture f;
  EXPECT_EQ(f.join("lamp", DeviceKind::Light, "lamp-1"), "d-0001");
  EXPECT_EQ(f.join("door", DeviceKind::Door, "door-1"), "d-0002");
  const auto reg = f.host.events("registered");
  ASSERT_EQ(reg.size(), 2u);
  EXPECT_EQ(reg[0]["name"], "lamp");
  EXPECT_EQ(reg[0]["address"], "lamp-1");
  ASSERT_EQ(f.host.sent.size(), 2u);
  EXPECT_EQ(f.host.sent[0].kind, MessageKind::JoinAck);
  EXPECT_EQ(f.host.sent[0].payload["accepted"], true);
  EXPECT_EQ(f.host.sent[0].dst, "lamp-1");
  EXPECT_EQ(f.gw.directory().size(), 2u);
}

TEST(Join, BadSecretRejectedWithSecurityAlert) {
  Fixture f;
  EXPECT_EQ(f.join("cam", DeviceKind::Webcam, "rogue", "", "wrong"), "");
  const auto rej = f.host.events("join_rejected");
  ASSERT_EQ(rej.size(), 1u);
  EXPECT_EQ(rej[0]["reason"], "bad_secret");
  const auto alerts = f.host.alerts();
  ASSERT_EQ(alerts.size(), 1u);
  EXPECT_EQ(alerts[0].payload["category"], "security");
  EXPECT_EQ(alerts[0].payload["severity"], "critical");
  EXPECT_EQ(alerts[0].payload["cause_seq"], 1);
  for (const auto& r : f.host.records) EXPECT_EQ(r.payload.dump().find("wrong"), std::string::npos);
  EXPECT_TRUE(f.gw.directory().empty());
}

TEST(Join, DuplicatesRetriesAndBadRequests) {
  Fixture f;
  const auto id = f.join("lamp", DeviceKind::Light, "lamp-1");
  EXPECT_EQ(f.join("lamp", DeviceKind::Light, "lamp-1"), id);  // lost join_ack retry
  EXPECT_EQ(f.host.events("registered").size(), 1u);
  EXPECT_EQ(f.host.sent.back().payload["device"], id);
  f.join("lamp", DeviceKind::Light, "other");
  EXPECT_EQ(f.host.events("join_rejected").back()["reason"], "duplicate_name");
  f.gw.handle_message(incoming("y", MessageKind::Join, {{"name", "y"}, {"kind", "Toaster"}, {"secret", kSecret}}, 0));
  EXPECT_EQ(f.host.events("join_rejected").back()["reason"], "bad_request");
  EXPECT_TRUE(f.host.alerts().empty());
}

TEST(Readings, UnregisteredStaleAndMalformedIgnored) {
  Fixture f;
  const auto id = f.join("t", DeviceKind::Thermostat, "t-1");
  f.report("nobody", id, {{"temperature", celsius(20)}}, 1);
  EXPECT_EQ(f.host.events("message_ignored").back()["reason"], "unregistered");
  f.host.t = 10;
  f.report("t-1", id, {{"temperature", celsius(21)}}, 2);
  auto late = incoming("t-1", MessageKind::Reading, {{"device", id}, {"values", {{"temperature", celsius(5)}}}}, 5);
  f.gw.handle_message(late);
  EXPECT_EQ(f.host.events("message_ignored").back()["reason"], "stale");
  f.report("t-1", id, {{"temperature", true}}, 3);
  EXPECT_EQ(f.host.events("message_ignored").back()["reason"], "malformed");
  EXPECT_EQ(f.gw.directory()[0].state.attributes.at("temperature"), AttributeValue::number(21, Unit::Celsius));
}

TEST(Rules, UnreportedSensorsLogOneRuleErrorAndNoCommand) {
  Fixture f(config("rule cooling: when t.temperature > 28C then set ac.on = true\n"));
  f.join("t", DeviceKind::Thermostat, "t-1");
  f.join("ac", DeviceKind::AirConditioner, "ac-1");
  f.gw.tick();
  f.gw.tick();
  EXPECT_EQ(f.host.events("rule_error").size(), 1u);
  EXPECT_TRUE(f.host.issued().empty());
}

TEST(Rules, CommandCarriesRuleOriginAndTrigger) {
  Fixture f(config("rule cooling: when t.temperature > 28C then set ac.on = true\n"));
  const auto t = f.join("t", DeviceKind::Thermostat, "t-1");
  const auto ac = f.join("ac", DeviceKind::AirConditioner, "ac-1");
  f.report("t-1", t, {{"temperature", celsius(29)}}, 77);
  auto issued = f.host.issued();
  ASSERT_EQ(issued.size(), 1u);
  EXPECT_EQ(issued[0]["device"], ac);
  EXPECT_EQ(issued[0]["origin"], "rule:cooling");
  EXPECT_EQ(issued[0]["trigger_seq"], 77);
  EXPECT_EQ(issued[0]["value"], true);
  EXPECT_EQ(f.host.sent.back().kind, MessageKind::Command);
  EXPECT_EQ(f.host.sent.back().dst, "ac-1");

  // Still in flight: no duplicate.
  f.host.t = kSecond / 2;
  f.gw.tick();
  EXPECT_EQ(f.host.issued().size(), 1u);
  // No ack after the retry period: reissued.
  f.host.t = kSecond;
  f.gw.tick();
  ASSERT_EQ(f.host.issued().size(), 2u);
  // Acked: the view now matches and nothing more is sent.
  f.ack("ac-1", f.host.issued().back()["cmd"], {{"on", true}});
  f.host.t = 5 * kSecond;
  f.gw.tick();
  EXPECT_EQ(f.host.issued().size(), 2u);
}

TEST(Rules, ShadowedCommandsLogged) {
  Fixture f(config("rule a: when true then set l.on = true\nrule b: when true then set l.on = false\n"));
  f.join("l", DeviceKind::Light, "l-1");
  f.ack("l-1", 0, {{"on", true}});
  f.gw.tick();
  const auto sh = f.host.events("shadowed");
  ASSERT_EQ(sh.size(), 1u);
  EXPECT_EQ(sh[0]["rule"], "a");
  EXPECT_EQ(sh[0]["by_rule"], "b");
  EXPECT_EQ(f.host.issued().back()["origin"], "rule:b");
}

TEST(Sessions, LoginValidateExpire) {
  Fixture f;
  const auto tok = f.gw.authenticate_client("admin", "pw");
  EXPECT_EQ(tok.username, "admin");
  EXPECT_EQ(tok.expires_at, 30 * kMinute);
  EXPECT_GE(tok.value.size(), 32u);
  EXPECT_EQ(f.gw.validate_session(tok.value), "admin");
  EXPECT_EQ(f.host.events("session_opened").at(0)["expires_at"], 30 * kMinute);
  f.host.t = 30 * kMinute;
  try {
    f.gw.validate_session(tok.value);
    FAIL();
  } catch (const AuthError& e) {
    EXPECT_EQ(e.reason(), AuthError::Reason::Expired);
  }
  try {
    f.gw.validate_session("nope");
    FAIL();
  } catch (const AuthError& e) {
    EXPECT_EQ(e.reason(), AuthError::Reason::Invalid);
  }
  EXPECT_NE(f.gw.authenticate_client("admin", "pw").value, tok.value);
}

TEST(Sessions, LockoutAlertEveryThirdConsecutiveFailure) {
  Fixture f;
  for (int i = 0; i < 3; ++i) EXPECT_THROW(f.gw.authenticate_client("admin", "bad"), AuthError);
  const auto fails = f.host.events("login_failed");
  ASSERT_EQ(fails.size(), 3u);
  EXPECT_EQ(fails[2]["consecutive"], 3);
  auto alerts = f.host.alerts();
  ASSERT_EQ(alerts.size(), 1u);
  EXPECT_EQ(alerts[0].payload["cause_seq"], alerts[0].seq - 1);
  // A success resets the count.
  f.gw.authenticate_client("admin", "pw");
  EXPECT_THROW(f.gw.authenticate_client("admin", "bad"), AuthError);
  EXPECT_EQ(f.host.events("login_failed").back()["consecutive"], 1);
  EXPECT_EQ(f.host.alerts().size(), 1u);
  for (const auto& r : f.host.records) EXPECT_EQ(r.payload.dump().find("\"bad\""), std::string::npos);
}

TEST(Commands, ClientDispatchAndErrorCodes) {
  Fixture f;
  const auto lamp = f.join("lamp", DeviceKind::Light, "lamp-1");
  const auto t = f.join("t", DeviceKind::Thermostat, "t-1");
  const auto tok = f.gw.authenticate_client("admin", "pw").value;
  const auto ack = f.gw.dispatch_command(tok, DeviceId(lamp), "on", AttributeValue::boolean(true));
  EXPECT_TRUE(ack.delivered);
  EXPECT_EQ(f.host.issued().back()["origin"], "client:admin");
  EXPECT_TRUE(f.host.issued().back()["trigger_seq"].is_null());

  auto code = [&](const std::string& dev, const std::string& attr, AttributeValue v) {
    try {
      f.gw.dispatch_command(tok, DeviceId(dev), attr, v);
    } catch (const CommandError& e) {
      return e.code();
    }
    return std::string("none");
  };
  EXPECT_EQ(code("d-0099", "on", AttributeValue::boolean(true)), "unknown device");
  EXPECT_EQ(code(lamp, "dim", AttributeValue::boolean(true)), "unknown attribute");
  EXPECT_EQ(code(t, "temperature", AttributeValue::number(1, Unit::Celsius)), "read-only");
  EXPECT_EQ(code(lamp, "on", AttributeValue::number(1)), "type");
  EXPECT_THROW(f.gw.dispatch_command("bogus", DeviceId(lamp), "on", AttributeValue::boolean(true)), AuthError);
  f.gw.go_down();
  EXPECT_EQ(code(lamp, "on", AttributeValue::boolean(true)), "unavailable");
}

TEST(Access, AllowedSwipeOpensAndArmsAutoClose) {
  Fixture f;
  const auto reader = f.join("front_reader", DeviceKind::RfidReader, "r-1", "main_door");
  const auto door = f.join("front_door", DeviceKind::Door, "door-1");
  const auto res = f.gw.on_swipe("front_reader", "1001");
  EXPECT_EQ(res.decision, access::Decision::Allow);
  ASSERT_TRUE(res.command);
  const auto issued = f.host.issued().back();
  EXPECT_EQ(issued["device"], door);
  EXPECT_EQ(issued["origin"], "access");
  EXPECT_EQ(issued["trigger_seq"], res.audit_seq);
  EXPECT_EQ(f.host.events("audit").back()["reader"], reader);
  ASSERT_EQ(f.host.timers.size(), 1u);
  EXPECT_EQ(f.host.timers[0].second, 30 * kSecond);

  f.host.t = 10 * kMillisecond;
  f.ack("door-1", res.command->command_id, {{"open", true}});
  f.host.t = 30 * kSecond;
  f.host.drop_next = true;  // the first close is lost
  f.fire_due_timers();
  ASSERT_EQ(f.host.issued().back()["origin"], "auto_close");
  EXPECT_EQ(f.host.issued().back()["value"], false);
  EXPECT_EQ(f.host.issued().back()["outcome"], "dropped");
  ASSERT_EQ(f.host.timers.size(), 1u);
  EXPECT_EQ(f.host.timers[0].second, 31 * kSecond);
  f.host.t = 31 * kSecond;
  f.fire_due_timers();
  const auto retry = f.host.issued().back();
  EXPECT_EQ(retry["origin"], "auto_close");
  EXPECT_EQ(retry["outcome"], "delivered");
  f.ack("door-1", retry["cmd"], {{"open", false}});
  f.host.t = 32 * kSecond;
  const auto before = f.host.issued().size();
  f.fire_due_timers();
  EXPECT_EQ(f.host.issued().size(), before);
  EXPECT_FALSE(f.gw.close_timers().find(access::Portal::MainDoor));
}

TEST(Access, LaterSwipeSupersedesEarlierTimer) {
  Fixture f;
  f.join("r", DeviceKind::RfidReader, "r-1", "garage");
  f.join("g", DeviceKind::GarageDoor, "g-1");
  const auto first = f.gw.on_swipe("r", "2002");
  f.ack("g-1", first.command->command_id, {{"open", true}});
  f.host.t = 20 * kSecond;
  f.gw.on_swipe("r", "1001");
  f.host.t = 30 * kSecond;
  const auto n = f.host.issued().size();
  f.fire_due_timers();  // stale generation
  EXPECT_EQ(f.host.issued().size(), n);
  f.host.t = 50 * kSecond;
  f.fire_due_timers();
  EXPECT_EQ(f.host.issued().back()["origin"], "auto_close");
}

TEST(Access, DeniesRaiseAlertsAndOutageDenies) {
  Fixture f;
  f.join("front_reader", DeviceKind::RfidReader, "r-1", "main_door");
  f.join("front_door", DeviceKind::Door, "door-1");
  auto res = f.gw.on_swipe("front_reader", "2002");
  EXPECT_EQ(res.decision, access::Decision::Deny);
  EXPECT_FALSE(res.command);
  res = f.gw.on_swipe("front_reader", "6666");
  const auto alerts = f.host.alerts();
  ASSERT_EQ(alerts.size(), 2u);
  EXPECT_EQ(alerts[1].payload["cause_seq"], res.audit_seq);
  EXPECT_NE(alerts[0].payload["message"].get<std::string>().find("not authorized"), std::string::npos);
  EXPECT_NE(alerts[1].payload["message"].get<std::string>().find("unknown"), std::string::npos);
  f.gw.go_down();
  res = f.gw.on_swipe("front_reader", "1001");
  EXPECT_EQ(res.decision, access::Decision::Deny);
  EXPECT_EQ(f.host.events("audit").back()["reason"], "gateway_down");
  EXPECT_TRUE(f.host.issued().empty());
  EXPECT_THROW(f.gw.on_swipe("front_door", "1001"), ArgumentError);
  EXPECT_THROW(f.gw.on_swipe("nothing", "1001"), ArgumentError);
}

TEST(Alerts, FireAndWaterEdges) {
  Fixture f;
  const auto fm = f.join("fm", DeviceKind::FireMonitor, "fm-1");
  const auto wl = f.join("wl", DeviceKind::WaterLevelMonitor, "wl-1");
  f.report("fm-1", fm, {{"fire", true}}, 5);
  auto a = f.host.alerts();
  ASSERT_EQ(a.size(), 1u);
  EXPECT_EQ(a[0].payload["category"], "fire");
  EXPECT_EQ(a[0].payload["cause_seq"], 5);
  const Json pct = to_json(AttributeValue::number(91, Unit::Percent));
  f.host.t = 1;
  f.report("wl-1", wl, {{"level", pct}}, 6);
  f.host.t = 2;
  f.report("wl-1", wl, {{"level", to_json(AttributeValue::number(95, Unit::Percent))}}, 7);
  a = f.host.alerts();
  ASSERT_EQ(a.size(), 2u);
  EXPECT_EQ(a[1].payload["category"], "water");
  EXPECT_EQ(f.gw.alerts().size(), 2u);
}

TEST(Motion, IdleAfterQuietPeriod) {
  Fixture f(config("rule off: when m.idle = true then set l.on = false\n"
                   "rule on: when m.motion = true then set l.on = true\n"));
  const auto m = f.join("m", DeviceKind::MotionDetector, "m-1", "hall");
  f.join("l", DeviceKind::Light, "l-1");
  f.report("m-1", m, {{"motion", true}, {"zone", "hall"}}, 1);
  EXPECT_EQ(f.host.issued().back()["value"], true);
  f.ack("l-1", f.host.issued().back()["cmd"], {{"on", true}});
  f.host.t = 5 * kSecond;
  f.report("m-1", m, {{"motion", false}}, 2);
  ASSERT_FALSE(f.host.timers.empty());
  EXPECT_EQ(f.host.timers.back().second, 65 * kSecond);
  f.host.t = 65 * kSecond;
  f.fire_due_timers();
  EXPECT_EQ(f.gw.internal_states().at(DeviceId(m)).attributes.at("idle"), AttributeValue::boolean(true));
  EXPECT_EQ(f.host.issued().back()["value"], false);
  EXPECT_EQ(f.host.issued().back()["origin"], "rule:off");
}

TEST(Outage, MessagesIgnoredLoginUnavailableRestartAlert) {
  Fixture f;
  f.join("lamp", DeviceKind::Light, "lamp-1");
  f.gw.go_down();
  f.gw.go_down();
  EXPECT_EQ(f.host.events("gateway_down").size(), 1u);
  f.join("lamp2", DeviceKind::Light, "lamp-2");
  EXPECT_EQ(f.host.events("message_ignored").back()["reason"], "gateway_down");
  try {
    f.gw.authenticate_client("admin", "pw");
    FAIL();
  } catch (const AuthError& e) {
    EXPECT_EQ(e.reason(), AuthError::Reason::Unavailable);
  }
  f.gw.go_up();
  EXPECT_EQ(f.host.alerts().back().payload["category"], "system");
  EXPECT_EQ(f.host.alerts().back().payload["cause_seq"], f.host.alerts().back().seq - 1);
}

TEST(Directory, OfflineAfterSilenceAndJson) {
  Fixture f;
  f.join("lamp", DeviceKind::Light, "lamp-1");
  f.join("r", DeviceKind::RfidReader, "r-1", "garage");
  f.host.t = 31 * kSecond;
  const auto dir = f.gw.directory();
  EXPECT_EQ(dir[0].registration.status, RegistrationStatus::Offline);
  const Json j = to_json(dir[1]);
  EXPECT_EQ(j["binding"], "garage");
  EXPECT_EQ(j["status"], "offline");
  EXPECT_EQ(j["kind"], "RfidReader");
  EXPECT_FALSE(to_json(dir[0]).contains("binding"));
}
