#include "hearth/api.hpp"

#include <httplib.h>

#include <chrono>

namespace hearth::api {

namespace {

using scenario::StimulusType;

Reply error_reply(int status, std::string message, Json extra = Json::object()) {
  extra["error"] = std::move(message);
  return {status, std::move(extra)};
}

Reply auth_error_reply(const gateway::AuthError& e) {
  using R = gateway::AuthError::Reason;
  switch (e.reason()) {
    case R::Unavailable: return error_reply(503, e.what(), {{"reason", "unavailable"}});
    case R::Expired: return error_reply(401, e.what(), {{"reason", "expired"}});
    case R::Invalid: break;
  }
  return error_reply(401, e.what(), {{"reason", "invalid"}});
}

int command_status(const std::string& code) {
  if (code == "unknown device") return 404;
  if (code == "unavailable") return 503;
  return 422;
}

void send(httplib::Response& res, const Reply& reply) {
  res.status = reply.status;
  res.set_content(reply.body.dump(), "application/json");
}

std::optional<Json> parse_body(const httplib::Request& req, httplib::Response& res) {
  try {
    Json body = Json::parse(req.body);
    if (body.is_object()) return body;
  } catch (const Json::parse_error&) {
  }
  send(res, error_reply(400, "request body must be a JSON object"));
  return std::nullopt;
}

std::string bearer(const httplib::Request& req) {
  const std::string h = req.get_header_value("Authorization");
  constexpr std::string_view prefix = "Bearer ";
  if (h.size() > prefix.size() && h.compare(0, prefix.size(), prefix) == 0)
    return h.substr(prefix.size());
  return {};
}

std::optional<DeviceId> resolve_device(const Home& home, const std::string& id_or_name) {
  for (const auto& view : home.gateway().directory())
    if (view.registration.descriptor.id.str() == id_or_name) return view.registration.descriptor.id;
  return home.gateway().find_by_name(id_or_name);
}

/// Stimuli the API may inject. Joins, logins and client commands have their
/// own endpoints.
std::optional<Reply> check_stimulus(StimulusType type, const Json& args) {
  auto need_string = [&](const char* key) -> std::optional<Reply> {
    if (!args.contains(key) || !args[key].is_string())
      return error_reply(400, std::string("'") + key + "' must be a string");
    return std::nullopt;
  };
  switch (type) {
    case StimulusType::FireStart:
    case StimulusType::FireStop:
    case StimulusType::GatewayDown:
    case StimulusType::GatewayUp: return std::nullopt;
    case StimulusType::Motion:
      if (auto r = need_string("zone")) return r;
      if (args.contains("duration_s") &&
          (!args["duration_s"].is_number() || args["duration_s"].get<double>() <= 0.0))
        return error_reply(400, "'duration_s' must be a positive number");
      return std::nullopt;
    case StimulusType::Rain:
      if (!args.contains("delta") || !args["delta"].is_number())
        return error_reply(400, "'delta' must be a number");
      return std::nullopt;
    case StimulusType::Swipe:
      if (auto r = need_string("reader")) return r;
      return need_string("card");
    default: return error_reply(400, "stimulus '" + std::string(to_string(type)) + "' not allowed here");
  }
}

}  // namespace

ApiServer::ApiServer(scenario::Scenario scenario, ServeOptions options)
    : options_(std::move(options)) {
  if (options_.pace < 0.0) throw ArgumentError("pace must be >= 0");
  if (!options_.log_path.empty()) log_ = std::make_unique<persistence::EventLog>(options_.log_path);
  home_ = std::make_unique<Home>(std::move(scenario));
  if (log_) home_->attach_log(log_.get());
  home_->add_observer([this](const LogRecord& r) {
    if (r.kind == RecordKind::Alert) {
      Json a = r.payload;
      a["seq"] = r.seq;
      a["t"] = r.t;
      {
        std::lock_guard lock(alerts_mutex_);
        alerts_.push_back(std::move(a));
      }
      alerts_cv_.notify_all();
    } else if (r.kind == RecordKind::Reading) {
      std::lock_guard lock(published_mutex_);
      readings_.add(r);
    }
  });
}

ApiServer::~ApiServer() {
  try {
    stop();
  } catch (...) {
  }
}

Timestamp ApiServer::virtual_now() const {
  std::lock_guard lock(published_mutex_);
  return published_.now;
}

void ApiServer::start() {
  if (started_) return;
  http_ = std::make_unique<httplib::Server>();
  // Without SO_REUSEPORT a second server on a busy port fails to bind.
  http_->set_socket_options([](socket_t sock) {
    int yes = 1;
    setsockopt(sock, SOL_SOCKET, SO_REUSEADDR, reinterpret_cast<const void*>(&yes), sizeof(yes));
  });
  install_routes();
  if (options_.port == 0) {
    port_ = http_->bind_to_any_port(options_.host);
    if (port_ < 0) throw persistence::IoError("cannot bind " + options_.host);
  } else {
    if (!http_->bind_to_port(options_.host, options_.port))
      throw persistence::IoError("cannot bind " + options_.host + ":" + std::to_string(options_.port) +
                    " (port busy?)");
    port_ = options_.port;
  }
  started_ = true;
  home_->start();
  publish();
  http_thread_ = std::thread([this] { http_->listen_after_bind(); });
  // stop() is a no-op on a server that is not yet listening.
  http_->wait_until_ready();
  engine_ = std::thread([this] { engine_loop(); });
}

void ApiServer::stop() {
  if (!started_ || stopped_) return;
  stopped_ = true;
  stopping_ = true;
  wake_cv_.notify_all();
  alerts_cv_.notify_all();
  http_->stop();
  if (http_thread_.joinable()) http_thread_.join();
  if (engine_.joinable()) engine_.join();
  mailbox_.drain();
  home_->finish();
  if (log_) log_->close();
}

Reply ApiServer::submit(std::function<Reply(Home&)> job) {
  if (stopping_) return error_reply(503, "server stopping");
  auto done = std::make_shared<std::promise<Reply>>();
  auto result = done->get_future();
  mailbox_.post([this, job = std::move(job), done] {
    if (engine_exit_) {
      done->set_value(engine_exit_->empty() ? error_reply(503, "server stopping")
                                            : error_reply(500, "engine failed: " + *engine_exit_));
      return;
    }
    try {
      done->set_value(job(*home_));
    } catch (const ArgumentError& e) {
      done->set_value(error_reply(400, e.what()));
    } catch (const TypeError& e) {
      done->set_value(error_reply(400, e.what()));
    } catch (const gateway::AuthError& e) {
      done->set_value(auth_error_reply(e));
    }
  });
  const auto pace_ms = options_.pace > 0 ? static_cast<long>(2000 / options_.pace) : 0;
  const auto limit = std::chrono::seconds(30) + std::chrono::milliseconds(pace_ms);
  if (result.wait_for(limit) != std::future_status::ready)
    return error_reply(504, "engine did not answer in time");
  return result.get();
}

void ApiServer::publish() {
  Published p;
  p.now = home_->now();
  p.gateway_up = home_->gateway().up();
  for (const auto& view : home_->gateway().directory()) p.devices.push_back(to_json(view));
  p.sessions = home_->gateway().sessions();
  const auto m = home_->metrics();
  p.metrics = simnet::to_json(simnet::run_report(m));
  p.metrics["now"] = p.now;
  p.metrics["gateway_up"] = p.gateway_up;
  p.metrics["delivered"] = m.latency_samples.size();
  p.metrics["dropped"] = m.dropped_count;
  std::lock_guard lock(published_mutex_);
  published_ = std::move(p);
}

void ApiServer::engine_loop() {
  using Clock = std::chrono::steady_clock;
  const auto wall0 = Clock::now();
  const Timestamp v0 = home_->now();
  std::string failure;
  while (!stopping_) {
    const Timestamp boundary = home_->now() + kSecond;
    try {
      home_->run_until(boundary);
      mailbox_.drain();
      publish();
    } catch (const std::exception& e) {
      failure = e.what();
      break;
    }
    if (options_.pace > 0) {
      const double real_s = static_cast<double>(boundary - v0) / kSecond / options_.pace;
      const auto deadline =
          wall0 + std::chrono::duration_cast<Clock::duration>(std::chrono::duration<double>(real_s));
      std::unique_lock lock(wake_mutex_);
      wake_cv_.wait_until(lock, deadline, [this] { return stopping_.load(); });
    }
  }
  engine_exit_ = failure;
  mailbox_.drain();
}

std::optional<Reply> ApiServer::authorize(const std::string& token) const {
  if (token.empty()) return error_reply(401, "missing bearer token", {{"reason", "invalid"}});
  std::lock_guard lock(published_mutex_);
  auto it = published_.sessions.find(token);
  if (it == published_.sessions.end())
    return error_reply(401, "invalid session", {{"reason", "invalid"}});
  if (published_.now >= it->second.expires_at)
    return error_reply(401, "expired", {{"reason", "expired"}});
  return std::nullopt;
}

void ApiServer::install_routes() {
  auto& s = *http_;

  s.set_post_routing_handler([](const httplib::Request&, httplib::Response& res) {
    res.set_header("Access-Control-Allow-Origin", "*");
    res.set_header("Access-Control-Allow-Headers", "Authorization, Content-Type");
    res.set_header("Access-Control-Allow-Methods", "GET, POST, OPTIONS");
  });
  s.Options(".*", [](const httplib::Request&, httplib::Response& res) { res.status = 204; });

  s.Post("/session", [this](const httplib::Request& req, httplib::Response& res) {
    auto body = parse_body(req, res);
    if (!body) return;
    if (!(*body)["username"].is_string() || !(*body)["password"].is_string())
      return send(res, error_reply(400, "'username' and 'password' must be strings"));
    const std::string user = (*body)["username"], pass = (*body)["password"];
    send(res, submit([this, user, pass](Home& home) {
           const auto token = home.gateway().authenticate_client(user, pass);
           {
             // Usable as soon as the client holds it, not at the next publish.
             std::lock_guard lock(published_mutex_);
             published_.sessions.insert_or_assign(token.value,
                                                  gateway::Session{token.username, token.expires_at});
           }
           return Reply{200, {{"token", token.value},
                              {"username", token.username},
                              {"expires_at", token.expires_at}}};
         }));
  });

  s.Get("/devices", [this](const httplib::Request& req, httplib::Response& res) {
    if (auto denied = authorize(bearer(req))) return send(res, *denied);
    std::lock_guard lock(published_mutex_);
    send(res, {200, published_.devices});
  });

  s.Get(R"(/devices/([^/]+))", [this](const httplib::Request& req, httplib::Response& res) {
    if (auto denied = authorize(bearer(req))) return send(res, *denied);
    const std::string key = req.matches[1];
    Timestamp t0 = 0, t1 = std::numeric_limits<Timestamp>::max();
    try {
      auto secs = [&](const char* key) {
        return static_cast<Timestamp>(std::stod(req.get_param_value(key)) * kSecond);
      };
      if (req.has_param("since_s")) t0 = secs("since_s");
      if (req.has_param("until_s")) t1 = secs("until_s");
    } catch (const std::exception&) {
      return send(res, error_reply(400, "since_s and until_s must be numbers"));
    }
    if (t0 > t1) return send(res, error_reply(400, "since_s > until_s"));
    std::lock_guard lock(published_mutex_);
    for (const auto& d : published_.devices) {
      if (d["id"] != key && d["display_name"] != key) continue;
      Json series = Json::object();
      const std::string id = d["id"];
      for (const auto& [attr, _] : d["attributes"].items()) {
        if (req.has_param("attribute") && req.get_param_value("attribute") != attr) continue;
        Json pts = Json::array();
        for (const auto& p : readings_.query(id, attr, t0, t1).points)
          pts.push_back(Json::array({p.t, to_json(p.value)}));
        series[attr] = std::move(pts);
      }
      return send(res, {200, {{"device", d}, {"series", std::move(series)}}});
    }
    send(res, error_reply(404, "unknown device " + key));
  });

  s.Post(R"(/devices/([^/]+)/command)", [this](const httplib::Request& req, httplib::Response& res) {
    const std::string token = bearer(req);
    if (auto denied = authorize(token)) return send(res, *denied);
    auto body = parse_body(req, res);
    if (!body) return;
    if (!(*body)["attribute"].is_string() || !body->contains("value"))
      return send(res, error_reply(400, "'attribute' (string) and 'value' are required"));
    const std::string key = req.matches[1];
    const std::string attribute = (*body)["attribute"];
    const Json value = (*body)["value"];
    send(res, submit([=](Home& home) {
           const auto id = resolve_device(home, key);
           if (!id) return error_reply(404, "unknown device " + key);
           try {
             const auto ack = home.gateway().dispatch_command(token, *id, attribute,
                                                              attribute_value_from_json(value));
             return Reply{200, {{"ok", true}, {"command", to_json(ack)}}};
           } catch (const gateway::CommandError& e) {
             return error_reply(command_status(e.code()), e.what(), {{"code", e.code()}});
           }
         }));
  });

  s.Get("/alerts", [this](const httplib::Request& req, httplib::Response& res) {
    if (auto denied = authorize(bearer(req))) return send(res, *denied);
    std::uint64_t since = 0;
    bool any = true;  // no `since`: every alert
    try {
      if (req.has_param("since")) {
        since = std::stoull(req.get_param_value("since"));
        any = false;
      }
    } catch (const std::exception&) {
      return send(res, error_reply(400, "since must be a record seq"));
    }
    const bool follow = req.get_param_value("follow") != "0";
    auto cursor = std::make_shared<std::optional<std::uint64_t>>();
    if (!any) *cursor = since;
    res.set_chunked_content_provider(
        "application/x-ndjson", [this, cursor, follow](std::size_t, httplib::DataSink& sink) {
          std::vector<Json> batch;
          {
            std::lock_guard lock(alerts_mutex_);
            for (const auto& a : alerts_) {
              const auto seq = a["seq"].get<std::uint64_t>();
              if (!*cursor || seq > **cursor) batch.push_back(a);
            }
          }
          for (const auto& a : batch) {
            const std::string line = a.dump() + "\n";
            if (!sink.write(line.data(), line.size())) return false;
            *cursor = a["seq"].get<std::uint64_t>();
          }
          if (!follow || stopping_) {
            sink.done();
            return true;
          }
          if (batch.empty()) {
            std::unique_lock lock(alerts_mutex_);
            alerts_cv_.wait_for(lock, std::chrono::milliseconds(250));
          }
          return sink.is_writable();
        });
  });

  s.Post("/swipe", [this](const httplib::Request& req, httplib::Response& res) {
    if (auto denied = authorize(bearer(req))) return send(res, *denied);
    auto body = parse_body(req, res);
    if (!body) return;
    if (auto bad = check_stimulus(StimulusType::Swipe, *body)) return send(res, *bad);
    const Json args{{"reader", (*body)["reader"]}, {"card", (*body)["card"]}};
    send(res, submit([args](Home& home) {
           return Reply{200, home.apply_stimulus(StimulusType::Swipe, args)};
         }));
  });

  s.Post("/stimulus", [this](const httplib::Request& req, httplib::Response& res) {
    if (auto denied = authorize(bearer(req))) return send(res, *denied);
    auto body = parse_body(req, res);
    if (!body) return;
    const auto type =
        (*body)["type"].is_string() ? scenario::parse_stimulus_type((*body)["type"].get<std::string>())
                                    : std::nullopt;
    if (!type) return send(res, error_reply(400, "unknown stimulus type"));
    Json args = *body;
    args.erase("type");
    if (auto bad = check_stimulus(*type, args)) return send(res, *bad);
    send(res, submit([t = *type, args](Home& home) {
           Json out = home.apply_stimulus(t, args);
           return Reply{out.value("ok", true) ? 200 : 409, out};
         }));
  });

  s.Get("/metrics", [this](const httplib::Request& req, httplib::Response& res) {
    if (auto denied = authorize(bearer(req))) return send(res, *denied);
    std::lock_guard lock(published_mutex_);
    send(res, {200, published_.metrics});
  });
}

}  // namespace hearth::api
