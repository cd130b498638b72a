// Paced live engine plus the gateway HTTP API used by the dashboard.
//
// One engine thread owns the Home. Every mutating request is queued in the
// mailbox and executed at the next virtual-second boundary, in arrival
// order. Reads are served from the snapshot published after each boundary.
#pragma once

#include <atomic>
#include <condition_variable>
#include <filesystem>
#include <functional>
#include <future>
#include <memory>
#include <mutex>
#include <string>
#include <thread>

#include "hearth/home.hpp"
#include "hearth/persistence.hpp"
#include "hearth/scenario.hpp"

namespace httplib {
class Server;
}

namespace hearth::api {

struct ServeOptions {
  std::string host = "127.0.0.1";
  /// 0 picks a free port; see ApiServer::port().
  int port = 8080;
  /// Virtual seconds per real second. 0 runs unpaced.
  double pace = 1.0;
  /// Empty: no durable log.
  std::filesystem::path log_path;
};

/// Status code plus JSON body, produced on the engine thread.
struct Reply {
  int status = 200;
  Json body = Json::object();
};

class ApiServer {
 public:
  ApiServer(scenario::Scenario scenario, ServeOptions options);
  ~ApiServer();
  ApiServer(const ApiServer&) = delete;
  ApiServer& operator=(const ApiServer&) = delete;

  /// Bind, then start the engine and HTTP threads. Throws IoError when the
  /// port cannot be bound.
  void start();
  /// Stop serving, finish the run and close the log. Idempotent.
  void stop();

  int port() const noexcept { return port_; }
  Timestamp virtual_now() const;

  /// Queue `job` for the next boundary and wait for its reply.
  Reply submit(std::function<Reply(Home&)> job);

 private:
  struct Published {
    Timestamp now = 0;
    bool gateway_up = true;
    Json devices = Json::array();
    std::map<std::string, gateway::Session, std::less<>> sessions;
    Json metrics = Json::object();
  };

  void engine_loop();
  void publish();
  void install_routes();
  /// A 401 reply unless the bearer token names a live session.
  std::optional<Reply> authorize(const std::string& header) const;

  ServeOptions options_;
  std::unique_ptr<persistence::EventLog> log_;
  std::unique_ptr<Home> home_;
  std::unique_ptr<httplib::Server> http_;
  int port_ = 0;

  simnet::Mailbox mailbox_;
  /// Set by the engine when it stops; queued jobs then answer 503 or 500.
  std::optional<std::string> engine_exit_;

  mutable std::mutex published_mutex_;
  Published published_;
  persistence::ReadingStore readings_;

  mutable std::mutex alerts_mutex_;
  std::condition_variable alerts_cv_;
  std::vector<Json> alerts_;

  std::mutex wake_mutex_;
  std::condition_variable wake_cv_;
  std::atomic<bool> stopping_{false};
  bool started_ = false;
  bool stopped_ = false;
  std::thread engine_;
  std::thread http_thread_;
};

}  // namespace hearth::api
