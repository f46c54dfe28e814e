#ifndef ROBOTIQ_SERVICE_SERVER_HPP_
#define ROBOTIQ_SERVICE_SERVER_HPP_

#include <atomic>
#include <cstdint>
#include <filesystem>
#include <list>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <thread>

#include <json.hpp>

#include "robotiq/service/session.hpp"

namespace robotiq::service {

struct ServerConfig {
  std::string address = "127.0.0.1";
  unsigned short port = 8080;  // 0 picks a free port
  std::filesystem::path default_map;
  SessionConfig session;              // template for new sessions
  double idle_state_period = 0.1;     // wall seconds between idle `state` events
};

// Thread-safe id -> session table.
class SessionRegistry {
 public:
  std::shared_ptr<Session> create(const std::filesystem::path& map, SessionConfig cfg);
  std::shared_ptr<Session> find(const std::string& id) const;  // nullptr if absent
  bool remove(const std::string& id);
  std::vector<std::shared_ptr<Session>> all() const;

 private:
  mutable std::mutex mu_;
  std::map<std::string, std::shared_ptr<Session>> sessions_;
  std::uint64_t next_id_ = 1;
};

// REST + WebSocket front end:
//   POST   /sessions                  {map?, seed?, navigator?, voice_latency?}
//   POST   /sessions/{id}/command     {text}
//   GET    /sessions/{id}/state
//   GET    /sessions/{id}/metrics
//   DELETE /sessions/{id}
//   WS     /sessions/{id}/events[?from=seq]   {seq, type, t_sim, payload}
//   GET    /catalog, GET /health
class Server {
 public:
  explicit Server(ServerConfig cfg);
  ~Server();
  Server(const Server&) = delete;
  Server& operator=(const Server&) = delete;

  // Binds and starts serving on background threads. Throws Error(kSetup).
  void start();
  void stop();
  // Blocks until stop() is called from another thread or a signal handler.
  void wait();

  unsigned short port() const { return port_; }
  SessionRegistry& sessions() { return registry_; }

 private:
  struct Impl;
  ServerConfig cfg_;
  SessionRegistry registry_;
  std::unique_ptr<Impl> impl_;
  unsigned short port_ = 0;
};

}  // namespace robotiq::service

#endif  // ROBOTIQ_SERVICE_SERVER_HPP_
