#pragma once

// Live network front end: one TCP port serving the admin HTTP API, the
// player WebSocket endpoint /ws and static client assets. The Session runs
// on its own loop thread at the configured tick rate; network I/O runs on a
// separate I/O thread and never blocks the tick.

#include <cstdint>
#include <filesystem>
#include <memory>
#include <string>

#include "swarm/session.hpp"

namespace swarm::net {

struct ServerOptions {
  std::string host = "0.0.0.0";
  std::uint16_t port = 8080;  // 0 picks a free port
  /// Bearer token required by /admin endpoints. Empty disables the admin API.
  std::string admin_token;
  /// Served at "/". Empty serves a placeholder page.
  std::filesystem::path static_dir;
  SessionOptions session;
};

class LiveServer {
 public:
  explicit LiveServer(ServerOptions options);
  ~LiveServer();
  LiveServer(const LiveServer&) = delete;
  LiveServer& operator=(const LiveServer&) = delete;

  /// Binds and starts the I/O and simulation threads.
  void start();
  /// Stops both threads; open connections are dropped.
  void stop();
  /// Blocks until stop() is called from another thread or a signal handler.
  void wait();

  std::uint16_t port() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace swarm::net
