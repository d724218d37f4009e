#include <csignal>
#include <cstdlib>
#include <iostream>

#include <CLI11.hpp>

#include "swarm/net/server.hpp"

namespace {
swarm::net::LiveServer* g_server = nullptr;
void on_signal(int) {
  if (g_server) g_server->stop();
}
}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"swarm game server"};
  swarm::net::ServerOptions opts;
  std::string log_dir = "logs";
  std::string static_dir;
  app.add_option("--host", opts.host, "Bind address");
  app.add_option("--port", opts.port, "TCP port (0 picks one)");
  app.add_option("--log-dir", log_dir, "Directory for session logs");
  app.add_flag("--gzip", opts.session.gzip_logs, "Compress logs when an instance ends");
  app.add_option("--static-dir", static_dir, "Web client assets served at /");
  app.add_option("--session-id", opts.session.session_id, "Session identifier (log subdirectory)");
  CLI11_PARSE(app, argc, argv);

  opts.session.log_dir = log_dir;
  opts.static_dir = static_dir;
  if (const char* tok = std::getenv("SWARM_ADMIN_TOKEN")) opts.admin_token = tok;
  if (opts.admin_token.empty()) {
    std::cerr << "warning: SWARM_ADMIN_TOKEN is not set; the admin API is disabled\n";
  }

  swarm::net::LiveServer server(opts);
  try {
    server.start();
  } catch (const std::exception& e) {
    std::cerr << "cannot start: " << e.what() << "\n";
    return 1;
  }
  g_server = &server;
  std::signal(SIGINT, on_signal);
  std::signal(SIGTERM, on_signal);
  std::cout << "listening on " << opts.host << ":" << server.port() << std::endl;
  server.wait();
  return 0;
}
