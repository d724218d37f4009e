#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <httplib.h>

int main(int argc, char** argv) {
  CLI::App app{"swarm admin client"};
  app.require_subcommand(1);
  std::string server = "http://127.0.0.1:8080";
  app.add_option("--server", server, "Server base URL");

  std::string config_path;
  std::string id;
  auto* create = app.add_subcommand("create", "Create an instance from a config file");
  create->add_option("--config", config_path, "Instance config JSON")->required();
  auto* start = app.add_subcommand("start", "Start an instance");
  start->add_option("--id", id)->required();
  auto* abort = app.add_subcommand("abort", "Abort a running instance");
  abort->add_option("--id", id)->required();
  auto* status = app.add_subcommand("status", "Show instance status");
  status->add_option("--id", id)->required();
  app.add_subcommand("players", "List connected players");
  CLI11_PARSE(app, argc, argv);

  const char* token = std::getenv("SWARM_ADMIN_TOKEN");
  httplib::Client cli(server);
  cli.set_connection_timeout(5);
  httplib::Headers headers;
  if (token) headers.emplace("Authorization", std::string("Bearer ") + token);

  httplib::Result res;
  if (create->parsed()) {
    std::ifstream in(config_path);
    if (!in) {
      std::cerr << "cannot read " << config_path << "\n";
      return 2;
    }
    std::stringstream body;
    body << in.rdbuf();
    res = cli.Post("/admin/instances", headers, body.str(), "application/json");
  } else if (start->parsed()) {
    res = cli.Post(("/admin/instances/" + id + "/start").c_str(), headers, "", "application/json");
  } else if (abort->parsed()) {
    res = cli.Post(("/admin/instances/" + id + "/abort").c_str(), headers, "", "application/json");
  } else if (status->parsed()) {
    res = cli.Get(("/admin/instances/" + id).c_str(), headers);
  } else {
    res = cli.Get("/admin/players", headers);
  }
  if (!res) {
    std::cerr << "request failed: " << httplib::to_string(res.error()) << "\n";
    return 2;
  }
  std::cout << res->body << "\n";
  return res->status >= 200 && res->status < 300 ? 0 : 1;
}
