#include <iostream>

#include <CLI11.hpp>

#include "swarm/bots.hpp"
#include "swarm/replay.hpp"

int main(int argc, char** argv) {
  CLI::App app{"run an instance with scripted bots on simulated time"};
  std::string config_path;
  std::string policy = "oracle";
  int bots = 25;
  std::optional<std::uint64_t> seed;
  std::int64_t max_ticks = 6000;
  std::string out;
  app.add_option("--config", config_path, "Instance config JSON")->required();
  app.add_option("--policy", policy, "oracle | local | idle");
  app.add_option("--bots", bots);
  app.add_option("--seed", seed, "Overrides the placement seed and token seed");
  app.add_option("--max-ticks", max_ticks);
  app.add_option("--out", out, "Log path (.gz compresses)");
  CLI11_PARSE(app, argc, argv);

  const auto kind = swarm::policy_kind_from_name(policy);
  if (!kind) {
    std::cerr << "unknown policy: " << policy << "\n";
    return 2;
  }
  try {
    swarm::InstanceConfig cfg = swarm::load_config_file(config_path);
    swarm::HeadlessOptions opts;
    opts.bots = bots;
    opts.max_ticks = max_ticks;
    if (seed) {
      opts.token_seed = *seed;
      if (std::holds_alternative<swarm::UniformRandomPlacement>(cfg.placement)) {
        std::get<swarm::UniformRandomPlacement>(cfg.placement).seed = *seed;
      }
    }
    if (!out.empty()) opts.out = out;
    const auto result = swarm::run_headless(cfg, swarm::make_policy_factory(*kind), opts);
    auto report = swarm::metrics(result.log).to_json();
    report["final_phase"] = std::string(swarm::protocol::phase_name(result.final_phase));
    report["ticks"] = result.ticks;
    std::cout << report.dump(2) << "\n";
    return result.final_phase == swarm::Phase::Complete ? 0 : 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}
