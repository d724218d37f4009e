#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "swarm/errors.hpp"
#include "swarm/replay.hpp"
#include "swarm/session_log.hpp"

int main(int argc, char** argv) {
  CLI::App app{"swarm log tools"};
  app.require_subcommand(1);
  std::string file;
  bool recover = false;
  app.add_flag("--recover", recover, "Accept a torn log and use its valid prefix");

  auto* metrics = app.add_subcommand("metrics", "Print metrics as JSON");
  metrics->add_option("file", file)->required();
  auto* replay = app.add_subcommand("replay", "Re-simulate and verify a log");
  replay->add_option("file", file)->required();
  auto* split = app.add_subcommand("split", "Write one log per player");
  split->add_option("file", file)->required();
  bool by_player = false;
  std::string out_dir = ".";
  split->add_flag("--by-player", by_player)->required();
  split->add_option("--out-dir", out_dir);
  auto* csv = app.add_subcommand("export-csv", "Print state records as CSV");
  csv->add_option("file", file)->required();
  CLI11_PARSE(app, argc, argv);

  try {
    const auto log = swarm::read_log_file(file, recover ? swarm::ReadMode::Recover : swarm::ReadMode::Strict);
    if (metrics->parsed()) {
      std::cout << swarm::metrics(log).to_json().dump(2) << "\n";
    } else if (replay->parsed()) {
      const auto states = swarm::replay(log);
      std::cout << "replay ok: " << states.size() << " states reproduced\n";
    } else if (split->parsed()) {
      for (const auto& [player, text] : swarm::split_by_player(log)) {
        const std::string path = out_dir + "/" + player + ".jsonl";
        std::ofstream(path, std::ios::binary) << text;
        std::cout << path << "\n";
      }
    } else {
      std::cout << swarm::export_csv(log);
    }
  } catch (const swarm::DivergenceError& e) {
    std::cerr << "divergence at tick " << e.tick() << ": " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
