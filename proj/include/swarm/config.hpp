#pragma once

// InstanceConfig: everything that parameterizes one game instance. The JSON
// layout is documented in docs/instance-config.md.

#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "swarm/core_model.hpp"
#include "swarm/objective.hpp"
#include "swarm/sensing.hpp"

namespace swarm {

struct Capabilities {
  bool local_sensing = true;
  bool global_sensing = true;
  bool color_switching = true;
  bool operator==(const Capabilities&) const = default;
};

struct UniformRandomPlacement {
  std::uint64_t seed = 1;
  bool operator==(const UniformRandomPlacement&) const = default;
};

struct PlacedAgent {
  Vec2 pos;
  AgentColor color = AgentColor::C1;
  bool operator==(const PlacedAgent&) const = default;
};

struct ExplicitPlacement {
  std::vector<PlacedAgent> agents;
  bool operator==(const ExplicitPlacement&) const = default;
};

using Placement = std::variant<UniformRandomPlacement, ExplicitPlacement>;

struct InstanceConfig {
  std::string instance_id;
  Arena arena;
  PhysicsParams physics;
  SensingParams sensing;
  FormationSpec objective;
  Capabilities capabilities;
  int max_players = 25;
  Placement placement = UniformRandomPlacement{};
  std::int64_t countdown_ms = 3000;

  /// Empty when every invariant holds.
  std::vector<std::string> violations() const;

  bool operator==(const InstanceConfig&) const = default;
};

/// Throws ConfigError (message lists every problem) on malformed documents.
/// Missing fields take their defaults. Does not check invariants.
InstanceConfig config_from_json(const nlohmann::json& doc);
nlohmann::json config_to_json(const InstanceConfig& config);

/// Parse then validate; throws ConfigError listing violations.
InstanceConfig load_config(const nlohmann::json& doc);
InstanceConfig load_config_file(const std::string& path);

/// Deterministic placement for `count` agents (ids 0..count-1). Throws
/// ConfigError when the arena cannot hold them.
std::vector<AgentState> place_agents(const InstanceConfig& config, int count);

}  // namespace swarm
