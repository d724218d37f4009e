#pragma once

// Deterministic re-simulation of logged instances and derived metrics.

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "swarm/config.hpp"
#include "swarm/session_log.hpp"

namespace swarm {

/// Re-simulates from the header config and placement seed, feeding logged
/// input and color records at their ticks. Returns one WorldState per state
/// record. Throws DivergenceError at the first tick whose simulated state
/// is not bit-identical to the logged one, ParseError for unusable logs.
std::vector<WorldState> replay(const SessionLog& log);

/// Milliseconds from instance_start to objective_complete; empty when the
/// instance never completed. Throws ParseError without instance_start.
std::optional<std::int64_t> task_duration_ms(const SessionLog& log);

struct MetricsReport {
  std::optional<std::int64_t> task_duration_ms;
  std::map<AgentId, double> path_length;
  std::map<AgentId, int> color_switches;
  std::optional<std::int64_t> time_to_consensus_ms;  // relative to instance_start
  std::optional<double> final_residual;
  std::int64_t state_records = 0;

  nlohmann::json to_json() const;
};

MetricsReport metrics(const SessionLog& log);

/// One row per agent per state record: t_ms,agent_id,x,y,color.
std::string export_csv(const SessionLog& log);

/// Per-player view of a log: the header plus that player's join/leave,
/// input and color records and its own row from every state record.
/// Keyed by the logged player label.
std::map<std::string, std::string> split_by_player(const SessionLog& log);

}  // namespace swarm
