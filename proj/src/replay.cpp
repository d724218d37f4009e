#include "swarm/replay.hpp"

#include <algorithm>
#include <cstdio>
#include <sstream>

#include "swarm/errors.hpp"

namespace swarm {

using nlohmann::json;

namespace {

InstanceConfig header_config(const SessionLog& log) {
  try {
    return load_config(log.header.config);
  } catch (const ConfigError& e) {
    throw ParseError(std::string("log header config: ") + e.what());
  }
}

const LogRecord& require_start(const SessionLog& log) {
  const LogRecord* start = log.find_first(RecordKind::InstanceStart);
  if (start == nullptr) throw ParseError("log has no instance_start record");
  return *start;
}

std::string describe(const AgentState& want, const AgentState& got) {
  std::ostringstream s;
  s.precision(17);
  s << "agent " << want.id << ": logged (" << want.pos.x << ", " << want.pos.y << ", C"
    << color_code(want.color) << ") replayed (" << got.pos.x << ", " << got.pos.y << ", C"
    << color_code(got.color) << ")";
  return s.str();
}

void compare_agents(std::int64_t tick, const std::vector<AgentState>& logged,
                    const std::vector<AgentState>& sim) {
  if (logged.size() != sim.size()) {
    throw DivergenceError(tick, "agent count differs at tick " + std::to_string(tick));
  }
  for (std::size_t i = 0; i < logged.size(); ++i) {
    const auto& a = logged[i];
    const auto& b = sim[i];
    if (a.id != b.id || a.pos.x != b.pos.x || a.pos.y != b.pos.y || a.color != b.color) {
      throw DivergenceError(tick, "divergence at tick " + std::to_string(tick) + ": " + describe(a, b));
    }
  }
}

std::int64_t int_field(const json& payload, const char* key) {
  auto it = payload.find(key);
  if (it == payload.end() || !it->is_number_integer()) {
    throw ParseError(std::string("record field '") + key + "' missing");
  }
  return it->get<std::int64_t>();
}

}  // namespace

std::vector<WorldState> replay(const SessionLog& log) {
  const InstanceConfig cfg = header_config(log);
  const LogRecord& start = require_start(log);
  const std::int64_t period = cfg.physics.tick_period_ms();

  WorldState world;
  world.arena = cfg.arena;
  const auto logged_start = agents_from_json(start.payload.at("agents"));
  try {
    world.agents = place_agents(cfg, static_cast<int>(logged_start.size()));
  } catch (const ConfigError& e) {
    throw DivergenceError(0, std::string("placement failed: ") + e.what());
  }
  compare_agents(0, logged_start, world.agents);

  CompletionStatus completion;
  std::optional<std::int64_t> completed_tick;
  bool completion_logged = false;
  std::vector<WorldState> trajectory;

  for (const LogRecord& rec : log.records) {
    switch (rec.kind) {
      case RecordKind::Input:
      case RecordKind::Color: {
        // Inputs carry the timestamp of the tick they take effect in.
        if (rec.t_ms != world.t_ms + period) {
          throw DivergenceError(world.tick + 1, "input record off its tick");
        }
        AgentState* agent = world.find(static_cast<AgentId>(int_field(rec.payload, "agent_id")));
        if (agent == nullptr) throw ParseError("input record for unknown agent");
        if (rec.kind == RecordKind::Input) {
          MotionIntent keys;
          for (const auto& k : rec.payload.at("keys")) {
            auto key = key_from_name(k.get<std::string>());
            if (!key) throw ParseError("unknown key in input record");
            keys.press(*key);
          }
          agent->intent = keys;
        } else {
          auto c = color_from_code(static_cast<int>(int_field(rec.payload, "color")));
          if (!c) throw ParseError("bad color in color record");
          agent->color = *c;
        }
        break;
      }
      case RecordKind::State: {
        if (completed_tick) throw DivergenceError(world.tick, "state recorded after completion");
        try {
          world = resolve_world(world, cfg.physics);
        } catch (const PhysicsFault& e) {
          throw DivergenceError(world.tick + 1, std::string("replay physics fault: ") + e.what());
        }
        const std::int64_t logged_tick = int_field(rec.payload, "tick");
        if (logged_tick != world.tick || rec.t_ms != world.t_ms) {
          throw DivergenceError(world.tick, "state record tick mismatch at tick " +
                                                std::to_string(world.tick));
        }
        compare_agents(world.tick, agents_from_json(rec.payload.at("agents")), world.agents);
        completion = update_completion(completion, world, cfg.objective, world.t_ms);
        if (completion.complete) completed_tick = world.tick;
        trajectory.push_back(world);
        break;
      }
      case RecordKind::ObjectiveComplete: {
        const std::int64_t tick = int_field(rec.payload, "tick");
        if (!completed_tick || *completed_tick != tick) {
          throw DivergenceError(tick, "logged completion at tick " + std::to_string(tick) +
                                          " not reproduced");
        }
        completion_logged = true;
        break;
      }
      default:
        break;
    }
  }
  if (completed_tick && !completion_logged && log.has_footer) {
    throw DivergenceError(*completed_tick, "replay completes at tick " +
                                               std::to_string(*completed_tick) +
                                               " but the log does not");
  }
  return trajectory;
}

std::optional<std::int64_t> task_duration_ms(const SessionLog& log) {
  const LogRecord& start = require_start(log);
  const LogRecord* done = log.find_first(RecordKind::ObjectiveComplete);
  if (done == nullptr) return std::nullopt;
  return done->t_ms - start.t_ms;
}

json MetricsReport::to_json() const {
  json paths = json::object();
  for (const auto& [id, len] : path_length) paths[std::to_string(id)] = len;
  json switches = json::object();
  for (const auto& [id, n] : color_switches) switches[std::to_string(id)] = n;
  return {
      {"task_duration_ms", task_duration_ms ? json(*task_duration_ms) : json("Incomplete")},
      {"path_length_px", paths},
      {"color_switches", switches},
      {"time_to_consensus_ms", time_to_consensus_ms ? json(*time_to_consensus_ms) : json(nullptr)},
      {"final_residual_px", final_residual ? json(*final_residual) : json(nullptr)},
      {"state_records", state_records},
  };
}

MetricsReport metrics(const SessionLog& log) {
  MetricsReport out;
  const LogRecord& start = require_start(log);
  out.task_duration_ms = task_duration_ms(log);

  std::map<AgentId, Vec2> last_pos;
  std::optional<std::int64_t> consensus_since;
  auto observe = [&](std::int64_t t, const std::vector<AgentState>& agents) {
    for (const auto& a : agents) {
      auto [it, fresh] = last_pos.try_emplace(a.id, a.pos);
      out.path_length.try_emplace(a.id, 0.0);
      out.color_switches.try_emplace(a.id, 0);
      if (!fresh) {
        out.path_length[a.id] += distance(it->second, a.pos);
        it->second = a.pos;
      }
    }
    const bool consensus =
        !agents.empty() && std::all_of(agents.begin(), agents.end(),
                                       [&](const AgentState& a) { return a.color == agents.front().color; });
    if (!consensus) {
      consensus_since.reset();
    } else if (!consensus_since) {
      consensus_since = t;
    }
  };

  observe(start.t_ms, agents_from_json(start.payload.at("agents")));
  std::vector<AgentState> last_state;
  for (const LogRecord& rec : log.records) {
    if (rec.kind == RecordKind::State) {
      last_state = agents_from_json(rec.payload.at("agents"));
      observe(rec.t_ms, last_state);
      ++out.state_records;
    } else if (rec.kind == RecordKind::Color) {
      ++out.color_switches[static_cast<AgentId>(int_field(rec.payload, "agent_id"))];
    }
  }
  if (consensus_since) out.time_to_consensus_ms = *consensus_since - start.t_ms;

  if (last_state.size() >= 3 && log.header.config.is_object()) {
    try {
      const InstanceConfig cfg = config_from_json(log.header.config);
      double residual = 0.0;
      for (const auto& a : last_state) {
        residual = std::max(residual, distance_to_pattern(a.pos, cfg.objective.pattern));
      }
      out.final_residual = residual;
    } catch (const ConfigError&) {
      // No usable objective in the header.
    }
  }
  return out;
}

std::string export_csv(const SessionLog& log) {
  std::string out = "t_ms,agent_id,x,y,color\n";
  char buf[128];
  for (const LogRecord& rec : log.records) {
    if (rec.kind != RecordKind::State) continue;
    for (const auto& a : agents_from_json(rec.payload.at("agents"))) {
      std::snprintf(buf, sizeof buf, "%lld,%d,%.17g,%.17g,%d\n", static_cast<long long>(rec.t_ms),
                    a.id, a.pos.x, a.pos.y, color_code(a.color));
      out += buf;
    }
  }
  return out;
}

std::map<std::string, std::string> split_by_player(const SessionLog& log) {
  std::map<AgentId, std::string> owner;
  for (const LogRecord& rec : log.records) {
    if (rec.kind == RecordKind::Join) {
      owner[static_cast<AgentId>(int_field(rec.payload, "agent_id"))] =
          rec.payload.at("player").get<std::string>();
    }
  }
  std::map<std::string, std::string> out;
  const std::string header = log.header.to_json().dump() + "\n";
  for (const auto& [id, player] : owner) out.try_emplace(player, header);

  for (const LogRecord& rec : log.records) {
    switch (rec.kind) {
      case RecordKind::Join:
      case RecordKind::Leave:
      case RecordKind::Input:
      case RecordKind::Color: {
        auto it = owner.find(static_cast<AgentId>(int_field(rec.payload, "agent_id")));
        if (it != owner.end()) out[it->second] += rec.to_json().dump() + "\n";
        break;
      }
      case RecordKind::State:
      case RecordKind::InstanceStart: {
        for (const auto& row : rec.payload.at("agents")) {
          auto it = owner.find(row.at(0).get<AgentId>());
          if (it == owner.end()) continue;
          LogRecord mine = rec;
          mine.payload["agents"] = json::array({row});
          out[it->second] += mine.to_json().dump() + "\n";
        }
        break;
      }
      default:
        for (auto& [player, text] : out) text += rec.to_json().dump() + "\n";
        break;
    }
  }
  return out;
}

}  // namespace swarm
