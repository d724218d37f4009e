#include "swarm/core_model.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "swarm/errors.hpp"

namespace swarm {

std::optional<AgentColor> color_from_code(int code) {
  if (code < 1 || code > 3) return std::nullopt;
  return static_cast<AgentColor>(code);
}

std::optional<AgentColor> color_from_key(std::string_view key) {
  if (key == "A") return AgentColor::C1;
  if (key == "S") return AgentColor::C2;
  if (key == "D") return AgentColor::C3;
  return std::nullopt;
}

std::string_view color_key(AgentColor c) {
  switch (c) {
    case AgentColor::C1: return "A";
    case AgentColor::C2: return "S";
    case AgentColor::C3: return "D";
  }
  return "?";
}

std::string_view key_name(MoveKey k) {
  switch (k) {
    case MoveKey::Up: return "Up";
    case MoveKey::Down: return "Down";
    case MoveKey::Left: return "Left";
    case MoveKey::Right: return "Right";
  }
  return "?";
}

std::optional<MoveKey> key_from_name(std::string_view name) {
  if (name == "Up") return MoveKey::Up;
  if (name == "Down") return MoveKey::Down;
  if (name == "Left") return MoveKey::Left;
  if (name == "Right") return MoveKey::Right;
  return std::nullopt;
}

std::vector<MoveKey> MotionIntent::keys() const {
  std::vector<MoveKey> out;
  for (MoveKey k : {MoveKey::Up, MoveKey::Down, MoveKey::Left, MoveKey::Right}) {
    if (pressed(k)) out.push_back(k);
  }
  return out;
}

std::int64_t PhysicsParams::tick_period_ms() const {
  return static_cast<std::int64_t>(std::llround(1000.0 / tick_rate));
}

std::vector<std::string> PhysicsParams::violations() const {
  std::vector<std::string> out;
  if (!(speed > 0.0)) out.emplace_back("physics.speed must be > 0");
  if (!(agent_radius > 0.0)) out.emplace_back("physics.agent_radius must be > 0");
  if (!(tick_rate > 0.0)) {
    out.emplace_back("physics.tick_rate must be > 0");
    return out;
  }
  if (!(contact_epsilon > 0.0)) out.emplace_back("physics.contact_epsilon must be > 0");
  if (!(step_length() < agent_radius)) {
    out.emplace_back("physics.speed / physics.tick_rate must be < physics.agent_radius");
  }
  const double period = 1000.0 / tick_rate;
  if (std::abs(period - std::round(period)) > 1e-9) {
    out.emplace_back("physics.tick_rate must give a whole-millisecond tick period");
  }
  return out;
}

const AgentState* WorldState::find(AgentId id) const {
  auto it = std::lower_bound(agents.begin(), agents.end(), id,
                             [](const AgentState& a, AgentId v) { return a.id < v; });
  return (it != agents.end() && it->id == id) ? &*it : nullptr;
}

AgentState* WorldState::find(AgentId id) {
  return const_cast<AgentState*>(std::as_const(*this).find(id));
}

std::optional<Vec2> direction_from_intent(MotionIntent intent) {
  int dx = 0;
  int dy = 0;
  if (intent.pressed(MoveKey::Left)) --dx;
  if (intent.pressed(MoveKey::Right)) ++dx;
  if (intent.pressed(MoveKey::Up)) --dy;
  if (intent.pressed(MoveKey::Down)) ++dy;
  if (dx == 0 && dy == 0) return std::nullopt;
  if (dx != 0 && dy != 0) {
    constexpr double kHalfSqrt2 = 0.70710678118654752440;
    return Vec2{dx * kHalfSqrt2, dy * kHalfSqrt2};
  }
  return Vec2{static_cast<double>(dx), static_cast<double>(dy)};
}

Vec2 integrate_agent(Vec2 pos, std::optional<Vec2> dir, const PhysicsParams& params) {
  if (!dir) return pos;
  if (std::abs(norm(*dir) - 1.0) >= 1e-9) {
    throw ContractViolation("integrate_agent: direction is not unit length");
  }
  return pos + *dir * params.step_length();
}

namespace {

void clamp_to_walls(std::vector<AgentState>& agents, const Arena& arena, double r) {
  for (auto& a : agents) {
    a.pos.x = std::clamp(a.pos.x, r, arena.width - r);
    a.pos.y = std::clamp(a.pos.y, r, arena.height - r);
  }
}

// One Gauss-Seidel sweep over pairs in ascending (i, j) order. Returns the
// number of pairs that were pushed apart.
int separation_pass(std::vector<AgentState>& agents, const PhysicsParams& params) {
  const double contact = 2.0 * params.agent_radius;
  const double threshold = contact - params.contact_epsilon;
  int pushes = 0;
  for (std::size_t i = 0; i < agents.size(); ++i) {
    for (std::size_t j = i + 1; j < agents.size(); ++j) {
      Vec2 delta = agents[j].pos - agents[i].pos;
      const double d = norm(delta);
      if (d >= threshold) continue;
      Vec2 axis = d > 0.0 ? delta * (1.0 / d) : Vec2{1.0, 0.0};
      const double half = 0.5 * (contact - d);
      agents[i].pos -= axis * half;
      agents[j].pos += axis * half;
      ++pushes;
    }
  }
  return pushes;
}

bool try_resolve(std::vector<AgentState>& agents, const Arena& arena, const PhysicsParams& params,
                 int& iterations) {
  for (int iter = 1; iter <= kMaxResolveIterations; ++iter) {
    clamp_to_walls(agents, arena, params.agent_radius);
    if (separation_pass(agents, params) == 0) {
      iterations = iter;
      return true;
    }
  }
  return false;
}

std::vector<bool> overlapping(const std::vector<AgentState>& agents, const PhysicsParams& params) {
  const double threshold = 2.0 * params.agent_radius - params.contact_epsilon;
  std::vector<bool> out(agents.size(), false);
  for (std::size_t i = 0; i < agents.size(); ++i) {
    for (std::size_t j = i + 1; j < agents.size(); ++j) {
      if (distance(agents[i].pos, agents[j].pos) < threshold) out[i] = out[j] = true;
    }
  }
  return out;
}

[[noreturn]] void not_converged(std::size_t n) {
  std::ostringstream msg;
  msg << "collision resolution did not converge in " << kMaxResolveIterations
      << " iterations with " << n << " agents";
  throw PhysicsFault(msg.str());
}

}  // namespace

int resolve_contacts(std::vector<AgentState>& agents, const Arena& arena,
                     const PhysicsParams& params) {
  int iterations = 0;
  if (!try_resolve(agents, arena, params, iterations)) not_converged(agents.size());
  return iterations;
}

WorldState resolve_world(const WorldState& world, const PhysicsParams& params) {
  WorldState next = world;
  for (auto& a : next.agents) {
    a.pos = integrate_agent(a.pos, direction_from_intent(a.intent), params);
  }
  const std::vector<AgentState> moved = next.agents;
  int iterations = 0;
  // A jammed cluster can need hundreds of projection sweeps. When the
  // bounded solve fails, the agents left overlapping are blocked for this
  // tick (start from where they were) and the solve is rerun; the blocked
  // set only grows, so at worst this is the previous, valid, world.
  std::vector<bool> blocked(next.agents.size(), false);
  while (!try_resolve(next.agents, next.arena, params, iterations)) {
    const auto stuck = overlapping(next.agents, params);
    bool grew = false;
    for (std::size_t i = 0; i < stuck.size(); ++i) {
      if (stuck[i] && !blocked[i]) blocked[i] = grew = true;
    }
    if (!grew) {
      if (std::all_of(blocked.begin(), blocked.end(), [](bool b) { return b; })) {
        not_converged(next.agents.size());
      }
      std::fill(blocked.begin(), blocked.end(), true);
    }
    for (std::size_t i = 0; i < next.agents.size(); ++i) {
      next.agents[i].pos = blocked[i] ? world.agents[i].pos : moved[i].pos;
    }
  }
  next.tick = world.tick + 1;
  next.t_ms = next.tick * params.tick_period_ms();
  return next;
}

bool world_is_valid(const WorldState& world, const PhysicsParams& params) {
  const double r = params.agent_radius;
  const double min_sep = 2.0 * r - params.contact_epsilon;
  for (std::size_t i = 0; i < world.agents.size(); ++i) {
    const Vec2 p = world.agents[i].pos;
    if (p.x < r || p.x > world.arena.width - r || p.y < r || p.y > world.arena.height - r) {
      return false;
    }
    for (std::size_t j = i + 1; j < world.agents.size(); ++j) {
      if (distance(p, world.agents[j].pos) < min_sep) return false;
    }
  }
  return true;
}

}  // namespace swarm
