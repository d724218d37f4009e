#include "swarm/sensing.hpp"

#include <cmath>
#include <limits>
#include <numbers>

#include "swarm/errors.hpp"

namespace swarm {

Rect SensingParams::fov_for(const Arena& arena) const {
  if (fov) return *fov;
  return Rect{0.1 * arena.width, 0.1 * arena.height, 0.8 * arena.width, 0.8 * arena.height};
}

std::vector<std::string> SensingParams::violations(const Arena& arena,
                                                   const PhysicsParams& physics) const {
  std::vector<std::string> out;
  if (!(scan_range > physics.agent_radius)) {
    out.emplace_back("sensing.scan_range must be > physics.agent_radius");
  }
  if (n_rays < 8) out.emplace_back("sensing.n_rays must be >= 8");
  if (!(overhead_rate > 0.0) || overhead_rate > physics.tick_rate) {
    out.emplace_back("sensing.overhead_rate must be in (0, physics.tick_rate]");
  }
  const Rect f = fov_for(arena);
  if (!(f.w > 0.0 && f.h > 0.0) || f.x < 0.0 || f.y < 0.0 || f.right() > arena.width ||
      f.bottom() > arena.height) {
    out.emplace_back("sensing.fov must be a non-empty rectangle inside the arena");
  }
  return out;
}

int RayHit::wire_code() const {
  switch (kind) {
    case HitKind::None: return 0;
    case HitKind::Wall: return 1;
    case HitKind::Agent: return 1 + color_code(color);
  }
  return 0;
}

RayHit RayHit::from_wire(double distance, int code) {
  RayHit hit{distance, HitKind::None, AgentColor::C1};
  if (code == 1) {
    hit.kind = HitKind::Wall;
  } else if (auto c = color_from_code(code - 1); code >= 2 && c) {
    hit.kind = HitKind::Agent;
    hit.color = *c;
  } else if (code != 0) {
    throw ParseError("unknown ray hit code " + std::to_string(code));
  }
  return hit;
}

double bearing_of(int index, int n_rays) {
  return 2.0 * std::numbers::pi * static_cast<double>(index) / static_cast<double>(n_rays);
}

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double wall_distance(Vec2 o, Vec2 d, const Arena& arena) {
  double t = kInf;
  if (d.x > 0.0) t = std::min(t, (arena.width - o.x) / d.x);
  if (d.x < 0.0) t = std::min(t, -o.x / d.x);
  if (d.y > 0.0) t = std::min(t, (arena.height - o.y) / d.y);
  if (d.y < 0.0) t = std::min(t, -o.y / d.y);
  return t;
}

// Nearest non-negative entry distance of the ray into a disc, or infinity.
double disc_distance(Vec2 o, Vec2 d, Vec2 center, double radius) {
  const Vec2 oc = center - o;
  const double c = dot(oc, oc) - radius * radius;
  if (c <= 0.0) return 0.0;
  const double b = dot(oc, d);
  if (b <= 0.0) return kInf;
  // Grazing counts as contact; a tangent ray may round slightly negative.
  const double disc = b * b - c;
  if (disc < -1e-9) return kInf;
  return c / (b + std::sqrt(std::max(disc, 0.0)));
}

}  // namespace

RayHit cast_ray(const WorldState& world, Vec2 origin, double bearing,
                const SensingParams& params, const PhysicsParams& physics,
                std::optional<AgentId> self) {
  const Arena& arena = world.arena;
  if (!(origin.x >= 0.0 && origin.x <= arena.width && origin.y >= 0.0 &&
        origin.y <= arena.height)) {
    throw ContractViolation("cast_ray: origin outside arena");
  }
  const Vec2 dir{std::cos(bearing), std::sin(bearing)};
  const double r = physics.agent_radius;

  double best_agent = kInf;
  AgentColor best_color = AgentColor::C1;
  for (const auto& a : world.agents) {
    if (self && a.id == *self) continue;
    const double t = disc_distance(origin, dir, a.pos, r);
    if (t < best_agent) {
      best_agent = t;
      best_color = a.color;
    }
  }
  const double wall = wall_distance(origin, dir, arena);

  RayHit hit{params.scan_range, HitKind::None, AgentColor::C1};
  if (best_agent < wall) {
    if (best_agent < params.scan_range) hit = {best_agent, HitKind::Agent, best_color};
  } else if (wall < params.scan_range) {
    hit = {wall, HitKind::Wall, AgentColor::C1};
  }
  return hit;
}

ScanFrame neighborhood_scan(const WorldState& world, AgentId id, const SensingParams& params,
                            const PhysicsParams& physics, bool local_sensing_enabled) {
  if (!local_sensing_enabled) throw CapabilityDenied("local sensing disabled");
  const AgentState* self = world.find(id);
  if (self == nullptr) throw ContractViolation("neighborhood_scan: unknown agent");

  ScanFrame frame;
  frame.observer = id;
  frame.tick = world.tick;
  frame.self_color = self->color;
  frame.hits.reserve(static_cast<std::size_t>(params.n_rays));
  for (int k = 0; k < params.n_rays; ++k) {
    frame.hits.push_back(
        cast_ray(world, self->pos, bearing_of(k, params.n_rays), params, physics, id));
  }
  return frame;
}

OverheadFrame overhead_snapshot(const WorldState& world, const SensingParams& params,
                                bool global_sensing_enabled) {
  if (!global_sensing_enabled) throw CapabilityDenied("global sensing disabled");
  OverheadFrame frame;
  frame.snapshot_tick = world.tick;
  frame.fov = params.fov_for(world.arena);
  for (const auto& a : world.agents) {
    if (frame.fov.contains(a.pos)) frame.blips.push_back({a.pos, a.color});
  }
  return frame;
}

std::int64_t overhead_interval_ticks(const SensingParams& params, const PhysicsParams& physics) {
  const double ratio = physics.tick_rate / params.overhead_rate;
  return static_cast<std::int64_t>(std::ceil(ratio - 1e-9));
}

bool overhead_due(std::int64_t tick, std::int64_t last_snapshot_tick,
                  const SensingParams& params, const PhysicsParams& physics) {
  return tick - last_snapshot_tick >= overhead_interval_ticks(params, physics);
}

}  // namespace swarm
