#pragma once

// Neighborhood View (occluded polar range scan) and Overhead View (partial,
// rate-limited snapshot of the arena).

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "swarm/core_model.hpp"

namespace swarm {

struct SensingParams {
  double scan_range = 150.0;
  int n_rays = 360;
  double overhead_rate = 1.0;  // Hz
  /// Overhead field of view. Unset means the centered 80% x 80% default.
  std::optional<Rect> fov;

  Rect fov_for(const Arena& arena) const;
  std::vector<std::string> violations(const Arena& arena, const PhysicsParams& physics) const;

  bool operator==(const SensingParams&) const = default;
};

enum class HitKind : std::uint8_t { None = 0, Wall = 1, Agent = 2 };

struct RayHit {
  double distance = 0.0;
  HitKind kind = HitKind::None;
  AgentColor color = AgentColor::C1;  // meaningful only for HitKind::Agent

  /// Wire code: 0 none, 1 wall, 2..4 agent color C1..C3.
  int wire_code() const;
  static RayHit from_wire(double distance, int code);

  bool operator==(const RayHit&) const = default;
};

struct ScanFrame {
  AgentId observer = 0;
  std::int64_t tick = 0;
  std::vector<RayHit> hits;  // index k is bearing 2*pi*k/n_rays
  AgentColor self_color = AgentColor::C1;
};

struct Blip {
  Vec2 pos;
  AgentColor color = AgentColor::C1;
  bool operator==(const Blip&) const = default;
};

struct OverheadFrame {
  std::int64_t snapshot_tick = 0;
  Rect fov;
  std::vector<Blip> blips;
};

double bearing_of(int index, int n_rays);

/// Nearest wall or foreign agent disc along `bearing` within scan range.
/// Agents whose id equals `self` are skipped. Wall wins an exact tie.
RayHit cast_ray(const WorldState& world, Vec2 origin, double bearing,
                const SensingParams& params, const PhysicsParams& physics,
                std::optional<AgentId> self = std::nullopt);

/// Full n_rays scan around agent `id`. Throws CapabilityDenied when
/// `local_sensing_enabled` is false and ContractViolation for unknown ids.
ScanFrame neighborhood_scan(const WorldState& world, AgentId id, const SensingParams& params,
                            const PhysicsParams& physics, bool local_sensing_enabled = true);

/// Agents whose center lies in the field of view (edges inclusive).
OverheadFrame overhead_snapshot(const WorldState& world, const SensingParams& params,
                                bool global_sensing_enabled = true);

bool overhead_due(std::int64_t tick, std::int64_t last_snapshot_tick,
                  const SensingParams& params, const PhysicsParams& physics);

/// Ticks between overhead captures, rounded up.
std::int64_t overhead_interval_ticks(const SensingParams& params, const PhysicsParams& physics);

}  // namespace swarm
