#pragma once

// Arena, agent kinematics and collision resolution. Screen coordinates:
// origin top-left, +x east, +y south.

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "swarm/geometry.hpp"

namespace swarm {

struct Arena {
  double width = 1200.0;
  double height = 800.0;

  bool operator==(const Arena&) const = default;
};

/// The three selectable colors, bound to keys A, S, D. Ordered C1 < C2 < C3.
enum class AgentColor : std::uint8_t { C1 = 1, C2 = 2, C3 = 3 };

constexpr int color_code(AgentColor c) { return static_cast<int>(c); }
std::optional<AgentColor> color_from_code(int code);
std::optional<AgentColor> color_from_key(std::string_view key);
std::string_view color_key(AgentColor c);

enum class MoveKey : std::uint8_t { Up = 0, Down = 1, Left = 2, Right = 3 };

std::string_view key_name(MoveKey k);
std::optional<MoveKey> key_from_name(std::string_view name);

/// The set of arrow keys currently held. Any subset is valid, including
/// conflicting pairs.
class MotionIntent {
 public:
  constexpr MotionIntent() = default;
  MotionIntent(std::initializer_list<MoveKey> keys) {
    for (MoveKey k : keys) press(k);
  }

  constexpr void press(MoveKey k) { bits_ |= bit(k); }
  constexpr void release(MoveKey k) { bits_ &= static_cast<std::uint8_t>(~bit(k)); }
  constexpr bool pressed(MoveKey k) const { return (bits_ & bit(k)) != 0; }
  constexpr bool empty() const { return bits_ == 0; }
  constexpr std::uint8_t bits() const { return bits_; }

  /// Pressed keys in canonical order Up, Down, Left, Right.
  std::vector<MoveKey> keys() const;

  constexpr bool operator==(const MotionIntent&) const = default;

 private:
  static constexpr std::uint8_t bit(MoveKey k) {
    return static_cast<std::uint8_t>(1u << static_cast<unsigned>(k));
  }
  std::uint8_t bits_ = 0;
};

using AgentId = std::int32_t;

struct AgentState {
  AgentId id = 0;
  Vec2 pos;
  AgentColor color = AgentColor::C1;
  MotionIntent intent;
  std::string player_token_hash;

  bool operator==(const AgentState&) const = default;
};

struct PhysicsParams {
  double speed = 18.0;         // px/s
  double agent_radius = 10.0;  // px
  double tick_rate = 10.0;     // Hz
  double contact_epsilon = 1e-6;

  double step_length() const { return speed / tick_rate; }
  /// Tick period in whole milliseconds.
  std::int64_t tick_period_ms() const;

  /// Empty when valid; otherwise one message per violated invariant.
  std::vector<std::string> violations() const;

  bool operator==(const PhysicsParams&) const = default;
};

struct WorldState {
  Arena arena;
  std::vector<AgentState> agents;  // ascending agent id
  std::int64_t tick = 0;
  std::int64_t t_ms = 0;

  const AgentState* find(AgentId id) const;
  AgentState* find(AgentId id);
};

inline constexpr int kMaxResolveIterations = 16;

/// Opposing keys cancel per axis; diagonals are unit length.
std::optional<Vec2> direction_from_intent(MotionIntent intent);

/// One tick of straight-line motion. Throws ContractViolation if `dir` is
/// not unit length. No wall clamping.
Vec2 integrate_agent(Vec2 pos, std::optional<Vec2> dir, const PhysicsParams& params);

/// Moves every agent by its intent, then alternates wall clamping with an
/// ordered pairwise separation pass until clean. If that takes more than
/// kMaxResolveIterations passes, agents still overlapping are held at their
/// previous positions for this tick and the solve is repeated. Throws
/// PhysicsFault only if the input world itself is invalid. Advances tick and
/// t_ms by one step.
WorldState resolve_world(const WorldState& world, const PhysicsParams& params);

/// Collision/containment part of resolve_world without motion or clock.
/// Returns the number of iterations used.
int resolve_contacts(std::vector<AgentState>& agents, const Arena& arena,
                     const PhysicsParams& params);

/// True when no pair overlaps beyond contact_epsilon and all centers are
/// inside the wall-clamped region.
bool world_is_valid(const WorldState& world, const PhysicsParams& params);

}  // namespace swarm
