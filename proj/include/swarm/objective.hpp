#pragma once

// Formation objectives: target patterns, the completion test and its
// hold-time debounce.

#include <cstdint>
#include <optional>
#include <variant>
#include <vector>

#include "swarm/core_model.hpp"

namespace swarm {

struct RectanglePerimeter {
  Vec2 center;
  double width = 0.0;
  double height = 0.0;
  bool operator==(const RectanglePerimeter&) const = default;
};

struct CirclePerimeter {
  Vec2 center;
  double radius = 0.0;
  bool operator==(const CirclePerimeter&) const = default;
};

/// Open polyline through `points`.
struct SegmentChain {
  std::vector<Vec2> points;
  bool operator==(const SegmentChain&) const = default;
};

using Pattern = std::variant<RectanglePerimeter, CirclePerimeter, SegmentChain>;

struct FormationSpec {
  Pattern pattern = RectanglePerimeter{{600.0, 400.0}, 600.0, 400.0};
  double dist_tol = 20.0;
  double max_gap_factor = 2.0;
  bool require_color_consensus = false;
  std::int64_t hold_ms = 3000;

  std::vector<std::string> violations() const;
  bool operator==(const FormationSpec&) const = default;
};

struct FormationCheck {
  bool satisfied = false;
  double residual = 0.0;  // max agent distance to the pattern
  double max_gap = 0.0;   // largest arc-length gap between neighbours
};

struct CompletionStatus {
  bool satisfied_now = false;
  std::optional<std::int64_t> satisfied_since_ms;
  bool complete = false;
  double residual = 0.0;
  bool consensus = false;
};

double perimeter_length(const Pattern& pattern);

/// Euclidean distance from `p` to the nearest point on the pattern curve.
double distance_to_pattern(Vec2 p, const Pattern& pattern);

/// Arc-length coordinate in [0, perimeter) of the pattern point nearest `p`.
/// Rectangles start at the top-left corner and run clockwise on screen.
double arc_position(Vec2 p, const Pattern& pattern);

/// Pattern point at arc length `s` (wrapped into [0, perimeter)).
Vec2 point_at_arc(const Pattern& pattern, double s);

/// Throws SpecInfeasible for fewer than three positions.
FormationCheck check_formation(const std::vector<Vec2>& positions, const FormationSpec& spec);
FormationCheck check_formation(const WorldState& world, const FormationSpec& spec);

bool check_consensus(const WorldState& world);

/// Advance the debounce by one tick. Worlds with fewer than three agents
/// never satisfy the objective.
CompletionStatus update_completion(const CompletionStatus& status, const WorldState& world,
                                   const FormationSpec& spec, std::int64_t t_ms);

/// `count` targets equally spaced along the pattern, starting at arc 0.
std::vector<Vec2> equally_spaced_slots(const Pattern& pattern, int count);

}  // namespace swarm
