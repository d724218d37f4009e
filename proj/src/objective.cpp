#include "swarm/objective.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "swarm/errors.hpp"

namespace swarm {

namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

// Rectangle corners in arc-length order: top-left, top-right,
// bottom-right, bottom-left.
std::vector<Vec2> rectangle_loop(const RectanglePerimeter& r) {
  const double hw = 0.5 * r.width;
  const double hh = 0.5 * r.height;
  const Vec2 c = r.center;
  return {{c.x - hw, c.y - hh}, {c.x + hw, c.y - hh}, {c.x + hw, c.y + hh},
          {c.x - hw, c.y + hh}, {c.x - hw, c.y - hh}};
}

struct SegmentProjection {
  double distance = std::numeric_limits<double>::infinity();
  double arc = 0.0;
};

// Nearest point over a polyline; earliest segment wins ties.
SegmentProjection project_polyline(Vec2 p, const std::vector<Vec2>& pts) {
  SegmentProjection best;
  double walked = 0.0;
  for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
    const Vec2 a = pts[i];
    const Vec2 ab = pts[i + 1] - a;
    const double len2 = dot(ab, ab);
    const double len = std::sqrt(len2);
    double u = len2 > 0.0 ? std::clamp(dot(p - a, ab) / len2, 0.0, 1.0) : 0.0;
    const double d = distance(p, a + ab * u);
    if (d < best.distance) best = {d, walked + u * len};
    walked += len;
  }
  return best;
}

double polyline_length(const std::vector<Vec2>& pts) {
  double total = 0.0;
  for (std::size_t i = 0; i + 1 < pts.size(); ++i) total += distance(pts[i], pts[i + 1]);
  return total;
}

Vec2 polyline_point(const std::vector<Vec2>& pts, double s) {
  for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
    const double len = distance(pts[i], pts[i + 1]);
    if (s <= len || i + 2 == pts.size()) {
      const double u = len > 0.0 ? std::clamp(s / len, 0.0, 1.0) : 0.0;
      return pts[i] + (pts[i + 1] - pts[i]) * u;
    }
    s -= len;
  }
  return pts.empty() ? Vec2{} : pts.front();
}

}  // namespace

std::vector<std::string> FormationSpec::violations() const {
  std::vector<std::string> out;
  if (!(perimeter_length(pattern) > 0.0)) out.emplace_back("objective.pattern has zero length");
  if (const auto* r = std::get_if<RectanglePerimeter>(&pattern)) {
    if (r->width < 0.0 || r->height < 0.0) {
      out.emplace_back("objective.pattern rectangle dimensions must be >= 0");
    }
  }
  if (const auto* c = std::get_if<CirclePerimeter>(&pattern); c && c->radius < 0.0) {
    out.emplace_back("objective.pattern circle radius must be >= 0");
  }
  if (!(dist_tol > 0.0)) out.emplace_back("objective.dist_tol must be > 0");
  if (!(max_gap_factor > 0.0)) out.emplace_back("objective.max_gap_factor must be > 0");
  if (hold_ms < 0) out.emplace_back("objective.hold_ms must be >= 0");
  return out;
}

double perimeter_length(const Pattern& pattern) {
  return std::visit(
      Overloaded{
          [](const RectanglePerimeter& r) { return 2.0 * (r.width + r.height); },
          [](const CirclePerimeter& c) { return 2.0 * std::numbers::pi * c.radius; },
          [](const SegmentChain& s) { return polyline_length(s.points); },
      },
      pattern);
}

double distance_to_pattern(Vec2 p, const Pattern& pattern) {
  return std::visit(
      Overloaded{
          [p](const RectanglePerimeter& r) {
            const double dx = std::abs(p.x - r.center.x);
            const double dy = std::abs(p.y - r.center.y);
            const double hw = 0.5 * r.width;
            const double hh = 0.5 * r.height;
            if (dx <= hw && dy <= hh) return std::min(hw - dx, hh - dy);
            return std::hypot(std::max(dx - hw, 0.0), std::max(dy - hh, 0.0));
          },
          [p](const CirclePerimeter& c) { return std::abs(distance(p, c.center) - c.radius); },
          [p](const SegmentChain& s) {
            if (s.points.size() == 1) return distance(p, s.points.front());
            return project_polyline(p, s.points).distance;
          },
      },
      pattern);
}

double arc_position(Vec2 p, const Pattern& pattern) {
  const double total = perimeter_length(pattern);
  double s = std::visit(
      Overloaded{
          [p](const RectanglePerimeter& r) { return project_polyline(p, rectangle_loop(r)).arc; },
          [p](const CirclePerimeter& c) {
            const Vec2 v = p - c.center;
            if (v.x == 0.0 && v.y == 0.0) return 0.0;
            double angle = std::atan2(v.y, v.x);
            if (angle < 0.0) angle += 2.0 * std::numbers::pi;
            return angle * c.radius;
          },
          [p](const SegmentChain& s) { return project_polyline(p, s.points).arc; },
      },
      pattern);
  if (total > 0.0 && s >= total) s -= total;
  return s;
}

Vec2 point_at_arc(const Pattern& pattern, double s) {
  const double total = perimeter_length(pattern);
  if (total > 0.0) {
    s = std::fmod(s, total);
    if (s < 0.0) s += total;
  }
  return std::visit(
      Overloaded{
          [s](const RectanglePerimeter& r) { return polyline_point(rectangle_loop(r), s); },
          [s](const CirclePerimeter& c) {
            const double angle = c.radius > 0.0 ? s / c.radius : 0.0;
            return c.center + Vec2{std::cos(angle), std::sin(angle)} * c.radius;
          },
          [s](const SegmentChain& chain) { return polyline_point(chain.points, s); },
      },
      pattern);
}

FormationCheck check_formation(const std::vector<Vec2>& positions, const FormationSpec& spec) {
  if (positions.size() < 3) throw SpecInfeasible("formation check needs at least 3 agents");

  FormationCheck out;
  std::vector<double> arcs;
  arcs.reserve(positions.size());
  for (const Vec2 p : positions) {
    out.residual = std::max(out.residual, distance_to_pattern(p, spec.pattern));
    arcs.push_back(arc_position(p, spec.pattern));
  }
  std::sort(arcs.begin(), arcs.end());

  const double total = perimeter_length(spec.pattern);
  out.max_gap = total - arcs.back() + arcs.front();
  for (std::size_t i = 1; i < arcs.size(); ++i) {
    out.max_gap = std::max(out.max_gap, arcs[i] - arcs[i - 1]);
  }
  const double allowed =
      spec.max_gap_factor * total / static_cast<double>(positions.size());
  // Slack absorbs rounding in the arc-length sums for exact equal spacing.
  const double slack = 1e-9 * std::max(1.0, total);
  out.satisfied = out.residual <= spec.dist_tol && out.max_gap <= allowed + slack;
  return out;
}

FormationCheck check_formation(const WorldState& world, const FormationSpec& spec) {
  std::vector<Vec2> positions;
  positions.reserve(world.agents.size());
  for (const auto& a : world.agents) positions.push_back(a.pos);
  return check_formation(positions, spec);
}

bool check_consensus(const WorldState& world) {
  return std::all_of(world.agents.begin(), world.agents.end(), [&](const AgentState& a) {
    return a.color == world.agents.front().color;
  });
}

CompletionStatus update_completion(const CompletionStatus& status, const WorldState& world,
                                   const FormationSpec& spec, std::int64_t t_ms) {
  CompletionStatus next = status;
  bool formed = false;
  if (world.agents.size() >= 3) {
    const FormationCheck fc = check_formation(world, spec);
    formed = fc.satisfied;
    next.residual = fc.residual;
  }
  next.consensus = !world.agents.empty() && check_consensus(world);
  next.satisfied_now = formed && (!spec.require_color_consensus || next.consensus);

  if (next.satisfied_now) {
    if (!next.satisfied_since_ms) next.satisfied_since_ms = t_ms;
  } else {
    next.satisfied_since_ms.reset();
  }
  if (!next.complete && next.satisfied_since_ms &&
      t_ms - *next.satisfied_since_ms >= spec.hold_ms) {
    next.complete = true;
  }
  return next;
}

std::vector<Vec2> equally_spaced_slots(const Pattern& pattern, int count) {
  std::vector<Vec2> out;
  const double total = perimeter_length(pattern);
  for (int i = 0; i < count; ++i) {
    out.push_back(point_at_arc(pattern, total * static_cast<double>(i) / count));
  }
  return out;
}

}  // namespace swarm
