#pragma once

#include <cmath>

namespace swarm {

struct Vec2 {
  double x = 0.0;
  double y = 0.0;

  constexpr Vec2 operator+(Vec2 o) const { return {x + o.x, y + o.y}; }
  constexpr Vec2 operator-(Vec2 o) const { return {x - o.x, y - o.y}; }
  constexpr Vec2 operator*(double s) const { return {x * s, y * s}; }
  constexpr Vec2& operator+=(Vec2 o) {
    x += o.x;
    y += o.y;
    return *this;
  }
  constexpr Vec2& operator-=(Vec2 o) {
    x -= o.x;
    y -= o.y;
    return *this;
  }
  constexpr bool operator==(const Vec2&) const = default;
};

constexpr double dot(Vec2 a, Vec2 b) { return a.x * b.x + a.y * b.y; }
inline double norm(Vec2 v) { return std::hypot(v.x, v.y); }
inline double distance(Vec2 a, Vec2 b) { return norm(b - a); }

/// Axis-aligned rectangle, origin at its top-left corner (screen coordinates).
struct Rect {
  double x = 0.0;
  double y = 0.0;
  double w = 0.0;
  double h = 0.0;

  constexpr double right() const { return x + w; }
  constexpr double bottom() const { return y + h; }
  /// Closed containment: points on the edge count as inside.
  constexpr bool contains(Vec2 p) const {
    return p.x >= x && p.x <= right() && p.y >= y && p.y <= bottom();
  }
  constexpr bool operator==(const Rect&) const = default;
};

}  // namespace swarm
