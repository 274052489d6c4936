// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <optional>

namespace irshield {

struct Vec2 {
  double x = 0.0;
  double y = 0.0;

  constexpr Vec2 operator+(Vec2 o) const { return {x + o.x, y + o.y}; }
  constexpr Vec2 operator-(Vec2 o) const { return {x - o.x, y - o.y}; }
  constexpr Vec2 operator*(double s) const { return {x * s, y * s}; }
  constexpr Vec2 operator/(double s) const { return {x / s, y / s}; }
  constexpr Vec2 operator-() const { return {-x, -y}; }
  constexpr bool operator==(const Vec2&) const = default;
};

constexpr Vec2 operator*(double s, Vec2 v) { return v * s; }

constexpr double dot(Vec2 a, Vec2 b) { return a.x * b.x + a.y * b.y; }
constexpr double cross(Vec2 a, Vec2 b) { return a.x * b.y - a.y * b.x; }
inline double norm(Vec2 v) { return std::hypot(v.x, v.y); }
inline double distance(Vec2 a, Vec2 b) { return norm(a - b); }
inline Vec2 normalized(Vec2 v) { return v / norm(v); }
// Counter-clockwise rotation.
inline Vec2 rotated(Vec2 v, double radians) {
  const double c = std::cos(radians);
  const double s = std::sin(radians);
  return {c * v.x - s * v.y, s * v.x + c * v.y};
}
constexpr Vec2 perpendicular(Vec2 v) { return {-v.y, v.x}; }

struct Segment {
  Vec2 a;
  Vec2 b;
};

double distance_to_segment(Vec2 p, const Segment& s);

// True when the closed segments share at least one point.
bool segments_intersect(const Segment& s, const Segment& t);

// Intersection point of two segments when they cross at a single point.
std::optional<Vec2> intersection_point(const Segment& s, const Segment& t);

// Mirror image of p across the infinite line through the wall.
Vec2 mirror(Vec2 p, const Segment& wall);

// Signed side of p relative to the directed line a->b (>0 left, <0 right).
inline double side_of(Vec2 p, const Segment& s) { return cross(s.b - s.a, p - s.a); }

}  // namespace irshield
