// SPDX-License-Identifier: Apache-2.0

#include "irshield/geometry.hpp"

#include <algorithm>

namespace irshield {

double distance_to_segment(Vec2 p, const Segment& s) {
  const Vec2 d = s.b - s.a;
  const double len2 = dot(d, d);
  if (len2 == 0.0) return distance(p, s.a);
  const double t = std::clamp(dot(p - s.a, d) / len2, 0.0, 1.0);
  return distance(p, s.a + d * t);
}

namespace {

bool on_segment(Vec2 p, const Segment& s) {
  return std::min(s.a.x, s.b.x) <= p.x && p.x <= std::max(s.a.x, s.b.x) &&
         std::min(s.a.y, s.b.y) <= p.y && p.y <= std::max(s.a.y, s.b.y);
}

int sign(double v) { return (v > 0.0) - (v < 0.0); }

}  // namespace

bool segments_intersect(const Segment& s, const Segment& t) {
  const int d1 = sign(side_of(t.a, s));
  const int d2 = sign(side_of(t.b, s));
  const int d3 = sign(side_of(s.a, t));
  const int d4 = sign(side_of(s.b, t));
  if (d1 * d2 < 0 && d3 * d4 < 0) return true;
  if (d1 == 0 && on_segment(t.a, s)) return true;
  if (d2 == 0 && on_segment(t.b, s)) return true;
  if (d3 == 0 && on_segment(s.a, t)) return true;
  if (d4 == 0 && on_segment(s.b, t)) return true;
  return false;
}

std::optional<Vec2> intersection_point(const Segment& s, const Segment& t) {
  const Vec2 r = s.b - s.a;
  const Vec2 q = t.b - t.a;
  const double denom = cross(r, q);
  if (denom == 0.0) return std::nullopt;
  const double u = cross(t.a - s.a, q) / denom;
  const double v = cross(t.a - s.a, r) / denom;
  if (u < 0.0 || u > 1.0 || v < 0.0 || v > 1.0) return std::nullopt;
  return s.a + r * u;
}

Vec2 mirror(Vec2 p, const Segment& wall) {
  const Vec2 d = normalized(wall.b - wall.a);
  const Vec2 rel = p - wall.a;
  const Vec2 along = d * dot(rel, d);
  return wall.a + along * 2.0 - rel;
}

}  // namespace irshield
