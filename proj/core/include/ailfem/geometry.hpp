#pragma once

#include <cmath>
#include <cstdint>
#include <limits>

namespace ailfem {

using Index = std::uint32_t;
inline constexpr Index invalid_index = std::numeric_limits<Index>::max();

struct Point2 {
  double x = 0.0;
  double y = 0.0;

  friend bool operator==(const Point2&, const Point2&) = default;
};

using Vec2 = Point2;

inline constexpr Point2 operator+(Point2 a, Point2 b) { return {a.x + b.x, a.y + b.y}; }
inline constexpr Point2 operator-(Point2 a, Point2 b) { return {a.x - b.x, a.y - b.y}; }
inline constexpr Point2 operator*(double s, Point2 a) { return {s * a.x, s * a.y}; }
inline constexpr double dot(Vec2 a, Vec2 b) { return a.x * b.x + a.y * b.y; }
inline constexpr double cross(Vec2 a, Vec2 b) { return a.x * b.y - a.y * b.x; }
inline double norm(Vec2 a) { return std::hypot(a.x, a.y); }
inline constexpr Point2 midpoint(Point2 a, Point2 b) { return {0.5 * (a.x + b.x), 0.5 * (a.y + b.y)}; }

/// Twice the signed area of the triangle (a, b, c); positive for counterclockwise order.
inline constexpr double twice_signed_area(Point2 a, Point2 b, Point2 c) { return cross(b - a, c - a); }

}  // namespace ailfem
