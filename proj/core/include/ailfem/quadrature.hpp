#pragma once

#include <array>
#include <span>

#include "ailfem/geometry.hpp"

namespace ailfem {

struct QuadraturePoint {
  std::array<double, 3> barycentric;
  double weight;  // fraction of the triangle area; weights sum to 1
};

/// Symmetric 7-point rule, exact for polynomials of total degree <= 5.
std::span<const QuadraturePoint> degree5_rule();

inline Point2 map_to_triangle(const std::array<Point2, 3>& c, const std::array<double, 3>& b) {
  return {b[0] * c[0].x + b[1] * c[1].x + b[2] * c[2].x, b[0] * c[0].y + b[1] * c[1].y + b[2] * c[2].y};
}

/// Integral of f over the triangle with the degree-5 rule.
template <class F>
double integrate_triangle(const std::array<Point2, 3>& c, F&& f) {
  const double area = 0.5 * std::abs(twice_signed_area(c[0], c[1], c[2]));
  double sum = 0.0;
  for (const auto& q : degree5_rule()) sum += q.weight * f(map_to_triangle(c, q.barycentric));
  return area * sum;
}

}  // namespace ailfem
