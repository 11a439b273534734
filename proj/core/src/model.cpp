#include "ailfem/model.hpp"

#include <cmath>
#include <numbers>

#include "ailfem/errors.hpp"

namespace ailfem {

NonlinearModel default_model() {
  NonlinearModel m;
  m.name = "exp";
  m.mu = [](double t) { return 1.0 + std::exp(-t); };
  m.mu_prime = [](double t) { return -std::exp(-t); };
  // -expm1(-s) = 1 - e^{-s} without cancellation for small s.
  m.psi = [](double s) { return 0.5 * (s - std::expm1(-s)); };
  m.m_mu = 1.0 - 2.0 * std::exp(-1.5);
  m.M_mu = 2.0;
  m.mu_inf = 1.0;
  m.mu_sup = 2.0;
  return m;
}

NonlinearModel constant_model(double c) {
  if (!(c > 0.0)) throw InputError("constant_model: coefficient must be positive");
  NonlinearModel m;
  m.name = "constant";
  m.mu = [c](double) { return c; };
  m.mu_prime = [](double) { return 0.0; };
  m.psi = [c](double s) { return 0.5 * c * s; };
  m.m_mu = c;
  m.M_mu = c;
  m.mu_inf = c;
  m.mu_sup = c;
  return m;
}

double flux_divergence_load(const NonlinearModel& model, Vec2 g, const Hessian2& h) {
  const double s = dot(g, g);
  const double laplace = h.xx + h.yy;
  const double ghg = g.x * (h.xx * g.x + h.xy * g.y) + g.y * (h.xy * g.x + h.yy * g.y);
  return -model.mu(s) * laplace - 2.0 * model.mu_prime(s) * ghg;
}

namespace lshape {
namespace {

constexpr double a = 2.0 / 3.0;

// Singular factor f = r^a h(phi), h = sin(2 phi / 3) cos(phi), and its polar derivatives.
struct PolarFactor {
  double f, f_r, f_rr, f_p, f_pp, f_rp;
};

PolarFactor polar_factor(double r, double phi) {
  const double s23 = std::sin(a * phi), c23 = std::cos(a * phi);
  const double s = std::sin(phi), c = std::cos(phi);
  const double h = s23 * c;
  const double hp = a * c23 * c - s23 * s;
  const double hpp = -(13.0 / 9.0) * s23 * c - (4.0 / 3.0) * c23 * s;
  const double ra = std::pow(r, a);
  return {ra * h, a * ra / r * h, a * (a - 1.0) * ra / (r * r) * h, ra * hp, ra * hpp, a * ra / r * hp};
}

void require_not_origin(Point2 p, const char* what) {
  if (p.x == 0.0 && p.y == 0.0) {
    throw DomainError(std::string(what) + " of the L-shape solution is unbounded at the origin");
  }
}

}  // namespace

double polar_angle(Point2 p) {
  double phi = std::atan2(p.y, p.x);
  if (phi < 0.0) phi += 2.0 * std::numbers::pi;
  return phi;
}

double exact_value(Point2 p) {
  const double r = std::hypot(p.x, p.y);
  if (r == 0.0) return 0.0;
  const double phi = polar_angle(p);
  const double rc = r * std::cos(phi), rs = r * std::sin(phi);
  return std::pow(r, a) * std::sin(a * phi) * (1.0 - rc) * (1.0 + rc) * (1.0 - rs) * (1.0 + rs) * std::cos(phi);
}

Vec2 exact_gradient(Point2 p) {
  require_not_origin(p, "gradient");
  const double r = std::hypot(p.x, p.y);
  const double phi = polar_angle(p);
  const double c = std::cos(phi), s = std::sin(phi);
  const auto f = polar_factor(r, phi);
  const double fx = c * f.f_r - s / r * f.f_p;
  const double fy = s * f.f_r + c / r * f.f_p;
  const double px = 1.0 - p.x * p.x, py = 1.0 - p.y * p.y;
  const double poly = px * py;
  return {fx * poly + f.f * (-2.0 * p.x * py), fy * poly + f.f * (-2.0 * p.y * px)};
}

Hessian2 exact_hessian(Point2 p) {
  require_not_origin(p, "hessian");
  const double r = std::hypot(p.x, p.y);
  const double phi = polar_angle(p);
  const double c = std::cos(phi), s = std::sin(phi);
  const auto f = polar_factor(r, phi);
  const double r2 = r * r;
  const double fx = c * f.f_r - s / r * f.f_p;
  const double fy = s * f.f_r + c / r * f.f_p;
  const double fxx = c * c * f.f_rr - 2.0 * s * c / r * f.f_rp + s * s / r2 * f.f_pp + s * s / r * f.f_r +
                     2.0 * s * c / r2 * f.f_p;
  const double fyy = s * s * f.f_rr + 2.0 * s * c / r * f.f_rp + c * c / r2 * f.f_pp + c * c / r * f.f_r -
                     2.0 * s * c / r2 * f.f_p;
  const double fxy = s * c * f.f_rr + (c * c - s * s) / r * f.f_rp - s * c / r2 * f.f_pp - s * c / r * f.f_r -
                     (c * c - s * s) / r2 * f.f_p;

  const double x = p.x, y = p.y;
  const double P = (1.0 - x * x) * (1.0 - y * y);
  const double Px = -2.0 * x * (1.0 - y * y), Py = -2.0 * y * (1.0 - x * x);
  const double Pxx = -2.0 * (1.0 - y * y), Pyy = -2.0 * (1.0 - x * x), Pxy = 4.0 * x * y;
  return {fxx * P + 2.0 * fx * Px + f.f * Pxx, fxy * P + fx * Py + fy * Px + f.f * Pxy,
          fyy * P + 2.0 * fy * Py + f.f * Pyy};
}

double load_g(const NonlinearModel& model, Point2 p) {
  return flux_divergence_load(model, exact_gradient(p), exact_hessian(p));
}

}  // namespace lshape

ManufacturedSolution lshape_solution(const NonlinearModel& model) {
  ManufacturedSolution s;
  s.name = "lshape";
  s.value = lshape::exact_value;
  s.gradient = lshape::exact_gradient;
  s.load = [model](Point2 p) { return lshape::load_g(model, p); };
  s.singular_point = Point2{0.0, 0.0};
  return s;
}

ManufacturedSolution square_bubble_solution(const NonlinearModel& model) {
  ManufacturedSolution s;
  s.name = "square_bubble";
  s.value = [](Point2 p) { return p.x * (1.0 - p.x) * p.y * (1.0 - p.y); };
  s.gradient = [](Point2 p) {
    return Vec2{(1.0 - 2.0 * p.x) * p.y * (1.0 - p.y), p.x * (1.0 - p.x) * (1.0 - 2.0 * p.y)};
  };
  s.load = [model](Point2 p) {
    const Vec2 g{(1.0 - 2.0 * p.x) * p.y * (1.0 - p.y), p.x * (1.0 - p.x) * (1.0 - 2.0 * p.y)};
    const Hessian2 h{-2.0 * p.y * (1.0 - p.y), (1.0 - 2.0 * p.x) * (1.0 - 2.0 * p.y), -2.0 * p.x * (1.0 - p.x)};
    return flux_divergence_load(model, g, h);
  };
  return s;
}

}  // namespace ailfem
