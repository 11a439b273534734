#pragma once

#include <array>
#include <functional>
#include <optional>
#include <string>

#include "ailfem/geometry.hpp"

namespace ailfem {

/// Scalar diffusion law for -div(mu(|grad u|^2) grad u) = g with the
/// monotonicity bounds m_mu (t - s) <= mu(t^2) t - mu(s^2) s <= M_mu (t - s).
struct NonlinearModel {
  std::string name;
  std::function<double(double)> mu;
  std::function<double(double)> mu_prime;
  /// psi(s) = 1/2 int_0^s mu(t) dt, the energy density as a function of |grad u|^2.
  std::function<double(double)> psi;
  double m_mu = 1.0;
  double M_mu = 1.0;
  /// Bounds of mu itself: coercivity and boundedness of the frozen-coefficient forms.
  double mu_inf = 1.0;
  double mu_sup = 1.0;

  /// Strong monotonicity constant of the operator.
  double nu() const { return m_mu; }
  /// Lipschitz constant of the operator.
  double lipschitz() const { return 3.0 * M_mu; }
};

/// mu(t) = 1 + exp(-t), m_mu = 1 - 2 exp(-3/2), M_mu = 2.
NonlinearModel default_model();

/// mu(t) = c: the linear (Poisson) case.
NonlinearModel constant_model(double c = 1.0);

struct Hessian2 {
  double xx = 0.0;
  double xy = 0.0;
  double yy = 0.0;
};

/// A problem with a manufactured solution. `gradient` and `value` may be
/// empty for problems where only the load is known.
struct ManufacturedSolution {
  std::string name;
  std::function<double(Point2)> value;
  std::function<Vec2(Point2)> gradient;
  std::function<double(Point2)> load;
  /// Point where the gradient is unbounded (quadrature grading target).
  std::optional<Point2> singular_point;
};

/// Load g = -div(mu(|grad u|^2) grad u) from the first and second derivatives of u.
double flux_divergence_load(const NonlinearModel& model, Vec2 gradient, const Hessian2& hessian);

namespace lshape {

/// Polar angle in [0, 2 pi); on the L-shape this lies in [0, 3 pi / 2].
double polar_angle(Point2 p);

/// u*(r, phi) = r^{2/3} sin(2 phi / 3) (1 - r cos phi)(1 + r cos phi)(1 - r sin phi)(1 + r sin phi) cos phi.
double exact_value(Point2 p);
/// Throws DomainError at the origin.
Vec2 exact_gradient(Point2 p);
/// Throws DomainError at the origin.
Hessian2 exact_hessian(Point2 p);
/// g = -div(mu(|grad u*|^2) grad u*); throws DomainError at the origin.
double load_g(const NonlinearModel& model, Point2 p);

}  // namespace lshape

/// The singular L-shape problem for `model`.
ManufacturedSolution lshape_solution(const NonlinearModel& model);

/// u = x(1-x) y(1-y) on the unit square, with the load matching `model`.
ManufacturedSolution square_bubble_solution(const NonlinearModel& model);

}  // namespace ailfem
