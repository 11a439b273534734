#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "ailfem/errors.hpp"
#include "ailfem/model.hpp"
#include "ailfem/quadrature.hpp"
#include "ailfem/mesh.hpp"

using namespace ailfem;

namespace {

// Cartesian form of the singular solution, with the angle recovered by acos.
double value_oracle(double x, double y) {
  const double r = std::sqrt(x * x + y * y);
  if (r == 0.0) return 0.0;
  double phi = std::acos(x / r);
  if (y < 0.0) phi = 2.0 * std::numbers::pi - phi;
  return (x / r) * std::cbrt(r * r) * std::sin(2.0 * phi / 3.0) * (1.0 - x * x) * (1.0 - y * y);
}

Vec2 fd_gradient(const std::function<double(Point2)>& f, Point2 p, double h) {
  return {(f({p.x + h, p.y}) - f({p.x - h, p.y})) / (2 * h), (f({p.x, p.y + h}) - f({p.x, p.y - h})) / (2 * h)};
}

std::vector<Point2> interior_samples(std::size_t n, std::uint64_t seed, double min_radius) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-0.98, 0.98);
  std::vector<Point2> pts;
  while (pts.size() < n) {
    const Point2 p{u(rng), u(rng)};
    if (p.x > 0.0 && p.y < 0.0) continue;
    if (std::hypot(p.x, p.y) < min_radius) continue;
    if (std::abs(p.x) < 0.02 || std::abs(p.y) < 0.02) continue;  // keep stencils off the slit lines
    pts.push_back(p);
  }
  return pts;
}

}  // namespace

TEST(DefaultModel, Values) {
  const auto m = default_model();
  EXPECT_DOUBLE_EQ(m.mu(0.0), 2.0);
  EXPECT_NEAR(m.m_mu, 0.5537397, 1e-7);
  EXPECT_DOUBLE_EQ(m.m_mu, 1.0 - 2.0 * std::exp(-1.5));
  EXPECT_DOUBLE_EQ(m.M_mu, 2.0);
  EXPECT_NEAR(m.psi(1.0), (2.0 - std::exp(-1.0)) / 2.0, 1e-15);
  EXPECT_NEAR(m.psi(1.0), 0.8160603, 1e-7);
  EXPECT_DOUBLE_EQ(m.nu(), m.m_mu);
  EXPECT_DOUBLE_EQ(m.lipschitz(), 6.0);
}

TEST(DefaultModel, PsiIsHalfAntiderivativeOfMu) {
  const auto m = default_model();
  EXPECT_EQ(m.psi(0.0), 0.0);
  const double h = 1e-5;
  EXPECT_NEAR((m.psi(h) - m.psi(0.0)) / h, m.mu(h / 2) / 2.0, 1e-9);
  for (double s : {0.3, 1.0, 2.5, 7.0}) {
    EXPECT_NEAR((m.psi(s + h) - m.psi(s - h)) / (2 * h), m.mu(s) / 2.0, 1e-9) << s;
  }
}

TEST(DefaultModel, MonotonicitySweep) {
  const auto m = default_model();
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> u(0.0, 20.0);
  for (int i = 0; i < 10000; ++i) {
    double t = u(rng), s = u(rng);
    if (t < s) std::swap(t, s);
    if (t == s) continue;
    const double d = m.mu(t * t) * t - m.mu(s * s) * s;
    EXPECT_LE(m.m_mu * (t - s), d * (1 + 1e-14) + 1e-300);
    EXPECT_LE(d, m.M_mu * (t - s) * (1 + 1e-14));
  }
}

TEST(DefaultModel, MonotonicityGrid) {
  const auto m = default_model();
  for (int i = 0; i <= 200; ++i) {
    for (int j = 0; j < i; ++j) {
      const double t = 0.05 * i, s = 0.05 * j;
      const double q = (m.mu(t * t) * t - m.mu(s * s) * s) / (t - s);
      EXPECT_GE(q, m.m_mu - 1e-12);
      EXPECT_LE(q, m.M_mu + 1e-12);
    }
  }
}

TEST(DefaultModel, MuDecreasingWithinBounds) {
  const auto m = default_model();
  double prev = m.mu(0.0);
  EXPECT_LE(prev, 2.0);
  for (int i = 1; i <= 2000; ++i) {
    const double t = 0.01 * i;
    const double v = m.mu(t);
    EXPECT_LT(v, prev);
    EXPECT_GT(v, 1.0);
    EXPECT_GE(v, m.mu_inf);
    EXPECT_LE(v, m.mu_sup);
    prev = v;
  }
}

TEST(DefaultModel, NewtonCoercivity) {
  const auto m = default_model();
  for (int i = 0; i <= 20000; ++i) {
    const double t = 0.001 * i;
    EXPECT_GE(m.mu(t) + 2.0 * t * m.mu_prime(t), m.m_mu - 1e-14);
  }
}

TEST(DefaultModel, MuPrimeMatchesFiniteDifference) {
  const auto m = default_model();
  for (double t : {0.0, 0.5, 1.5, 4.0}) {
    const double h = 1e-6;
    EXPECT_NEAR(m.mu_prime(t), (m.mu(t + h) - m.mu(t - h)) / (2 * h), 1e-8);
  }
}

TEST(ConstantModel, IsLinear) {
  const auto m = constant_model(3.0);
  EXPECT_EQ(m.mu(5.0), 3.0);
  EXPECT_EQ(m.mu_prime(5.0), 0.0);
  EXPECT_DOUBLE_EQ(m.psi(2.0), 3.0);
  EXPECT_THROW(constant_model(0.0), InputError);
}

TEST(ExactSolution, SpecialValues) {
  EXPECT_EQ(lshape::exact_value({0.0, 0.0}), 0.0);
  EXPECT_NEAR(lshape::exact_value({1.0, 0.0}), 0.0, 1e-16);
  EXPECT_NEAR(lshape::exact_value({0.5, 0.5}), value_oracle(0.5, 0.5), 1e-12);
}

TEST(ExactSolution, MatchesCartesianOracle) {
  for (const auto& p : interior_samples(500, 1, 0.0)) {
    EXPECT_NEAR(lshape::exact_value(p), value_oracle(p.x, p.y), 1e-12) << p.x << " " << p.y;
  }
}

TEST(ExactSolution, VanishesOnBoundary) {
  for (int i = 0; i <= 100; ++i) {
    const double s = -1.0 + 0.02 * i;
    EXPECT_NEAR(lshape::exact_value({s, 1.0}), 0.0, 1e-15);
    EXPECT_NEAR(lshape::exact_value({-1.0, s}), 0.0, 1e-15);
    if (s >= 0.0) {
      EXPECT_NEAR(lshape::exact_value({s, 0.0}), 0.0, 1e-15);
      EXPECT_NEAR(lshape::exact_value({1.0, s}), 0.0, 1e-15);
    } else {
      EXPECT_NEAR(lshape::exact_value({0.0, s}), 0.0, 1e-15);
      EXPECT_NEAR(lshape::exact_value({s, -1.0}), 0.0, 1e-15);
    }
  }
}

TEST(ExactSolution, PolarAngleRange) {
  EXPECT_DOUBLE_EQ(lshape::polar_angle({0.0, -1.0}), 1.5 * std::numbers::pi);
  EXPECT_DOUBLE_EQ(lshape::polar_angle({1.0, 0.0}), 0.0);
  EXPECT_DOUBLE_EQ(lshape::polar_angle({-1.0, 0.0}), std::numbers::pi);
}

TEST(ExactGradient, MatchesFiniteDifferences) {
  const std::function<double(Point2)> f = lshape::exact_value;
  const Vec2 p{0.5, 0.5};
  const Vec2 g = lshape::exact_gradient(p);
  const Vec2 fd = fd_gradient(f, p, 1e-6);
  EXPECT_LE(norm(g - fd), 1e-6 * norm(g));
  for (const auto& q : interior_samples(300, 2, 0.05)) {
    const Vec2 gq = lshape::exact_gradient(q);
    EXPECT_LE(norm(gq - fd_gradient(f, q, 1e-6)), 1e-6 * std::max(norm(gq), 1e-3)) << q.x << " " << q.y;
  }
}

TEST(ExactGradient, TangentialDerivativeVanishesOnSlit) {
  for (int i = 1; i < 20; ++i) EXPECT_NEAR(lshape::exact_gradient({0.05 * i, 0.0}).x, 0.0, 1e-14);
}

TEST(ExactGradient, GrowsLikeInverseCubeRoot) {
  const double phi = 0.75 * std::numbers::pi;
  auto mag = [&](double r) { return norm(lshape::exact_gradient({r * std::cos(phi), r * std::sin(phi)})); };
  EXPECT_NEAR(mag(1e-3) / mag(1e-2), std::cbrt(10.0), 0.01);
  EXPECT_NEAR(mag(1e-4) / mag(1e-3), std::cbrt(10.0), 0.001);
}

TEST(ExactGradient, OriginThrows) {
  EXPECT_THROW(lshape::exact_gradient({0.0, 0.0}), DomainError);
  EXPECT_THROW(lshape::exact_hessian({0.0, 0.0}), DomainError);
  EXPECT_THROW(lshape::load_g(default_model(), {0.0, 0.0}), DomainError);
}

TEST(Load, MatchesFluxDivergenceByFiniteDifferences) {
  const auto m = default_model();
  auto flux = [&](Point2 p) {
    const Vec2 g = lshape::exact_gradient(p);
    return m.mu(dot(g, g)) * g;
  };
  auto fd_load = [&](Point2 p) {
    const double h = 1e-5;
    return -((flux({p.x + h, p.y}).x - flux({p.x - h, p.y}).x) / (2 * h) +
             (flux({p.x, p.y + h}).y - flux({p.x, p.y - h}).y) / (2 * h));
  };
  const Point2 p{0.5, 0.5};
  EXPECT_LE(std::abs(lshape::load_g(m, p) - fd_load(p)), 1e-4 * std::abs(lshape::load_g(m, p)));
  for (const auto& q : interior_samples(200, 3, 0.1)) {
    const double g = lshape::load_g(m, q);
    EXPECT_LE(std::abs(g - fd_load(q)), 1e-4 * std::max(std::abs(g), 1.0)) << q.x << " " << q.y;
  }
}

TEST(Load, FiniteAtQuadraturePoints) {
  const auto m = default_model();
  const Mesh mesh = uniform_refine(uniform_refine(uniform_refine(make_lshape_initial())));
  std::size_t count = 0;
  for (Index t = 0; t < mesh.n_elements(); ++t) {
    const auto c = mesh.corners(t);
    for (const auto& q : degree5_rule()) {
      const Point2 x = map_to_triangle(c, q.barycentric);
      ASSERT_TRUE(std::isfinite(lshape::load_g(m, x)));
      ASSERT_TRUE(std::isfinite(norm(lshape::exact_gradient(x))));
      ++count;
    }
  }
  EXPECT_GE(count, 10000u);
}

TEST(SquareBubble, LoadForLaplacian) {
  const auto s = square_bubble_solution(constant_model(1.0));
  for (double x : {0.1, 0.4, 0.8}) {
    for (double y : {0.2, 0.5, 0.9}) {
      EXPECT_NEAR(s.load({x, y}), 2.0 * (x * (1 - x) + y * (1 - y)), 1e-15);
    }
  }
  EXPECT_FALSE(s.singular_point.has_value());
}

TEST(SquareBubble, NonlinearLoadMatchesFiniteDifferences) {
  const auto m = default_model();
  const auto s = square_bubble_solution(m);
  auto flux = [&](Point2 p) {
    const Vec2 g = s.gradient(p);
    return m.mu(dot(g, g)) * g;
  };
  const Point2 p{0.3, 0.6};
  const double h = 1e-5;
  const double fd = -((flux({p.x + h, p.y}).x - flux({p.x - h, p.y}).x) / (2 * h) +
                      (flux({p.x, p.y + h}).y - flux({p.x, p.y - h}).y) / (2 * h));
  EXPECT_NEAR(s.load(p), fd, 1e-6);
}
