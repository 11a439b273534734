#include <gtest/gtest.h>

#include <random>

#include "ailfem/errors.hpp"
#include "ailfem/marking.hpp"

using namespace ailfem;

namespace {

long double sum_of(const IndicatorField& f, std::span<const Index> idx) {
  long double s = 0.0L;
  for (Index t : idx) s += f.values[t];
  return s;
}

// Brute-force minimal cardinality: the k largest values are the best k-set.
std::size_t minimal_size(const IndicatorField& f, double theta) {
  Vector v = f.values;
  std::sort(v.begin(), v.end(), std::greater<>());
  long double all = 0.0L;
  for (double x : v) all += x;
  const long double goal = static_cast<long double>(theta) * theta * all;
  long double acc = 0.0L;
  for (std::size_t k = 0; k <= v.size(); ++k) {
    if (acc >= goal) return k;
    if (k < v.size()) acc += v[k];
  }
  return v.size();
}

}  // namespace

TEST(Doerfler, Example) {
  const IndicatorField f{0, {4, 1, 1, 1, 1}};
  const auto m = doerfler(f, 0.5);
  ASSERT_EQ(m.size(), 1u);
  EXPECT_EQ(m.indices()[0], 0u);
}

TEST(Doerfler, ThetaOneMarksAllPositive) {
  const IndicatorField f{0, {0.5, 0.0, 2.0, 1e-30, 0.0}};
  const auto m = doerfler(f, 1.0);
  EXPECT_EQ(std::vector<Index>(m.indices().begin(), m.indices().end()), (std::vector<Index>{0, 2, 3}));
}

TEST(Doerfler, ZeroFieldMarksNothing) { EXPECT_TRUE(doerfler(IndicatorField{0, Vector(10, 0.0)}, 0.5).empty()); }

TEST(Doerfler, TiesByAscendingIndex) {
  const IndicatorField f{0, {1, 1, 1, 1}};
  const auto m = doerfler(f, 0.5);
  EXPECT_EQ(std::vector<Index>(m.indices().begin(), m.indices().end()), (std::vector<Index>{0}));
  const auto m2 = doerfler(f, 0.8);  // 0.64 * 4 = 2.56 -> three elements
  EXPECT_EQ(std::vector<Index>(m2.indices().begin(), m2.indices().end()), (std::vector<Index>{0, 1, 2}));
}

TEST(Doerfler, ThetaOutOfRangeThrows) {
  const IndicatorField f{0, {1.0}};
  EXPECT_THROW(doerfler(f, 0.0), InputError);
  EXPECT_THROW(doerfler(f, 1.5), InputError);
  EXPECT_THROW(doerfler(f, -0.1), InputError);
}

TEST(Doerfler, CriterionMinimalityDeterminismOnRandomFields) {
  std::mt19937_64 rng(1);
  std::exponential_distribution<double> e(1.0);
  std::uniform_real_distribution<double> th(0.05, 1.0);
  for (int trial = 0; trial < 200; ++trial) {
    IndicatorField f{0, Vector(1 + trial * 5)};
    for (auto& v : f.values) v = std::pow(e(rng), 3);
    const double theta = th(rng);
    const auto m = doerfler(f, theta);
    long double all = 0.0L;
    for (double v : f.values) all += v;
    const long double goal = static_cast<long double>(theta) * theta * all;
    EXPECT_GE(sum_of(f, m.indices()), goal);
    EXPECT_EQ(m.size(), minimal_size(f, theta));
    // Dropping the smallest marked indicator breaks the criterion.
    if (!m.empty()) {
      double smallest = std::numeric_limits<double>::infinity();
      for (Index t : m.indices()) smallest = std::min(smallest, f.values[t]);
      EXPECT_LT(sum_of(f, m.indices()) - smallest, goal);
    }
    EXPECT_EQ(doerfler(f, theta).indices().size(), m.size());
    EXPECT_TRUE(std::equal(m.indices().begin(), m.indices().end(), doerfler(f, theta).indices().begin()));
  }
}
