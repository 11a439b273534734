#include "ailfem/marking.hpp"

#include <algorithm>
#include <numeric>
#include <string>

#include "ailfem/errors.hpp"

namespace ailfem {

MarkSet doerfler(const IndicatorField& field, double theta) {
  if (!(theta > 0.0 && theta <= 1.0)) throw InputError("doerfler: theta must lie in (0, 1], got " + std::to_string(theta));
  const auto& eta2 = field.values;
  std::vector<Index> order(eta2.size());
  std::iota(order.begin(), order.end(), Index{0});
  std::sort(order.begin(), order.end(), [&](Index a, Index b) {
    if (eta2[a] != eta2[b]) return eta2[a] > eta2[b];
    return a < b;
  });

  long double sum = 0.0L;
  for (double v : eta2) sum += v;
  const long double goal = static_cast<long double>(theta) * theta * sum;

  std::vector<Index> marked;
  long double acc = 0.0L;
  for (Index t : order) {
    // theta = 1 takes every positive indicator even when rounding reaches the goal early.
    if ((theta < 1.0 && acc >= goal) || !(eta2[t] > 0.0)) break;
    marked.push_back(t);
    acc += eta2[t];
  }
  return MarkSet(std::move(marked));
}

}  // namespace ailfem
