#pragma once

#include <cstdint>
#include <functional>
#include <span>

#include "ailfem/fem.hpp"
#include "ailfem/mesh.hpp"

namespace ailfem {

/// Squared local indicators eta_T^2, one per element.
struct IndicatorField {
  std::uint64_t mesh_id = 0;
  Vector values;

  std::size_t size() const { return values.size(); }
};

/// eta_T^2 = h_T^2 ||g||_T^2 + h_T sum_{e interior edge of T} |e| [[mu(|grad u|^2) grad u . n_e]]^2
/// with h_T = |T|^{1/2}. Each interior edge contributes to both adjacent elements.
IndicatorField local_indicators(const Discretization& disc, std::span<const double> u, const NonlinearModel& model);

/// Same, without a cached Discretization (volume term from `load` by quadrature).
IndicatorField local_indicators(const FeFunction& u, const NonlinearModel& model,
                                const std::function<double(Point2)>& load);

/// (sum_T eta_T^2)^{1/2}.
double total(const IndicatorField& field);

/// (sum_{T in subset} eta_T^2)^{1/2}; InputError for out-of-range indices.
double subset_total(const IndicatorField& field, const MarkSet& subset);

}  // namespace ailfem
