#pragma once

#include "ailfem/estimator.hpp"
#include "ailfem/mesh.hpp"

namespace ailfem {

/// Smallest set M with theta^2 sum_T eta_T^2 <= sum_{T in M} eta_T^2: the
/// shortest prefix of the indicators sorted descending, ties by ascending
/// index. InputError unless 0 < theta <= 1.
MarkSet doerfler(const IndicatorField& field, double theta);

}  // namespace ailfem
