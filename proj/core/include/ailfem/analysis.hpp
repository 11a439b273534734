#pragma once

#include <cstddef>
#include <span>

namespace ailfem {

struct LinearFit {
  double slope = 0.0;
  double intercept = 0.0;
  std::size_t points = 0;
};

/// Least-squares line through (x_i, y_i). InputError for fewer than two
/// points or degenerate x.
LinearFit fit_line(std::span<const double> x, std::span<const double> y);

/// Least-squares fit of log y against log x; non-positive samples are an InputError.
LinearFit fit_loglog(std::span<const double> x, std::span<const double> y);

/// fit_loglog restricted to samples with x in [x_min, x_max].
LinearFit fit_loglog_window(std::span<const double> x, std::span<const double> y, double x_min, double x_max);

/// fit_loglog over the last `decades` decades of x (x >= max(x) / 10^decades).
LinearFit fit_loglog_tail(std::span<const double> x, std::span<const double> y, double decades = 1.0);

}  // namespace ailfem
