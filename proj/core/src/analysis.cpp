#include "ailfem/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "ailfem/errors.hpp"

namespace ailfem {

LinearFit fit_line(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw InputError("fit_line: x and y differ in length");
  const std::size_t n = x.size();
  if (n < 2) throw InputError("fit_line: at least two points required");
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= static_cast<double>(n);
  my /= static_cast<double>(n);
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  if (!(sxx > 0.0)) throw InputError("fit_line: x values are all equal");
  LinearFit fit;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  fit.points = n;
  return fit;
}

LinearFit fit_loglog(std::span<const double> x, std::span<const double> y) {
  return fit_loglog_window(x, y, 0.0, std::numeric_limits<double>::infinity());
}

LinearFit fit_loglog_window(std::span<const double> x, std::span<const double> y, double x_min, double x_max) {
  if (x.size() != y.size()) throw InputError("fit_loglog: x and y differ in length");
  std::vector<double> lx, ly;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (x[i] < x_min || x[i] > x_max) continue;
    if (!(x[i] > 0.0) || !(y[i] > 0.0)) throw InputError("fit_loglog: samples must be positive");
    lx.push_back(std::log(x[i]));
    ly.push_back(std::log(y[i]));
  }
  return fit_line(lx, ly);
}

LinearFit fit_loglog_tail(std::span<const double> x, std::span<const double> y, double decades) {
  if (x.empty()) throw InputError("fit_loglog_tail: no samples");
  const double top = *std::max_element(x.begin(), x.end());
  return fit_loglog_window(x, y, top / std::pow(10.0, decades), top);
}

}  // namespace ailfem
