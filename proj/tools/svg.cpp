#include "svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

#include "ailfem/errors.hpp"

namespace ailfem::svg {
namespace {

constexpr double width = 720, height = 480;
constexpr double left = 80, right = 170, top = 40, bottom = 60;
constexpr const char* palette[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b"};

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '&': out += "&amp;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

std::string tick_label(double v, bool log) {
  char buf[32];
  if (log) std::snprintf(buf, sizeof buf, "1e%d", static_cast<int>(std::lround(v)));
  else std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

struct Axis {
  bool log;
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();

  bool usable(double v) const { return std::isfinite(v) && (!log || v > 0.0); }
  double map(double v) const { return log ? std::log10(v) : v; }
  void include(double v) {
    if (!usable(v)) return;
    lo = std::min(lo, map(v));
    hi = std::max(hi, map(v));
  }
  void finish() {
    if (!std::isfinite(lo)) lo = 0.0, hi = 1.0;
    if (log) {
      lo = std::floor(lo);
      hi = std::ceil(hi);
      if (hi <= lo) hi = lo + 1;
    } else {
      const double pad = hi > lo ? 0.05 * (hi - lo) : 0.5 * std::max(1.0, std::abs(lo));
      lo -= pad;
      hi += pad;
    }
  }
  std::vector<double> ticks() const {
    std::vector<double> t;
    if (log) {
      const int step = std::max(1, static_cast<int>(std::ceil((hi - lo) / 8)));
      for (double k = lo; k <= hi + 1e-9; k += step) t.push_back(k);
    } else {
      for (int k = 0; k <= 5; ++k) t.push_back(lo + (hi - lo) * k / 5.0);
    }
    return t;
  }
};

}  // namespace

std::string render(const PlotSpec& spec, const std::vector<Series>& series) {
  Axis ax{spec.log_x}, ay{spec.log_y};
  for (const auto& s : series) {
    for (std::size_t i = 0; i < s.x.size() && i < s.y.size(); ++i) {
      if (ax.usable(s.x[i]) && ay.usable(s.y[i])) {
        ax.include(s.x[i]);
        ay.include(s.y[i]);
      }
    }
  }
  if (spec.reference_y) ay.include(*spec.reference_y);
  ax.finish();
  ay.finish();
  const double pw = width - left - right, ph = height - top - bottom;
  auto px = [&](double v) { return left + (ax.map(v) - ax.lo) / (ax.hi - ax.lo) * pw; };
  auto py = [&](double v) { return top + ph - (ay.map(v) - ay.lo) / (ay.hi - ay.lo) * ph; };

  std::ostringstream o;
  o << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
    << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  o << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  o << "<text x=\"" << num(left + pw / 2) << "\" y=\"24\" text-anchor=\"middle\" font-size=\"15\">"
    << escape(spec.title) << "</text>\n";
  o << "<defs><clipPath id=\"plot\"><rect x=\"" << left << "\" y=\"" << top << "\" width=\"" << pw
    << "\" height=\"" << ph << "\"/></clipPath></defs>\n";

  for (double t : ax.ticks()) {
    const double x = left + (t - ax.lo) / (ax.hi - ax.lo) * pw;
    o << "<line x1=\"" << num(x) << "\" y1=\"" << top << "\" x2=\"" << num(x) << "\" y2=\"" << top + ph
      << "\" stroke=\"#e0e0e0\"/>\n";
    o << "<text x=\"" << num(x) << "\" y=\"" << top + ph + 18 << "\" text-anchor=\"middle\">"
      << tick_label(t, ax.log) << "</text>\n";
  }
  for (double t : ay.ticks()) {
    const double y = top + ph - (t - ay.lo) / (ay.hi - ay.lo) * ph;
    o << "<line x1=\"" << left << "\" y1=\"" << num(y) << "\" x2=\"" << left + pw << "\" y2=\"" << num(y)
      << "\" stroke=\"#e0e0e0\"/>\n";
    o << "<text x=\"" << left - 6 << "\" y=\"" << num(y + 4) << "\" text-anchor=\"end\">" << tick_label(t, ay.log)
      << "</text>\n";
  }
  o << "<rect x=\"" << left << "\" y=\"" << top << "\" width=\"" << pw << "\" height=\"" << ph
    << "\" fill=\"none\" stroke=\"black\"/>\n";
  o << "<text x=\"" << num(left + pw / 2) << "\" y=\"" << height - 18 << "\" text-anchor=\"middle\">"
    << escape(spec.x_label) << "</text>\n";
  o << "<text transform=\"translate(20," << num(top + ph / 2) << ") rotate(-90)\" text-anchor=\"middle\">"
    << escape(spec.y_label) << "</text>\n";

  o << "<g clip-path=\"url(#plot)\">\n";
  double legend_y = top + 10;
  auto legend = [&](const std::string& label, const char* color, bool dashed) {
    o << "</g>\n<line x1=\"" << left + pw + 12 << "\" y1=\"" << num(legend_y) << "\" x2=\"" << left + pw + 36
      << "\" y2=\"" << num(legend_y) << "\" stroke=\"" << color << "\" stroke-width=\"2\""
      << (dashed ? " stroke-dasharray=\"6,4\"" : "") << "/>\n";
    o << "<text x=\"" << left + pw + 42 << "\" y=\"" << num(legend_y + 4) << "\">" << escape(label) << "</text>\n";
    o << "<g clip-path=\"url(#plot)\">\n";
    legend_y += 18;
  };

  for (std::size_t k = 0; k < series.size(); ++k) {
    const auto& s = series[k];
    const char* color = palette[k % std::size(palette)];
    std::ostringstream pts;
    std::vector<std::pair<double, double>> kept;
    for (std::size_t i = 0; i < s.x.size() && i < s.y.size(); ++i) {
      if (!ax.usable(s.x[i]) || !ay.usable(s.y[i])) continue;
      kept.emplace_back(px(s.x[i]), py(s.y[i]));
      pts << num(kept.back().first) << "," << num(kept.back().second) << " ";
    }
    if (kept.empty()) continue;
    o << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"" << pts.str() << "\"/>\n";
    if (s.markers) {
      for (const auto& [x, y] : kept) {
        o << "<circle cx=\"" << num(x) << "\" cy=\"" << num(y) << "\" r=\"2\" fill=\"" << color << "\"/>\n";
      }
    }
    legend(s.label, color, false);
  }

  if (spec.guide_slope && ax.log && ay.log && !series.empty()) {
    const auto& s = series.front();
    for (std::size_t i = 0; i < s.x.size() && i < s.y.size(); ++i) {
      if (!ax.usable(s.x[i]) || !ay.usable(s.y[i])) continue;
      const double x0 = std::log10(s.x[i]), y0 = std::log10(s.y[i]);
      auto at = [&](double lx) { return y0 + *spec.guide_slope * (lx - x0); };
      auto gx = [&](double lx) { return left + (lx - ax.lo) / (ax.hi - ax.lo) * pw; };
      auto gy = [&](double ly) { return top + ph - (ly - ay.lo) / (ay.hi - ay.lo) * ph; };
      o << "<line x1=\"" << num(gx(ax.lo)) << "\" y1=\"" << num(gy(at(ax.lo))) << "\" x2=\"" << num(gx(ax.hi))
        << "\" y2=\"" << num(gy(at(ax.hi))) << "\" stroke=\"gray\" stroke-dasharray=\"6,4\"/>\n";
      char label[32];
      std::snprintf(label, sizeof label, "slope %g", *spec.guide_slope);
      legend(label, "gray", true);
      break;
    }
  }
  if (spec.reference_y && ay.usable(*spec.reference_y)) {
    const double y = py(*spec.reference_y);
    o << "<line x1=\"" << left << "\" y1=\"" << num(y) << "\" x2=\"" << left + pw << "\" y2=\"" << num(y)
      << "\" stroke=\"black\" stroke-dasharray=\"3,3\"/>\n";
    legend(spec.reference_label.empty() ? "reference" : spec.reference_label, "black", true);
  }
  o << "</g>\n</svg>\n";
  return o.str();
}

void write(const std::filesystem::path& path, const PlotSpec& spec, const std::vector<Series>& series) {
  std::ofstream f(path);
  if (!f) throw InputError("cannot write " + path.string());
  f << render(spec, series);
}

}  // namespace ailfem::svg
