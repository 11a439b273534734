#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace ailfem::svg {

struct Series {
  std::string label;
  std::vector<double> x;
  std::vector<double> y;
  bool markers = true;
};

struct PlotSpec {
  std::string title;
  std::string x_label;
  std::string y_label;
  bool log_x = true;
  bool log_y = true;
  /// Dashed guide line of this slope (log-log) through the first point of the first series.
  std::optional<double> guide_slope;
  /// Dashed horizontal reference line.
  std::optional<double> reference_y;
  std::string reference_label;
};

/// Renders a line plot. Non-finite and (on log axes) non-positive samples are skipped.
std::string render(const PlotSpec& spec, const std::vector<Series>& series);
void write(const std::filesystem::path& path, const PlotSpec& spec, const std::vector<Series>& series);

}  // namespace ailfem::svg
