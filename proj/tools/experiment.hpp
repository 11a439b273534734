#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "ailfem/driver.hpp"

namespace ailfem::experiment {

inline constexpr const char* tool_version = "0.1.0";

/// Everything needed to repeat a run.
struct ExperimentManifest {
  std::string scheme = "kacanov";
  double delta_z = 0.3;
  double lambda = 0.1;
  double theta = 0.5;
  std::size_t max_elements = 200000;
  std::string output_dir = "ailfem_out";
  std::uint64_t seed = 0;  // recorded only; the pipeline is deterministic
  std::string tool_version = experiment::tool_version;
  std::string timestamp;
  std::optional<int> preset;
  bool plots = true;
  bool mesh_dump = false;
};

nlohmann::json to_json(const ExperimentManifest& m);
/// InputError on missing or mistyped fields.
ExperimentManifest manifest_from_json(const nlohmann::json& j);
ExperimentManifest load_manifest(const std::filesystem::path& path);
void save_manifest(const std::filesystem::path& path, const ExperimentManifest& m);

struct Preset {
  int id;
  double delta_z;
  double lambda;
  double theta;
  const char* note;
};

std::span<const Preset> presets();
/// InputError for unknown ids.
const Preset& preset(int id);
void apply_preset(ExperimentManifest& m, int id);
void print_presets(std::ostream& out);

/// Validated driver configuration; InputError for bad parameters.
AdaptiveConfig to_config(const ExperimentManifest& m, const NonlinearModel& model);

/// Current UTC time as ISO 8601.
std::string utc_timestamp();

/// %.17g rendering used in all CSV output.
std::string format_double(double v);

inline constexpr const char* csv_header = "N,n,step,elems,dofs,eta,energy,energy_drop,error,quasi_error,kappa,dt_s,cum_elems";
void write_csv_row(std::ostream& out, const HistoryRow& row);
void write_history_csv(std::ostream& out, const RunHistory& h);

/// Local log-log slope of eta against #T over windows of `width` decades.
struct WindowSlope {
  double x_begin;
  double x_end;
  double slope;
};
std::vector<WindowSlope> windowed_slopes(std::span<const double> x, std::span<const double> y, double width = 0.5);

/// Smallest x after which every windowed slope lies in [lo, hi]; nullopt if none.
std::optional<double> crossover(std::span<const WindowSlope> windows, double lo = -0.6, double hi = -0.4);

struct RunSummary {
  std::string scheme;
  RunStatus status = RunStatus::completed;
  std::string diagnostic;
  std::size_t meshes = 0;
  std::uint64_t inner_steps = 0;
  Index final_elements = 0;
  double final_eta = 0.0;
  double final_error = 0.0;
  double wall_time_s = 0.0;
  std::optional<double> slope_eta_elems;
  std::optional<double> slope_error_elems;
  std::optional<double> slope_eta_cost;
  std::optional<double> slope_eta_time;
  std::optional<double> crossover_elems;
  double effectivity_min = 0.0;
  double effectivity_max = 0.0;
  TheoryConstants constants;
};

RunSummary summarize(const RunHistory& h, const NonlinearModel& model);
void write_summary(std::ostream& out, const ExperimentManifest& m, std::span<const RunSummary> runs,
                   std::optional<double> reference_energy);

/// history.csv, manifest.json, summary.txt, plots and mesh dump for one run.
void write_run_outputs(const std::filesystem::path& dir, const ExperimentManifest& m, const RunHistory& h,
                       const NonlinearModel& model, std::optional<double> reference_energy);

/// Runs one scheme and writes its outputs. Returns 0 on success and 1 on run
/// failure (partial outputs are kept). Throws InputError for bad parameters.
int run_experiment(const ExperimentManifest& m, std::ostream& log);

/// Runs all three schemes with shared parameters (one subdirectory each) and
/// writes a merged CSV plus overlay plots. Threads are capped by AILFEM_THREADS.
int compare_schemes(const ExperimentManifest& m, std::ostream& log);

/// Worker count from AILFEM_THREADS (default: hardware concurrency), at least 1.
unsigned thread_budget();

}  // namespace ailfem::experiment
