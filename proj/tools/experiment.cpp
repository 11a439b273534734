#include "experiment.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <fstream>
#include <mutex>
#include <ostream>
#include <thread>

#include "ailfem/analysis.hpp"
#include "ailfem/errors.hpp"
#include "svg.hpp"

namespace ailfem::experiment {
namespace fs = std::filesystem;

namespace {

constexpr Preset preset_table[] = {
    {1, 0.1, 0.5, 0.5, "small Zarantonello step, loose stopping: pre-asymptotic Zarantonello phase"},
    {2, 0.3, 0.1, 0.5, "optimal rates for all three schemes"},
    {3, 0.3, 0.01, 0.5, "strict stopping: iteration counts differ between schemes"},
};

template <class T>
T required(const nlohmann::json& j, const char* key) {
  if (!j.contains(key)) throw InputError(std::string("manifest: missing field '") + key + "'");
  try {
    return j.at(key).get<T>();
  } catch (const nlohmann::json::exception& e) {
    throw InputError(std::string("manifest: field '") + key + "' has the wrong type: " + e.what());
  }
}

std::optional<double> maybe_slope(std::span<const double> x, std::span<const double> y) {
  try {
    const auto fit = fit_loglog_tail(x, y, 1.0);
    if (fit.points < 3) return std::nullopt;
    return fit.slope;
  } catch (const InputError&) {
    return std::nullopt;
  }
}

std::string opt(const std::optional<double>& v) { return v ? format_double(*v) : std::string("n/a"); }

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw InputError("cannot create output directory " + dir.string() + ": " + ec.message());
}

std::ofstream open_out(const fs::path& p) {
  std::ofstream f(p);
  if (!f) throw InputError("cannot write " + p.string());
  return f;
}

const char* status_name(RunStatus s) {
  switch (s) {
    case RunStatus::completed: return "completed";
    case RunStatus::inner_cap_exceeded: return "inner_cap_exceeded";
    case RunStatus::solver_failure: return "solver_failure";
  }
  return "unknown";
}

struct FinalSeries {
  std::vector<double> elems, eta, error, time, cost, steps, kappa;
};

FinalSeries final_series(const RunHistory& h) {
  FinalSeries s;
  for (const auto& m : h.meshes) {
    if (m.inner_steps == 0) continue;
    const auto& r = h.rows[m.last_row];
    s.elems.push_back(r.elems);
    s.eta.push_back(r.eta);
    s.error.push_back(r.error);
    s.time.push_back(r.dt_s);
    s.cost.push_back(static_cast<double>(r.cum_elems));
    s.steps.push_back(m.inner_steps);
    s.kappa.push_back(r.kappa);
  }
  return s;
}

std::optional<double> try_reference_energy(const NonlinearModel& model, const ManufacturedSolution& problem,
                                           std::ostream& log) {
  try {
    return reference_energy(model, problem, 10000).value;
  } catch (const std::exception& e) {
    log << "reference energy unavailable: " << e.what() << "\n";
    return std::nullopt;
  }
}

SchemeKind kind_of(const std::string& scheme) {
  const auto k = parse_scheme_kind(scheme);
  if (!k) throw InputError("unknown scheme '" + scheme + "' (expected zarantonello, kacanov or newton)");
  return *k;
}

}  // namespace

nlohmann::json to_json(const ExperimentManifest& m) {
  nlohmann::json j;
  j["scheme"] = m.scheme;
  j["delta_z"] = m.delta_z;
  j["lambda"] = m.lambda;
  j["theta"] = m.theta;
  j["max_elements"] = m.max_elements;
  j["output_dir"] = m.output_dir;
  j["seed"] = m.seed;
  j["tool_version"] = m.tool_version;
  j["timestamp"] = m.timestamp;
  j["preset"] = m.preset ? nlohmann::json(*m.preset) : nlohmann::json(nullptr);
  j["plots"] = m.plots;
  j["mesh_dump"] = m.mesh_dump;
  return j;
}

ExperimentManifest manifest_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw InputError("manifest: expected a JSON object");
  ExperimentManifest m;
  m.scheme = required<std::string>(j, "scheme");
  m.delta_z = required<double>(j, "delta_z");
  m.lambda = required<double>(j, "lambda");
  m.theta = required<double>(j, "theta");
  m.max_elements = required<std::size_t>(j, "max_elements");
  m.output_dir = required<std::string>(j, "output_dir");
  m.seed = j.value("seed", std::uint64_t{0});
  m.tool_version = j.value("tool_version", std::string(experiment::tool_version));
  m.timestamp = j.value("timestamp", std::string());
  if (j.contains("preset") && !j["preset"].is_null()) m.preset = j["preset"].get<int>();
  m.plots = j.value("plots", true);
  m.mesh_dump = j.value("mesh_dump", false);
  return m;
}

ExperimentManifest load_manifest(const fs::path& path) {
  std::ifstream f(path);
  if (!f) throw InputError("cannot read manifest " + path.string());
  try {
    return manifest_from_json(nlohmann::json::parse(f));
  } catch (const nlohmann::json::parse_error& e) {
    throw InputError("manifest " + path.string() + " is not valid JSON: " + e.what());
  }
}

void save_manifest(const fs::path& path, const ExperimentManifest& m) { open_out(path) << to_json(m).dump(2) << "\n"; }

std::span<const Preset> presets() { return preset_table; }

const Preset& preset(int id) {
  for (const auto& p : preset_table)
    if (p.id == id) return p;
  throw InputError("unknown preset " + std::to_string(id) + " (expected 1, 2 or 3)");
}

void apply_preset(ExperimentManifest& m, int id) {
  const auto& p = preset(id);
  m.delta_z = p.delta_z;
  m.lambda = p.lambda;
  m.theta = p.theta;
  m.preset = id;
}

void print_presets(std::ostream& out) {
  for (const auto& p : preset_table) {
    char buf[128];
    std::snprintf(buf, sizeof buf, "preset %d: delta_z=%g lambda=%g theta=%g  ", p.id, p.delta_z, p.lambda, p.theta);
    out << buf << p.note << "\n";
  }
}

AdaptiveConfig to_config(const ExperimentManifest& m, const NonlinearModel& model) {
  AdaptiveConfig c;
  c.scheme.kind = kind_of(m.scheme);
  c.scheme.delta_z = m.delta_z;
  c.theta = m.theta;
  c.lambda = m.lambda;
  c.max_elements = m.max_elements;
  validate_config(c, model);
  return c;
}

std::string utc_timestamp() {
  const std::time_t now = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void write_csv_row(std::ostream& out, const HistoryRow& r) {
  out << r.N << ',' << r.n << ',' << r.step << ',' << r.elems << ',' << r.dofs << ',' << format_double(r.eta) << ','
      << format_double(r.energy) << ',' << format_double(r.energy_drop) << ',' << format_double(r.error) << ','
      << format_double(r.quasi_error) << ',' << format_double(r.kappa) << ',' << format_double(r.dt_s) << ','
      << r.cum_elems << '\n';
}

void write_history_csv(std::ostream& out, const RunHistory& h) {
  out << csv_header << '\n';
  for (const auto& r : h.rows) write_csv_row(out, r);
}

std::vector<WindowSlope> windowed_slopes(std::span<const double> x, std::span<const double> y, double width) {
  std::vector<WindowSlope> out;
  if (x.empty()) return out;
  const double top = *std::max_element(x.begin(), x.end());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double end = x[i] * std::pow(10.0, width);
    if (end > top) break;
    try {
      const auto fit = fit_loglog_window(x, y, x[i], end);
      if (fit.points >= 3) out.push_back({x[i], end, fit.slope});
    } catch (const InputError&) {
    }
  }
  return out;
}

std::optional<double> crossover(std::span<const WindowSlope> windows, double lo, double hi) {
  std::optional<double> start;
  for (const auto& w : windows) {
    const bool inside = w.slope >= lo && w.slope <= hi;
    if (!inside) start.reset();
    else if (!start) start = w.x_begin;
  }
  return start;
}

RunSummary summarize(const RunHistory& h, const NonlinearModel& model) {
  RunSummary s;
  s.scheme = std::string(scheme_name(h.config.scheme.kind));
  s.status = h.status;
  s.diagnostic = h.diagnostic;
  s.meshes = h.meshes.size();
  s.inner_steps = h.total_inner_steps();
  if (!h.rows.empty()) {
    s.final_elements = h.rows.back().elems;
    s.final_eta = h.rows.back().eta;
    s.final_error = h.rows.back().error;
    s.wall_time_s = h.rows.back().dt_s;
  }
  const auto f = final_series(h);
  s.slope_eta_elems = maybe_slope(f.elems, f.eta);
  s.slope_error_elems = maybe_slope(f.elems, f.error);
  s.slope_eta_cost = maybe_slope(f.cost, f.eta);
  s.slope_eta_time = maybe_slope(f.time, f.eta);
  const auto windows = windowed_slopes(f.elems, f.eta);
  s.crossover_elems = crossover(windows);
  s.effectivity_min = std::numeric_limits<double>::infinity();
  s.effectivity_max = 0.0;
  for (const auto& r : h.rows) {
    if (!(r.eta > 0.0) || !std::isfinite(r.error)) continue;
    s.effectivity_min = std::min(s.effectivity_min, r.error / r.eta);
    s.effectivity_max = std::max(s.effectivity_max, r.error / r.eta);
  }
  s.constants = scheme_constants(h.config.scheme, model);
  return s;
}

void write_summary(std::ostream& out, const ExperimentManifest& m, std::span<const RunSummary> runs,
                   std::optional<double> reference) {
  out << "ailfem " << m.tool_version << "  " << m.timestamp << "\n";
  out << "theta " << m.theta << "  lambda " << m.lambda << "  delta_z " << m.delta_z << "  max_elements "
      << m.max_elements;
  if (m.preset) out << "  preset " << *m.preset;
  out << "\n";
  out << "reference energy " << opt(reference) << "\n\n";
  for (const auto& s : runs) {
    out << "[" << s.scheme << "]\n";
    out << "  status                 " << status_name(s.status) << "\n";
    if (!s.diagnostic.empty()) out << "  diagnostic             " << s.diagnostic << "\n";
    out << "  meshes                 " << s.meshes << "\n";
    out << "  inner steps            " << s.inner_steps << "\n";
    out << "  final elements         " << s.final_elements << "\n";
    out << "  final eta              " << format_double(s.final_eta) << "\n";
    out << "  final error            " << format_double(s.final_error) << "\n";
    out << "  wall time [s]          " << format_double(s.wall_time_s) << "\n";
    out << "  slope eta/#T           " << opt(s.slope_eta_elems) << "\n";
    out << "  slope error/#T         " << opt(s.slope_error_elems) << "\n";
    out << "  slope eta/cost         " << opt(s.slope_eta_cost) << "\n";
    out << "  slope eta/time         " << opt(s.slope_eta_time) << "\n";
    out << "  rate crossover #T      " << opt(s.crossover_elems) << "\n";
    out << "  effectivity range      " << format_double(s.effectivity_min) << " .. " << format_double(s.effectivity_max)
        << "\n";
    const auto& c = s.constants;
    out << "  C_H " << format_double(c.C_H) << "  q_ctr " << format_double(c.q_ctr) << "  lambda_opt "
        << format_double(c.lambda_opt) << "  energy contraction "
        << (c.energy_contraction_guaranteed ? "guaranteed" : "not guaranteed") << "\n\n";
  }
}

void write_run_outputs(const fs::path& dir, const ExperimentManifest& m, const RunHistory& h,
                       const NonlinearModel& model, std::optional<double> reference) {
  ensure_dir(dir);
  {
    auto f = open_out(dir / "history.csv");
    write_history_csv(f, h);
  }
  save_manifest(dir / "manifest.json", m);
  const RunSummary s = summarize(h, model);
  {
    auto f = open_out(dir / "summary.txt");
    write_summary(f, m, std::span<const RunSummary>(&s, 1), reference);
  }
  if (m.mesh_dump && h.final_solution.mesh) {
    auto f = open_out(dir / "mesh_final.txt");
    write_mesh(f, *h.final_solution.mesh);
  }
  if (!m.plots) return;

  const auto f = final_series(h);
  const std::string name = s.scheme;
  svg::write(dir / "rate_elems.svg", {"convergence vs elements (" + name + ")", "#T", "value", true, true, -0.5, {}, ""},
             {{"eta", f.elems, f.eta}, {"error", f.elems, f.error}});
  svg::write(dir / "rate_time.svg", {"convergence vs time (" + name + ")", "cumulative time [s]", "value", true, true, -0.5, {}, ""},
             {{"eta", f.time, f.eta}, {"error", f.time, f.error}});
  svg::write(dir / "iterations.svg", {"inner steps per mesh (" + name + ")", "#T", "n(N)", true, false, {}, {}, ""},
             {{"n(N)", f.elems, f.steps}});
  svg::write(dir / "kappa.svg", {"energy drop quotient (" + name + ")", "#T", "kappa_N", true, true, {},
                                 s.constants.C_H > 0 ? std::optional<double>(s.constants.C_H) : std::nullopt, "C_H"},
             {{"kappa_N", f.elems, f.kappa}});
  std::vector<double> ex, ey;
  if (reference) {
    for (std::uint32_t N = 0; N < h.meshes.size(); ++N) {
      if (h.meshes[N].inner_steps == 0) continue;
      try {
        ey.push_back(contraction_factor(h, N, *reference));
        ex.push_back(h.meshes[N].elems);
      } catch (const InputError&) {
      }
    }
  }
  svg::write(dir / "contraction.svg", {"energy contraction factor (" + name + ")", "#T", "factor", true, true, {}, {}, ""},
             {{"contraction", ex, ey}});
}

unsigned thread_budget() {
  unsigned n = std::max(1u, std::thread::hardware_concurrency());
  if (const char* env = std::getenv("AILFEM_THREADS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && v > 0) n = static_cast<unsigned>(v);
  }
  return n;
}

int run_experiment(const ExperimentManifest& m, std::ostream& log) {
  const auto model = default_model();
  const auto problem = lshape_solution(model);
  const AdaptiveConfig config = to_config(m, model);
  const RunHistory h = run_ailfem(config, model, problem);
  const auto reference = m.plots ? try_reference_energy(model, problem, log) : std::nullopt;
  write_run_outputs(m.output_dir, m, h, model, reference);
  log << m.scheme << ": " << status_name(h.status) << ", " << h.meshes.size() << " meshes, final #T "
      << (h.rows.empty() ? 0 : h.rows.back().elems) << ", final eta " << format_double(h.rows.back().eta) << "\n";
  if (h.status != RunStatus::completed) {
    log << "run failed: " << h.diagnostic << "\n";
    return 1;
  }
  return 0;
}

int compare_schemes(const ExperimentManifest& m, std::ostream& log) {
  const auto model = default_model();
  const auto problem = lshape_solution(model);
  const std::vector<std::string> names{"zarantonello", "kacanov", "newton"};
  std::vector<ExperimentManifest> manifests;
  for (const auto& n : names) {
    ExperimentManifest sub = m;
    sub.scheme = n;
    sub.output_dir = (fs::path(m.output_dir) / n).string();
    to_config(sub, model);
    manifests.push_back(sub);
  }

  std::vector<RunHistory> runs(names.size());
  std::vector<std::string> failures(names.size());
  const unsigned workers = std::min<unsigned>(thread_budget(), static_cast<unsigned>(names.size()));
  std::size_t next = 0;
  std::mutex lock;
  auto work = [&] {
    for (;;) {
      std::size_t i;
      {
        std::lock_guard<std::mutex> g(lock);
        if (next == names.size()) return;
        i = next++;
      }
      try {
        runs[i] = run_ailfem(to_config(manifests[i], model), model, problem);
      } catch (const std::exception& e) {
        failures[i] = e.what();
      }
    }
  };
  if (workers <= 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(work);
    for (auto& t : pool) t.join();
  }

  const auto reference = m.plots ? try_reference_energy(model, problem, log) : std::nullopt;
  ensure_dir(m.output_dir);
  int code = 0;
  std::vector<RunSummary> summaries;
  std::vector<svg::Series> eta_elems, err_elems, eta_time, err_time;
  auto merged = open_out(fs::path(m.output_dir) / "history.csv");
  merged << "scheme," << csv_header << '\n';
  for (std::size_t i = 0; i < names.size(); ++i) {
    if (!failures[i].empty()) {
      log << names[i] << ": failed before producing a history: " << failures[i] << "\n";
      code = 1;
      continue;
    }
    const auto& h = runs[i];
    write_run_outputs(manifests[i].output_dir, manifests[i], h, model, reference);
    for (const auto& r : h.rows) {
      merged << names[i] << ',';
      write_csv_row(merged, r);
    }
    summaries.push_back(summarize(h, model));
    const auto f = final_series(h);
    eta_elems.push_back({"eta " + names[i], f.elems, f.eta});
    err_elems.push_back({"error " + names[i], f.elems, f.error});
    eta_time.push_back({"eta " + names[i], f.time, f.eta});
    err_time.push_back({"error " + names[i], f.time, f.error});
    log << names[i] << ": " << status_name(h.status) << ", " << h.meshes.size() << " meshes, "
        << h.total_inner_steps() << " inner steps\n";
    if (h.status != RunStatus::completed) {
      log << names[i] << " run failed: " << h.diagnostic << "\n";
      code = 1;
    }
  }
  ExperimentManifest top = m;
  top.scheme = "all";
  save_manifest(fs::path(m.output_dir) / "manifest.json", top);
  {
    auto f = open_out(fs::path(m.output_dir) / "summary.txt");
    write_summary(f, top, summaries, reference);
  }
  if (m.plots) {
    std::vector<svg::Series> by_elems = eta_elems, by_time = eta_time;
    by_elems.insert(by_elems.end(), err_elems.begin(), err_elems.end());
    by_time.insert(by_time.end(), err_time.begin(), err_time.end());
    svg::write(fs::path(m.output_dir) / "rate_elems.svg",
               {"estimator and error vs elements", "#T", "value", true, true, -0.5, {}, ""}, by_elems);
    svg::write(fs::path(m.output_dir) / "rate_time.svg",
               {"estimator and error vs time", "cumulative time [s]", "value", true, true, -0.5, {}, ""}, by_time);
  }
  return code;
}

}  // namespace ailfem::experiment
