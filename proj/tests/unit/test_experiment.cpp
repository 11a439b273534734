#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "ailfem/errors.hpp"
#include "experiment.hpp"
#include "svg.hpp"

using namespace ailfem;
using namespace ailfem::experiment;
namespace fs = std::filesystem;

namespace {

RunHistory small_run(SchemeKind kind, std::size_t max_elements = 1500) {
  const auto model = default_model();
  AdaptiveConfig c;
  c.scheme.kind = kind;
  c.max_elements = max_elements;
  return run_ailfem(c, model, lshape_solution(model));
}

std::string strip_column(const std::string& csv, std::size_t column) {
  std::istringstream in(csv);
  std::ostringstream out;
  std::string line;
  while (std::getline(in, line)) {
    std::istringstream fields(line);
    std::string f;
    std::size_t k = 0;
    while (std::getline(fields, f, ',')) {
      if (k++ != column) out << f << ',';
    }
    out << '\n';
  }
  return out.str();
}

fs::path scratch(const std::string& name) {
  const auto p = fs::temp_directory_path() / ("ailfem_test_" + name);
  fs::remove_all(p);
  return p;
}

}  // namespace

TEST(Manifest, JsonRoundTrip) {
  ExperimentManifest m;
  m.scheme = "newton";
  m.delta_z = 0.25;
  m.lambda = 0.01;
  m.theta = 0.3;
  m.max_elements = 12345;
  m.output_dir = "somewhere";
  m.seed = 42;
  m.timestamp = "2024-01-01T00:00:00Z";
  m.preset = 3;
  m.plots = false;
  m.mesh_dump = true;
  const auto back = manifest_from_json(nlohmann::json::parse(to_json(m).dump()));
  EXPECT_EQ(back.scheme, m.scheme);
  EXPECT_EQ(back.delta_z, m.delta_z);
  EXPECT_EQ(back.lambda, m.lambda);
  EXPECT_EQ(back.theta, m.theta);
  EXPECT_EQ(back.max_elements, m.max_elements);
  EXPECT_EQ(back.output_dir, m.output_dir);
  EXPECT_EQ(back.seed, m.seed);
  EXPECT_EQ(back.timestamp, m.timestamp);
  EXPECT_EQ(back.preset, m.preset);
  EXPECT_EQ(back.plots, m.plots);
  EXPECT_EQ(back.mesh_dump, m.mesh_dump);
}

TEST(Manifest, MissingOrMistypedFieldsThrow) {
  auto j = to_json(ExperimentManifest{});
  j.erase("lambda");
  EXPECT_THROW(manifest_from_json(j), InputError);
  j = to_json(ExperimentManifest{});
  j["theta"] = "half";
  EXPECT_THROW(manifest_from_json(j), InputError);
  EXPECT_THROW(manifest_from_json(nlohmann::json::array()), InputError);
}

TEST(Manifest, FileRoundTrip) {
  const auto dir = scratch("manifest");
  fs::create_directories(dir);
  ExperimentManifest m;
  m.scheme = "zarantonello";
  save_manifest(dir / "manifest.json", m);
  EXPECT_EQ(load_manifest(dir / "manifest.json").scheme, "zarantonello");
  EXPECT_THROW(load_manifest(dir / "missing.json"), InputError);
  std::ofstream(dir / "bad.json") << "{ not json";
  EXPECT_THROW(load_manifest(dir / "bad.json"), InputError);
}

TEST(Presets, Table) {
  ASSERT_EQ(presets().size(), 3u);
  EXPECT_EQ(preset(1).delta_z, 0.1);
  EXPECT_EQ(preset(1).lambda, 0.5);
  EXPECT_EQ(preset(2).delta_z, 0.3);
  EXPECT_EQ(preset(2).lambda, 0.1);
  EXPECT_EQ(preset(3).lambda, 0.01);
  for (const auto& p : presets()) EXPECT_EQ(p.theta, 0.5);
  EXPECT_THROW(preset(4), InputError);
}

TEST(Presets, ApplyAndPrint) {
  ExperimentManifest m;
  apply_preset(m, 1);
  EXPECT_EQ(m.delta_z, 0.1);
  EXPECT_EQ(m.lambda, 0.5);
  EXPECT_EQ(m.preset, 1);
  std::ostringstream out;
  print_presets(out);
  EXPECT_NE(out.str().find("delta_z=0.1 lambda=0.5"), std::string::npos);
  EXPECT_NE(out.str().find("delta_z=0.3 lambda=0.01"), std::string::npos);
}

TEST(ToConfig, ValidatesParameters) {
  const auto model = default_model();
  ExperimentManifest m;
  m.scheme = "zarantonello";
  m.delta_z = 0.5;
  EXPECT_THROW(to_config(m, model), InputError);
  m.delta_z = 0.3;
  EXPECT_EQ(to_config(m, model).scheme.kind, SchemeKind::zarantonello);
  m.scheme = "gauss";
  EXPECT_THROW(to_config(m, model), InputError);
  m.scheme = "kacanov";
  m.theta = 0.0;
  EXPECT_THROW(to_config(m, model), InputError);
}

TEST(Csv, FormatsFullPrecision) {
  EXPECT_EQ(format_double(0.1), "0.10000000000000001");
  EXPECT_EQ(std::stod(format_double(M_PI)), M_PI);
  HistoryRow r;
  r.N = 2;
  r.n = 3;
  r.step = 7;
  r.elems = 400;
  r.dofs = 180;
  r.energy_drop = std::nan("");
  std::ostringstream out;
  write_csv_row(out, r);
  EXPECT_EQ(out.str().substr(0, 16), "2,3,7,400,180,0,");
  EXPECT_NE(out.str().find("nan"), std::string::npos);
}

TEST(Csv, HeaderAndRowCount) {
  const auto h = small_run(SchemeKind::kacanov);
  std::ostringstream out;
  write_history_csv(out, h);
  std::istringstream in(out.str());
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line, csv_header);
  std::size_t rows = 0;
  while (std::getline(in, line)) {
    ++rows;
    EXPECT_EQ(std::count(line.begin(), line.end(), ','), 12);
  }
  EXPECT_EQ(rows, h.rows.size());
}

TEST(Csv, ByteIdenticalAcrossRunsExceptTiming) {
  std::ostringstream a, b;
  write_history_csv(a, small_run(SchemeKind::newton));
  write_history_csv(b, small_run(SchemeKind::newton));
  EXPECT_EQ(strip_column(a.str(), 11), strip_column(b.str(), 11));
}

TEST(WindowedSlopes, PowerLawAndCrossover) {
  std::vector<double> x, y;
  for (int k = 0; k <= 40; ++k) {
    x.push_back(std::pow(10.0, 2.0 + k / 10.0));
    y.push_back(x.back() < 1e4 ? std::pow(x.back(), -0.2) : std::pow(1e4, 0.3) * std::pow(x.back(), -0.5));
  }
  const auto w = windowed_slopes(x, y, 0.5);
  ASSERT_FALSE(w.empty());
  EXPECT_NEAR(w.front().slope, -0.2, 1e-12);
  EXPECT_NEAR(w.back().slope, -0.5, 1e-12);
  const auto c = crossover(w);
  ASSERT_TRUE(c.has_value());
  EXPECT_GT(*c, 1e3);
  EXPECT_LE(*c, 1e4 * 1.0001);
  const std::vector<double> flat(x.size(), 1.0);
  EXPECT_FALSE(crossover(windowed_slopes(x, flat)).has_value());
}

TEST(Summary, SlopesAndEffectivity) {
  const auto model = default_model();
  const auto h = small_run(SchemeKind::kacanov, 20000);
  const auto s = summarize(h, model);
  EXPECT_EQ(s.scheme, "kacanov");
  EXPECT_EQ(s.meshes, h.meshes.size());
  ASSERT_TRUE(s.slope_eta_elems.has_value());
  EXPECT_LT(*s.slope_eta_elems, -0.3);
  EXPECT_GT(s.effectivity_min, 0.0);
  EXPECT_LE(s.effectivity_min, s.effectivity_max);
  std::ostringstream out;
  ExperimentManifest m;
  write_summary(out, m, std::span<const RunSummary>(&s, 1), -1.0);
  EXPECT_NE(out.str().find("[kacanov]"), std::string::npos);
  EXPECT_NE(out.str().find("slope eta/#T"), std::string::npos);
}

TEST(Svg, RenderSkipsUnusableSamples) {
  svg::PlotSpec spec{"t<1>", "x", "y", true, true, -0.5, 0.1, "ref"};
  const std::string s = svg::render(spec, {{"a", {1, 10, 100, -1}, {1, 0.3, 0.1, 2}}, {"b", {}, {}}});
  EXPECT_EQ(s.rfind("<svg", 0), 0u);
  EXPECT_NE(s.find("</svg>"), std::string::npos);
  EXPECT_NE(s.find("t&lt;1&gt;"), std::string::npos);
  EXPECT_EQ(s.find("nan"), std::string::npos);
  EXPECT_NE(s.find("slope -0.5"), std::string::npos);
  EXPECT_EQ(std::count(s.begin(), s.end(), '\n') > 10, true);
}

TEST(RunOutputs, WritesAllFiles) {
  const auto dir = scratch("outputs");
  const auto model = default_model();
  const auto h = small_run(SchemeKind::zarantonello);
  ExperimentManifest m;
  m.scheme = "zarantonello";
  m.mesh_dump = true;
  write_run_outputs(dir, m, h, model, -1.0);
  for (const char* f : {"history.csv", "manifest.json", "summary.txt", "rate_elems.svg", "rate_time.svg",
                        "contraction.svg", "iterations.svg", "kappa.svg", "mesh_final.txt"})
    EXPECT_TRUE(fs::exists(dir / f)) << f;
  std::ifstream mesh(dir / "mesh_final.txt");
  EXPECT_EQ(read_mesh(mesh).n_elements(), h.rows.back().elems);
}
