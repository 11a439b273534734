#include <exception>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "ailfem/errors.hpp"
#include "experiment.hpp"

namespace ex = ailfem::experiment;

int main(int argc, char** argv) {
  CLI::App app{"Adaptive iteratively linearized FEM for a quasi-linear elliptic problem on the L-shape"};
  app.set_version_flag("--version", std::string(ex::tool_version));

  std::optional<std::string> scheme, out, manifest_path;
  std::optional<double> delta_z, theta, lambda;
  std::optional<std::size_t> max_elements;
  std::optional<int> preset_id;
  std::optional<std::uint64_t> seed;
  bool no_plots = false, mesh_dump = false, list = false, compare = false;

  app.add_option("--scheme", scheme, "zarantonello, kacanov or newton")
      ->check(CLI::IsMember({"zarantonello", "kacanov", "newton"}));
  app.add_option("--delta-z", delta_z, "Zarantonello step, in (0, 1/3)");
  app.add_option("--theta", theta, "Doerfler bulk parameter, in (0, 1]");
  app.add_option("--lambda", lambda, "inner stopping parameter, > 0");
  app.add_option("--max-elements", max_elements, "stop once #T exceeds this");
  app.add_option("--out", out, "output directory");
  app.add_option("--preset", preset_id, "experiment preset (1, 2 or 3)");
  app.add_option("--seed", seed, "recorded in the manifest");
  app.add_option("--manifest", manifest_path, "rerun from a manifest.json")->check(CLI::ExistingFile);
  app.add_flag("--no-plots", no_plots, "skip SVG output");
  app.add_flag("--mesh-dump", mesh_dump, "write the final mesh");
  app.add_flag("--list-experiments", list, "print the presets and exit");
  app.add_flag("--compare", compare, "run all three schemes");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  if (list) {
    ex::print_presets(std::cout);
    return 0;
  }

  try {
    ex::ExperimentManifest m;
    if (manifest_path) m = ex::load_manifest(*manifest_path);
    if (preset_id) ex::apply_preset(m, *preset_id);
    if (scheme) m.scheme = *scheme;
    if (delta_z) m.delta_z = *delta_z;
    if (theta) m.theta = *theta;
    if (lambda) m.lambda = *lambda;
    if (max_elements) m.max_elements = *max_elements;
    if (out) m.output_dir = *out;
    if (seed) m.seed = *seed;
    if (no_plots) m.plots = false;
    if (mesh_dump) m.mesh_dump = true;
    m.tool_version = ex::tool_version;
    m.timestamp = ex::utc_timestamp();
    return compare ? ex::compare_schemes(m, std::cerr) : ex::run_experiment(m, std::cerr);
  } catch (const ailfem::InputError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
