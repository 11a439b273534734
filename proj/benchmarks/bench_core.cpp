#include <benchmark/benchmark.h>

#include <memory>

#include "ailfem/driver.hpp"
#include "ailfem/marking.hpp"

using namespace ailfem;

namespace {

// Adaptively graded L-shape mesh with at least `elements` elements.
std::shared_ptr<const Mesh> graded_mesh(std::size_t elements) {
  const auto model = default_model();
  AdaptiveConfig c;
  c.max_elements = elements;
  return run_ailfem(c, model, lshape_solution(model)).final_solution.mesh;
}

void BM_UniformRefine(benchmark::State& state) {
  Mesh m = make_lshape_initial();
  while (m.n_elements() < static_cast<Index>(state.range(0))) m = uniform_refine(m);
  for (auto _ : state) benchmark::DoNotOptimize(uniform_refine(m));
  state.counters["elements"] = m.n_elements();
}
BENCHMARK(BM_UniformRefine)->Arg(3000)->Arg(50000)->Unit(benchmark::kMillisecond);

void BM_DoerflerRefine(benchmark::State& state) {
  const auto model = default_model();
  const auto problem = lshape_solution(model);
  const auto mesh = graded_mesh(state.range(0));
  Discretization disc(mesh, problem);
  const auto marks = doerfler(local_indicators(disc, Vector(disc.n_dofs(), 0.0), model), 0.5);
  for (auto _ : state) benchmark::DoNotOptimize(refine(*mesh, marks));
  state.counters["elements"] = mesh->n_elements();
}
BENCHMARK(BM_DoerflerRefine)->Arg(3000)->Arg(50000)->Unit(benchmark::kMillisecond);

void BM_AssembleKacanov(benchmark::State& state) {
  const auto model = default_model();
  const auto mesh = graded_mesh(state.range(0));
  Discretization disc(mesh, lshape_solution(model));
  const Vector u(disc.n_dofs(), 0.1);
  for (auto _ : state) benchmark::DoNotOptimize(assemble_linearized({SchemeKind::kacanov}, disc, u, model));
  state.counters["dofs"] = disc.n_dofs();
}
BENCHMARK(BM_AssembleKacanov)->Arg(3000)->Arg(50000)->Unit(benchmark::kMillisecond);

void BM_SolvePcg(benchmark::State& state) {
  const auto model = default_model();
  const auto mesh = graded_mesh(state.range(0));
  Discretization disc(mesh, lshape_solution(model));
  const SparseMatrix k = assemble_stiffness(disc);
  const auto b = disc.load_vector();
  SolveReport report;
  for (auto _ : state) benchmark::DoNotOptimize(solve_spd(k, b, 1e-12, {}, &report));
  state.counters["dofs"] = disc.n_dofs();
  state.counters["iterations"] = static_cast<double>(report.iterations);
}
BENCHMARK(BM_SolvePcg)->Arg(3000)->Arg(50000)->Unit(benchmark::kMillisecond);

void BM_Estimator(benchmark::State& state) {
  const auto model = default_model();
  const auto mesh = graded_mesh(state.range(0));
  Discretization disc(mesh, lshape_solution(model));
  const Vector u(disc.n_dofs(), 0.1);
  for (auto _ : state) benchmark::DoNotOptimize(local_indicators(disc, u, model));
  state.counters["elements"] = mesh->n_elements();
}
BENCHMARK(BM_Estimator)->Arg(3000)->Arg(50000)->Unit(benchmark::kMillisecond);

}  // namespace
BENCHMARK_MAIN();
