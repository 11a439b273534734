#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "ailfem/estimator.hpp"
#include "ailfem/fem.hpp"
#include "ailfem/mesh.hpp"
#include "ailfem/model.hpp"

namespace ailfem {

/// Constants of the energy contraction analysis for one scheme.
struct TheoryConstants {
  double nu = 0.0;
  double L_F = 0.0;
  double alpha = 0.0;
  double beta = 0.0;
  double C_H = 0.0;
  /// Energy contraction factor; 1 when C_H <= 0.
  double q_ctr = 1.0;
  /// ((1 - q_ctr) / (q_ctr C_stb)) (nu / 2)^{1/2} with C_stb = 1; 0 when C_H <= 0.
  double lambda_opt = 0.0;
  bool energy_contraction_guaranteed = false;
  /// Zarantonello only: 1 - delta (2 nu - delta L_F^2).
  std::optional<double> norm_contraction_factor;
  bool norm_contraction_guaranteed = false;
};

TheoryConstants scheme_constants(const SchemeSpec& scheme, const NonlinearModel& model);

/// sup_{t >= 0} |2 t mu'(t^2)|, evaluated numerically.
double flux_derivative_bound(const NonlinearModel& model);

struct StepResult {
  Vector u;
  double energy = 0.0;
  /// Accepted Newton damping (1 for the other schemes).
  double damping = 1.0;
  int halvings = 0;
  SolveReport solve;
};

/// One step u^n -> u^{n+1}. For Newton with correction enabled the damping is
/// halved until E(u^n) - E(u^{n+1}) >= 1e-12 ||u^{n+1} - u^n||^2 (up to a
/// 1e-12 max(1, |E|) rounding allowance); SolverError after 30 halvings.
StepResult linearization_step(const SchemeSpec& scheme, const Discretization& disc, std::span<const double> u_n,
                              const NonlinearModel& model, double rel_tol = 1e-12,
                              std::optional<double> energy_n = {});

struct AdaptiveConfig {
  double theta = 0.5;
  double lambda = 0.1;
  SchemeSpec scheme;
  std::size_t max_elements = 200000;
  std::size_t max_inner_iterations = 500;
  double solver_rel_tol = 1e-12;
  /// Initial mesh; the L-shape mesh when null.
  std::shared_ptr<const Mesh> initial_mesh;
};

void validate_config(const AdaptiveConfig& config, const NonlinearModel& model);

/// One visited pair (N, n).
struct HistoryRow {
  std::uint32_t N = 0;
  std::uint32_t n = 0;
  std::uint64_t step = 0;  // n + sum_{N' < N} n(N')
  Index elems = 0;
  Index dofs = 0;
  double eta = 0.0;
  double energy = 0.0;
  double energy_drop = 0.0;  // E(u^{n-1}) - E(u^n); NaN at n = 0
  double error = 0.0;        // ||grad(u* - u)||; NaN without an exact gradient
  double quasi_error = 0.0;  // error + eta
  double kappa = 0.0;        // energy_drop / ||u^{n-1} - u^n||^2; NaN when undefined
  double dt_s = 0.0;         // cumulative wall time
  std::uint64_t cum_elems = 0;
  double damping = 1.0;
};

struct MeshRecord {
  std::uint32_t N = 0;
  Index elems = 0;
  Index dofs = 0;
  std::size_t first_row = 0;
  std::size_t last_row = 0;
  std::uint32_t inner_steps = 0;  // n(N); 0 if the loop was aborted
  std::size_t marked = 0;
};

enum class RunStatus { completed, inner_cap_exceeded, solver_failure };

struct RunHistory {
  AdaptiveConfig config;
  std::string model_name;
  std::string problem_name;
  std::vector<HistoryRow> rows;
  std::vector<MeshRecord> meshes;
  RunStatus status = RunStatus::completed;
  std::string diagnostic;
  /// Last iterate on the last mesh.
  FeFunction final_solution;

  /// Row of the final iterate u_N^{n(N)} of every mesh whose loop terminated.
  std::vector<HistoryRow> final_rows() const;
  std::uint64_t total_inner_steps() const;
};

using RowCallback = std::function<void(const HistoryRow&)>;

/// Adaptive loop: on each mesh, iterate until
/// (E(u^{n-1}) - E(u^n))_+^{1/2} <= lambda eta(u^n) (at least one step), then
/// mark with Doerfler, refine and prolongate. Stops once #T > max_elements or
/// eta = 0. Inner-cap and solver failures end the run with a partial history.
RunHistory run_ailfem(const AdaptiveConfig& config, const NonlinearModel& model, const ManufacturedSolution& problem,
                      const RowCallback& on_row = {});

/// (E(u_N^{n(N)}) - E*) / (E(u_N^0) - E*). InputError when E* is not below
/// every recorded energy on mesh N.
double contraction_factor(const RunHistory& history, std::uint32_t N, double reference_energy);

/// kappa of the last step on mesh N; nullopt when undefined.
std::optional<double> f4_quotient(const RunHistory& history, std::uint32_t N);

struct MinimizerResult {
  Vector u;
  double energy = 0.0;
  std::size_t iterations = 0;
};

/// Discrete minimizer by Kacanov iteration (solved in correction form) until
/// |Delta E| <= 1e-14 max(1, |E|) and the increment has stagnated, or
/// `max_iterations`.
MinimizerResult discrete_minimizer(const Discretization& disc, const NonlinearModel& model,
                                   std::span<const double> initial_guess = {}, std::size_t max_iterations = 500);

struct ReferenceEnergy {
  double value = 0.0;         // = quadrature
  double quadrature = 0.0;    // int psi(|grad u*|^2) - g u*
  double extrapolated = 0.0;  // Richardson from two adaptive discrete energies
  double discrepancy = 0.0;   // |quadrature - extrapolated| / |quadrature|
  Index quadrature_elements = 0;
  Index adaptive_elements = 0;
};

/// E(u*) by subdivision-refined composite quadrature on a uniform mesh of at
/// least `budget_elements` elements, cross-checked by extrapolating adaptive
/// Kacanov energies assuming E(u_N) - E(u*) ~ (#T)^{-1}. DomainError when the
/// two differ by more than 1e-4 relative.
ReferenceEnergy reference_energy(const NonlinearModel& model, const ManufacturedSolution& problem,
                                 std::size_t budget_elements, std::shared_ptr<const Mesh> initial_mesh = nullptr);

/// The composite quadrature part of reference_energy alone.
double quadrature_energy(const NonlinearModel& model, const ManufacturedSolution& problem, const Mesh& mesh);

}  // namespace ailfem
