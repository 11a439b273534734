#include "ailfem/driver.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <string>

#include "ailfem/errors.hpp"
#include "ailfem/marking.hpp"
#include "ailfem/quadrature.hpp"
#include "reduce.hpp"

namespace ailfem {
namespace {

constexpr double nan = std::numeric_limits<double>::quiet_NaN();

double increment_norm(const Discretization& disc, std::span<const double> a, std::span<const double> b) {
  Vector d(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) d[i] = a[i] - b[i];
  return h1_seminorm(disc, d);
}

class Stopwatch {
 public:
  void start() { begin_ = std::chrono::steady_clock::now(); }
  void stop() { total_ += std::chrono::steady_clock::now() - begin_; }
  double seconds() const { return std::chrono::duration<double>(total_).count(); }

 private:
  std::chrono::steady_clock::time_point begin_{};
  std::chrono::steady_clock::duration total_{};
};

}  // namespace

double flux_derivative_bound(const NonlinearModel& model) {
  auto f = [&](double t) { return std::abs(2.0 * t * model.mu_prime(t * t)); };
  constexpr double step = 1e-3;
  constexpr int samples = 20000;
  int best = 0;
  double best_value = f(0.0);
  for (int k = 1; k <= samples; ++k) {
    const double v = f(k * step);
    if (v > best_value) {
      best_value = v;
      best = k;
    }
  }
  double lo = std::max(0.0, (best - 1) * step), hi = (best + 1) * step;
  for (int it = 0; it < 100; ++it) {
    const double m1 = lo + (hi - lo) / 3.0, m2 = hi - (hi - lo) / 3.0;
    if (f(m1) < f(m2)) lo = m1;
    else hi = m2;
  }
  return std::max(best_value, f(0.5 * (lo + hi)));
}

TheoryConstants scheme_constants(const SchemeSpec& scheme, const NonlinearModel& model) {
  validate_scheme(scheme, model);
  TheoryConstants c;
  c.nu = model.nu();
  c.L_F = model.lipschitz();
  switch (scheme.kind) {
    case SchemeKind::zarantonello: {
      const double d = scheme.delta_z;
      c.alpha = c.beta = 1.0 / d;
      c.C_H = 1.0 / d - c.L_F / 2.0;
      c.norm_contraction_factor = 1.0 - d * (2.0 * c.nu - d * c.L_F * c.L_F);
      c.norm_contraction_guaranteed = d < 2.0 * c.nu / (c.L_F * c.L_F);
      break;
    }
    case SchemeKind::kacanov:
      c.alpha = model.mu_inf;
      c.beta = model.mu_sup;
      c.C_H = c.alpha / 2.0;
      break;
    case SchemeKind::newton: {
      const double beta_prime = 2.0 * model.M_mu + flux_derivative_bound(model);
      const double d = scheme.newton_damping;  // delta_min = delta_max
      c.alpha = model.m_mu;
      c.beta = beta_prime / d;
      c.C_H = c.alpha / d - c.L_F / 2.0;
      break;
    }
  }
  if (c.C_H > 0.0) {
    const double q2 = 1.0 - 2.0 * c.C_H * c.nu * c.nu / (c.beta * c.beta * c.L_F);
    c.q_ctr = std::sqrt(std::max(0.0, q2));
    c.energy_contraction_guaranteed = true;
    c.lambda_opt = (1.0 - c.q_ctr) / c.q_ctr * std::sqrt(c.nu / 2.0);
  }
  return c;
}

StepResult linearization_step(const SchemeSpec& scheme, const Discretization& disc, std::span<const double> u_n,
                              const NonlinearModel& model, double rel_tol, std::optional<double> energy_n) {
  StepResult out;
  if (scheme.kind != SchemeKind::newton || !scheme.newton_correction) {
    const auto sys = assemble_linearized(scheme, disc, u_n, model);
    out.u = solve_spd(sys.matrix, sys.rhs, rel_tol, u_n, &out.solve);
    out.energy = energy(disc, out.u, model);
    out.damping = scheme.kind == SchemeKind::newton ? scheme.newton_damping : 1.0;
    return out;
  }

  const double e_n = energy_n ? *energy_n : energy(disc, u_n, model);
  double delta = scheme.newton_damping;
  for (int halvings = 0;; ++halvings) {
    const auto sys = assemble_linearized(scheme, disc, u_n, model, delta);
    out.u = solve_spd(sys.matrix, sys.rhs, rel_tol, u_n, &out.solve);
    out.energy = energy(disc, out.u, model);
    const double inc = increment_norm(disc, out.u, u_n);
    const double drop = e_n - out.energy;
    if (drop + 1e-12 * std::max(1.0, std::abs(e_n)) >= 1e-12 * inc * inc) {
      out.damping = delta;
      out.halvings = halvings;
      return out;
    }
    if (halvings == 30) {
      throw SolverError("newton damping fell below 2^-30 without energy decrease (drop " + std::to_string(drop) +
                            ", increment " + std::to_string(inc) + ")",
                        out.solve.relative_residual);
    }
    delta *= 0.5;
  }
}

void validate_config(const AdaptiveConfig& config, const NonlinearModel& model) {
  if (!(config.theta > 0.0 && config.theta <= 1.0)) throw InputError("theta must lie in (0, 1]");
  if (!(config.lambda > 0.0)) throw InputError("lambda must be positive");
  if (config.max_inner_iterations == 0) throw InputError("max_inner_iterations must be positive");
  if (!(config.solver_rel_tol > 0.0 && config.solver_rel_tol < 1.0)) throw InputError("solver tolerance must lie in (0, 1)");
  validate_scheme(config.scheme, model);
  const std::size_t initial = config.initial_mesh ? config.initial_mesh->n_elements() : 192;
  if (config.max_elements < initial) {
    throw InputError("max_elements (" + std::to_string(config.max_elements) + ") is below the initial mesh size " +
                     std::to_string(initial));
  }
}

std::vector<HistoryRow> RunHistory::final_rows() const {
  std::vector<HistoryRow> out;
  for (const auto& m : meshes) {
    if (m.inner_steps > 0) out.push_back(rows[m.last_row]);
  }
  return out;
}

std::uint64_t RunHistory::total_inner_steps() const {
  std::uint64_t s = 0;
  for (const auto& m : meshes) s += m.last_row - m.first_row;
  return s;
}

RunHistory run_ailfem(const AdaptiveConfig& config, const NonlinearModel& model, const ManufacturedSolution& problem,
                      const RowCallback& on_row) {
  validate_config(config, model);
  RunHistory history;
  history.config = config;
  history.model_name = model.name;
  history.problem_name = problem.name;

  std::shared_ptr<const Mesh> mesh =
      config.initial_mesh ? config.initial_mesh : std::make_shared<const Mesh>(make_lshape_initial());
  Vector u(build_dof_map(*mesh).n_dofs(), 0.0);
  Stopwatch clock;
  std::uint64_t cum_elems = 0;
  std::uint64_t step_base = 0;

  for (std::uint32_t N = 0;; ++N) {
    clock.start();
    Discretization disc(mesh, problem);
    double e_prev = energy(disc, u, model);
    IndicatorField ind = local_indicators(disc, u, model);
    double eta = total(ind);
    clock.stop();

    MeshRecord record;
    record.N = N;
    record.elems = mesh->n_elements();
    record.dofs = disc.n_dofs();
    record.first_row = history.rows.size();

    auto push_row = [&](std::uint32_t n, double e, double drop, double kappa, double damping,
                        std::span<const double> v) {
      HistoryRow row;
      row.N = N;
      row.n = n;
      row.step = step_base + n;
      row.elems = record.elems;
      row.dofs = record.dofs;
      row.eta = eta;
      row.energy = e;
      row.energy_drop = drop;
      row.error = disc.has_exact_gradient() ? h1_seminorm_error(disc, v) : nan;
      row.quasi_error = row.error + eta;
      row.kappa = kappa;
      row.dt_s = clock.seconds();
      cum_elems += record.elems;
      row.cum_elems = cum_elems;
      row.damping = damping;
      history.rows.push_back(row);
      if (on_row) on_row(row);
    };
    push_row(0, e_prev, nan, nan, 1.0, u);

    bool stopped = false;
    std::uint32_t n = 0;
    try {
      while (!stopped) {
        if (n == config.max_inner_iterations) {
          history.status = RunStatus::inner_cap_exceeded;
          history.diagnostic = "inner loop on mesh " + std::to_string(N) + " (" + std::to_string(record.elems) +
                               " elements) did not meet the stopping test within " +
                               std::to_string(config.max_inner_iterations) + " steps";
          break;
        }
        clock.start();
        StepResult step = linearization_step(config.scheme, disc, u, model, config.solver_rel_tol, e_prev);
        const double drop = e_prev - step.energy;
        ind = local_indicators(disc, step.u, model);
        eta = total(ind);
        stopped = std::sqrt(std::max(0.0, drop)) <= config.lambda * eta;
        clock.stop();

        const double inc = increment_norm(disc, step.u, u);
        const double kappa = inc > 0.0 ? drop / (inc * inc) : nan;
        ++n;
        u = std::move(step.u);
        e_prev = step.energy;
        push_row(n, e_prev, drop, kappa, step.damping, u);
      }
    } catch (const SolverError& e) {
      history.status = RunStatus::solver_failure;
      history.diagnostic = "solver failure on mesh " + std::to_string(N) + " (" + std::to_string(record.elems) +
                           " elements) at step " + std::to_string(n + 1) + ": " + e.what();
    }

    record.last_row = history.rows.size() - 1;
    record.inner_steps = stopped ? n : 0;
    history.final_solution = FeFunction{mesh, u};
    if (!stopped) {
      history.meshes.push_back(record);
      break;
    }
    step_base += n;

    if (mesh->n_elements() > config.max_elements || eta == 0.0) {
      history.meshes.push_back(record);
      break;
    }

    clock.start();
    const MarkSet marked = doerfler(ind, config.theta);
    auto fine = std::make_shared<const Mesh>(refine(*mesh, marked));
    FeFunction next = prolongate(FeFunction{mesh, u}, fine);
    clock.stop();
    record.marked = marked.size();
    history.meshes.push_back(record);
    mesh = std::move(fine);
    u = std::move(next.coefficients);
  }
  return history;
}

double contraction_factor(const RunHistory& history, std::uint32_t N, double reference_energy) {
  if (N >= history.meshes.size()) throw InputError("contraction_factor: mesh index out of range");
  const auto& m = history.meshes[N];
  for (std::size_t r = m.first_row; r <= m.last_row; ++r) {
    if (!(reference_energy < history.rows[r].energy)) {
      throw InputError("contraction_factor: reference energy " + std::to_string(reference_energy) +
                       " is not below the recorded energy " + std::to_string(history.rows[r].energy));
    }
  }
  return (history.rows[m.last_row].energy - reference_energy) / (history.rows[m.first_row].energy - reference_energy);
}

std::optional<double> f4_quotient(const RunHistory& history, std::uint32_t N) {
  if (N >= history.meshes.size()) throw InputError("f4_quotient: mesh index out of range");
  const auto& m = history.meshes[N];
  if (m.last_row == m.first_row) return std::nullopt;
  const double k = history.rows[m.last_row].kappa;
  if (std::isnan(k)) return std::nullopt;
  return k;
}

MinimizerResult discrete_minimizer(const Discretization& disc, const NonlinearModel& model,
                                   std::span<const double> initial_guess, std::size_t max_iterations) {
  MinimizerResult out;
  out.u = initial_guess.empty() ? Vector(disc.n_dofs(), 0.0) : Vector(initial_guess.begin(), initial_guess.end());
  if (out.u.size() != disc.n_dofs()) throw InputError("discrete_minimizer: initial guess has wrong length");
  out.energy = energy(disc, out.u, model);
  SchemeSpec kacanov;
  kacanov.kind = SchemeKind::kacanov;
  double last_inc = std::numeric_limits<double>::infinity();
  while (out.iterations < max_iterations) {
    // Kacanov step in correction form, so the solver tolerance is relative to
    // the increment rather than to the load.
    const auto sys = assemble_linearized(kacanov, disc, out.u, model);
    Vector defect = spmv(sys.matrix, out.u);
    for (std::size_t i = 0; i < defect.size(); ++i) defect[i] = sys.rhs[i] - defect[i];
    const Vector correction = solve_spd(sys.matrix, defect, 1e-10);
    Vector next = out.u;
    for (std::size_t i = 0; i < next.size(); ++i) next[i] += correction[i];
    const double next_energy = energy(disc, next, model);
    ++out.iterations;
    const double change = std::abs(out.energy - next_energy);
    const double inc = h1_seminorm(disc, correction);
    out.u = std::move(next);
    out.energy = next_energy;
    // Energy changes stagnate long before the iterates do; continue until the
    // increment is at round-off level or stops shrinking.
    if (change <= 1e-14 * std::max(1.0, std::abs(out.energy)) &&
        (inc <= 1e-13 * std::max(1.0, h1_seminorm(disc, out.u)) || inc > 0.5 * last_inc)) {
      break;
    }
    last_inc = inc;
  }
  return out;
}

namespace {

double rule_on(const std::array<Point2, 3>& c, const std::function<double(Point2)>& f) {
  return integrate_triangle(c, f);
}

double adaptive_integral(const std::array<Point2, 3>& c, const std::function<double(Point2)>& f, double whole,
                         double tol, int depth) {
  const Point2 m01 = midpoint(c[0], c[1]), m12 = midpoint(c[1], c[2]), m20 = midpoint(c[2], c[0]);
  const std::array<std::array<Point2, 3>, 4> kids{{{c[0], m01, m20}, {m01, c[1], m12}, {m20, m12, c[2]}, {m12, m20, m01}}};
  std::array<double, 4> part{};
  for (int k = 0; k < 4; ++k) part[k] = rule_on(kids[k], f);
  const double refined = part[0] + part[1] + part[2] + part[3];
  if (std::abs(refined - whole) <= tol || depth >= 50) return refined;
  double sum = 0.0;
  for (int k = 0; k < 4; ++k) sum += adaptive_integral(kids[k], f, part[k], tol / 2.0, depth + 1);
  return sum;
}

}  // namespace

double quadrature_energy(const NonlinearModel& model, const ManufacturedSolution& problem, const Mesh& mesh) {
  if (!problem.value || !problem.gradient || !problem.load) {
    throw InputError("quadrature_energy: problem needs value, gradient and load");
  }
  const std::function<double(Point2)> density = [&](Point2 x) {
    const Vec2 g = problem.gradient(x);
    return model.psi(dot(g, g)) - problem.load(x) * problem.value(x);
  };
  const double domain = mesh.total_area();
  Vector parts(mesh.n_elements());
  for (Index t = 0; t < mesh.n_elements(); ++t) {
    const auto c = mesh.corners(t);
    const double tol = 1e-11 * mesh.area(t) / domain;
    parts[t] = adaptive_integral(c, density, rule_on(c, density), tol, 0);
  }
  return detail::pairwise_sum(parts);
}

ReferenceEnergy reference_energy(const NonlinearModel& model, const ManufacturedSolution& problem,
                                 std::size_t budget_elements, std::shared_ptr<const Mesh> initial_mesh) {
  if (budget_elements < 10000) throw InputError("reference_energy: budget must be at least 10^4 elements");
  auto mesh = initial_mesh ? initial_mesh : std::make_shared<const Mesh>(make_lshape_initial());

  ReferenceEnergy out;
  Mesh uniform = *mesh;
  while (uniform.n_elements() < budget_elements) uniform = uniform_refine(uniform);
  out.quadrature = quadrature_energy(model, problem, uniform);
  out.quadrature_elements = uniform.n_elements();

  // Adaptive discrete minimizers; keep the last two (#T, E) pairs.
  double n1 = 0.0, e1 = 0.0, n2 = 0.0, e2 = 0.0;
  Vector u(build_dof_map(*mesh).n_dofs(), 0.0);
  for (;;) {
    Discretization disc(mesh, problem);
    auto min = discrete_minimizer(disc, model, u);
    n1 = n2;
    e1 = e2;
    n2 = mesh->n_elements();
    e2 = min.energy;
    if (mesh->n_elements() >= budget_elements) break;
    const auto marked = doerfler(local_indicators(disc, min.u, model), 0.5);
    auto fine = std::make_shared<const Mesh>(refine(*mesh, marked));
    u = prolongate(FeFunction{mesh, min.u}, fine).coefficients;
    mesh = std::move(fine);
  }
  out.adaptive_elements = static_cast<Index>(n2);
  out.extrapolated = (n2 * e2 - n1 * e1) / (n2 - n1);
  out.value = out.quadrature;
  out.discrepancy = std::abs(out.quadrature - out.extrapolated) / std::max(std::abs(out.quadrature), 1e-300);
  if (out.discrepancy > 1e-4) {
    throw DomainError("reference_energy: quadrature value " + std::to_string(out.quadrature) +
                      " and extrapolated value " + std::to_string(out.extrapolated) + " differ by " +
                      std::to_string(out.discrepancy) + " (relative)");
  }
  return out;
}

}  // namespace ailfem
