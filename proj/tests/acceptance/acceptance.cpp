// One PASS/FAIL line per acceptance criterion; exit status 1 if any fails.
#include <algorithm>
#include <cmath>
#include <cstdio>
#include <iostream>
#include <limits>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "ailfem/analysis.hpp"
#include "ailfem/driver.hpp"
#include "ailfem/errors.hpp"
#include "ailfem/marking.hpp"
#include "experiment.hpp"

using namespace ailfem;

namespace {

std::map<int, std::pair<bool, std::string>> results;

void report(int id, bool pass, const std::string& detail) {
  results[id] = {pass, detail};
  std::cerr << "  criterion " << id << (pass ? " pass" : " fail") << "\n";
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

std::shared_ptr<const Mesh> shared(Mesh m) { return std::make_shared<const Mesh>(std::move(m)); }

struct Run {
  std::string label;
  RunHistory history;
};

Run run(SchemeKind kind, double delta_z, double lambda, std::size_t max_elements, const NonlinearModel& model,
        const ManufacturedSolution& problem) {
  AdaptiveConfig c;
  c.scheme.kind = kind;
  c.scheme.delta_z = delta_z;
  c.lambda = lambda;
  c.theta = 0.5;
  c.max_elements = max_elements;
  std::ostringstream label;
  label << scheme_name(kind);
  if (kind == SchemeKind::zarantonello) label << "(" << delta_z << ")";
  label << " lambda=" << lambda;
  Run r{label.str(), run_ailfem(c, model, problem)};
  std::cerr << "  run " << r.label << ": " << r.history.meshes.size() << " meshes, final #T "
            << r.history.rows.back().elems << ", status " << static_cast<int>(r.history.status) << "\n";
  return r;
}

bool completed(const Run& r) { return r.history.status == RunStatus::completed; }

struct Series {
  std::vector<double> elems, eta, error, cost;
};

Series final_series(const RunHistory& h) {
  Series s;
  for (const auto& row : h.final_rows()) {
    s.elems.push_back(row.elems);
    s.eta.push_back(row.eta);
    s.error.push_back(row.error);
    s.cost.push_back(static_cast<double>(row.cum_elems));
  }
  return s;
}

bool in_rate_window(double slope) { return slope >= -0.6 && slope <= -0.4; }

std::vector<Index> refined_parents(const Mesh& coarse, const Mesh& fine, std::vector<int>& kids) {
  const auto& gen = *fine.genealogy();
  kids.assign(coarse.n_elements(), 0);
  for (Index t = 0; t < fine.n_elements(); ++t) ++kids[gen.parent_element[t]];
  std::vector<Index> parents;
  for (Index t = 0; t < coarse.n_elements(); ++t)
    if (kids[t] > 1) parents.push_back(t);
  return parents;
}

MarkSet random_marks(const Mesh& m, std::mt19937_64& rng, std::size_t max_count) {
  std::uniform_int_distribution<Index> pick(0, m.n_elements() - 1);
  std::uniform_int_distribution<std::size_t> count(1, max_count);
  std::vector<Index> idx;
  const std::size_t k = count(rng);
  for (std::size_t i = 0; i < k; ++i) idx.push_back(pick(rng));
  return MarkSet(std::move(idx));
}

Vector random_vector(std::size_t n, std::mt19937_64& rng, double scale) {
  std::uniform_real_distribution<double> u(-scale, scale);
  Vector v(n);
  for (auto& x : v) x = u(rng);
  return v;
}

Vector difference(std::span<const double> a, std::span<const double> b) {
  Vector d(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) d[i] = a[i] - b[i];
  return d;
}

// Criteria 1 and 9.
void optimal_rates(const std::vector<Run>& preset2) {
  bool ok1 = true, ok9 = true;
  std::string d1, d9;
  for (const auto& r : preset2) {
    const auto s = final_series(r.history);
    std::string e1 = r.label + " failed;", e9 = e1;
    bool good1 = false, good9 = false;
    if (completed(r) && s.elems.back() >= 2e5) {
      const double se = fit_loglog_tail(s.elems, s.eta).slope;
      const double sr = fit_loglog_tail(s.elems, s.error).slope;
      const double sc = fit_loglog_tail(s.cost, s.eta).slope;
      good1 = in_rate_window(se) && in_rate_window(sr);
      good9 = in_rate_window(sc);
      e1 = std::string(scheme_name(r.history.config.scheme.kind)) + " eta " + fmt(se) + " err " + fmt(sr) + ";";
      e9 = std::string(scheme_name(r.history.config.scheme.kind)) + " " + fmt(sc) + ";";
    }
    ok1 = ok1 && good1;
    ok9 = ok9 && good9;
    d1 += " " + e1;
    d9 += " " + e9;
  }
  report(1, ok1, "tail slopes vs #T in [-0.6, -0.4]:" + d1);
  report(9, ok9, "tail slope of eta vs cumulative #T in [-0.6, -0.4]:" + d9);
}

// Criterion 2.
void preasymptotic(const Run& zar, const Run& kac) {
  if (!completed(zar) || !completed(kac)) {
    report(2, false, "preset 1 run did not complete");
    return;
  }
  const auto z = final_series(zar.history), k = final_series(kac.history);
  const double lo = std::max(z.elems.front(), k.elems.front());
  const double zs = fit_loglog_window(z.elems, z.eta, lo, 1e4 - 1).slope;
  const double ks = fit_loglog_window(k.elems, k.eta, lo, 1e4 - 1).slope;
  const double tail = fit_loglog_tail(z.elems, z.eta).slope;
  const bool pass = zs - ks >= 0.05 && in_rate_window(tail);
  report(2, pass, "slope below 1e4 elements: zarantonello " + fmt(zs) + ", kacanov " + fmt(ks) + " (gap " +
                      fmt(zs - ks) + " >= 0.05); zarantonello tail " + fmt(tail));
}

// Criterion 3.
void energy_contraction(const NonlinearModel& model, const ManufacturedSolution& problem) {
  std::vector<std::shared_ptr<const Mesh>> meshes;
  Mesh m = make_lshape_initial();
  for (int k = 0; k <= 7; ++k) {
    if (k == 0 || k == 4 || k == 7) meshes.push_back(shared(m));
    m = uniform_refine(m);
  }
  const std::vector<SchemeSpec> schemes{{SchemeKind::zarantonello, 0.1}, {SchemeKind::zarantonello, 0.3},
                                        {SchemeKind::kacanov}};
  bool pass = true;
  std::string detail;
  std::size_t checked = 0;
  for (const auto& mesh : meshes) {
    Discretization disc(mesh, problem);
    const double e_star = discrete_minimizer(disc, model).energy;
    const double floor = 1e-8 * std::max(1.0, std::abs(e_star));
    for (const auto& s : schemes) {
      const double q2 = std::pow(scheme_constants(s, model).q_ctr, 2);
      Vector u(disc.n_dofs(), 0.0);
      double e = energy(disc, u, model), worst = 0.0;
      for (int n = 0; n < 2000 && e - e_star > floor; ++n) {
        auto step = linearization_step(s, disc, u, model, 1e-12, e);
        const double ratio = (step.energy - e_star) / (e - e_star);
        worst = std::max(worst, ratio);
        ++checked;
        u = std::move(step.u);
        e = step.energy;
      }
      pass = pass && worst <= q2 + 1e-10;
      detail += " " + std::to_string(mesh->n_elements()) + "/" + std::string(scheme_name(s.kind)) +
                (s.kind == SchemeKind::zarantonello ? "(" + fmt(s.delta_z) + ")" : "") + " " + fmt(worst) +
                "<=" + fmt(q2) + ";";
    }
  }
  report(3, pass, "max energy ratio vs q_ctr^2 over " + std::to_string(checked) + " steps:" + detail);
}

// Criterion 4.
void f4_quotients(const std::vector<const Run*>& runs, const NonlinearModel& model) {
  bool pass = true;
  std::string detail;
  for (const Run* r : runs) {
    const auto& h = r->history;
    const auto c = scheme_constants(h.config.scheme, model);
    const bool newton = h.config.scheme.kind == SchemeKind::newton;
    double lowest = std::numeric_limits<double>::infinity();
    std::size_t defined = 0;
    for (std::uint32_t N = 0; N < h.meshes.size(); ++N) {
      if (const auto k = f4_quotient(h, N)) {
        lowest = std::min(lowest, *k);
        ++defined;
      }
    }
    const bool ok = completed(*r) && defined > 0 && (newton ? lowest > 0.0 : lowest >= c.C_H - 1e-8);
    pass = pass && ok;
    detail += " " + r->label + " min " + fmt(lowest) + (newton ? " > 0" : " >= " + fmt(c.C_H)) + ";";
  }
  report(4, pass, "kappa_N along full runs:" + detail);
}

// Criteria 5 and 6.
void fixed_mesh_bounds(const NonlinearModel& model, const ManufacturedSolution& problem) {
  auto mesh = shared(make_lshape_initial());
  Discretization disc(mesh, problem);
  const auto star = discrete_minimizer(disc, model);

  const std::vector<SchemeSpec> schemes{{SchemeKind::zarantonello, 0.1}, {SchemeKind::zarantonello, 0.3},
                                        {SchemeKind::kacanov}, {SchemeKind::newton}};
  bool pass5 = true;
  double worst_margin = -std::numeric_limits<double>::infinity();
  for (const auto& s : schemes) {
    const auto c = scheme_constants(s, model);
    Vector u(disc.n_dofs(), 0.0);
    for (int n = 0; n < 20; ++n) {
      auto step = linearization_step(s, disc, u, model);
      const double lhs = h1_seminorm(disc, difference(star.u, u));
      const double rhs = c.beta / c.nu * h1_seminorm(disc, difference(u, step.u));
      worst_margin = std::max(worst_margin, lhs - rhs);
      pass5 = pass5 && lhs <= rhs + 1e-10;
      u = std::move(step.u);
    }
  }
  report(5, pass5, "||u* - u^n|| - (beta/nu)||u^n - u^{n+1}|| <= 1e-10 for 4 schemes x 20 steps, max " +
                       fmt(worst_margin));

  const auto k = scheme_constants({SchemeKind::kacanov}, model);
  const double nu = k.nu, L_F = k.L_F;
  std::mt19937_64 rng(6);
  bool pass6 = std::abs(nu - 0.55374) < 1e-5 && L_F == 6.0;
  double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
  for (int trial = 0; trial < 50; ++trial) {
    const double scale = std::pow(10.0, -3.0 + 3.0 * trial / 49.0);
    const Vector w = random_vector(disc.n_dofs(), rng, scale);
    Vector v = star.u;
    for (std::size_t i = 0; i < v.size(); ++i) v[i] += w[i];
    const double d2 = std::pow(h1_seminorm(disc, w), 2);
    const double gap = energy(disc, v, model) - star.energy;
    lo = std::min(lo, gap / d2);
    hi = std::max(hi, gap / d2);
    pass6 = pass6 && nu / 2 * d2 <= gap && gap <= L_F / 2 * d2;
  }
  report(6, pass6, "(E(v) - E(u*)) / ||u* - v||^2 in [" + fmt(lo) + ", " + fmt(hi) + "] within [nu/2, L_F/2] = [" +
                       fmt(nu / 2) + ", " + fmt(L_F / 2) + "]");
}

double cumulative_mesh_constant(std::size_t calls, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  const Mesh initial = make_lshape_initial();
  Mesh m = initial;
  std::size_t marked = 0;
  for (std::size_t i = 0; i < calls; ++i) {
    const MarkSet marks = random_marks(m, rng, 3);
    marked += marks.size();
    m = refine(m, marks);
  }
  return static_cast<double>(m.n_elements() - initial.n_elements()) / static_cast<double>(marked);
}

// Criterion 7.
void mesh_axioms() {
  std::mt19937_64 rng(17);
  bool r1 = true;
  Mesh m = make_lshape_initial();
  for (int call = 0; call < 500; ++call) {
    const Mesh r = refine(m, random_marks(m, rng, 3));
    std::vector<int> kids;
    const std::size_t refined = refined_parents(m, r, kids).size();
    const std::size_t kept = m.n_elements() - refined;
    r1 = r1 && refined + m.n_elements() <= r.n_elements() && r.n_elements() <= 4 * refined + kept;
    m = r;
  }

  bool r2 = true;
  for (int trial = 0; trial < 100; ++trial) {
    const Mesh base = make_lshape_initial();
    Mesh a = base, b = base;
    const int ka = 1 + trial % 7, kb = 1 + (trial * 5) % 6;
    for (int i = 0; i < ka; ++i) a = refine(a, random_marks(a, rng, 5));
    for (int i = 0; i < kb; ++i) b = refine(b, random_marks(b, rng, 5));
    const Mesh c = overlay(a, b);
    r2 = r2 && validate(c).ok() && c.n_elements() <= a.n_elements() + b.n_elements() - base.n_elements();
  }

  const double c500 = cumulative_mesh_constant(500, 21);
  const double c1000 = cumulative_mesh_constant(1000, 21);
  const bool r3 = std::isfinite(c1000) && c1000 <= 50.0 && std::abs(c1000 - c500) <= 0.25 * c500;
  report(7, r1 && r2 && r3,
         std::string("R1 on 500 calls ") + (r1 ? "ok" : "violated") + "; R2 on 100 pairs " + (r2 ? "ok" : "violated") +
             "; R3 C_mesh " + fmt(c500) + " (500 calls), " + fmt(c1000) + " (1000 calls)");
}

// Criterion 8.
void estimator_axioms(const std::vector<const Run*>& runs, const NonlinearModel& model,
                      const ManufacturedSolution& problem) {
  std::mt19937_64 rng(8);
  bool a1 = true, a2 = true;
  std::size_t compared = 0;
  double worst_reduction = 0.0;
  auto coarse = shared(make_lshape_initial());
  for (int round = 0; round < 6; ++round) {
    auto fine = shared(refine(*coarse, random_marks(*coarse, rng, 30)));
    Discretization dc(coarse, problem), df(fine, problem);
    const FeFunction u{coarse, random_vector(dc.n_dofs(), rng, 0.3)};
    const FeFunction v = prolongate(u, fine);
    const auto ec = local_indicators(dc, u.coefficients, model);
    const auto ef = local_indicators(df, v.coefficients, model);
    std::vector<int> kids;
    const auto parents = refined_parents(*coarse, *fine, kids);
    for (Index t = 0; t < coarse->n_elements(); ++t) {
      if (kids[t] != 1) continue;
      bool untouched = true;
      for (int e = 0; e < 3; ++e) {
        const Index n = coarse->neighbor(t, e);
        if (n != invalid_index && kids[n] != 1) untouched = false;
      }
      if (!untouched) continue;
      a1 = a1 && ef.values[t] == ec.values[t];
      ++compared;
    }
    std::vector<Index> children;
    const auto& gen = *fine->genealogy();
    for (Index t = 0; t < fine->n_elements(); ++t)
      if (kids[gen.parent_element[t]] > 1) children.push_back(t);
    const double ratio = subset_total(ef, MarkSet(children)) / subset_total(ec, MarkSet(parents));
    worst_reduction = std::max(worst_reduction, ratio);
    a2 = a2 && ratio <= std::pow(2.0, -0.25);
    coarse = fine;
  }

  double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
  for (const Run* r : runs) {
    for (const auto& row : r->history.rows) {
      if (!(row.eta > 0.0)) continue;
      lo = std::min(lo, row.error / row.eta);
      hi = std::max(hi, row.error / row.eta);
    }
  }
  const bool eff = lo >= 0.01 && hi <= 10.0;
  report(8, a1 && a2 && eff,
         "A1 bit-equal on " + std::to_string(compared) + " elements " + (a1 ? "ok" : "violated") +
             "; A2 worst ratio " + fmt(worst_reduction) + " <= " + fmt(std::pow(2.0, -0.25)) +
             "; effectivity error/eta in [" + fmt(lo) + ", " + fmt(hi) + "]");
}

// Criterion 10.
void iteration_counts(const std::vector<Run>& strict) {
  std::vector<std::vector<std::uint32_t>> steps;
  for (const auto& r : strict) {
    std::vector<std::uint32_t> n;
    for (const auto& m : r.history.meshes)
      if (m.inner_steps > 0) n.push_back(m.inner_steps);
    steps.push_back(n);
  }
  std::size_t meshes = std::min({steps[0].size(), steps[1].size(), steps[2].size()});
  std::size_t ordered = 0;
  bool differ = false;
  for (std::size_t N = 0; N < meshes; ++N) {
    if (steps[0][N] >= steps[1][N] && steps[1][N] >= steps[2][N]) ++ordered;
    if (steps[0][N] != steps[1][N] || steps[1][N] != steps[2][N]) differ = true;
  }
  std::string counts;
  for (std::size_t k = 0; k < 3; ++k) {
    std::uint64_t total = 0;
    for (auto n : steps[k]) total += n;
    counts += " " + std::string(scheme_name(strict[k].history.config.scheme.kind)) + " " + std::to_string(total);
  }
  const double share = meshes ? static_cast<double>(ordered) / static_cast<double>(meshes) : 0.0;
  const bool pass = std::all_of(strict.begin(), strict.end(), completed) && differ && share >= 0.7;
  report(10, pass, "zarantonello >= kacanov >= newton on " + std::to_string(ordered) + "/" + std::to_string(meshes) +
                       " meshes (" + fmt(100 * share) + "%); total steps" + counts);
}

}  // namespace

int main() {
  try {
    const auto model = default_model();
    const auto problem = lshape_solution(model);

    std::cerr << "preset 2 runs\n";
    std::vector<Run> preset2;
    for (auto k : {SchemeKind::zarantonello, SchemeKind::kacanov, SchemeKind::newton})
      preset2.push_back(run(k, 0.3, 0.1, 200000, model, problem));
    std::cerr << "preset 1 runs\n";
    const Run zar1 = run(SchemeKind::zarantonello, 0.1, 0.5, 200000, model, problem);
    const Run kac1 = run(SchemeKind::kacanov, 0.1, 0.5, 200000, model, problem);
    std::cerr << "preset 3 runs\n";
    std::vector<Run> strict;
    for (auto k : {SchemeKind::zarantonello, SchemeKind::kacanov, SchemeKind::newton})
      strict.push_back(run(k, 0.3, 0.01, 50000, model, problem));

    std::vector<const Run*> all{&zar1, &kac1};
    for (const auto& r : preset2) all.push_back(&r);
    for (const auto& r : strict) all.push_back(&r);

    optimal_rates(preset2);
    preasymptotic(zar1, kac1);
    energy_contraction(model, problem);
    f4_quotients(all, model);
    fixed_mesh_bounds(model, problem);
    mesh_axioms();
    estimator_axioms(all, model, problem);
    iteration_counts(strict);
  } catch (const std::exception& e) {
    std::printf("acceptance aborted: %s\n", e.what());
    return 1;
  }
  int failures = 0;
  for (int id = 1; id <= 10; ++id) {
    const auto it = results.find(id);
    const bool pass = it != results.end() && it->second.first;
    std::printf("criterion %2d: %s  %s\n", id, pass ? "PASS" : "FAIL",
                it != results.end() ? it->second.second.c_str() : "not evaluated");
    if (!pass) ++failures;
  }
  std::printf("%s: %d of 10 criteria failed\n", failures ? "FAIL" : "PASS", failures);
  return failures ? 1 : 0;
}
