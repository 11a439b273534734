#include "ailfem/fem.hpp"

#include <cmath>
#include <string>

#include "ailfem/errors.hpp"
#include "ailfem/quadrature.hpp"
#include "reduce.hpp"

namespace ailfem {

DofMap build_dof_map(const Mesh& mesh) {
  const auto on_boundary = mesh.boundary_vertices();
  DofMap map;
  map.vertex_to_dof.assign(mesh.n_vertices(), invalid_index);
  for (Index v = 0; v < mesh.n_vertices(); ++v) {
    if (on_boundary[v]) continue;
    map.vertex_to_dof[v] = static_cast<Index>(map.dof_to_vertex.size());
    map.dof_to_vertex.push_back(v);
  }
  return map;
}

std::string_view scheme_name(SchemeKind kind) {
  switch (kind) {
    case SchemeKind::zarantonello: return "zarantonello";
    case SchemeKind::kacanov: return "kacanov";
    case SchemeKind::newton: return "newton";
  }
  return "unknown";
}

std::optional<SchemeKind> parse_scheme_kind(std::string_view name) {
  for (auto k : {SchemeKind::zarantonello, SchemeKind::kacanov, SchemeKind::newton}) {
    if (scheme_name(k) == name) return k;
  }
  return std::nullopt;
}

void validate_scheme(const SchemeSpec& scheme, const NonlinearModel& model) {
  if (scheme.kind == SchemeKind::zarantonello) {
    const double upper = 2.0 / (3.0 * model.M_mu);
    if (!(scheme.delta_z > 0.0 && scheme.delta_z < upper)) {
      throw InputError("zarantonello step size must lie in (0, " + std::to_string(upper) +
                       "), got " + std::to_string(scheme.delta_z));
    }
  }
  if (scheme.kind == SchemeKind::newton && !(scheme.newton_damping > 0.0 && scheme.newton_damping <= 1.0)) {
    throw InputError("newton damping must lie in (0, 1], got " + std::to_string(scheme.newton_damping));
  }
}

ElementGeometry element_geometry(const std::array<Point2, 3>& c) {
  const double two_a = twice_signed_area(c[0], c[1], c[2]);
  ElementGeometry g;
  g.area = 0.5 * std::abs(two_a);
  for (int i = 0; i < 3; ++i) {
    const Point2& p = c[(i + 1) % 3];
    const Point2& q = c[(i + 2) % 3];
    g.grad_lambda[i] = {(p.y - q.y) / two_a, (q.x - p.x) / two_a};
  }
  return g;
}

Discretization::Discretization(std::shared_ptr<const Mesh> mesh, const ManufacturedSolution& problem)
    : mesh_(std::move(mesh)), dofs_(build_dof_map(*mesh_)) {
  if (!problem.load) throw InputError("Discretization: problem has no load function");
  const Index ne = mesh_->n_elements();
  const auto rule = degree5_rule();
  geometry_.resize(ne);
  volume_indicator_.assign(ne, 0.0);
  load_.assign(dofs_.n_dofs(), 0.0);
  if (problem.gradient) exact_gradient_.resize(static_cast<std::size_t>(ne) * rule.size());

  for (Index t = 0; t < ne; ++t) {
    const auto c = mesh_->corners(t);
    geometry_[t] = element_geometry(c);
    const double area = geometry_[t].area;
    std::array<double, 3> local{0.0, 0.0, 0.0};
    double g2 = 0.0;
    for (std::size_t q = 0; q < rule.size(); ++q) {
      const Point2 x = map_to_triangle(c, rule[q].barycentric);
      const double g = problem.load(x);
      for (int i = 0; i < 3; ++i) local[i] += rule[q].weight * g * rule[q].barycentric[i];
      g2 += rule[q].weight * g * g;
      if (problem.gradient) exact_gradient_[static_cast<std::size_t>(t) * rule.size() + q] = problem.gradient(x);
    }
    // h_T^2 ||g||_T^2 with h_T = |T|^{1/2}.
    volume_indicator_[t] = area * area * g2;
    const auto& el = mesh_->element(t);
    for (int i = 0; i < 3; ++i) {
      const Index d = dofs_.vertex_to_dof[el[i]];
      if (d != invalid_index) load_[d] += area * local[i];
    }
  }
}

Vec2 element_gradient(const Discretization& disc, std::span<const double> u, Index t) {
  const auto& el = disc.mesh().element(t);
  const auto& geo = disc.geometry(t);
  Vec2 g{0.0, 0.0};
  for (int i = 0; i < 3; ++i) {
    const Index d = disc.dofs().vertex_to_dof[el[i]];
    if (d != invalid_index) g = g + u[d] * geo.grad_lambda[i];
  }
  return g;
}

std::vector<Vec2> gradient_field(const Discretization& disc, std::span<const double> u) {
  if (u.size() != disc.n_dofs()) throw InputError("gradient_field: coefficient vector has wrong length");
  std::vector<Vec2> out(disc.mesh().n_elements());
  for (Index t = 0; t < disc.mesh().n_elements(); ++t) out[t] = element_gradient(disc, u, t);
  return out;
}

namespace {

void require_length(const Discretization& disc, std::span<const double> u, const char* what) {
  if (u.size() != disc.n_dofs()) {
    throw InputError(std::string(what) + ": coefficient vector has length " + std::to_string(u.size()) +
                     ", expected " + std::to_string(disc.n_dofs()));
  }
}

// Element matrix |T| (w grad(l_i).grad(l_j) + r (b.grad(l_i))(b.grad(l_j))).
template <class Local>
SparseMatrix assemble(const Discretization& disc, Local&& local) {
  const auto& mesh = disc.mesh();
  std::vector<Triplet> triplets;
  triplets.reserve(static_cast<std::size_t>(mesh.n_elements()) * 9);
  for (Index t = 0; t < mesh.n_elements(); ++t) {
    const auto& el = mesh.element(t);
    std::array<Index, 3> d{};
    for (int i = 0; i < 3; ++i) d[i] = disc.dofs().vertex_to_dof[el[i]];
    for (int i = 0; i < 3; ++i) {
      if (d[i] == invalid_index) continue;
      for (int j = 0; j < 3; ++j) {
        if (d[j] == invalid_index) continue;
        triplets.push_back({d[i], d[j], local(t, i, j)});
      }
    }
  }
  return assemble_from_triplets(triplets, disc.n_dofs());
}

Vector scaled_difference(const Vector& a, std::span<const double> b, double s) {
  Vector out(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] - s * b[i];
  return out;
}

}  // namespace

SparseMatrix assemble_stiffness(const Discretization& disc, std::span<const double> element_weight) {
  if (!element_weight.empty() && element_weight.size() != disc.mesh().n_elements()) {
    throw InputError("assemble_stiffness: one weight per element required");
  }
  return assemble(disc, [&](Index t, int i, int j) {
    const auto& geo = disc.geometry(t);
    const double w = element_weight.empty() ? 1.0 : element_weight[t];
    return w * geo.area * dot(geo.grad_lambda[i], geo.grad_lambda[j]);
  });
}

LinearSystem assemble_linearized(const SchemeSpec& scheme, const Discretization& disc, std::span<const double> u_n,
                                 const NonlinearModel& model, std::optional<double> newton_delta) {
  validate_scheme(scheme, model);
  require_length(disc, u_n, "assemble_linearized");
  const auto grad = gradient_field(disc, u_n);
  const Index ne = disc.mesh().n_elements();

  switch (scheme.kind) {
    case SchemeKind::zarantonello: {
      SparseMatrix a = assemble_stiffness(disc);
      Vector b = scaled_difference(spmv(a, u_n), residual(disc, u_n, model), scheme.delta_z);
      return {std::move(a), std::move(b)};
    }
    case SchemeKind::kacanov: {
      Vector w(ne);
      for (Index t = 0; t < ne; ++t) w[t] = model.mu(dot(grad[t], grad[t]));
      auto load = disc.load_vector();
      return {assemble_stiffness(disc, w), Vector(load.begin(), load.end())};
    }
    case SchemeKind::newton: {
      const double delta = newton_delta.value_or(scheme.newton_damping);
      if (!(delta > 0.0 && delta <= 1.0)) throw InputError("newton damping must lie in (0, 1]");
      Vector w(ne), r1(ne);
      for (Index t = 0; t < ne; ++t) {
        const double s = dot(grad[t], grad[t]);
        w[t] = model.mu(s);
        r1[t] = 2.0 * model.mu_prime(s);
      }
      SparseMatrix a = assemble(disc, [&](Index t, int i, int j) {
        const auto& geo = disc.geometry(t);
        const double gi = dot(grad[t], geo.grad_lambda[i]);
        const double gj = dot(grad[t], geo.grad_lambda[j]);
        return geo.area * (w[t] * dot(geo.grad_lambda[i], geo.grad_lambda[j]) + r1[t] * (gi * gj));
      });
      Vector b = scaled_difference(spmv(a, u_n), residual(disc, u_n, model), delta);
      return {std::move(a), std::move(b)};
    }
  }
  throw InputError("assemble_linearized: unknown scheme");
}

Vector residual(const Discretization& disc, std::span<const double> u, const NonlinearModel& model) {
  require_length(disc, u, "residual");
  const auto& mesh = disc.mesh();
  Vector r(disc.n_dofs(), 0.0);
  for (Index t = 0; t < mesh.n_elements(); ++t) {
    const Vec2 g = element_gradient(disc, u, t);
    const auto& geo = disc.geometry(t);
    const double scale = geo.area * model.mu(dot(g, g));
    const auto& el = mesh.element(t);
    for (int i = 0; i < 3; ++i) {
      const Index d = disc.dofs().vertex_to_dof[el[i]];
      if (d != invalid_index) r[d] += scale * dot(g, geo.grad_lambda[i]);
    }
  }
  const auto load = disc.load_vector();
  for (Index i = 0; i < disc.n_dofs(); ++i) r[i] -= load[i];
  return r;
}

double energy(const Discretization& disc, std::span<const double> u, const NonlinearModel& model) {
  require_length(disc, u, "energy");
  const Index ne = disc.mesh().n_elements();
  Vector density(ne);
  for (Index t = 0; t < ne; ++t) {
    const Vec2 g = element_gradient(disc, u, t);
    density[t] = model.psi(dot(g, g)) * disc.geometry(t).area;
  }
  const auto load = disc.load_vector();
  Vector work(disc.n_dofs());
  for (Index i = 0; i < disc.n_dofs(); ++i) work[i] = load[i] * u[i];
  return detail::pairwise_sum(density) - detail::pairwise_sum(work);
}

double h1_seminorm(const Discretization& disc, std::span<const double> u) {
  require_length(disc, u, "h1_seminorm");
  const Index ne = disc.mesh().n_elements();
  Vector local(ne);
  for (Index t = 0; t < ne; ++t) {
    const Vec2 g = element_gradient(disc, u, t);
    local[t] = dot(g, g) * disc.geometry(t).area;
  }
  return std::sqrt(detail::pairwise_sum(local));
}

double h1_seminorm_error(const Discretization& disc, std::span<const double> u) {
  require_length(disc, u, "h1_seminorm_error");
  if (!disc.has_exact_gradient()) throw InputError("h1_seminorm_error: problem has no exact gradient");
  const auto rule = degree5_rule();
  const auto exact = disc.exact_gradient_at_quadrature();
  const Index ne = disc.mesh().n_elements();
  Vector local(ne);
  for (Index t = 0; t < ne; ++t) {
    const Vec2 g = element_gradient(disc, u, t);
    double s = 0.0;
    for (std::size_t q = 0; q < rule.size(); ++q) {
      const Vec2 e = exact[static_cast<std::size_t>(t) * rule.size() + q] - g;
      s += rule[q].weight * dot(e, e);
    }
    local[t] = s * disc.geometry(t).area;
  }
  return std::sqrt(detail::pairwise_sum(local));
}

double h1_seminorm_error(const FeFunction& u, const std::function<Vec2(Point2)>& exact_gradient) {
  if (!u.mesh) throw InputError("h1_seminorm_error: function has no mesh");
  const Mesh& mesh = *u.mesh;
  const DofMap dofs = build_dof_map(mesh);
  if (u.coefficients.size() != dofs.n_dofs()) throw InputError("h1_seminorm_error: coefficient length mismatch");
  Vector local(mesh.n_elements());
  for (Index t = 0; t < mesh.n_elements(); ++t) {
    const auto c = mesh.corners(t);
    const auto geo = element_geometry(c);
    Vec2 g{0.0, 0.0};
    for (int i = 0; i < 3; ++i) {
      const Index d = dofs.vertex_to_dof[mesh.element(t)[i]];
      if (d != invalid_index) g = g + u.coefficients[d] * geo.grad_lambda[i];
    }
    local[t] = integrate_triangle(c, [&](Point2 x) {
      const Vec2 e = exact_gradient(x) - g;
      return dot(e, e);
    });
  }
  return std::sqrt(detail::pairwise_sum(local));
}

FeFunction prolongate(const FeFunction& u, std::shared_ptr<const Mesh> fine_mesh) {
  if (!u.mesh || !fine_mesh) throw InputError("prolongate: missing mesh");
  const Mesh& coarse = *u.mesh;
  const DofMap coarse_dofs = build_dof_map(coarse);
  if (u.coefficients.size() != coarse_dofs.n_dofs()) throw InputError("prolongate: coefficient length mismatch");
  if (fine_mesh->id() == coarse.id()) return {std::move(fine_mesh), u.coefficients};

  const auto& gen = fine_mesh->genealogy();
  if (!gen) throw InputError("prolongate: target mesh carries no genealogy");
  if (gen->parent_mesh_id != coarse.id() || gen->parent_vertex_count != coarse.n_vertices()) {
    throw InputError("prolongate: target mesh was not refined from the function's mesh");
  }

  std::vector<double> nodal(fine_mesh->n_vertices(), 0.0);
  for (Index d = 0; d < coarse_dofs.n_dofs(); ++d) nodal[coarse_dofs.dof_to_vertex[d]] = u.coefficients[d];
  for (std::size_t k = 0; k < gen->vertex_parents.size(); ++k) {
    const auto& p = gen->vertex_parents[k];
    nodal[gen->parent_vertex_count + k] = 0.5 * (nodal[p[0]] + nodal[p[1]]);
  }
  const DofMap fine_dofs = build_dof_map(*fine_mesh);
  Vector coeffs(fine_dofs.n_dofs());
  for (Index d = 0; d < fine_dofs.n_dofs(); ++d) coeffs[d] = nodal[fine_dofs.dof_to_vertex[d]];
  return {std::move(fine_mesh), std::move(coeffs)};
}

Vector interpolate(const Mesh& mesh, const DofMap& dofs, const std::function<double(Point2)>& f) {
  Vector out(dofs.n_dofs());
  for (Index d = 0; d < dofs.n_dofs(); ++d) out[d] = f(mesh.vertex(dofs.dof_to_vertex[d]));
  return out;
}

double evaluate(const Mesh& mesh, const DofMap& dofs, std::span<const double> u, Index t, Point2 p) {
  if (t >= mesh.n_elements()) throw InputError("evaluate: element index out of range");
  const auto c = mesh.corners(t);
  const double two_a = twice_signed_area(c[0], c[1], c[2]);
  const std::array<double, 3> lambda{twice_signed_area(p, c[1], c[2]) / two_a,
                                     twice_signed_area(c[0], p, c[2]) / two_a,
                                     twice_signed_area(c[0], c[1], p) / two_a};
  double value = 0.0;
  for (int i = 0; i < 3; ++i) {
    const Index d = dofs.vertex_to_dof[mesh.element(t)[i]];
    if (d != invalid_index) value += lambda[i] * u[d];
  }
  return value;
}

}  // namespace ailfem
