#include "ailfem/estimator.hpp"

#include <cmath>

#include "ailfem/errors.hpp"
#include "ailfem/quadrature.hpp"
#include "reduce.hpp"

namespace ailfem {
namespace {

// Adds h_T |e| [[sigma . n]]^2 to both elements of every interior edge.
void add_jump_terms(const Mesh& mesh, const std::vector<Vec2>& flux, std::span<const double> area, Vector& eta2) {
  const auto& topo = mesh.topology();
  for (std::size_t e = 0; e < topo.edges.size(); ++e) {
    const auto [t1, t2] = topo.edge_elements[e];
    if (t2 == invalid_index) continue;
    const Vec2 d = mesh.vertex(topo.edges[e][1]) - mesh.vertex(topo.edges[e][0]);
    const Vec2 jump = flux[t1] - flux[t2];
    // |e| (jump . n)^2 with n = d_perp / |d|.
    const double jn = jump.x * d.y - jump.y * d.x;
    const double term = jn * jn / norm(d);
    eta2[t1] += std::sqrt(area[t1]) * term;
    eta2[t2] += std::sqrt(area[t2]) * term;
  }
}

}  // namespace

IndicatorField local_indicators(const Discretization& disc, std::span<const double> u, const NonlinearModel& model) {
  const auto& mesh = disc.mesh();
  const auto grad = gradient_field(disc, u);
  std::vector<Vec2> flux(grad.size());
  Vector area(mesh.n_elements());
  for (Index t = 0; t < mesh.n_elements(); ++t) {
    flux[t] = model.mu(dot(grad[t], grad[t])) * grad[t];
    area[t] = disc.geometry(t).area;
  }
  const auto vol = disc.volume_indicator();
  IndicatorField field{mesh.id(), Vector(vol.begin(), vol.end())};
  add_jump_terms(mesh, flux, area, field.values);
  return field;
}

IndicatorField local_indicators(const FeFunction& u, const NonlinearModel& model,
                                const std::function<double(Point2)>& load) {
  if (!u.mesh) throw InputError("local_indicators: function has no mesh");
  const Mesh& mesh = *u.mesh;
  const DofMap dofs = build_dof_map(mesh);
  if (u.coefficients.size() != dofs.n_dofs()) throw InputError("local_indicators: coefficient length mismatch");
  std::vector<Vec2> flux(mesh.n_elements());
  Vector area(mesh.n_elements());
  IndicatorField field{mesh.id(), Vector(mesh.n_elements(), 0.0)};
  for (Index t = 0; t < mesh.n_elements(); ++t) {
    const auto c = mesh.corners(t);
    const auto geo = element_geometry(c);
    Vec2 g{0.0, 0.0};
    for (int i = 0; i < 3; ++i) {
      const Index d = dofs.vertex_to_dof[mesh.element(t)[i]];
      if (d != invalid_index) g = g + u.coefficients[d] * geo.grad_lambda[i];
    }
    flux[t] = model.mu(dot(g, g)) * g;
    area[t] = geo.area;
    if (load) {
      field.values[t] = geo.area * integrate_triangle(c, [&](Point2 x) {
        const double v = load(x);
        return v * v;
      });
    }
  }
  add_jump_terms(mesh, flux, area, field.values);
  return field;
}

double total(const IndicatorField& field) { return std::sqrt(detail::pairwise_sum(field.values)); }

double subset_total(const IndicatorField& field, const MarkSet& subset) {
  Vector picked;
  picked.reserve(subset.size());
  for (Index t : subset.indices()) {
    if (t >= field.values.size()) {
      throw InputError("subset_total: element index " + std::to_string(t) + " out of range");
    }
    picked.push_back(field.values[t]);
  }
  return std::sqrt(detail::pairwise_sum(picked));
}

}  // namespace ailfem
