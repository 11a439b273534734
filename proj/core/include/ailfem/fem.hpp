#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "ailfem/mesh.hpp"
#include "ailfem/model.hpp"
#include "ailfem/sparse.hpp"

namespace ailfem {

/// Degrees of freedom of the P1 space with zero trace: one per interior vertex,
/// numbered in ascending vertex order.
struct DofMap {
  std::vector<Index> vertex_to_dof;  // invalid_index on boundary vertices
  std::vector<Index> dof_to_vertex;

  Index n_dofs() const { return static_cast<Index>(dof_to_vertex.size()); }
};

DofMap build_dof_map(const Mesh& mesh);

/// P1 function with zero boundary values: coefficients are the nodal values at
/// the interior vertices of `mesh`, in DofMap order.
struct FeFunction {
  std::shared_ptr<const Mesh> mesh;
  Vector coefficients;
};

enum class SchemeKind { zarantonello, kacanov, newton };

std::string_view scheme_name(SchemeKind kind);
std::optional<SchemeKind> parse_scheme_kind(std::string_view name);

/// Linearization scheme and its parameters.
struct SchemeSpec {
  SchemeKind kind = SchemeKind::kacanov;
  /// Zarantonello step size, must lie in (0, 2 / (3 M_mu)).
  double delta_z = 0.3;
  /// Initial Newton damping in (0, 1].
  double newton_damping = 1.0;
  /// Halve the Newton damping while a step fails to decrease the energy.
  bool newton_correction = true;
};

/// Throws InputError when the scheme parameters are outside their admissible range.
void validate_scheme(const SchemeSpec& scheme, const NonlinearModel& model);

struct ElementGeometry {
  double area = 0.0;
  std::array<Vec2, 3> grad_lambda{};  // gradients of the barycentric coordinates
};

/// Per-mesh data shared by assembly, energy, error and estimator evaluation:
/// dof map, element geometry, the load vector (g, phi_i), the estimator volume
/// terms h_T^2 ||g||_T^2 and the exact gradient at the quadrature points.
class Discretization {
 public:
  Discretization(std::shared_ptr<const Mesh> mesh, const ManufacturedSolution& problem);

  const Mesh& mesh() const { return *mesh_; }
  const std::shared_ptr<const Mesh>& mesh_ptr() const { return mesh_; }
  const DofMap& dofs() const { return dofs_; }
  Index n_dofs() const { return dofs_.n_dofs(); }
  const ElementGeometry& geometry(Index t) const { return geometry_[t]; }

  std::span<const double> load_vector() const { return load_; }
  std::span<const double> volume_indicator() const { return volume_indicator_; }
  bool has_exact_gradient() const { return !exact_gradient_.empty(); }
  /// Exact gradient at the 7 quadrature points of every element (element-major).
  std::span<const Vec2> exact_gradient_at_quadrature() const { return exact_gradient_; }

 private:
  std::shared_ptr<const Mesh> mesh_;
  DofMap dofs_;
  std::vector<ElementGeometry> geometry_;
  Vector load_;
  Vector volume_indicator_;
  std::vector<Vec2> exact_gradient_;
};

ElementGeometry element_geometry(const std::array<Point2, 3>& corners);

Vec2 element_gradient(const Discretization& disc, std::span<const double> u, Index t);
/// Piecewise-constant gradient of the P1 function, one vector per element.
std::vector<Vec2> gradient_field(const Discretization& disc, std::span<const double> u);

/// Stiffness matrix sum_T w_T |T| grad(phi_i) . grad(phi_j); weights default to 1.
SparseMatrix assemble_stiffness(const Discretization& disc, std::span<const double> element_weight = {});

struct LinearSystem {
  SparseMatrix matrix;
  Vector rhs;
};

/// SPD system whose solution is the next iterate u^{n+1}:
///  - Zarantonello: A = stiffness, b = A u^n - delta_Z F(u^n);
///  - Kacanov:      A = stiffness weighted by mu(|grad u^n|^2), b = (g, phi_i);
///  - Newton:       A = F'(u^n), b = A u^n - delta F(u^n).
/// `newton_delta` overrides the scheme's initial damping.
LinearSystem assemble_linearized(const SchemeSpec& scheme, const Discretization& disc, std::span<const double> u_n,
                                 const NonlinearModel& model, std::optional<double> newton_delta = {});

/// F(u) tested with the basis: int mu(|grad u|^2) grad u . grad phi_i - (g, phi_i).
Vector residual(const Discretization& disc, std::span<const double> u, const NonlinearModel& model);

/// E(u) = int psi(|grad u|^2) - (g, u).
double energy(const Discretization& disc, std::span<const double> u, const NonlinearModel& model);

/// ||grad u||_{L2}.
double h1_seminorm(const Discretization& disc, std::span<const double> u);

/// ||grad(u* - u)||_{L2} using the cached exact gradient.
double h1_seminorm_error(const Discretization& disc, std::span<const double> u);

/// Same, evaluating `exact_gradient` directly on every element.
double h1_seminorm_error(const FeFunction& u, const std::function<Vec2(Point2)>& exact_gradient);

/// Represents u exactly on a mesh obtained from u's mesh by one refine call;
/// new vertices take the mean of their parent edge's endpoint values.
FeFunction prolongate(const FeFunction& u, std::shared_ptr<const Mesh> fine_mesh);

/// Nodal interpolant at the interior vertices.
Vector interpolate(const Mesh& mesh, const DofMap& dofs, const std::function<double(Point2)>& f);

/// Value of the P1 function at p, using the barycentric expansion on element t.
double evaluate(const Mesh& mesh, const DofMap& dofs, std::span<const double> u, Index t, Point2 p);

}  // namespace ailfem
