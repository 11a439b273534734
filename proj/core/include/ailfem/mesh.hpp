#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ailfem/geometry.hpp"

namespace ailfem {

/// Position of an element in the bisection forest of its initial mesh: the
/// initial ancestor plus the sequence of child choices (bit i = choice at
/// depth i). Supports forests up to depth 128.
struct ElementPath {
  static constexpr std::uint32_t max_depth = 128;

  Index root = 0;
  std::uint32_t depth = 0;
  std::array<std::uint64_t, 2> bits{0, 0};

  ElementPath child(int which) const;
  ElementPath prefix(std::uint32_t length) const;
  bool is_proper_ancestor_of(const ElementPath& other) const;

  friend bool operator==(const ElementPath&, const ElementPath&) = default;
  friend auto operator<=>(const ElementPath& a, const ElementPath& b) {
    if (auto c = a.root <=> b.root; c != 0) return c;
    if (auto c = a.depth <=> b.depth; c != 0) return c;
    if (auto c = a.bits[1] <=> b.bits[1]; c != 0) return c;
    return a.bits[0] <=> b.bits[0];
  }
};

/// Link between a refined mesh and the mesh it was produced from.
struct Genealogy {
  std::uint64_t parent_mesh_id = 0;
  Index parent_vertex_count = 0;
  /// parent_element[t] = index (in the parent mesh) of the element t came from.
  std::vector<Index> parent_element;
  /// vertex_parents[k] = endpoints of the parent edge bisected to create
  /// vertex parent_vertex_count + k.
  std::vector<std::array<Index, 2>> vertex_parents;
};

/// Unique edges of a mesh keyed by the sorted vertex pair, plus incidences.
struct EdgeTopology {
  std::vector<std::array<Index, 2>> edges;           // sorted (lo, hi), ascending
  std::vector<std::array<Index, 2>> edge_elements;   // second is invalid_index for single edges
  std::vector<std::uint32_t> edge_multiplicity;      // > 2 means a non-manifold edge
  std::vector<std::array<Index, 3>> element_edges;   // local edge i is opposite local vertex i

  /// Edge index of {a, b}, or invalid_index when absent.
  Index find(Index a, Index b) const;
};

class MarkSet;

/// Conforming triangulation. Element (v0, v1, v2) is counterclockwise and its
/// refinement edge is local edge 0 = (v1, v2), the edge opposite v0 (the
/// newest vertex). Local edge i is the edge opposite local vertex i.
///
/// Meshes are immutable once built.
class Mesh {
 public:
  using Element = std::array<Index, 3>;
  using BoundaryFlags = std::array<bool, 3>;

  Mesh() = default;

  /// Builds an initial mesh from arbitrary triangles: orients every triangle
  /// counterclockwise, picks the longest edge as refinement edge (ties go to
  /// the edge whose opposite vertex has the smallest index) and flags edges
  /// with a single adjacent element as boundary.
  static Mesh from_triangles(std::vector<Point2> vertices, std::vector<Element> triangles);

  /// Takes the data verbatim (no reorientation). Used by import and to build
  /// deliberately broken meshes for validate().
  static Mesh from_raw(std::vector<Point2> vertices, std::vector<Element> elements,
                       std::vector<BoundaryFlags> boundary);

  std::span<const Point2> vertices() const { return vertices_; }
  std::span<const Element> elements() const { return elements_; }
  std::span<const BoundaryFlags> boundary_flags() const { return boundary_; }
  std::span<const std::uint32_t> generation() const { return generation_; }
  std::span<const ElementPath> paths() const { return paths_; }

  Index n_vertices() const { return static_cast<Index>(vertices_.size()); }
  Index n_elements() const { return static_cast<Index>(elements_.size()); }

  Point2 vertex(Index v) const { return vertices_[v]; }
  const Element& element(Index t) const { return elements_[t]; }
  std::array<Point2, 3> corners(Index t) const;
  double signed_area(Index t) const;
  double area(Index t) const;
  double total_area() const;

  const EdgeTopology& topology() const { return topology_; }
  /// Element across local edge `local_edge` of t, or invalid_index on the boundary.
  Index neighbor(Index t, int local_edge) const;
  /// Vertices lying on a boundary-flagged edge.
  std::vector<bool> boundary_vertices() const;

  const std::optional<Genealogy>& genealogy() const { return genealogy_; }
  /// Process-unique identifier of this mesh instance.
  std::uint64_t id() const { return id_; }
  /// Fingerprint of the initial mesh this one descends from.
  std::uint64_t root_fingerprint() const { return root_fingerprint_; }
  Index root_element_count() const { return root_element_count_; }

  /// Same vertices, elements and flags (genealogy and ids are ignored).
  bool same_geometry(const Mesh& other) const;

 private:
  friend Mesh refine(const Mesh&, const MarkSet&);

  void finalize_as_initial();
  void build_topology();

  std::vector<Point2> vertices_;
  std::vector<Element> elements_;
  std::vector<BoundaryFlags> boundary_;
  std::vector<std::uint32_t> generation_;
  std::vector<ElementPath> paths_;
  EdgeTopology topology_;
  std::optional<Genealogy> genealogy_;
  std::uint64_t id_ = 0;
  std::uint64_t root_fingerprint_ = 0;
  Index root_element_count_ = 0;
};

/// Set of element indices without duplicates, kept sorted ascending.
class MarkSet {
 public:
  MarkSet() = default;
  explicit MarkSet(std::vector<Index> indices);

  static MarkSet all(const Mesh& mesh);

  std::span<const Index> indices() const { return indices_; }
  std::size_t size() const { return indices_.size(); }
  bool empty() const { return indices_.empty(); }
  bool contains(Index t) const;
  /// Throws InputError if any index is out of range for `mesh`.
  void check_valid_for(const Mesh& mesh) const;

 private:
  std::vector<Index> indices_;
};

/// 192 congruent right triangles on (-1,1)^2 \ [0,1]x[-1,0]: each of the 48
/// squares of side 1/4 is cut into four triangles through its center.
Mesh make_lshape_initial();

/// Unit square split along the diagonal (0,0)-(1,1); the diagonal is the
/// refinement edge of both triangles.
Mesh make_unit_square();

/// Coarsest conforming newest-vertex-bisection refinement in which every
/// marked element is bisected at least once. Refined elements are split into
/// 2, 3 or 4 children; the first child takes the parent's index, the others
/// are appended. New vertices are appended in edge order.
Mesh refine(const Mesh& mesh, const MarkSet& marked);

Mesh uniform_refine(const Mesh& mesh);

/// Coarsest common refinement of two meshes descending from the same initial mesh.
Mesh overlay(const Mesh& a, const Mesh& b);

struct MeshDiagnostics {
  std::vector<std::string> conformity;
  std::vector<std::string> orientation;
  std::vector<std::string> boundary;

  bool ok() const { return conformity.empty() && orientation.empty() && boundary.empty(); }
  std::size_t size() const { return conformity.size() + orientation.size() + boundary.size(); }
};

MeshDiagnostics validate(const Mesh& mesh);

/// Plain-text mesh format; see docs/mesh_format.md.
void write_mesh(std::ostream& out, const Mesh& mesh);
Mesh read_mesh(std::istream& in);

}  // namespace ailfem
