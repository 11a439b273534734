#include "ailfem/mesh.hpp"

#include <algorithm>
#include <atomic>
#include <cstring>
#include <numeric>
#include <sstream>

#include "ailfem/errors.hpp"

namespace ailfem {
namespace {

std::uint64_t next_mesh_id() {
  static std::atomic<std::uint64_t> counter{1};
  return counter.fetch_add(1, std::memory_order_relaxed);
}

// FNV-1a over the raw bytes of the initial mesh.
class Fingerprint {
 public:
  template <class T>
  void add(const T& value) {
    unsigned char bytes[sizeof(T)];
    std::memcpy(bytes, &value, sizeof(T));
    for (unsigned char b : bytes) {
      hash_ ^= b;
      hash_ *= 1099511628211ull;
    }
  }
  std::uint64_t value() const { return hash_; }

 private:
  std::uint64_t hash_ = 14695981039346656037ull;
};

std::array<Index, 2> edge_key(Index a, Index b) { return a < b ? std::array{a, b} : std::array{b, a}; }

// Local edge i is opposite local vertex i.
std::array<Index, 2> local_edge(const Mesh::Element& e, int i) {
  return edge_key(e[(i + 1) % 3], e[(i + 2) % 3]);
}

}  // namespace

// ---------------------------------------------------------------------------
// ElementPath

ElementPath ElementPath::child(int which) const {
  if (depth >= max_depth) throw InputError("bisection depth exceeds ElementPath::max_depth");
  ElementPath c = *this;
  if (which != 0) c.bits[depth / 64] |= std::uint64_t{1} << (depth % 64);
  c.depth = depth + 1;
  return c;
}

ElementPath ElementPath::prefix(std::uint32_t length) const {
  ElementPath p = *this;
  p.depth = std::min(length, depth);
  for (std::uint32_t word = 0; word < 2; ++word) {
    const std::uint32_t lo = word * 64;
    if (p.depth <= lo) {
      p.bits[word] = 0;
    } else if (p.depth < lo + 64) {
      p.bits[word] &= (std::uint64_t{1} << (p.depth - lo)) - 1;
    }
  }
  return p;
}

bool ElementPath::is_proper_ancestor_of(const ElementPath& other) const {
  return root == other.root && depth < other.depth && other.prefix(depth) == *this;
}

// ---------------------------------------------------------------------------
// EdgeTopology

Index EdgeTopology::find(Index a, Index b) const {
  const auto key = edge_key(a, b);
  auto it = std::lower_bound(edges.begin(), edges.end(), key);
  if (it == edges.end() || *it != key) return invalid_index;
  return static_cast<Index>(it - edges.begin());
}

// ---------------------------------------------------------------------------
// Mesh

Mesh Mesh::from_triangles(std::vector<Point2> vertices, std::vector<Element> triangles) {
  for (auto& tri : triangles) {
    for (Index v : tri) {
      if (v >= vertices.size()) throw InputError("triangle references a missing vertex");
    }
    if (twice_signed_area(vertices[tri[0]], vertices[tri[1]], vertices[tri[2]]) < 0.0) {
      std::swap(tri[1], tri[2]);
    }
    std::array<double, 3> len{};
    for (int i = 0; i < 3; ++i) {
      len[i] = norm(vertices[tri[(i + 2) % 3]] - vertices[tri[(i + 1) % 3]]);
    }
    const double longest = *std::max_element(len.begin(), len.end());
    int pick = -1;
    for (int i = 0; i < 3; ++i) {
      if (len[i] >= longest * (1.0 - 1e-12) && (pick < 0 || tri[i] < tri[pick])) pick = i;
    }
    std::rotate(tri.begin(), tri.begin() + pick, tri.end());
  }

  Mesh mesh;
  mesh.vertices_ = std::move(vertices);
  mesh.elements_ = std::move(triangles);
  mesh.boundary_.assign(mesh.elements_.size(), BoundaryFlags{false, false, false});
  mesh.build_topology();
  for (Index t = 0; t < mesh.n_elements(); ++t) {
    for (int i = 0; i < 3; ++i) {
      const Index e = mesh.topology_.element_edges[t][i];
      mesh.boundary_[t][i] = mesh.topology_.edge_multiplicity[e] == 1;
    }
  }
  mesh.finalize_as_initial();
  return mesh;
}

Mesh Mesh::from_raw(std::vector<Point2> vertices, std::vector<Element> elements,
                    std::vector<BoundaryFlags> boundary) {
  if (boundary.size() != elements.size()) {
    throw InputError("boundary flags must be given for every element");
  }
  for (const auto& tri : elements) {
    for (Index v : tri) {
      if (v >= vertices.size()) throw InputError("element references a missing vertex");
    }
  }
  Mesh mesh;
  mesh.vertices_ = std::move(vertices);
  mesh.elements_ = std::move(elements);
  mesh.boundary_ = std::move(boundary);
  mesh.build_topology();
  mesh.finalize_as_initial();
  return mesh;
}

void Mesh::finalize_as_initial() {
  generation_.assign(elements_.size(), 0);
  paths_.resize(elements_.size());
  for (Index t = 0; t < n_elements(); ++t) paths_[t] = ElementPath{t, 0, {0, 0}};
  Fingerprint fp;
  for (const auto& p : vertices_) {
    fp.add(p.x);
    fp.add(p.y);
  }
  for (const auto& e : elements_) fp.add(e);
  root_fingerprint_ = fp.value();
  root_element_count_ = n_elements();
  genealogy_.reset();
  id_ = next_mesh_id();
}

void Mesh::build_topology() {
  struct Incidence {
    std::array<Index, 2> key;
    Index element;
    int local;
  };
  std::vector<Incidence> inc;
  inc.reserve(3 * elements_.size());
  for (Index t = 0; t < n_elements(); ++t) {
    for (int i = 0; i < 3; ++i) inc.push_back({local_edge(elements_[t], i), t, i});
  }
  std::sort(inc.begin(), inc.end(), [](const Incidence& a, const Incidence& b) {
    if (a.key != b.key) return a.key < b.key;
    if (a.element != b.element) return a.element < b.element;
    return a.local < b.local;
  });

  topology_ = EdgeTopology{};
  topology_.element_edges.assign(elements_.size(), {invalid_index, invalid_index, invalid_index});
  for (std::size_t k = 0; k < inc.size();) {
    std::size_t end = k;
    while (end < inc.size() && inc[end].key == inc[k].key) ++end;
    const Index e = static_cast<Index>(topology_.edges.size());
    topology_.edges.push_back(inc[k].key);
    topology_.edge_elements.push_back({inc[k].element, end - k > 1 ? inc[k + 1].element : invalid_index});
    topology_.edge_multiplicity.push_back(static_cast<std::uint32_t>(end - k));
    for (std::size_t j = k; j < end; ++j) topology_.element_edges[inc[j].element][inc[j].local] = e;
    k = end;
  }
}

std::array<Point2, 3> Mesh::corners(Index t) const {
  const auto& e = elements_[t];
  return {vertices_[e[0]], vertices_[e[1]], vertices_[e[2]]};
}

double Mesh::signed_area(Index t) const {
  const auto c = corners(t);
  return 0.5 * twice_signed_area(c[0], c[1], c[2]);
}

double Mesh::area(Index t) const { return std::abs(signed_area(t)); }

double Mesh::total_area() const {
  double sum = 0.0;
  for (Index t = 0; t < n_elements(); ++t) sum += area(t);
  return sum;
}

Index Mesh::neighbor(Index t, int local) const {
  const Index e = topology_.element_edges[t][local];
  const auto& pair = topology_.edge_elements[e];
  return pair[0] == t ? pair[1] : pair[0];
}

std::vector<bool> Mesh::boundary_vertices() const {
  std::vector<bool> on_boundary(vertices_.size(), false);
  for (Index t = 0; t < n_elements(); ++t) {
    for (int i = 0; i < 3; ++i) {
      if (!boundary_[t][i]) continue;
      on_boundary[elements_[t][(i + 1) % 3]] = true;
      on_boundary[elements_[t][(i + 2) % 3]] = true;
    }
  }
  return on_boundary;
}

bool Mesh::same_geometry(const Mesh& other) const {
  return vertices_ == other.vertices_ && elements_ == other.elements_ && boundary_ == other.boundary_;
}

// ---------------------------------------------------------------------------
// MarkSet

MarkSet::MarkSet(std::vector<Index> indices) : indices_(std::move(indices)) {
  std::sort(indices_.begin(), indices_.end());
  indices_.erase(std::unique(indices_.begin(), indices_.end()), indices_.end());
}

MarkSet MarkSet::all(const Mesh& mesh) {
  std::vector<Index> all(mesh.n_elements());
  std::iota(all.begin(), all.end(), Index{0});
  return MarkSet(std::move(all));
}

bool MarkSet::contains(Index t) const { return std::binary_search(indices_.begin(), indices_.end(), t); }

void MarkSet::check_valid_for(const Mesh& mesh) const {
  if (!indices_.empty() && indices_.back() >= mesh.n_elements()) {
    throw InputError("mark set references element " + std::to_string(indices_.back()) +
                     " but the mesh has " + std::to_string(mesh.n_elements()) + " elements");
  }
}

// ---------------------------------------------------------------------------
// Constructors

Mesh make_lshape_initial() {
  constexpr int cells = 8;  // per direction on (-1,1)
  constexpr double h = 2.0 / cells;
  auto inside = [](int i, int j) {  // cell (i, j) has lower-left corner (-1 + i h, -1 + j h)
    return !(i >= cells / 2 && j < cells / 2);
  };

  std::vector<Point2> vertices;
  std::vector<Index> grid((cells + 1) * (cells + 1), invalid_index);
  auto grid_id = [&](int i, int j) -> Index& { return grid[j * (cells + 1) + i]; };
  for (int j = 0; j <= cells; ++j) {
    for (int i = 0; i <= cells; ++i) {
      const bool used = (i > 0 && j > 0 && inside(i - 1, j - 1)) || (i < cells && j > 0 && inside(i, j - 1)) ||
                        (i > 0 && j < cells && inside(i - 1, j)) || (i < cells && j < cells && inside(i, j));
      if (!used) continue;
      grid_id(i, j) = static_cast<Index>(vertices.size());
      vertices.push_back({-1.0 + i * h, -1.0 + j * h});
    }
  }

  std::vector<Mesh::Element> triangles;
  for (int j = 0; j < cells; ++j) {
    for (int i = 0; i < cells; ++i) {
      if (!inside(i, j)) continue;
      const Index center = static_cast<Index>(vertices.size());
      vertices.push_back({-1.0 + (i + 0.5) * h, -1.0 + (j + 0.5) * h});
      const Index sw = grid_id(i, j), se = grid_id(i + 1, j);
      const Index ne = grid_id(i + 1, j + 1), nw = grid_id(i, j + 1);
      triangles.push_back({center, sw, se});
      triangles.push_back({center, se, ne});
      triangles.push_back({center, ne, nw});
      triangles.push_back({center, nw, sw});
    }
  }
  return Mesh::from_triangles(std::move(vertices), std::move(triangles));
}

Mesh make_unit_square() {
  return Mesh::from_triangles({{0.0, 0.0}, {1.0, 0.0}, {1.0, 1.0}, {0.0, 1.0}}, {{0, 1, 2}, {0, 2, 3}});
}

// ---------------------------------------------------------------------------
// Refinement

Mesh refine(const Mesh& mesh, const MarkSet& marked) {
  marked.check_valid_for(mesh);
  const EdgeTopology& topo = mesh.topology();
  const Index n_edges = static_cast<Index>(topo.edges.size());

  // Closure: an element with any marked edge must have its refinement edge marked.
  std::vector<char> edge_marked(n_edges, 0);
  std::vector<Index> pending;
  auto mark_edge = [&](Index e) {
    if (edge_marked[e]) return;
    edge_marked[e] = 1;
    for (Index t : topo.edge_elements[e]) {
      if (t != invalid_index) pending.push_back(t);
    }
  };
  for (Index t : marked.indices()) mark_edge(topo.element_edges[t][0]);
  while (!pending.empty()) {
    const Index t = pending.back();
    pending.pop_back();
    const auto& ee = topo.element_edges[t];
    if ((edge_marked[ee[1]] || edge_marked[ee[2]]) && !edge_marked[ee[0]]) mark_edge(ee[0]);
  }

  Mesh out;
  out.vertices_.assign(mesh.vertices().begin(), mesh.vertices().end());
  Genealogy gen;
  gen.parent_mesh_id = mesh.id();
  gen.parent_vertex_count = mesh.n_vertices();

  std::vector<Index> midpoint(n_edges, invalid_index);
  for (Index e = 0; e < n_edges; ++e) {
    if (!edge_marked[e]) continue;
    const auto [a, b] = topo.edges[e];
    midpoint[e] = static_cast<Index>(out.vertices_.size());
    out.vertices_.push_back(ailfem::midpoint(mesh.vertex(a), mesh.vertex(b)));
    gen.vertex_parents.push_back({a, b});
  }

  struct Leaf {
    Mesh::Element element;
    Mesh::BoundaryFlags flags;
    std::uint32_t generation;
    ElementPath path;
  };
  const Index old_vertices = mesh.n_vertices();
  auto marked_midpoint = [&](Index a, Index b) -> Index {
    if (a >= old_vertices || b >= old_vertices) return invalid_index;
    const Index e = topo.find(a, b);
    return e == invalid_index ? invalid_index : midpoint[e];
  };

  std::vector<Leaf> leaves;
  auto split = [&](auto&& self, const Leaf& leaf) -> void {
    const auto& w = leaf.element;
    const Index m = marked_midpoint(w[1], w[2]);
    if (m == invalid_index) {
      leaves.push_back(leaf);
      return;
    }
    const auto& b = leaf.flags;
    self(self, Leaf{{m, w[0], w[1]}, {b[2], b[0], false}, leaf.generation + 1, leaf.path.child(0)});
    self(self, Leaf{{m, w[2], w[0]}, {b[1], false, b[0]}, leaf.generation + 1, leaf.path.child(1)});
  };

  const Index n_old = mesh.n_elements();
  out.elements_.resize(n_old);
  out.boundary_.resize(n_old);
  out.generation_.resize(n_old);
  out.paths_.resize(n_old);
  gen.parent_element.resize(n_old);
  std::vector<Leaf> appended;
  std::vector<Index> appended_parent;
  for (Index t = 0; t < n_old; ++t) {
    leaves.clear();
    split(split, Leaf{mesh.element(t), mesh.boundary_flags()[t], mesh.generation()[t], mesh.paths()[t]});
    out.elements_[t] = leaves[0].element;
    out.boundary_[t] = leaves[0].flags;
    out.generation_[t] = leaves[0].generation;
    out.paths_[t] = leaves[0].path;
    gen.parent_element[t] = t;
    for (std::size_t k = 1; k < leaves.size(); ++k) {
      appended.push_back(leaves[k]);
      appended_parent.push_back(t);
    }
  }
  for (std::size_t k = 0; k < appended.size(); ++k) {
    out.elements_.push_back(appended[k].element);
    out.boundary_.push_back(appended[k].flags);
    out.generation_.push_back(appended[k].generation);
    out.paths_.push_back(appended[k].path);
    gen.parent_element.push_back(appended_parent[k]);
  }

  out.build_topology();
  out.genealogy_ = std::move(gen);
  out.id_ = next_mesh_id();
  out.root_fingerprint_ = mesh.root_fingerprint();
  out.root_element_count_ = mesh.root_element_count();
  return out;
}

Mesh uniform_refine(const Mesh& mesh) { return refine(mesh, MarkSet::all(mesh)); }

Mesh overlay(const Mesh& a, const Mesh& b) {
  if (a.root_fingerprint() != b.root_fingerprint()) {
    throw InputError("overlay requires meshes refined from the same initial mesh");
  }
  std::vector<ElementPath> ancestors;
  for (const auto& p : b.paths()) {
    for (std::uint32_t d = 0; d < p.depth; ++d) ancestors.push_back(p.prefix(d));
  }
  std::sort(ancestors.begin(), ancestors.end());
  ancestors.erase(std::unique(ancestors.begin(), ancestors.end()), ancestors.end());

  Mesh current = a;
  for (;;) {
    std::vector<Index> marks;
    for (Index t = 0; t < current.n_elements(); ++t) {
      if (std::binary_search(ancestors.begin(), ancestors.end(), current.paths()[t])) marks.push_back(t);
    }
    if (marks.empty()) return current;
    current = refine(current, MarkSet(std::move(marks)));
  }
}

// ---------------------------------------------------------------------------
// Validation

MeshDiagnostics validate(const Mesh& mesh) {
  MeshDiagnostics d;
  const auto& topo = mesh.topology();
  for (Index t = 0; t < mesh.n_elements(); ++t) {
    const auto& e = mesh.element(t);
    if (e[0] == e[1] || e[1] == e[2] || e[0] == e[2]) {
      d.orientation.push_back("element " + std::to_string(t) + " repeats a vertex");
    } else if (!(mesh.signed_area(t) > 0.0)) {
      std::ostringstream msg;
      msg << "element " << t << " has non-positive signed area " << mesh.signed_area(t);
      d.orientation.push_back(msg.str());
    }
  }
  for (Index k = 0; k < topo.edges.size(); ++k) {
    const auto [lo, hi] = topo.edges[k];
    const std::string name = "edge (" + std::to_string(lo) + "," + std::to_string(hi) + ")";
    const auto mult = topo.edge_multiplicity[k];
    if (mult > 2) {
      d.conformity.push_back(name + " is shared by " + std::to_string(mult) + " elements");
      continue;
    }
    // Flags as seen from every incident element.
    int flagged = 0;
    for (Index t : topo.edge_elements[k]) {
      if (t == invalid_index) continue;
      for (int i = 0; i < 3; ++i) {
        if (topo.element_edges[t][i] == k && mesh.boundary_flags()[t][i]) ++flagged;
      }
    }
    if (mult == 2 && flagged > 0) {
      d.boundary.push_back(name + " is interior but flagged as boundary");
    } else if (mult == 1 && flagged == 0) {
      d.conformity.push_back(name + " has a single adjacent element but is not a boundary edge (hanging node)");
    }
  }
  return d;
}

}  // namespace ailfem
