#include <algorithm>
#include <cstdio>
#include <istream>
#include <ostream>
#include <string>

#include "ailfem/errors.hpp"
#include "ailfem/mesh.hpp"

namespace ailfem {

void write_mesh(std::ostream& out, const Mesh& mesh) {
  out << "vertices " << mesh.n_vertices() << " elements " << mesh.n_elements() << '\n';
  char buf[96];
  for (const auto& p : mesh.vertices()) {
    std::snprintf(buf, sizeof buf, "%.17g %.17g\n", p.x, p.y);
    out << buf;
  }
  for (Index t = 0; t < mesh.n_elements(); ++t) {
    const auto& e = mesh.element(t);
    const auto& b = mesh.boundary_flags()[t];
    out << e[0] << ' ' << e[1] << ' ' << e[2] << " 0 " << b[0] << ' ' << b[1] << ' ' << b[2] << '\n';
  }
}

Mesh read_mesh(std::istream& in) {
  std::string word_v, word_e;
  long long nv = -1, ne = -1;
  if (!(in >> word_v >> nv >> word_e >> ne) || word_v != "vertices" || word_e != "elements" || nv < 0 ||
      ne < 0) {
    throw InputError("mesh file: expected header 'vertices N elements M'");
  }
  std::vector<Point2> vertices(static_cast<std::size_t>(nv));
  for (auto& p : vertices) {
    if (!(in >> p.x >> p.y)) throw InputError("mesh file: truncated vertex list");
  }
  std::vector<Mesh::Element> elements(static_cast<std::size_t>(ne));
  std::vector<Mesh::BoundaryFlags> flags(static_cast<std::size_t>(ne));
  for (std::size_t t = 0; t < elements.size(); ++t) {
    long long i = 0, j = 0, k = 0, ref = 0;
    int b0 = 0, b1 = 0, b2 = 0;
    if (!(in >> i >> j >> k >> ref >> b0 >> b1 >> b2)) throw InputError("mesh file: truncated element list");
    if (i < 0 || j < 0 || k < 0 || i >= nv || j >= nv || k >= nv) {
      throw InputError("mesh file: element " + std::to_string(t) + " has an out-of-range vertex");
    }
    if (ref < 0 || ref > 2) throw InputError("mesh file: refinement edge must be 0, 1 or 2");
    Mesh::Element e{static_cast<Index>(i), static_cast<Index>(j), static_cast<Index>(k)};
    Mesh::BoundaryFlags b{b0 != 0, b1 != 0, b2 != 0};
    // Store with the refinement edge opposite the first local vertex.
    std::rotate(e.begin(), e.begin() + ref, e.end());
    std::rotate(b.begin(), b.begin() + ref, b.end());
    elements[t] = e;
    flags[t] = b;
  }
  return Mesh::from_raw(std::move(vertices), std::move(elements), std::move(flags));
}

}  // namespace ailfem
