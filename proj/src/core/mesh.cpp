// core/mesh.cpp -- structured triangulations of the unit square.

#include "mesh.hpp"

#include <cmath>

namespace mpac {

Mesh build_uniform_mesh(int n, int dim) {
  require(dim == 2, ErrorCode::unsupported, "build_uniform_mesh: only dim = 2 is implemented");
  require(n >= 1, ErrorCode::invalid_argument, "build_uniform_mesh: n must be >= 1");

  Mesh mesh;
  mesh.dim = 2;
  mesh.n = n;
  mesh.spacing = 1.0 / n;
  mesh.h = std::sqrt(2.0) / n;

  const int side = n + 1;
  mesh.nodes.resize(side * side, 2);
  for (int iy = 0; iy < side; ++iy)
    for (int ix = 0; ix < side; ++ix) {
      const int j = iy * side + ix;
      mesh.nodes(j, 0) = static_cast<double>(ix) / n;
      mesh.nodes(j, 1) = static_cast<double>(iy) / n;
    }

  mesh.elements.reserve(2 * n * n);
  for (int cy = 0; cy < n; ++cy)
    for (int cx = 0; cx < n; ++cx) {
      const int a = mesh.node_index(cx, cy);          // (x,   y)
      const int b = mesh.node_index(cx + 1, cy);      // (x+g, y)
      const int c = mesh.node_index(cx, cy + 1);      // (x,   y+g)
      const int d = mesh.node_index(cx + 1, cy + 1);  // (x+g, y+g)
      mesh.elements.push_back({a, b, c});             // lower-left of the anti-diagonal
      mesh.elements.push_back({b, d, c});             // upper-right
    }
  return mesh;
}

double element_area(const Mesh& mesh, int element) {
  require(element >= 0 && element < mesh.num_elements(), ErrorCode::invalid_argument,
          "element_area: element index out of range");
  const auto& el = mesh.elements[element];
  const auto p0 = mesh.nodes.row(el[0]);
  const auto p1 = mesh.nodes.row(el[1]);
  const auto p2 = mesh.nodes.row(el[2]);
  return 0.5 * ((p1(0) - p0(0)) * (p2(1) - p0(1)) - (p2(0) - p0(0)) * (p1(1) - p0(1)));
}

}  // namespace mpac
