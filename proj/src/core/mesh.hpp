// core/mesh.hpp -- structured triangulations of the unit square.

#pragma once

#include "types.hpp"

#include <array>
#include <vector>

namespace mpac {

// Conforming P1 triangulation of [0,1]^2 with (n+1)^2 nodes.  Nodes are
// numbered lexicographically by (row, column): node j = iy*(n+1) + ix sits at
// (ix/n, iy/n).  Each grid cell is split along its anti-diagonal into a
// lower-left and an upper-right triangle, both listed counterclockwise.
struct Mesh {
  int dim = 2;
  int n = 0;                                // cells per side
  double h = 0.0;                           // mesh size: longest edge = sqrt(2)/n
  double spacing = 0.0;                     // grid spacing 1/n
  Eigen::Matrix<double, Eigen::Dynamic, 2> nodes;
  std::vector<std::array<int, 3>> elements;

  int num_nodes() const { return static_cast<int>(nodes.rows()); }
  int num_elements() const { return static_cast<int>(elements.size()); }
  int node_index(int ix, int iy) const { return iy * (n + 1) + ix; }
};

// Builds the uniform mesh; n >= 1 required, only dim == 2 is implemented.
Mesh build_uniform_mesh(int n, int dim = 2);

// Signed area of one element (positive for the orientation used here).
double element_area(const Mesh& mesh, int element);

}  // namespace mpac
