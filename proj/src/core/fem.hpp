// core/fem.hpp -- P1 finite element assembly (stiffness + lumped mass).

#pragma once

#include "mesh.hpp"
#include "types.hpp"

namespace mpac {

// Assembled operators for the scalar P1 space on a mesh.  The mass matrix is
// lumped (row sums of the consistent mass matrix), stored as its diagonal.
struct FemMatrices {
  Vec mass;        // lumped mass entries M_j, all positive
  SpMat stiffness; // Laplacian stiffness L, symmetric, L*1 = 0

  int num_nodes() const { return static_cast<int>(mass.size()); }
  // Sum of the lumped masses = measure of the domain (1 for the unit square).
  double total_mass() const { return mass.sum(); }
};

FemMatrices assemble_fem(const Mesh& mesh);

// Mass-weighted inner product sum_j M_j u_j v_j.
double lumped_inner(const Vec& mass, const Vec& u, const Vec& v);

}  // namespace mpac
