// core/fem.cpp -- P1 finite element assembly (stiffness + lumped mass).

#include "fem.hpp"

#include <vector>

namespace mpac {

FemMatrices assemble_fem(const Mesh& mesh) {
  const int nn = mesh.num_nodes();
  require(nn > 0, ErrorCode::invalid_argument, "assemble_fem: empty mesh");

  FemMatrices fem;
  fem.mass = Vec::Zero(nn);

  std::vector<Eigen::Triplet<double>> trips;
  trips.reserve(9 * mesh.num_elements());

  for (int e = 0; e < mesh.num_elements(); ++e) {
    const auto& el = mesh.elements[e];
    const auto p0 = mesh.nodes.row(el[0]);
    const auto p1 = mesh.nodes.row(el[1]);
    const auto p2 = mesh.nodes.row(el[2]);

    const double det = (p1(0) - p0(0)) * (p2(1) - p0(1)) - (p2(0) - p0(0)) * (p1(1) - p0(1));
    const double area = 0.5 * det;
    require(area > 0.0, ErrorCode::internal, "assemble_fem: degenerate or inverted element");

    // Gradients of the barycentric basis: grad phi_a = rot(edge opposite a)/det.
    const double gx[3] = {(p1(1) - p2(1)) / det, (p2(1) - p0(1)) / det, (p0(1) - p1(1)) / det};
    const double gy[3] = {(p2(0) - p1(0)) / det, (p0(0) - p2(0)) / det, (p1(0) - p0(0)) / det};

    for (int a = 0; a < 3; ++a) {
      fem.mass(el[a]) += area / 3.0;  // lumped mass: one third of the element area per vertex
      for (int b = 0; b < 3; ++b)
        trips.emplace_back(el[a], el[b], area * (gx[a] * gx[b] + gy[a] * gy[b]));
    }
  }

  fem.stiffness.resize(nn, nn);
  fem.stiffness.setFromTriplets(trips.begin(), trips.end());
  // Right-angle couplings cancel exactly on this mesh; drop the explicit zeros.
  fem.stiffness.prune([](int, int, double v) { return v != 0.0; });
  fem.stiffness.makeCompressed();
  return fem;
}

double lumped_inner(const Vec& mass, const Vec& u, const Vec& v) {
  require(mass.size() == u.size() && mass.size() == v.size(), ErrorCode::invalid_argument,
          "lumped_inner: size mismatch");
  return mass.cwiseProduct(u).dot(v);
}

}  // namespace mpac
