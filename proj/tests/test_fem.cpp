// test_fem.cpp -- P1 stiffness and lumped mass against hand-computed values.

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "core/fem.hpp"
#include "core/mesh.hpp"

#include <cmath>
#include <numbers>

using namespace mpac;

TEST_CASE("n=1: frozen 4x4 stiffness and lumped mass") {
  const Mesh mesh = build_uniform_mesh(1);
  const FemMatrices fem = assemble_fem(mesh);

  // Hand assembly over the two unit-square halves: diagonal 1, edges -1/2,
  // zero across the anti-diagonal pair (0,3) and the cut pair (1,2).
  Mat expected(4, 4);
  expected << 1.0, -0.5, -0.5, 0.0,
             -0.5,  1.0,  0.0, -0.5,
             -0.5,  0.0,  1.0, -0.5,
              0.0, -0.5, -0.5,  1.0;
  CHECK((Mat(fem.stiffness) - expected).cwiseAbs().maxCoeff() < 1e-15);

  // Row sums of the consistent mass: area/3 per incident element.
  CHECK(fem.mass(0) == doctest::Approx(1.0 / 6.0).epsilon(1e-14));
  CHECK(fem.mass(1) == doctest::Approx(1.0 / 3.0).epsilon(1e-14));
  CHECK(fem.mass(2) == doctest::Approx(1.0 / 3.0).epsilon(1e-14));
  CHECK(fem.mass(3) == doctest::Approx(1.0 / 6.0).epsilon(1e-14));
  CHECK(fem.total_mass() == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("stiffness annihilates constants and is symmetric") {
  for (int n : {2, 5, 16}) {
    const FemMatrices fem = assemble_fem(build_uniform_mesh(n));
    const Vec ones = Vec::Ones(fem.num_nodes());
    CHECK((fem.stiffness * ones).cwiseAbs().maxCoeff() < 1e-13);
    const SpMat diff = SpMat(fem.stiffness - SpMat(fem.stiffness.transpose()));
    CHECK(Mat(diff).cwiseAbs().maxCoeff() < 1e-15);
    CHECK(fem.total_mass() == doctest::Approx(1.0).epsilon(1e-13));
    CHECK(fem.mass.minCoeff() > 0.0);
  }
}

TEST_CASE("n=2: interior node carries mass 1/4") {
  const Mesh mesh = build_uniform_mesh(2);
  const FemMatrices fem = assemble_fem(mesh);
  // Six incident triangles of area 1/8, each contributing area/3.
  CHECK(fem.mass(mesh.node_index(1, 1)) == doctest::Approx(0.25).epsilon(1e-14));
  // Corner node: one or two incident triangles depending on the corner.
  CHECK(fem.mass(mesh.node_index(0, 0)) == doctest::Approx(1.0 / 24.0).epsilon(1e-14));
}

TEST_CASE("Dirichlet energy of sin(pi x) sin(pi y) converges to pi^2/2") {
  const double exact = std::numbers::pi * std::numbers::pi / 2.0;
  double prev_err = 0.0;
  for (int n : {16, 32, 64}) {
    const Mesh mesh = build_uniform_mesh(n);
    const FemMatrices fem = assemble_fem(mesh);
    Vec u(mesh.num_nodes());
    for (int j = 0; j < mesh.num_nodes(); ++j)
      u(j) = std::sin(std::numbers::pi * mesh.nodes(j, 0)) *
             std::sin(std::numbers::pi * mesh.nodes(j, 1));
    const double discrete = u.dot(fem.stiffness * u);
    const double err = std::abs(discrete - exact) / exact;
    CHECK(err < 0.01);
    if (prev_err > 0.0) CHECK(err < 0.35 * prev_err);  // O(h^2) decay
    prev_err = err;
  }
}

TEST_CASE("lumped inner product") {
  const FemMatrices fem = assemble_fem(build_uniform_mesh(3));
  const int nn = fem.num_nodes();
  Vec u(nn), v(nn);
  for (int j = 0; j < nn; ++j) {
    u(j) = 1.0 + 0.25 * j;
    v(j) = std::cos(0.4 * j);
  }
  double expected = 0.0;
  for (int j = 0; j < nn; ++j) expected += fem.mass(j) * u(j) * v(j);
  CHECK(lumped_inner(fem.mass, u, v) == doctest::Approx(expected).epsilon(1e-14));
  // Constant-one pair integrates the domain.
  CHECK(lumped_inner(fem.mass, Vec::Ones(nn), Vec::Ones(nn)) ==
        doctest::Approx(1.0).epsilon(1e-13));
}

TEST_CASE("assembly is deterministic") {
  const Mesh mesh = build_uniform_mesh(7);
  const FemMatrices a = assemble_fem(mesh);
  const FemMatrices b = assemble_fem(mesh);
  CHECK((a.mass - b.mass).cwiseAbs().maxCoeff() == 0.0);
  CHECK(Mat(SpMat(a.stiffness - b.stiffness)).cwiseAbs().maxCoeff() == 0.0);
}
