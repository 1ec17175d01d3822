// test_model.cpp -- simplex projection, initial conditions, energy.

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "core/fem.hpp"
#include "core/mesh.hpp"
#include "core/model.hpp"

#include <cmath>
#include <random>

using namespace mpac;

namespace {

ModelParams default_params(int N, double epsilon) {
  ModelParams p;
  p.num_phases = N;
  p.epsilon = epsilon;
  p.coupling = Mat::Identity(N, N);
  p.target_fractions = Vec::Constant(N, 1.0 / N);
  p.pdas_threshold = 1.0;
  return p;
}

Vec make_vec(std::initializer_list<double> values) {
  Vec v(static_cast<int>(values.size()));
  int k = 0;
  for (double x : values) v(k++) = x;
  return v;
}

}  // namespace

TEST_CASE("simplex projection: frozen cases") {
  CHECK((project_simplex(make_vec({0.5, 0.5})) - make_vec({0.5, 0.5})).norm() < 1e-15);
  CHECK((project_simplex(make_vec({1.2, -0.2})) - make_vec({1.0, 0.0})).norm() < 1e-15);
  CHECK((project_simplex(make_vec({0.5, 0.7})) - make_vec({0.4, 0.6})).norm() < 1e-15);
  const Vec center = Vec::Constant(4, 0.25);
  CHECK((project_simplex(center) - center).norm() < 1e-15);
}

TEST_CASE("simplex projection: feasibility, idempotence, variational optimality") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> dist(-2.0, 2.0);
  for (int trial = 0; trial < 200; ++trial) {
    const int N = 2 + static_cast<int>(rng() % 4);
    Vec v(N);
    for (int i = 0; i < N; ++i) v(i) = dist(rng);
    const Vec x = project_simplex(v);
    CHECK(x.minCoeff() >= 0.0);
    CHECK(x.sum() == doctest::Approx(1.0).epsilon(1e-14));
    CHECK((project_simplex(x) - x).norm() < 1e-13);
    // Projection characterization: (v - x) . (y - x) <= 0 for feasible y.
    for (int probe = 0; probe < 10; ++probe) {
      Vec y(N);
      double sum = 0.0;
      for (int i = 0; i < N; ++i) {
        y(i) = -std::log((rng() >> 11) * 0x1.0p-53 + 1e-300);
        sum += y(i);
      }
      y /= sum;
      CHECK((v - x).dot(y - x) <= 1e-12);
    }
  }
}

TEST_CASE("well-mixed start: zero noise reproduces the targets") {
  const Mesh mesh = build_uniform_mesh(4);
  ModelParams params = default_params(3, 0.1);
  params.target_fractions = make_vec({0.5, 0.3, 0.2});
  const PhaseState state = initial_wellmixed(mesh, params, 0.0, 99);
  for (int j = 0; j < state.num_nodes(); ++j)
    for (int i = 0; i < 3; ++i)
      CHECK(state.u(j, i) == doctest::Approx(params.target_fractions(i)).epsilon(1e-14));
  CHECK((state.u_prev - state.u).cwiseAbs().maxCoeff() == 0.0);
  CHECK(state.mu.cwiseAbs().maxCoeff() == 0.0);
  CHECK(state.sat_mult.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("well-mixed start: deterministic, on the simplex, documented stream") {
  const Mesh mesh = build_uniform_mesh(8);
  const ModelParams params = default_params(2, 0.1);
  const PhaseState a = initial_wellmixed(mesh, params, 0.05, 42);
  const PhaseState b = initial_wellmixed(mesh, params, 0.05, 42);
  const PhaseState c = initial_wellmixed(mesh, params, 0.05, 43);
  CHECK((a.u - b.u).cwiseAbs().maxCoeff() == 0.0);
  CHECK((a.u - c.u).cwiseAbs().maxCoeff() > 0.0);
  for (int j = 0; j < a.num_nodes(); ++j) {
    CHECK(a.u.row(j).sum() == doctest::Approx(1.0).epsilon(1e-13));
    CHECK(a.u.row(j).minCoeff() >= 0.0);
  }

  // Node-major, phase-inner draws of (top 53 bits) / 2^53, one per entry.
  std::mt19937_64 rng(42);
  const auto uniform = [&rng] { return (rng() >> 11) * 0x1.0p-53; };
  for (int j = 0; j < 3; ++j) {
    Vec sample(2);
    for (int i = 0; i < 2; ++i) sample(i) = 0.5 + (2.0 * uniform() - 1.0) * 0.05;
    const Vec expected = project_simplex(sample);
    CHECK(a.u(j, 0) == doctest::Approx(expected(0)).epsilon(1e-15));
    CHECK(a.u(j, 1) == doctest::Approx(expected(1)).epsilon(1e-15));
  }
}

TEST_CASE("well-mixed start: projection bias stays small") {
  const Mesh mesh = build_uniform_mesh(32);
  const ModelParams params = default_params(4, 0.04);
  const FemMatrices fem = assemble_fem(mesh);
  const PhaseState state = initial_wellmixed(mesh, params, 0.05, 42);
  for (int i = 0; i < 4; ++i)
    CHECK(std::abs(fem.mass.dot(state.u.col(i)) - 0.25) < 0.02);
}

TEST_CASE("well-mixed start: noise outside [0, 1/N] rejected") {
  const Mesh mesh = build_uniform_mesh(2);
  const ModelParams params = default_params(4, 0.1);
  CHECK_THROWS_AS(initial_wellmixed(mesh, params, -0.01, 1), Error);
  CHECK_THROWS_AS(initial_wellmixed(mesh, params, 0.26, 1), Error);
}

TEST_CASE("quadruple start: region ownership on the half-open quadrants") {
  const Mesh mesh = build_uniform_mesh(20);
  const ModelParams params = default_params(5, 0.04);
  const PhaseState state = initial_quadruple(mesh, params);

  const auto phase_at = [&](double x, double y) {
    const int j = mesh.node_index(static_cast<int>(std::lround(x * 20)),
                                  static_cast<int>(std::lround(y * 20)));
    for (int i = 0; i < 5; ++i)
      if (state.u(j, i) == 1.0) return i + 1;
    return -1;
  };

  CHECK(phase_at(0.10, 0.10) == 5);  // outside the central square
  CHECK(phase_at(0.30, 0.30) == 1);  // lower-left quadrant
  CHECK(phase_at(0.70, 0.30) == 2);  // lower-right
  CHECK(phase_at(0.30, 0.70) == 3);  // upper-left
  CHECK(phase_at(0.50, 0.50) == 4);  // center owned by the upper-right quadrant
  CHECK(phase_at(0.25, 0.25) == 1);  // lower/left edges belong to the quadrant
  CHECK(phase_at(0.75, 0.25) == 5);  // right edge of the square is outside
  CHECK(phase_at(0.25, 0.75) == 5);  // top edge of the square is outside

  for (int j = 0; j < state.num_nodes(); ++j) {
    CHECK(state.u.row(j).sum() == 1.0);
    CHECK(state.u.row(j).maxCoeff() == 1.0);
  }
}

TEST_CASE("quadruple start: wrong phase count rejected") {
  const Mesh mesh = build_uniform_mesh(4);
  CHECK_THROWS_AS(initial_quadruple(mesh, default_params(4, 0.1)), Error);
}

TEST_CASE("energy: constant single-phase state") {
  const Mesh mesh = build_uniform_mesh(6);
  const FemMatrices fem = assemble_fem(mesh);
  const ModelParams params = default_params(3, 0.2);
  PhaseState state;
  state.u = Mat::Zero(mesh.num_nodes(), 3);
  state.u.col(0).setOnes();
  const EnergyResult result = energy(state, fem, params);
  // Zero gradient; Psi = -1/2 at every node; |Omega| = 1.
  CHECK(result.value == doctest::Approx(-1.0 / (2.0 * 0.2)).epsilon(1e-12));
  CHECK(result.on_simplex);
}

TEST_CASE("energy: zero coupling at the barycenter vanishes") {
  const Mesh mesh = build_uniform_mesh(5);
  const FemMatrices fem = assemble_fem(mesh);
  ModelParams params = default_params(4, 0.3);
  params.coupling = Mat::Zero(4, 4);
  PhaseState state;
  state.u = Mat::Constant(mesh.num_nodes(), 4, 0.25);
  CHECK(energy(state, fem, params).value == doctest::Approx(0.0).epsilon(1e-14));
}

TEST_CASE("energy: frozen n=1 quadratic forms") {
  const Mesh mesh = build_uniform_mesh(1);
  const FemMatrices fem = assemble_fem(mesh);
  ModelParams params = default_params(2, 0.999);  // formula uses epsilon = 1 below
  params.coupling = Mat::Zero(2, 2);
  params.epsilon = 1.0;  // energy() does not re-validate, so this is allowed

  PhaseState state;
  state.u = Mat::Zero(4, 2);
  // Diagonal-neighbour pair (nodes 1 and 2 share the -1/2 stiffness couple):
  // u1'Lu1 = u2'Lu2 = 1, E = 1/2 (1 + 1) = 1.
  state.u.col(0) = make_vec({0.0, 1.0, 0.0, 1.0});
  state.u.col(1) = Vec::Ones(4) - state.u.col(0);
  CHECK(energy(state, fem, params).value == doctest::Approx(1.0).epsilon(1e-14));

  // Anti-diagonal pair (nodes 1 and 2 are uncoupled in L): both quadratic
  // forms are 2, E = 2.
  state.u.col(0) = make_vec({0.0, 1.0, 1.0, 0.0});
  state.u.col(1) = Vec::Ones(4) - state.u.col(0);
  CHECK(energy(state, fem, params).value == doctest::Approx(2.0).epsilon(1e-14));
}

TEST_CASE("energy: invariant under consistent phase relabeling") {
  const Mesh mesh = build_uniform_mesh(6);
  const FemMatrices fem = assemble_fem(mesh);
  ModelParams params = default_params(3, 0.15);
  params.coupling << 1.0, 0.2, -0.1,
                     0.2, 0.8,  0.3,
                    -0.1, 0.3,  0.5;
  const PhaseState state = initial_wellmixed(mesh, params, 0.2, 5);

  const int perm[3] = {2, 0, 1};
  ModelParams permuted = params;
  PhaseState pstate = state;
  for (int i = 0; i < 3; ++i) {
    pstate.u.col(i) = state.u.col(perm[i]);
    permuted.target_fractions(i) = params.target_fractions(perm[i]);
    for (int m = 0; m < 3; ++m)
      permuted.coupling(i, m) = params.coupling(perm[i], perm[m]);
  }
  CHECK(energy(pstate, fem, permuted).value ==
        doctest::Approx(energy(state, fem, params).value).epsilon(1e-13));
}

TEST_CASE("energy: off-simplex states are flagged but still evaluated") {
  const Mesh mesh = build_uniform_mesh(3);
  const FemMatrices fem = assemble_fem(mesh);
  const ModelParams params = default_params(2, 0.2);
  PhaseState state;
  state.u = Mat::Constant(mesh.num_nodes(), 2, 0.3);
  const EnergyResult result = energy(state, fem, params);
  CHECK_FALSE(result.on_simplex);
  CHECK(result.max_saturation_error == doctest::Approx(0.4).epsilon(1e-13));
  CHECK(std::isfinite(result.value));
}

TEST_CASE("parameter validation rejects each broken invariant") {
  const ModelParams good = default_params(3, 0.1);
  CHECK_NOTHROW(good.validate());

  ModelParams p = good;
  p.num_phases = 1;
  p.coupling = Mat::Identity(1, 1);
  p.target_fractions = Vec::Ones(1);
  CHECK_THROWS_AS(p.validate(), Error);

  p = good;
  p.epsilon = 1.5;
  CHECK_THROWS_AS(p.validate(), Error);

  p = good;
  p.coupling(0, 1) += 1e-3;  // asymmetric
  CHECK_THROWS_AS(p.validate(), Error);

  p = good;
  p.coupling = -Mat::Identity(3, 3);  // no positive eigenvalue
  CHECK_THROWS_AS(p.validate(), Error);

  p = good;
  p.coupling = Mat::Zero(3, 3);  // no positive eigenvalue either
  CHECK_THROWS_AS(p.validate(), Error);

  p = good;
  p.target_fractions = make_vec({0.7, 0.4, -0.1});
  CHECK_THROWS_AS(p.validate(), Error);

  p = good;
  p.target_fractions = make_vec({0.5, 0.4, 0.2});  // sums to 1.1
  CHECK_THROWS_AS(p.validate(), Error);

  p = good;
  p.pdas_threshold = 0.0;
  CHECK_THROWS_AS(p.validate(), Error);
}
