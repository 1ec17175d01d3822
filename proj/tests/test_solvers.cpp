// test_solvers.cpp -- GMRES, sparse direct factorizations, and AMG.

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "core/amg.hpp"
#include "core/direct.hpp"
#include "core/fem.hpp"
#include "core/gmres.hpp"
#include "core/mesh.hpp"

#include <cmath>
#include <random>

using namespace mpac;

namespace {

Vec random_vec(int n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  Vec v(n);
  for (int i = 0; i < n; ++i) v(i) = dist(rng);
  return v;
}

SpMat model_kblock(int n, double epsilon, double tau) {
  const FemMatrices fem = assemble_fem(build_uniform_mesh(n));
  const double e2 = epsilon * epsilon;
  SpMat k = SpMat(e2 * fem.stiffness);
  for (int j = 0; j < fem.num_nodes(); ++j) k.coeffRef(j, j) += (e2 / tau) * fem.mass(j);
  k.makeCompressed();
  return k;
}

// Conjugate gradients, run to a tight fixed tolerance; reference for the
// direct solver on SPD systems.
Vec cg_oracle(const SpMat& a, const Vec& b) {
  Vec x = Vec::Zero(b.size());
  Vec r = b;
  Vec p = r;
  double rr = r.squaredNorm();
  for (int it = 0; it < 10000 && std::sqrt(rr) > 1e-13 * b.norm(); ++it) {
    const Vec ap = a * p;
    const double alpha = rr / p.dot(ap);
    x += alpha * p;
    r -= alpha * ap;
    const double rr_next = r.squaredNorm();
    p = r + (rr_next / rr) * p;
    rr = rr_next;
  }
  return x;
}

}  // namespace

TEST_CASE("gmres: identity converges in one iteration") {
  const Vec b = random_vec(12, 3);
  const GmresResult result = gmres([](const Vec& v) { return v; }, b);
  CHECK(result.converged);
  CHECK(result.iterations == 1);
  CHECK((result.x - b).norm() < 1e-12 * b.norm());
}

TEST_CASE("gmres: two distinct eigenvalues need at most two iterations") {
  Vec d(6);
  d << 1, 1, 1, 2, 2, 1;
  const Vec b = random_vec(6, 4);
  const GmresResult result =
      gmres([&d](const Vec& v) { return Vec(d.asDiagonal() * v); }, b);
  CHECK(result.converged);
  CHECK(result.iterations <= 2);
  CHECK((d.asDiagonal() * result.x - b).norm() < 1e-9 * b.norm());
}

TEST_CASE("gmres: zero right-hand side returns zero in zero iterations") {
  const GmresResult result = gmres([](const Vec& v) { return Vec(2.0 * v); }, Vec::Zero(5));
  CHECK(result.converged);
  CHECK(result.iterations == 0);
  CHECK(result.x.norm() == 0.0);
}

TEST_CASE("gmres: exact right preconditioner gives one iteration") {
  const SpMat a = model_kblock(6, 0.1, 0.01);
  const SpdSolver exact(a);
  const Vec b = random_vec(a.rows(), 5);
  const GmresResult result = gmres([&a](const Vec& v) { return Vec(a * v); },
                                   [&exact](const Vec& v) { return exact.solve(v); }, b);
  CHECK(result.converged);
  CHECK(result.iterations == 1);
  CHECK((a * result.x - b).norm() < 1e-9 * b.norm());
}

TEST_CASE("gmres: residual history is monotone and the count cap is honored") {
  const SpMat a = model_kblock(8, 0.05, 0.002);
  const Vec b = random_vec(a.rows(), 6);

  const GmresResult full = gmres([&a](const Vec& v) { return Vec(a * v); }, b);
  CHECK(full.converged);
  for (size_t k = 1; k < full.residual_history.size(); ++k)
    CHECK(full.residual_history[k] <= full.residual_history[k - 1] * (1.0 + 1e-12));

  GmresConfig capped;
  capped.max_iter = 3;
  const GmresResult truncated = gmres([&a](const Vec& v) { return Vec(a * v); }, b, capped);
  CHECK_FALSE(truncated.converged);
  CHECK(truncated.iterations == 3);
  // Best iterate still returned with a consistent true residual.
  CHECK((a * truncated.x - b).norm() / b.norm() ==
        doctest::Approx(truncated.rel_residual).epsilon(1e-10));
}

TEST_CASE("gmres and direct agree on an SPD model block") {
  const SpMat a = model_kblock(8, 0.04, 0.0016);
  const Vec b = random_vec(a.rows(), 7);
  const Vec x_direct = direct_solve(a, b);
  const GmresResult iterative = gmres([&a](const Vec& v) { return Vec(a * v); }, b);
  CHECK(iterative.converged);
  CHECK((iterative.x - x_direct).norm() < 1e-9 * x_direct.norm());
}

TEST_CASE("direct: identity and CG cross-check") {
  SpMat eye(9, 9);
  eye.setIdentity();
  const Vec b = random_vec(9, 8);
  CHECK((direct_solve(eye, b) - b).norm() == 0.0);

  const SpMat a = model_kblock(10, 0.08, 0.004);
  const Vec rhs = random_vec(a.rows(), 9);
  const Vec x_direct = direct_solve(a, rhs);
  const Vec x_cg = cg_oracle(a, rhs);
  CHECK((x_direct - x_cg).norm() < 1e-9 * x_cg.norm());
  CHECK((a * x_direct - rhs).norm() < 1e-12 * rhs.norm());
}

TEST_CASE("direct: singular stiffness raises instead of returning garbage") {
  const FemMatrices fem = assemble_fem(build_uniform_mesh(4));
  const Vec b = random_vec(fem.num_nodes(), 10);
  CHECK_THROWS_AS(direct_solve(fem.stiffness, b), Error);
}

TEST_CASE("SpdSolver solves and rejects indefinite input") {
  const SpMat a = model_kblock(6, 0.1, 0.005);
  const SpdSolver solver(a);
  const Vec b = random_vec(a.rows(), 11);
  CHECK((a * solver.solve(b) - b).norm() < 1e-11 * b.norm());

  SpMat indefinite(2, 2);
  indefinite.insert(0, 0) = 1.0;
  indefinite.insert(0, 1) = 2.0;
  indefinite.insert(1, 0) = 2.0;
  indefinite.insert(1, 1) = 1.0;
  indefinite.makeCompressed();
  CHECK_THROWS_AS(SpdSolver{indefinite}, Error);
}

TEST_CASE("SparseLuSolver handles symmetric indefinite systems") {
  SpMat saddle(3, 3);
  saddle.insert(0, 0) = 2.0;
  saddle.insert(0, 2) = 1.0;
  saddle.insert(1, 1) = 3.0;
  saddle.insert(1, 2) = -1.0;
  saddle.insert(2, 0) = 1.0;
  saddle.insert(2, 1) = -1.0;
  saddle.makeCompressed();
  const SparseLuSolver solver(saddle);
  const Vec b = random_vec(3, 12);
  CHECK((saddle * solver.solve(b) - b).norm() < 1e-12 * b.norm());
}

TEST_CASE("amg: hierarchy coarsens geometrically down to the direct level") {
  const SpMat a = model_kblock(16, 0.04, 0.01);
  const AmgHierarchy h = amg_setup(a);
  CHECK(h.num_levels() >= 2);
  CHECK(h.operators.back().rows() <= h.options.coarse_size);
  for (int l = 0; l + 1 < h.num_levels(); ++l) {
    CHECK(h.operators[l + 1].rows() <= (h.operators[l].rows() + 1) / 2);
    CHECK(h.prolongations[l].rows() == h.operators[l].rows());
    CHECK(h.prolongations[l].cols() == h.operators[l + 1].rows());
  }
}

TEST_CASE("amg: coarse operators are Galerkin products") {
  const SpMat a = model_kblock(12, 0.05, 0.004);
  const AmgHierarchy h = amg_setup(a);
  for (int l = 0; l + 1 < h.num_levels(); ++l) {
    const Mat p = Mat(h.prolongations[l]);
    const Mat expected = p.transpose() * Mat(h.operators[l]) * p;
    CHECK((Mat(h.operators[l + 1]) - expected).cwiseAbs().maxCoeff() < 1e-12);
  }
}

TEST_CASE("amg: setup is deterministic") {
  const SpMat a = model_kblock(12, 0.04, 0.002);
  const AmgHierarchy h1 = amg_setup(a);
  const AmgHierarchy h2 = amg_setup(a);
  REQUIRE(h1.num_levels() == h2.num_levels());
  for (int l = 0; l < h1.num_levels(); ++l)
    CHECK((Mat(h1.operators[l]) - Mat(h2.operators[l])).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("amg: apply is a linear operator and annihilates zero") {
  const SpMat a = model_kblock(10, 0.06, 0.003);
  const AmgHierarchy h = amg_setup(a);
  CHECK(amg_apply(h, Vec::Zero(a.rows())).norm() == 0.0);

  const Vec b1 = random_vec(a.rows(), 13);
  const Vec b2 = random_vec(a.rows(), 14);
  const Vec combined = amg_apply(h, Vec(2.0 * b1 - 0.5 * b2));
  const Vec separate = 2.0 * amg_apply(h, b1) - 0.5 * amg_apply(h, b2);
  CHECK((combined - separate).norm() < 1e-12 * (separate.norm() + 1.0));
}

TEST_CASE("amg: single-level hierarchy is an exact solve") {
  const SpMat a = model_kblock(5, 0.1, 0.01);  // 36 nodes <= coarse_size
  const AmgHierarchy h = amg_setup(a);
  REQUIRE(h.num_levels() == 1);
  const Vec b = random_vec(a.rows(), 15);
  CHECK((a * amg_apply(h, b) - b).norm() < 1e-11 * b.norm());
}

TEST_CASE("amg: three V-cycles contract the model block strongly") {
  const SpMat a = model_kblock(16, 0.04, 0.01);
  const AmgHierarchy h = amg_setup(a);
  const Vec b = random_vec(a.rows(), 16);
  const Vec x = amg_apply(h, b);
  CHECK((b - a * x).norm() < 0.5 * b.norm());

  // Residual shrinks cycle over cycle (stationary contraction).
  double prev = b.norm();
  for (int cycles = 1; cycles <= 3; ++cycles) {
    AmgOptions options;
    options.cycles_per_apply = cycles;
    const AmgHierarchy hc = amg_setup(a, options);
    const double res = (b - a * amg_apply(hc, b)).norm();
    CHECK(res < prev);
    prev = res;
  }
}

TEST_CASE("amg: preconditions GMRES to fast convergence") {
  const SpMat a = model_kblock(16, 0.04, 0.01);
  const AmgHierarchy h = amg_setup(a);
  const Vec b = random_vec(a.rows(), 17);
  const GmresResult result = gmres([&a](const Vec& v) { return Vec(a * v); },
                                   [&h](const Vec& v) { return amg_apply(h, v); }, b);
  CHECK(result.converged);
  CHECK(result.iterations <= 30);
  CHECK((a * result.x - b).norm() < 1e-9 * b.norm());
}

TEST_CASE("amg: nonpositive diagonal rejected") {
  SpMat bad(2, 2);
  bad.insert(0, 0) = 1.0;
  bad.insert(1, 1) = -1.0;
  bad.makeCompressed();
  CHECK_THROWS_AS(amg_setup(bad), Error);
}
