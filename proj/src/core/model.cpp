// core/model.cpp -- phase-field problem parameters, state, and diagnostics.

#include "model.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

namespace mpac {

void ModelParams::validate() const {
  require(num_phases >= 2, ErrorCode::invalid_argument, "ModelParams: need at least 2 phases");
  require(epsilon > 0.0 && epsilon < 1.0, ErrorCode::invalid_argument,
          "ModelParams: epsilon must lie in (0, 1)");
  require(coupling.rows() == num_phases && coupling.cols() == num_phases,
          ErrorCode::invalid_argument, "ModelParams: coupling matrix must be N x N");
  require(coupling.isApprox(coupling.transpose(), 0.0), ErrorCode::invalid_argument,
          "ModelParams: coupling matrix must be symmetric");
  Eigen::SelfAdjointEigenSolver<Mat> es(coupling);
  require(es.eigenvalues().maxCoeff() > 0.0, ErrorCode::invalid_argument,
          "ModelParams: coupling matrix needs at least one positive eigenvalue");
  require(target_fractions.size() == num_phases, ErrorCode::invalid_argument,
          "ModelParams: target fractions must have length N");
  require(target_fractions.minCoeff() >= 0.0, ErrorCode::invalid_argument,
          "ModelParams: target fractions must be nonnegative");
  require(std::abs(target_fractions.sum() - 1.0) <= 1e-12, ErrorCode::invalid_argument,
          "ModelParams: target fractions must sum to 1");
  require(pdas_threshold > 0.0, ErrorCode::invalid_argument,
          "ModelParams: active-set threshold must be positive");
}

Vec project_simplex(const Vec& v) {
  const int n = static_cast<int>(v.size());
  require(n >= 1, ErrorCode::invalid_argument, "project_simplex: empty vector");
  require(v.allFinite(), ErrorCode::invalid_argument, "project_simplex: non-finite input");

  // Sort-and-threshold: find t with sum(max(v - t, 0)) = 1.
  std::vector<double> sorted(v.data(), v.data() + n);
  std::sort(sorted.begin(), sorted.end(), std::greater<double>());
  double cumulative = 0.0;
  double threshold = (v.sum() - 1.0) / n;
  for (int k = 0; k < n; ++k) {
    cumulative += sorted[k];
    const double t = (cumulative - 1.0) / (k + 1);
    if (k + 1 == n || sorted[k + 1] <= t) {
      threshold = t;
      break;
    }
  }
  return (v.array() - threshold).cwiseMax(0.0).matrix();
}

namespace {

PhaseState zero_state(int num_nodes, int num_phases) {
  PhaseState state;
  state.u = Mat::Zero(num_nodes, num_phases);
  state.u_prev = Mat::Zero(num_nodes, num_phases);
  state.mu = Mat::Zero(num_nodes, num_phases);
  state.mass_mult = Vec::Zero(num_phases);
  state.sat_mult = Vec::Zero(num_nodes);
  return state;
}

// Uniform double in [0, 1) from the top 53 bits of one raw draw, so the noise
// stream is the same on every platform with the same mt19937_64 seed.
double next_uniform(std::mt19937_64& rng) { return (rng() >> 11) * 0x1.0p-53; }

}  // namespace

PhaseState initial_wellmixed(const Mesh& mesh, const ModelParams& params, double noise,
                             std::uint64_t seed) {
  params.validate();
  const int N = params.num_phases;
  require(noise >= 0.0 && noise <= 1.0 / N, ErrorCode::invalid_argument,
          "initial_wellmixed: noise must lie in [0, 1/N]");

  PhaseState state = zero_state(mesh.num_nodes(), N);
  std::mt19937_64 rng(seed);
  Vec sample(N);
  for (int j = 0; j < mesh.num_nodes(); ++j) {
    for (int i = 0; i < N; ++i)
      sample(i) = params.target_fractions(i) + (2.0 * next_uniform(rng) - 1.0) * noise;
    const Vec projected = project_simplex(sample);
    for (int i = 0; i < N; ++i) state.u(j, i) = projected(i);
  }
  state.u_prev = state.u;
  return state;
}

PhaseState initial_quadruple(const Mesh& mesh, const ModelParams& params) {
  params.validate();
  require(params.num_phases == 5, ErrorCode::invalid_argument,
          "initial_quadruple: benchmark requires exactly 5 phases");
  require(mesh.dim == 2, ErrorCode::unsupported, "initial_quadruple: 2D only");

  PhaseState state = zero_state(mesh.num_nodes(), 5);
  for (int j = 0; j < mesh.num_nodes(); ++j) {
    const double x = mesh.nodes(j, 0);
    const double y = mesh.nodes(j, 1);
    int phase = 4;  // surrounding phase 5
    if (x >= 0.25 && x < 0.75 && y >= 0.25 && y < 0.75) {
      const int qx = x < 0.5 ? 0 : 1;
      const int qy = y < 0.5 ? 0 : 1;
      phase = qx + 2 * qy;  // lower-left quadrant is phase 1
    }
    state.u(j, phase) = 1.0;
  }
  state.u_prev = state.u;
  return state;
}

EnergyResult energy(const PhaseState& state, const FemMatrices& fem, const ModelParams& params) {
  const int N = params.num_phases;
  require(state.num_phases() == N && state.num_nodes() == fem.num_nodes(),
          ErrorCode::invalid_argument, "energy: state/fem/params dimension mismatch");

  EnergyResult result;
  result.max_saturation_error = (state.u.rowwise().sum().array() - 1.0).abs().maxCoeff();
  result.on_simplex = result.max_saturation_error <= 1e-6;

  double gradient_part = 0.0;
  for (int i = 0; i < N; ++i)
    gradient_part += state.u.col(i).dot(fem.stiffness * state.u.col(i));

  // Obstacle potential Psi(u) = -1/2 u'Au, integrated with the lumped rule.
  double potential_part = 0.0;
  for (int j = 0; j < state.num_nodes(); ++j) {
    const Vec uj = state.u.row(j).transpose();
    potential_part += fem.mass(j) * (-0.5 * uj.dot(params.coupling * uj));
  }

  result.value = 0.5 * params.epsilon * gradient_part + potential_part / params.epsilon;
  return result;
}

}  // namespace mpac
