// core/saddle.cpp -- active-set bookkeeping and the reduced saddle system.

#include "saddle.hpp"

#include <cmath>
#include <string>
#include <vector>

namespace mpac {

double ActiveSets::active_fraction() const {
  if (num_nodes() == 0) return 0.0;
  int in_union = 0;
  for (int j = 0; j < num_nodes(); ++j)
    if (active.row(j).any()) ++in_union;
  return static_cast<double>(in_union) / (static_cast<double>(num_phases()) * num_nodes());
}

ActiveSets compute_active_sets(const PhaseState& state, const ModelParams& params) {
  // Only the sign test's own inputs are checked here; the full parameter
  // constraints are enforced where configs are loaded.
  require(params.pdas_threshold > 0.0, ErrorCode::invalid_argument,
          "compute_active_sets: threshold must be positive");
  const int nn = state.num_nodes();
  const int N = state.num_phases();
  require(N == params.num_phases, ErrorCode::invalid_argument,
          "compute_active_sets: state/params phase count mismatch");

  ActiveSets sets;
  sets.active = (params.pdas_threshold * state.u - state.mu).array() < 0.0;
  sets.interface_.assign(N, {});
  sets.pure_phase.assign(nn, -1);

  for (int j = 0; j < nn; ++j) {
    int free_count = 0;
    int last_free = -1;
    for (int i = 0; i < N; ++i)
      if (!sets.active(j, i)) {
        ++free_count;
        last_free = i;
      }
    if (free_count == 0) {
      ++sets.nodes_without_free_phase;
    } else if (free_count == 1) {
      sets.pure_phase[j] = last_free;
    } else {
      sets.interface_union.push_back(j);
      for (int i = 0; i < N; ++i)
        if (!sets.active(j, i)) sets.interface_[i].push_back(j);
    }
  }
  for (const auto& d : sets.interface_) sets.omega += static_cast<int>(d.size());
  return sets;
}

void fix_known_values(const ActiveSets& sets, PhaseState* state) {
  const int nn = state->num_nodes();
  const int N = state->num_phases();
  require(nn == sets.num_nodes() && N == sets.num_phases(), ErrorCode::invalid_argument,
          "fix_known_values: state/sets dimension mismatch");
  for (int j = 0; j < nn; ++j)
    for (int i = 0; i < N; ++i) {
      if (sets.active(j, i)) {
        state->u(j, i) = 0.0;
      } else {
        if (sets.pure_phase[j] == i) state->u(j, i) = 1.0;
        state->mu(j, i) = 0.0;
      }
    }
}

SaddleSystem build_saddle_system(const ActiveSets& sets, const PhaseState& state,
                                 const FemMatrices& fem, const ModelParams& params,
                                 bool mass_constrained, const Vec& mass_targets) {
  const int nn = state.num_nodes();
  const int N = params.num_phases;
  require(sets.num_nodes() == nn && fem.num_nodes() == nn, ErrorCode::invalid_argument,
          "build_saddle_system: dimension mismatch");
  require(state.tau > 0.0, ErrorCode::invalid_argument, "build_saddle_system: tau must be positive");
  require(sets.nodes_without_free_phase == 0, ErrorCode::solver_failure,
          "build_saddle_system: node active in every phase cannot satisfy saturation");
  if (mass_constrained)
    require(mass_targets.size() == N, ErrorCode::invalid_argument,
            "build_saddle_system: mass targets must have length N");

  SaddleSystem sys;
  sys.num_phases = N;
  sys.mass_constrained = mass_constrained;
  sys.phase_nodes = sets.interface_;
  sys.union_nodes = sets.interface_union;

  sys.phase_offset.assign(N + 1, 0);
  for (int i = 0; i < N; ++i)
    sys.phase_offset[i + 1] = sys.phase_offset[i] + static_cast<int>(sys.phase_nodes[i].size());

  if (mass_constrained) {
    // A phase with no interfacial nodes has its mass frozen by the pinned
    // values; unless that mass already sits on the target, no solve on the
    // remaining unknowns can restore it, so the sweep must fail and let the
    // driver retry the step with a smaller tau.
    for (int i = 0; i < N; ++i) {
      if (!sys.phase_nodes[i].empty()) continue;
      const double pinned = fem.mass.dot(state.u.col(i));
      require(std::abs(pinned - mass_targets(i)) <= 1e-9 * std::max(1.0, std::abs(mass_targets(i))),
              ErrorCode::solver_failure,
              "build_saddle_system: phase " + std::to_string(i) +
                  " has no interfacial nodes and its pinned mass misses the target");
    }
  }

  if (sys.union_nodes.empty()) {
    sys.trivial = true;
    return sys;
  }

  // Row index in the B2/Lambda block for each node of D.
  std::vector<int> union_row(nn, -1);
  for (int p = 0; p < sys.num_union(); ++p) union_row[sys.union_nodes[p]] = p;
  sys.union_pos.resize(N);
  for (int i = 0; i < N; ++i) {
    sys.union_pos[i].reserve(sys.phase_nodes[i].size());
    for (int j : sys.phase_nodes[i]) sys.union_pos[i].push_back(union_row[j]);
  }

  sys.union_mass.resize(sys.num_union());
  for (int p = 0; p < sys.num_union(); ++p) sys.union_mass(p) = fem.mass(sys.union_nodes[p]);

  const double eps2 = params.epsilon * params.epsilon;
  const double eps2_over_tau = eps2 / state.tau;

  sys.rhs = Vec::Zero(sys.total_dim());
  sys.kblocks.resize(N);
  sys.restricted_mass.resize(N);
  Vec fixed_mass = Vec::Zero(N);      // per phase: mass carried by fixed nodes
  Vec fixed_sum = Vec::Zero(nn);      // per node: sum of fixed phase values

  std::vector<int> local(nn, -1);
  std::vector<Eigen::Triplet<double>> trips;
  for (int i = 0; i < N; ++i) {
    const auto& di = sys.phase_nodes[i];
    const int sz = static_cast<int>(di.size());
    for (int r = 0; r < sz; ++r) local[di[r]] = r;

    // K_i = (eps^2/tau) M + eps^2 L on D_i x D_i.
    trips.clear();
    sys.restricted_mass[i].resize(sz);
    for (int r = 0; r < sz; ++r) {
      const int j = di[r];
      sys.restricted_mass[i](r) = fem.mass(j);
      trips.emplace_back(r, r, eps2_over_tau * fem.mass(j));
      for (SpMat::InnerIterator it(fem.stiffness, j); it; ++it)
        if (local[it.col()] >= 0) trips.emplace_back(r, local[it.col()], eps2 * it.value());
    }
    sys.kblocks[i].resize(sz, sz);
    sys.kblocks[i].setFromTriplets(trips.begin(), trips.end());
    sys.kblocks[i].makeCompressed();

    // Fixed values of this phase (zero on D_i), for RHS corrections.
    Vec ufix = state.u.col(i);
    for (int j : di) ufix(j) = 0.0;
    fixed_mass(i) = fem.mass.dot(ufix);
    fixed_sum += ufix;
    const Vec stiffness_correction = fem.stiffness * ufix;

    // Explicit coupling term sum_m a_im u_prev_m, evaluated nodewise.
    const Vec coupled_prev = state.u_prev * params.coupling.col(i);

    for (int r = 0; r < sz; ++r) {
      const int j = di[r];
      sys.rhs(sys.phase_offset[i] + r) =
          fem.mass(j) * (eps2_over_tau * state.u_prev(j, i) + coupled_prev(j)) -
          eps2 * stiffness_correction(j);
    }
    for (int j : di) local[j] = -1;
  }

  if (mass_constrained) {
    // B1 row i: - (target_i - target_N) + fixed-phase-i mass - fixed-phase-N mass.
    for (int l = 0; l + 1 < N; ++l)
      sys.rhs(sys.omega() + l) = -((mass_targets(l) - mass_targets(N - 1)) - fixed_mass(l) +
                                   fixed_mass(N - 1));
  }

  // B2 row of node j: -M_j * (1 - sum of fixed phase values at j).
  const int sat_offset = sys.omega() + sys.num_lambda();
  for (int p = 0; p < sys.num_union(); ++p) {
    const int j = sys.union_nodes[p];
    sys.rhs(sat_offset + p) = -fem.mass(j) * (1.0 - fixed_sum(j));
  }
  return sys;
}

Vec SaddleSystem::apply(const Vec& x) const {
  require(x.size() == total_dim(), ErrorCode::invalid_argument, "SaddleSystem::apply: size mismatch");
  const int N = num_phases;
  const int nl = num_lambda();
  const int sat_offset = omega() + nl;

  Vec y(total_dim());
  for (int i = 0; i < N; ++i) {
    const int off = phase_offset[i];
    const int sz = phase_offset[i + 1] - off;
    y.segment(off, sz) = kblocks[i] * x.segment(off, sz);
  }

  if (mass_constrained) {
    const int last = phase_offset[N - 1];
    const int last_sz = phase_offset[N] - last;
    double lambda_sum = 0.0;
    for (int l = 0; l < nl; ++l) {
      const int off = phase_offset[l];
      const int sz = phase_offset[l + 1] - off;
      const double xl = x(omega() + l);
      lambda_sum += xl;
      y.segment(off, sz) -= restricted_mass[l] * xl;
      y(omega() + l) = -restricted_mass[l].dot(x.segment(off, sz)) +
                       restricted_mass[N - 1].dot(x.segment(last, last_sz));
    }
    y.segment(last, last_sz) += restricted_mass[N - 1] * lambda_sum;
  }

  y.segment(sat_offset, num_union()).setZero();
  for (int i = 0; i < N; ++i) {
    const int off = phase_offset[i];
    const auto& pos = union_pos[i];
    for (size_t k = 0; k < pos.size(); ++k) {
      const double m = union_mass(pos[k]);
      y(off + static_cast<int>(k)) -= m * x(sat_offset + pos[k]);
      y(sat_offset + pos[k]) -= m * x(off + static_cast<int>(k));
    }
  }
  return y;
}

Vec SaddleSystem::apply_constraints(const Vec& xu) const {
  require(xu.size() == omega(), ErrorCode::invalid_argument,
          "SaddleSystem::apply_constraints: size mismatch");
  const int N = num_phases;
  const int nl = num_lambda();
  Vec y = Vec::Zero(nl + num_union());

  if (mass_constrained) {
    const int last = phase_offset[N - 1];
    const int last_sz = phase_offset[N] - last;
    const double last_dot = restricted_mass[N - 1].dot(xu.segment(last, last_sz));
    for (int l = 0; l < nl; ++l) {
      const int off = phase_offset[l];
      const int sz = phase_offset[l + 1] - off;
      y(l) = -restricted_mass[l].dot(xu.segment(off, sz)) + last_dot;
    }
  }
  for (int i = 0; i < N; ++i) {
    const int off = phase_offset[i];
    const auto& pos = union_pos[i];
    for (size_t k = 0; k < pos.size(); ++k)
      y(nl + pos[k]) -= union_mass(pos[k]) * xu(off + static_cast<int>(k));
  }
  return y;
}

Vec SaddleSystem::apply_constraints_t(const Vec& xc) const {
  require(xc.size() == num_lambda() + num_union(), ErrorCode::invalid_argument,
          "SaddleSystem::apply_constraints_t: size mismatch");
  const int N = num_phases;
  const int nl = num_lambda();
  Vec y = Vec::Zero(omega());

  if (mass_constrained) {
    const int last = phase_offset[N - 1];
    const int last_sz = phase_offset[N] - last;
    double lambda_sum = 0.0;
    for (int l = 0; l < nl; ++l) {
      const int off = phase_offset[l];
      lambda_sum += xc(l);
      y.segment(off, phase_offset[l + 1] - off) -= restricted_mass[l] * xc(l);
    }
    y.segment(last, last_sz) += restricted_mass[N - 1] * lambda_sum;
  }
  for (int i = 0; i < N; ++i) {
    const int off = phase_offset[i];
    const auto& pos = union_pos[i];
    for (size_t k = 0; k < pos.size(); ++k)
      y(off + static_cast<int>(k)) -= union_mass(pos[k]) * xc(nl + pos[k]);
  }
  return y;
}

SpMat SaddleSystem::assemble_sparse() const {
  const int N = num_phases;
  const int nl = num_lambda();
  const int sat_offset = omega() + nl;

  std::vector<Eigen::Triplet<double>> trips;
  for (int i = 0; i < N; ++i) {
    const int off = phase_offset[i];
    for (int r = 0; r < kblocks[i].rows(); ++r)
      for (SpMat::InnerIterator it(kblocks[i], r); it; ++it)
        trips.emplace_back(off + r, off + it.col(), it.value());
  }
  if (mass_constrained) {
    for (int l = 0; l < nl; ++l) {
      const int row = omega() + l;
      for (int k = 0; k < kblocks[l].rows(); ++k) {
        trips.emplace_back(row, phase_offset[l] + k, -restricted_mass[l](k));
        trips.emplace_back(phase_offset[l] + k, row, -restricted_mass[l](k));
      }
      for (int k = 0; k < kblocks[N - 1].rows(); ++k) {
        trips.emplace_back(row, phase_offset[N - 1] + k, restricted_mass[N - 1](k));
        trips.emplace_back(phase_offset[N - 1] + k, row, restricted_mass[N - 1](k));
      }
    }
  }
  for (int i = 0; i < N; ++i) {
    const int off = phase_offset[i];
    const auto& pos = union_pos[i];
    for (size_t k = 0; k < pos.size(); ++k) {
      const int row = sat_offset + pos[k];
      const int col = off + static_cast<int>(k);
      trips.emplace_back(row, col, -union_mass(pos[k]));
      trips.emplace_back(col, row, -union_mass(pos[k]));
    }
  }
  SpMat k(total_dim(), total_dim());
  k.setFromTriplets(trips.begin(), trips.end());
  k.makeCompressed();
  return k;
}

Mat SaddleSystem::assemble_dense() const { return Mat(assemble_sparse()); }

void scatter_solution(const SaddleSystem& sys, const Vec& x, PhaseState* state) {
  require(x.size() == sys.total_dim(), ErrorCode::invalid_argument,
          "scatter_solution: size mismatch");
  const int N = sys.num_phases;
  for (int i = 0; i < N; ++i) {
    const auto& di = sys.phase_nodes[i];
    for (size_t k = 0; k < di.size(); ++k)
      state->u(di[k], i) = x(sys.phase_offset[i] + static_cast<int>(k));
  }
  if (sys.mass_constrained) {
    double sum = 0.0;
    for (int l = 0; l + 1 < N; ++l) {
      state->mass_mult(l) = x(sys.omega() + l);
      sum += state->mass_mult(l);
    }
    state->mass_mult(N - 1) = -sum;
  } else {
    state->mass_mult.setZero();
  }
  const int sat_offset = sys.omega() + sys.num_lambda();
  for (int p = 0; p < sys.num_union(); ++p)
    state->sat_mult(sys.union_nodes[p]) = x(sat_offset + p);
}

}  // namespace mpac
