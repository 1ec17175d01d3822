// core/pdas.cpp -- primal-dual active set iteration for one implicit step.

#include "pdas.hpp"

#include <cmath>
#include <string>
#include <utility>

namespace mpac {

namespace {

// Row residual of the discrete equation for (node j, phase i), excluding the
// -Lambda_j term:  (eps^2/tau) u + (eps^2/M_j)(L u_i)_j - lambda_i
//                  - (eps^2/tau) u_prev - (A u_prev)_i.
// Both multiplier recoveries are this expression (step 3 solves it for
// Lambda, step 4 subtracts Lambda to get mu).
struct RowResidual {
  Mat lu;       // stiffness * u, per phase
  Mat coupled;  // u_prev * A, per phase
  double eps2, eps2_over_tau;

  RowResidual(const PhaseState& state, const FemMatrices& fem, const ModelParams& params)
      : lu(fem.stiffness * state.u),
        coupled(state.u_prev * params.coupling),
        eps2(params.epsilon * params.epsilon),
        eps2_over_tau(eps2 / state.tau) {}

  double operator()(const PhaseState& state, const FemMatrices& fem, int j, int i) const {
    return eps2_over_tau * (state.u(j, i) - state.u_prev(j, i)) +
           eps2 * lu(j, i) / fem.mass(j) - state.mass_mult(i) - coupled(j, i);
  }
};

}  // namespace

void recover_sat_multiplier(const ActiveSets& sets, const FemMatrices& fem,
                            const ModelParams& params, PhaseState* state) {
  require(sets.nodes_without_free_phase == 0, ErrorCode::solver_failure,
          "recover_sat_multiplier: node active in every phase");
  const RowResidual residual(*state, fem, params);
  for (int j = 0; j < state->num_nodes(); ++j) {
    const int i = sets.pure_phase[j];
    if (i >= 0) state->sat_mult(j) = residual(*state, fem, j, i);
  }
}

void recover_bound_multipliers(const ActiveSets& sets, const FemMatrices& fem,
                               const ModelParams& params, PhaseState* state) {
  const RowResidual residual(*state, fem, params);
  state->mu.setZero();
  for (int j = 0; j < state->num_nodes(); ++j)
    for (int i = 0; i < state->num_phases(); ++i)
      if (sets.is_active(j, i))
        state->mu(j, i) = residual(*state, fem, j, i) - state->sat_mult(j);
}

SweepStats pdas_step(const ActiveSets& sets, PhaseState* state, const FemMatrices& fem,
                     const ModelParams& params, const Vec& mass_targets,
                     const PdasOptions& options, int sweep_index, ActiveSets* next_sets) {
  fix_known_values(sets, state);
  const SaddleSystem sys = build_saddle_system(sets, *state, fem, params,
                                               options.mass_constrained, mass_targets);
  if (options.system_hook) options.system_hook(sweep_index, sys);

  SweepStats stats;
  stats.omega = sys.omega();
  stats.union_size = sys.num_union();

  if (!sys.trivial) {
    const SchurBlocks blocks = build_schur_blocks(sys);
    const Preconditioner precond(sys, blocks, options.precond, options.kblock);
    const GmresResult solve = gmres([&sys](const Vec& x) { return sys.apply(x); },
                                    [&precond](const Vec& v) { return precond.apply_inverse(v); },
                                    sys.rhs, options.gmres);
    require(solve.converged, ErrorCode::solver_failure,
            "pdas_step: GMRES stalled at relative residual " +
                std::to_string(solve.rel_residual) + " after " +
                std::to_string(solve.iterations) + " iterations");
    stats.gmres_iterations = solve.iterations;
    stats.gmres_residual = solve.rel_residual;
    Vec x = solve.x;
    restore_constraints(sys, blocks, &x);
    scatter_solution(sys, x, state);
  }

  recover_sat_multiplier(sets, fem, params, state);
  recover_bound_multipliers(sets, fem, params, state);
  *next_sets = compute_active_sets(*state, params);
  return stats;
}

PdasResult pdas_solve_timestep(PhaseState* state, const FemMatrices& fem,
                               const ModelParams& params, const Vec& mass_targets,
                               const PdasOptions& options) {
  require(options.max_sweeps >= 1, ErrorCode::invalid_argument,
          "pdas_solve_timestep: max_sweeps must be >= 1");

  PdasResult result;
  ActiveSets sets = compute_active_sets(*state, params);
  for (int k = 0; k < options.max_sweeps; ++k) {
    ActiveSets next;
    result.sweep_stats.push_back(
        pdas_step(sets, state, fem, params, mass_targets, options, k, &next));
    result.sweeps = k + 1;
    if (next.same_as(sets)) {
      result.sets = std::move(next);
      return result;
    }
    sets = std::move(next);
  }
  fail(ErrorCode::solver_failure,
       "pdas_solve_timestep: active sets did not settle within " +
           std::to_string(options.max_sweeps) + " sweeps");
}

KktReport check_kkt(const PhaseState& state, const FemMatrices& fem, const Vec& mass_targets) {
  KktReport report;
  report.max_saturation_error = (state.u.rowwise().sum().array() - 1.0).abs().maxCoeff();
  report.min_u = state.u.minCoeff();
  report.min_mu = state.mu.minCoeff();
  report.complementarity = fem.mass.dot(state.u.cwiseProduct(state.mu).rowwise().sum());
  for (int i = 0; i < state.num_phases(); ++i) {
    const double mass = fem.mass.dot(state.u.col(i));
    const double scale = std::max(std::abs(mass_targets(i)), 1e-12);
    report.max_mass_rel_drift =
        std::max(report.max_mass_rel_drift, std::abs(mass - mass_targets(i)) / scale);
  }
  return report;
}

}  // namespace mpac
