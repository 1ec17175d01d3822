// core/pdas.hpp -- primal-dual active set iteration for one implicit step.
//
// One sweep: pin the values the current sets determine, solve the reduced
// saddle system on the interface nodes (preconditioned GMRES), recover the
// saturation multiplier on pure nodes and the bound multipliers on active
// nodes, then re-derive the sets from the sign test.  The outer loop repeats
// until the sets reproduce themselves exactly.

#pragma once

#include "fem.hpp"
#include "gmres.hpp"
#include "model.hpp"
#include "precond.hpp"
#include "saddle.hpp"
#include "types.hpp"

#include <functional>
#include <vector>

namespace mpac {

struct PdasOptions {
  PrecondKind precond = PrecondKind::p3;
  KblockMode kblock = KblockMode::direct;
  GmresConfig gmres;
  int max_sweeps = 50;
  bool mass_constrained = true;
  // Debug hook invoked with every assembled system (sweep index, system).
  std::function<void(int, const SaddleSystem&)> system_hook;
};

struct SweepStats {
  int gmres_iterations = 0;   // 0 when the sweep had nothing to solve
  double gmres_residual = 0.0;
  int omega = 0;
  int union_size = 0;
};

struct PdasResult {
  int sweeps = 0;
  std::vector<SweepStats> sweep_stats;
  ActiveSets sets;  // the self-reproducing final sets
};

// PDAS step 3: saturation multiplier on pure-phase nodes (interface values
// come from the solve and are left alone).
void recover_sat_multiplier(const ActiveSets& sets, const FemMatrices& fem,
                            const ModelParams& params, PhaseState* state);

// PDAS step 4: bound multipliers on the active sets from the row residual of
// the discrete equation; zero on inactive sets.
void recover_bound_multipliers(const ActiveSets& sets, const FemMatrices& fem,
                               const ModelParams& params, PhaseState* state);

// One full sweep against the given sets; returns the stats and writes the
// next sets.  Throws solver_failure when the inner GMRES does not converge.
SweepStats pdas_step(const ActiveSets& sets, PhaseState* state, const FemMatrices& fem,
                     const ModelParams& params, const Vec& mass_targets,
                     const PdasOptions& options, int sweep_index, ActiveSets* next_sets);

// Full solve of one implicit time step: iterates sweeps until the active sets
// repeat.  Throws solver_failure when max_sweeps is exceeded (the time-step
// driver reacts by halving tau) or when an inner solve fails.
PdasResult pdas_solve_timestep(PhaseState* state, const FemMatrices& fem,
                               const ModelParams& params, const Vec& mass_targets,
                               const PdasOptions& options);

// Feasibility/KKT metrics of a converged state, used by the driver's
// monitoring and by the acceptance suite.
struct KktReport {
  double max_saturation_error = 0.0;  // max_j |sum_i u_ij - 1|
  double min_u = 0.0;
  double min_mu = 0.0;
  double complementarity = 0.0;       // sum_ij M_j u_ij mu_ij (signed)
  double max_mass_rel_drift = 0.0;    // vs. the conserved targets
};

KktReport check_kkt(const PhaseState& state, const FemMatrices& fem, const Vec& mass_targets);

}  // namespace mpac
