// core/model.hpp -- phase-field problem parameters, state, and diagnostics.
//
// The model is the nonlocal multiphase Allen-Cahn variational inequality: N
// phase fractions constrained to the Gibbs simplex pointwise, with conserved
// per-phase mass and an explicit coupling term.  This header holds the
// parameter/state containers plus initial conditions and the energy monitor.

#pragma once

#include "fem.hpp"
#include "mesh.hpp"
#include "types.hpp"

#include <cstdint>

namespace mpac {

struct ModelParams {
  int num_phases = 0;       // N >= 2
  double epsilon = 0.0;     // interfacial width, 0 < epsilon < 1
  Mat coupling;             // symmetric N x N matrix with >= 1 positive eigenvalue
  Vec target_fractions;     // mean-fraction targets on the simplex (sum = 1)
  double pdas_threshold = 0.0;  // c in the active-set test c*u - mu < 0

  // Throws invalid_argument when any invariant fails.
  void validate() const;
};

// Nodal state.  Fields with one column per phase (num_nodes x N) so per-phase
// access is contiguous.  `mass_mult` stores the effective lambda vector of
// length N: the last entry is -sum of the others by construction.
struct PhaseState {
  Mat u;         // phase fractions
  Mat u_prev;    // fractions at the previous accepted step
  Mat mu;        // bound multipliers for u >= 0
  Vec mass_mult; // mass-constraint multipliers, length N
  Vec sat_mult;  // saturation-constraint multiplier, one per node
  double time = 0.0;
  double tau = 0.0;

  int num_nodes() const { return static_cast<int>(u.rows()); }
  int num_phases() const { return static_cast<int>(u.cols()); }
};

// Euclidean projection onto the Gibbs simplex {x >= 0, sum x = 1}.
Vec project_simplex(const Vec& v);

// Well-mixed start: per node, target fractions plus i.i.d. uniform noise in
// [-noise, noise]^N, projected back onto the simplex.  Deterministic in seed.
PhaseState initial_wellmixed(const Mesh& mesh, const ModelParams& params, double noise,
                             std::uint64_t seed);

// Five-phase benchmark start: the central square [1/4,3/4]^2 split into four
// quadrant squares carrying phases 1-4, phase 5 filling the rest.  Quadrants
// own their lower/left boundaries (half-open), so every node gets one phase.
PhaseState initial_quadruple(const Mesh& mesh, const ModelParams& params);

struct EnergyResult {
  double value = 0.0;
  double max_saturation_error = 0.0;  // max_j |sum_i u_ij - 1|
  bool on_simplex = true;             // saturation error within 1e-6
};

// Ginzburg-Landau energy E = sum_i (eps/2) u_i' L u_i - (1/(2 eps)) sum_j M_j u_j' A u_j.
// Diagnostic only; flags (but still evaluates) states off the simplex.
EnergyResult energy(const PhaseState& state, const FemMatrices& fem, const ModelParams& params);

}  // namespace mpac
