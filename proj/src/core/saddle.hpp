// core/saddle.hpp -- active-set bookkeeping and the reduced saddle system.
//
// One implicit time step restricted to the current active-set guess: phase i
// is solved only on its interface set D_i (nodes where at least two phases are
// free); everything else is pinned to 0 or 1.  The resulting symmetric system
//
//       [ K   B1'  B2' ] [ u      ]   [ b_u  ]
//       [ B1  0    0   ] [ lambda ] = [ b_m  ]
//       [ B2  0    0   ] [ Lambda ]   [ b_s  ]
//
// couples the per-phase SPD blocks K_i = (eps^2/tau) M + eps^2 L (restricted
// to D_i x D_i) with the mass constraints (rows of B1, one per phase pair
// (i, N)) and the nodewise saturation constraints (rows of B2, one per node
// of D = union of the D_i).

#pragma once

#include "fem.hpp"
#include "model.hpp"
#include "types.hpp"

#include <vector>

namespace mpac {

struct ActiveSets {
  using Flags = Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic>;

  Flags active;                              // (node, phase): u pinned to 0
  std::vector<std::vector<int>> interface_;  // D_i, ascending node ids
  std::vector<int> interface_union;          // D, ascending
  std::vector<int> pure_phase;               // per node: unique free phase, or -1 on D
  int omega = 0;                             // sum_i |D_i|
  int nodes_without_free_phase = 0;          // active in every phase (infeasible)

  int num_nodes() const { return static_cast<int>(active.rows()); }
  int num_phases() const { return static_cast<int>(active.cols()); }
  bool is_active(int node, int phase) const { return active(node, phase); }
  bool is_interface(int node, int phase) const {
    return !active(node, phase) && pure_phase[node] == -1;
  }
  // Fraction |union of A_i| / (N * |J|) reported in the step statistics.
  double active_fraction() const;
  bool same_as(const ActiveSets& other) const { return (active == other.active).all(); }
};

// Shared implementation of PDAS steps 0 and 5: the strict sign test
// A_i = { j : c*(u_i)_j - (mu_i)_j < 0 } plus all derived index sets.
ActiveSets compute_active_sets(const PhaseState& state, const ModelParams& params);

// PDAS step 1: u = 0 on A_i, u = 1 on pure nodes of phase i, mu = 0 on the
// whole inactive set.  Interface values are left untouched.
void fix_known_values(const ActiveSets& sets, PhaseState* state);

struct SaddleSystem {
  int num_phases = 0;
  bool mass_constrained = true;
  bool trivial = false;  // empty D: nothing to solve this sweep

  std::vector<std::vector<int>> phase_nodes;  // D_i (global node ids)
  std::vector<int> union_nodes;               // D
  std::vector<int> phase_offset;              // column offset per phase block, size N+1
  std::vector<std::vector<int>> union_pos;    // row in B2 of each D_i node
  std::vector<SpMat> kblocks;                 // K_i restricted to D_i x D_i
  std::vector<Vec> restricted_mass;           // m_i = lumped masses on D_i
  Vec union_mass;                             // lumped masses on D
  Vec rhs;

  int omega() const { return phase_offset.empty() ? 0 : phase_offset.back(); }
  int num_lambda() const { return mass_constrained ? num_phases - 1 : 0; }
  int num_union() const { return static_cast<int>(union_nodes.size()); }
  int total_dim() const { return omega() + num_lambda() + num_union(); }

  // Matrix actions used by GMRES and the preconditioners.
  Vec apply(const Vec& x) const;          // full K * x
  Vec apply_constraints(const Vec& xu) const;   // [B1; B2] * u-part
  Vec apply_constraints_t(const Vec& xc) const; // [B1; B2]' * constraint-part
  // Explicit assemblies for exports, diagnostics, and desk-scale tests.
  SpMat assemble_sparse() const;
  Mat assemble_dense() const;
};

// PDAS step 2 assembly.  `state` must already have fixed values written
// (fix_known_values); couplings to fixed nodes are moved to the right-hand
// side.  `mass_targets` are the conserved per-phase masses (ignored when
// mass_constrained is false).  Nodes active in every phase are rejected:
// they cannot satisfy the saturation constraint.
SaddleSystem build_saddle_system(const ActiveSets& sets, const PhaseState& state,
                                 const FemMatrices& fem, const ModelParams& params,
                                 bool mass_constrained, const Vec& mass_targets);

// Writes the solved unknowns back: u on the interface blocks, lambda (with
// the eliminated last entry reconstructed as -sum), Lambda on D.
void scatter_solution(const SaddleSystem& sys, const Vec& x, PhaseState* state);

}  // namespace mpac
