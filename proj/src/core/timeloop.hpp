// core/timeloop.hpp -- adaptive time stepping driver.
//
// Step-size policy, per-step statistics, and the simulation loop.  A step is
// attempted on a copy of the state; slow or failed PDAS solves halve tau and
// retry, so an accepted state is never polluted by a discarded attempt.

#pragma once

#include "fem.hpp"
#include "mesh.hpp"
#include "model.hpp"
#include "pdas.hpp"
#include "types.hpp"

#include <functional>
#include <vector>

namespace mpac {

struct SolveStats {
  int step_index = 0;   // 1-based accepted step counter
  double time = 0.0;    // time after the step
  double tau = 0.0;     // step size actually used
  int pdas_iters = 0;
  std::vector<int> gmres_counts;  // one entry per PDAS sweep
  int max_gmres = 0;
  double avg_gmres = 0.0;
  double active_fraction = 0.0;
  double energy = 0.0;
  int retries = 0;      // tau halvings before this step was accepted

  // Monitored KKT diagnostics (not part of the CSV schema).
  double sat_error = 0.0;
  double min_u = 0.0;
  double min_mu = 0.0;
  double complementarity = 0.0;
  double mass_rel_drift = 0.0;
};

struct AdaptResult {
  double tau_next = 0.0;
  bool redo = false;
};

// Step-size rule: fewer than 5 PDAS sweeps grows tau by 1.1 (capped at
// tau_max), 5..10 keeps it, more than 10 halves it and redoes the step.
// Throws step_failure when a redo would push tau below tau_min.
AdaptResult adapt_tau(int pdas_iters, double tau, double tau_min = 1e-10, double tau_max = 1.0);

struct TimeloopOptions {
  double final_time = 0.5;
  double tau0 = -1.0;  // <= 0: start from epsilon^2
  double tau_min = 1e-10;
  double tau_max = 1.0;
  int max_steps = 0;   // 0: step until final_time
  PdasOptions pdas;
  std::vector<double> snapshot_times;  // emitted when the time marches past
  std::function<void(const PhaseState&, int)> snapshot_hook;  // (state, snapshot index)
  std::function<void(const SolveStats&)> step_hook;
};

// Owns the evolving state; borrows params/mesh/fem (caller keeps them alive).
class SimulationDriver {
public:
  SimulationDriver(const ModelParams& params, const Mesh& mesh, const FemMatrices& fem,
                   PhaseState initial, TimeloopOptions options);

  bool done() const;
  const SolveStats& advance();  // one accepted step (internal redo loop)

  const PhaseState& state() const { return state_; }
  const std::vector<SolveStats>& stats() const { return stats_; }
  const Vec& mass_targets() const { return mass_targets_; }
  const ModelParams& params() const { return *params_; }
  bool reached_final_time() const;

private:
  const ModelParams* params_;
  const Mesh* mesh_;
  const FemMatrices* fem_;
  TimeloopOptions options_;
  PhaseState state_;
  Vec mass_targets_;
  std::vector<SolveStats> stats_;
  double tau_ = 0.0;
  int accepted_ = 0;
  int retries_ = 0;
  size_t next_snapshot_ = 0;
};

struct SimulationResult {
  PhaseState state;
  std::vector<SolveStats> stats;
  bool reached_final_time = false;
};

SimulationResult run_simulation(const ModelParams& params, const Mesh& mesh,
                                const FemMatrices& fem, PhaseState initial,
                                const TimeloopOptions& options);

}  // namespace mpac
