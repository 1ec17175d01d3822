// core/timeloop.cpp -- adaptive time stepping driver.

#include "timeloop.hpp"

#include <algorithm>
#include <numeric>
#include <utility>

namespace mpac {

namespace {

constexpr double kTimeSlack = 1e-14;  // treat t >= T - slack as finished

}  // namespace

AdaptResult adapt_tau(int pdas_iters, double tau, double tau_min, double tau_max) {
  require(tau > 0.0, ErrorCode::invalid_argument, "adapt_tau: tau must be positive");
  require(tau_min > 0.0 && tau_min <= tau_max, ErrorCode::invalid_argument,
          "adapt_tau: need 0 < tau_min <= tau_max");
  if (pdas_iters > 10) {
    const double halved = 0.5 * tau;
    require(halved >= tau_min, ErrorCode::step_failure,
            "adapt_tau: step size fell below tau_min while redoing a slow step");
    return {halved, true};
  }
  if (pdas_iters >= 5) return {std::min(tau, tau_max), false};
  return {std::min(1.1 * tau, tau_max), false};
}

SimulationDriver::SimulationDriver(const ModelParams& params, const Mesh& mesh,
                                   const FemMatrices& fem, PhaseState initial,
                                   TimeloopOptions options)
    : params_(&params), mesh_(&mesh), fem_(&fem), options_(std::move(options)),
      state_(std::move(initial)) {
  // Structural checks only; the full parameter constraints (spectral condition
  // on the coupling matrix etc.) are the config loader's responsibility, and
  // programmatic callers may legitimately run edge cases such as a zero
  // coupling matrix.
  require(params.num_phases >= 2, ErrorCode::invalid_argument,
          "SimulationDriver: need at least two phases");
  require(params.epsilon > 0.0, ErrorCode::invalid_argument,
          "SimulationDriver: epsilon must be positive");
  require(params.pdas_threshold > 0.0, ErrorCode::invalid_argument,
          "SimulationDriver: active-set threshold must be positive");
  require(params.coupling.rows() == params.num_phases &&
              params.coupling.cols() == params.num_phases,
          ErrorCode::invalid_argument, "SimulationDriver: coupling matrix must be N x N");
  require(options_.final_time > 0.0, ErrorCode::invalid_argument,
          "SimulationDriver: final time must be positive");
  require(options_.tau_min > 0.0 && options_.tau_min <= options_.tau_max,
          ErrorCode::invalid_argument, "SimulationDriver: need 0 < tau_min <= tau_max");
  require(state_.num_nodes() == fem.num_nodes() && state_.num_nodes() == mesh.num_nodes(),
          ErrorCode::invalid_argument, "SimulationDriver: state/mesh/fem size mismatch");
  require(state_.num_phases() == params.num_phases, ErrorCode::invalid_argument,
          "SimulationDriver: state/params phase count mismatch");

  const double tau0 =
      options_.tau0 > 0.0 ? options_.tau0 : params.epsilon * params.epsilon;
  tau_ = std::clamp(tau0, options_.tau_min, options_.tau_max);

  // The conserved quantities are the discrete masses the run starts with.
  mass_targets_.resize(params.num_phases);
  for (int i = 0; i < params.num_phases; ++i) mass_targets_(i) = fem.mass.dot(state_.u.col(i));

  std::sort(options_.snapshot_times.begin(), options_.snapshot_times.end());
  // Snapshot times at or before the start refer to the initial state.
  while (next_snapshot_ < options_.snapshot_times.size() &&
         options_.snapshot_times[next_snapshot_] <= state_.time + kTimeSlack) {
    if (options_.snapshot_hook) options_.snapshot_hook(state_, static_cast<int>(next_snapshot_));
    ++next_snapshot_;
  }
}

bool SimulationDriver::done() const {
  if (options_.max_steps > 0 && accepted_ >= options_.max_steps) return true;
  return state_.time >= options_.final_time - kTimeSlack;
}

bool SimulationDriver::reached_final_time() const {
  return state_.time >= options_.final_time - kTimeSlack;
}

const SolveStats& SimulationDriver::advance() {
  require(!done(), ErrorCode::invalid_argument, "SimulationDriver: simulation already finished");

  while (true) {
    PhaseState attempt = state_;
    attempt.u_prev = state_.u;
    attempt.tau = tau_;

    bool solver_failed = false;
    PdasResult pdas;
    try {
      pdas = pdas_solve_timestep(&attempt, *fem_, *params_, mass_targets_, options_.pdas);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::solver_failure) throw;
      solver_failed = true;
    }

    // A failed PDAS solve falls under the "more than 10 sweeps" rule.
    const AdaptResult adapt = adapt_tau(solver_failed ? 11 : pdas.sweeps, tau_,
                                        options_.tau_min, options_.tau_max);
    if (adapt.redo) {
      tau_ = adapt.tau_next;
      ++retries_;
      continue;
    }

    attempt.time = state_.time + tau_;

    SolveStats stats;
    stats.step_index = ++accepted_;
    stats.time = attempt.time;
    stats.tau = tau_;
    stats.pdas_iters = pdas.sweeps;
    stats.gmres_counts.reserve(pdas.sweep_stats.size());
    for (const auto& sweep : pdas.sweep_stats) stats.gmres_counts.push_back(sweep.gmres_iterations);
    stats.max_gmres = *std::max_element(stats.gmres_counts.begin(), stats.gmres_counts.end());
    stats.avg_gmres = std::accumulate(stats.gmres_counts.begin(), stats.gmres_counts.end(), 0.0) /
                      static_cast<double>(stats.gmres_counts.size());
    stats.active_fraction = pdas.sets.active_fraction();
    stats.energy = energy(attempt, *fem_, *params_).value;
    stats.retries = retries_;

    const KktReport kkt = check_kkt(attempt, *fem_, mass_targets_);
    stats.sat_error = kkt.max_saturation_error;
    stats.min_u = kkt.min_u;
    stats.min_mu = kkt.min_mu;
    stats.complementarity = kkt.complementarity;
    stats.mass_rel_drift = kkt.max_mass_rel_drift;

    state_ = std::move(attempt);
    tau_ = adapt.tau_next;
    retries_ = 0;
    stats_.push_back(std::move(stats));

    while (next_snapshot_ < options_.snapshot_times.size() &&
           options_.snapshot_times[next_snapshot_] <= state_.time + kTimeSlack) {
      if (options_.snapshot_hook)
        options_.snapshot_hook(state_, static_cast<int>(next_snapshot_));
      ++next_snapshot_;
    }
    if (options_.step_hook) options_.step_hook(stats_.back());
    return stats_.back();
  }
}

SimulationResult run_simulation(const ModelParams& params, const Mesh& mesh,
                                const FemMatrices& fem, PhaseState initial,
                                const TimeloopOptions& options) {
  SimulationDriver driver(params, mesh, fem, std::move(initial), options);
  while (!driver.done()) driver.advance();
  return {driver.state(), driver.stats(), driver.reached_final_time()};
}

}  // namespace mpac
