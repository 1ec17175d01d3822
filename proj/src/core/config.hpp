// core/config.hpp -- run configuration: flat key=value files and validation.

#pragma once

#include "mesh.hpp"
#include "model.hpp"
#include "precond.hpp"
#include "timeloop.hpp"
#include "types.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace mpac {

// One simulation's worth of parameters.  Defaults are materialized at load
// time (A becomes an explicit identity, Q an explicit uniform vector), so a
// loaded config serializes with every key spelled out and round-trips
// byte-identically.
struct RunConfig {
  int dim = 2;
  int n = 0;             // required
  int num_phases = 0;    // key "N", required
  double epsilon = 0.0;  // required
  bool tau0_auto = true;
  double tau0 = 0.0;
  double final_time = 0.5;  // key "T"
  std::vector<double> coupling;  // key "A", row-major N x N; empty until validated
  std::vector<double> target;    // key "Q", length N; empty until validated
  bool c_auto = true;   // key "c_mode": "auto" = 2/h^2
  double c_value = 0.0;
  std::string ic = "wellmixed";
  double noise = 0.05;
  std::uint64_t seed = 42;
  std::string preconditioner = "p3";
  std::string kblock = "direct";
  double gmres_tol = 1e-10;
  int gmres_max_iter = 200;
  int max_pdas = 50;
  bool mass_constraint = true;
  double tau_min = 1e-10;
  double tau_max = 1.0;
  int max_steps = 0;  // 0 = run to final_time
  std::string output_dir = "out";
  std::vector<double> snapshot_times;

  bool operator==(const RunConfig&) const = default;
};

// Benchmark sweep: a base config plus grid_* axis lists (empty axis = the
// base value).  Only the grid loader accepts grid_* keys.
struct GridConfig {
  RunConfig base;
  std::vector<int> grid_n;
  std::vector<double> grid_epsilon;
  std::vector<int> grid_phases;  // key "grid_N"
  std::vector<std::string> grid_preconditioner;

  bool operator==(const GridConfig&) const = default;
};

RunConfig parse_config(const std::string& text);
RunConfig load_config(const std::string& path);
GridConfig parse_grid_config(const std::string& text);
GridConfig load_grid_config(const std::string& path);

std::string serialize_config(const RunConfig& config);
void save_config(const RunConfig& config, const std::string& path);

// Re-validates and fills materializable defaults; throws with the offending
// key name on constraint violations.  Called by the loaders.
void validate_config(RunConfig* config);

// Single-key access for the C API / CLI --set overrides.  set applies the
// same per-key parsing as the loader; full validation is deferred to use.
void set_config_value(RunConfig* config, const std::string& key, const std::string& value);
std::string get_config_value(const RunConfig& config, const std::string& key);

// Bridges into the solver modules.  mesh_h is the mesh size (for the default
// active-set threshold 2/h^2).
PrecondKind parse_precond_kind(const std::string& name);
KblockMode parse_kblock_mode(const std::string& name);
ModelParams make_model_params(const RunConfig& config, double mesh_h);
PhaseState make_initial_state(const RunConfig& config, const Mesh& mesh,
                              const ModelParams& params);
TimeloopOptions make_timeloop_options(const RunConfig& config);

}  // namespace mpac
