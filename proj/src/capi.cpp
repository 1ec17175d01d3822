// capi.cpp -- C interface over the core library: opaque handles, status
// codes, thread-local error text.  No exceptions cross this boundary.

#include "mpac.h"

#include "core/bench.hpp"
#include "core/config.hpp"
#include "core/fem.hpp"
#include "core/io.hpp"
#include "core/mesh.hpp"
#include "core/model.hpp"
#include "core/pdas.hpp"
#include "core/saddle.hpp"
#include "core/spectrum.hpp"
#include "core/timeloop.hpp"
#include "core/types.hpp"

#include <algorithm>
#include <cstring>
#include <filesystem>
#include <memory>
#include <new>
#include <numeric>
#include <string>
#include <utility>
#include <vector>

struct mpac_config {
  mpac::GridConfig grid;
};

struct mpac_sim {
  mpac::RunConfig config;
  mpac::Mesh mesh;
  mpac::FemMatrices fem;
  mpac::ModelParams params;
  std::unique_ptr<mpac::SimulationDriver> driver;
};

namespace {

thread_local std::string t_last_error;

mpac_status to_status(mpac::ErrorCode code) {
  switch (code) {
    case mpac::ErrorCode::invalid_argument: return MPAC_ERR_INVALID_ARGUMENT;
    case mpac::ErrorCode::parse_error: return MPAC_ERR_PARSE;
    case mpac::ErrorCode::io_error: return MPAC_ERR_IO;
    case mpac::ErrorCode::solver_failure: return MPAC_ERR_SOLVER;
    case mpac::ErrorCode::step_failure: return MPAC_ERR_STEP;
    case mpac::ErrorCode::unsupported: return MPAC_ERR_UNSUPPORTED;
    case mpac::ErrorCode::internal: return MPAC_ERR_INTERNAL;
  }
  return MPAC_ERR_INTERNAL;
}

template <typename Fn>
mpac_status guarded(Fn&& fn) {
  try {
    fn();
    return MPAC_OK;
  } catch (const mpac::Error& e) {
    t_last_error = e.what();
    return to_status(e.code());
  } catch (const std::bad_alloc&) {
    t_last_error = "out of memory";
    return MPAC_ERR_INTERNAL;
  } catch (const std::exception& e) {
    t_last_error = e.what();
    return MPAC_ERR_INTERNAL;
  }
}

void require_arg(bool ok, const char* message) {
  mpac::require(ok, mpac::ErrorCode::invalid_argument, message);
}

mpac_run_summary summarize(const std::vector<mpac::SolveStats>& stats, bool reached,
                           double final_energy) {
  mpac_run_summary s{};
  s.steps = static_cast<int>(stats.size());
  s.reached_final_time = reached ? 1 : 0;
  s.final_energy = final_energy;
  long long iters = 0, solves = 0;
  for (const auto& step : stats) {
    s.final_time = step.time;
    s.max_gmres = std::max(s.max_gmres, step.max_gmres);
    s.total_retries += step.retries;
    for (int c : step.gmres_counts) {
      iters += c;
      ++solves;
    }
  }
  s.avg_gmres = solves > 0 ? static_cast<double>(iters) / static_cast<double>(solves) : 0.0;
  return s;
}

// Validated copy of the run part of a config handle.
mpac::RunConfig validated_base(const mpac_config* config) {
  require_arg(config != nullptr, "config handle is null");
  mpac::RunConfig rc = config->grid.base;
  mpac::validate_config(&rc);
  return rc;
}

}  // namespace

extern "C" {

const char* mpac_version(void) {
#ifdef MPAC_VERSION_STRING
  return MPAC_VERSION_STRING;
#else
  return "0.0.0";
#endif
}

const char* mpac_status_string(mpac_status status) {
  switch (status) {
    case MPAC_OK: return "ok";
    case MPAC_ERR_INVALID_ARGUMENT: return "invalid argument";
    case MPAC_ERR_PARSE: return "parse error";
    case MPAC_ERR_IO: return "i/o error";
    case MPAC_ERR_SOLVER: return "solver failure";
    case MPAC_ERR_STEP: return "time step failure";
    case MPAC_ERR_UNSUPPORTED: return "unsupported";
    case MPAC_ERR_INTERNAL: return "internal error";
  }
  return "unknown status";
}

const char* mpac_last_error(void) { return t_last_error.c_str(); }

mpac_status mpac_config_load(const char* path, mpac_config** out) {
  return guarded([&] {
    require_arg(path != nullptr && out != nullptr, "mpac_config_load: null argument");
    auto handle = std::make_unique<mpac_config>();
    handle->grid.base = mpac::load_config(path);
    *out = handle.release();
  });
}

mpac_status mpac_config_load_grid(const char* path, mpac_config** out) {
  return guarded([&] {
    require_arg(path != nullptr && out != nullptr, "mpac_config_load_grid: null argument");
    auto handle = std::make_unique<mpac_config>();
    handle->grid = mpac::load_grid_config(path);
    *out = handle.release();
  });
}

mpac_status mpac_config_parse(const char* text, mpac_config** out) {
  return guarded([&] {
    require_arg(text != nullptr && out != nullptr, "mpac_config_parse: null argument");
    auto handle = std::make_unique<mpac_config>();
    handle->grid.base = mpac::parse_config(text);
    *out = handle.release();
  });
}

mpac_status mpac_config_set(mpac_config* config, const char* key, const char* value) {
  return guarded([&] {
    require_arg(config != nullptr && key != nullptr && value != nullptr,
                "mpac_config_set: null argument");
    mpac::set_config_value(&config->grid.base, key, value);
  });
}

mpac_status mpac_config_get(const mpac_config* config, const char* key, char* buffer,
                            size_t buffer_size) {
  return guarded([&] {
    require_arg(config != nullptr && key != nullptr && buffer != nullptr,
                "mpac_config_get: null argument");
    const std::string value = mpac::get_config_value(config->grid.base, key);
    require_arg(buffer_size >= value.size() + 1,
                "mpac_config_get: buffer too small for the value");
    std::memcpy(buffer, value.c_str(), value.size() + 1);
  });
}

mpac_status mpac_config_save(const mpac_config* config, const char* path) {
  return guarded([&] {
    require_arg(config != nullptr && path != nullptr, "mpac_config_save: null argument");
    mpac::save_config(config->grid.base, path);
  });
}

void mpac_config_free(mpac_config* config) { delete config; }

mpac_status mpac_sim_create(const mpac_config* config, mpac_sim** out) {
  return guarded([&] {
    require_arg(out != nullptr, "mpac_sim_create: null argument");
    auto sim = std::make_unique<mpac_sim>();
    sim->config = validated_base(config);
    sim->mesh = mpac::build_uniform_mesh(sim->config.n, sim->config.dim);
    sim->fem = mpac::assemble_fem(sim->mesh);
    sim->params = mpac::make_model_params(sim->config, sim->mesh.h);
    mpac::PhaseState initial = mpac::make_initial_state(sim->config, sim->mesh, sim->params);
    sim->driver = std::make_unique<mpac::SimulationDriver>(
        sim->params, sim->mesh, sim->fem, std::move(initial),
        mpac::make_timeloop_options(sim->config));
    *out = sim.release();
  });
}

void mpac_sim_free(mpac_sim* sim) { delete sim; }

mpac_status mpac_sim_advance(mpac_sim* sim, int* done) {
  return guarded([&] {
    require_arg(sim != nullptr, "mpac_sim_advance: null handle");
    sim->driver->advance();
    if (done) *done = sim->driver->done() ? 1 : 0;
  });
}

mpac_status mpac_sim_run(mpac_sim* sim, mpac_run_summary* summary) {
  return guarded([&] {
    require_arg(sim != nullptr, "mpac_sim_run: null handle");
    while (!sim->driver->done()) sim->driver->advance();
    if (summary)
      *summary = summarize(sim->driver->stats(), sim->driver->reached_final_time(),
                           mpac::energy(sim->driver->state(), sim->fem, sim->params).value);
  });
}

double mpac_sim_time(const mpac_sim* sim) {
  return sim ? sim->driver->state().time : 0.0;
}

int mpac_sim_steps(const mpac_sim* sim) {
  return sim ? static_cast<int>(sim->driver->stats().size()) : 0;
}

int mpac_sim_num_nodes(const mpac_sim* sim) {
  return sim ? sim->mesh.num_nodes() : 0;
}

int mpac_sim_num_phases(const mpac_sim* sim) {
  return sim ? sim->params.num_phases : 0;
}

mpac_status mpac_sim_phase_values(const mpac_sim* sim, int phase, double* out,
                                  size_t out_size) {
  return guarded([&] {
    require_arg(sim != nullptr && out != nullptr, "mpac_sim_phase_values: null argument");
    require_arg(phase >= 1 && phase <= sim->params.num_phases,
                "mpac_sim_phase_values: phase index out of range");
    const auto& u = sim->driver->state().u;
    require_arg(out_size >= static_cast<size_t>(u.rows()),
                "mpac_sim_phase_values: output buffer too small");
    for (int j = 0; j < u.rows(); ++j) out[j] = u(j, phase - 1);
  });
}

mpac_status mpac_sim_energy(const mpac_sim* sim, double* out) {
  return guarded([&] {
    require_arg(sim != nullptr && out != nullptr, "mpac_sim_energy: null argument");
    *out = mpac::energy(sim->driver->state(), sim->fem, sim->params).value;
  });
}

mpac_status mpac_sim_mass(const mpac_sim* sim, int phase, double* out) {
  return guarded([&] {
    require_arg(sim != nullptr && out != nullptr, "mpac_sim_mass: null argument");
    require_arg(phase >= 1 && phase <= sim->params.num_phases,
                "mpac_sim_mass: phase index out of range");
    *out = sim->fem.mass.dot(sim->driver->state().u.col(phase - 1));
  });
}

mpac_status mpac_sim_last_step_stats(const mpac_sim* sim, mpac_step_stats* out) {
  return guarded([&] {
    require_arg(sim != nullptr && out != nullptr, "mpac_sim_last_step_stats: null argument");
    const auto& stats = sim->driver->stats();
    require_arg(!stats.empty(), "mpac_sim_last_step_stats: no step has been taken yet");
    const mpac::SolveStats& s = stats.back();
    *out = {s.step_index, s.time,  s.tau,    s.pdas_iters, s.max_gmres,
            s.avg_gmres,  s.active_fraction, s.energy,     s.retries};
  });
}

mpac_status mpac_sim_write_stats_csv(const mpac_sim* sim, const char* path) {
  return guarded([&] {
    require_arg(sim != nullptr && path != nullptr, "mpac_sim_write_stats_csv: null argument");
    mpac::write_stats_csv(sim->driver->stats(), path);
  });
}

mpac_status mpac_sim_write_vtk(const mpac_sim* sim, const char* path) {
  return guarded([&] {
    require_arg(sim != nullptr && path != nullptr, "mpac_sim_write_vtk: null argument");
    mpac::write_vtk_snapshot(sim->driver->state(), sim->mesh, path);
  });
}

mpac_status mpac_run(const mpac_config* config, mpac_run_summary* summary) {
  return guarded([&] {
    const mpac::RunConfig rc = validated_base(config);
    const mpac::Mesh mesh = mpac::build_uniform_mesh(rc.n, rc.dim);
    const mpac::FemMatrices fem = mpac::assemble_fem(mesh);
    const mpac::ModelParams params = mpac::make_model_params(rc, mesh.h);
    mpac::PhaseState initial = mpac::make_initial_state(rc, mesh, params);
    mpac::TimeloopOptions options = mpac::make_timeloop_options(rc);

    const std::filesystem::path outdir(rc.output_dir);
    options.snapshot_hook = [&](const mpac::PhaseState& state, int index) {
      mpac::write_vtk_snapshot(
          state, mesh, (outdir / ("snapshot_" + std::to_string(index) + ".vtk")).string());
    };

    const mpac::SimulationResult result =
        mpac::run_simulation(params, mesh, fem, std::move(initial), options);
    if (!result.stats.empty())
      mpac::write_stats_csv(result.stats, (outdir / "stats.csv").string());
    mpac::write_vtk_snapshot(result.state, mesh, (outdir / "final.vtk").string());
    if (summary)
      *summary = summarize(result.stats, result.reached_final_time,
                           mpac::energy(result.state, fem, params).value);
  });
}

mpac_status mpac_bench(const mpac_config* config, const char* csv_path,
                       const char* text_path) {
  return guarded([&] {
    require_arg(config != nullptr, "mpac_bench: config handle is null");
    mpac::GridConfig grid = config->grid;
    mpac::validate_config(&grid.base);
    const mpac::BenchTable table = mpac::run_bench(grid);
    if (csv_path) mpac::write_text_file(csv_path, mpac::bench_csv_string(table));
    if (text_path) mpac::write_text_file(text_path, mpac::bench_text_table(table));
  });
}

mpac_status mpac_spectrum(const mpac_config* config, const char* csv_path,
                          mpac_spectrum_summary* summary) {
  return guarded([&] {
    const mpac::RunConfig rc = validated_base(config);
    require_arg(rc.num_phases == 2, "mpac_spectrum: config must have N = 2");
    require_arg(rc.mass_constraint, "mpac_spectrum: mass constraint must be on");

    const mpac::Mesh mesh = mpac::build_uniform_mesh(rc.n, rc.dim);
    const mpac::FemMatrices fem = mpac::assemble_fem(mesh);
    const mpac::ModelParams params = mpac::make_model_params(rc, mesh.h);

    // All-interface reference state: both phases free at every node.
    mpac::PhaseState state;
    state.u = mpac::Mat::Constant(mesh.num_nodes(), 2, 0.5);
    state.u_prev = state.u;
    state.mu = mpac::Mat::Zero(mesh.num_nodes(), 2);
    state.mass_mult = mpac::Vec::Zero(2);
    state.sat_mult = mpac::Vec::Zero(mesh.num_nodes());
    const double tau0 = rc.tau0_auto ? rc.epsilon * rc.epsilon : rc.tau0;
    state.tau = std::clamp(tau0, rc.tau_min, rc.tau_max);

    mpac::Vec targets(2);
    for (int i = 0; i < 2; ++i) targets(i) = fem.mass.dot(state.u.col(i));

    const mpac::ActiveSets sets = mpac::compute_active_sets(state, params);
    const mpac::SaddleSystem sys =
        mpac::build_saddle_system(sets, state, fem, params, true, targets);
    const mpac::SpectrumResult result = mpac::two_phase_spectrum(sys);

    if (csv_path) mpac::write_spectrum_csv(result.eigenvalues, result.a, csv_path);
    if (summary) {
      summary->a = result.a;
      summary->max_distance = result.max_distance;
      summary->num_eigenvalues = static_cast<int>(result.eigenvalues.size());
    }
  });
}

mpac_status mpac_export_system(const mpac_config* config, int step, const char* dir,
                               int* num_sweeps) {
  return guarded([&] {
    require_arg(dir != nullptr, "mpac_export_system: null directory");
    require_arg(step >= 1, "mpac_export_system: step must be >= 1");
    const mpac::RunConfig rc = validated_base(config);
    const mpac::Mesh mesh = mpac::build_uniform_mesh(rc.n, rc.dim);
    const mpac::FemMatrices fem = mpac::assemble_fem(mesh);
    const mpac::ModelParams params = mpac::make_model_params(rc, mesh.h);
    mpac::PhaseState initial = mpac::make_initial_state(rc, mesh, params);
    mpac::TimeloopOptions options = mpac::make_timeloop_options(rc);
    options.snapshot_times.clear();

    // Capture the systems of the requested step only.  A redo restarts its
    // sweeps at index 0, so clearing there keeps the accepted attempt.
    bool capture = false;
    std::vector<std::pair<mpac::SpMat, mpac::Vec>> systems;
    options.pdas.system_hook = [&](int sweep, const mpac::SaddleSystem& sys) {
      if (!capture) return;
      if (sweep == 0) systems.clear();
      systems.emplace_back(sys.assemble_sparse(), sys.rhs);
    };

    mpac::SimulationDriver driver(params, mesh, fem, std::move(initial), options);
    for (int k = 1; k <= step; ++k) {
      require_arg(!driver.done(), "mpac_export_system: step is beyond the simulated horizon");
      capture = (k == step);
      driver.advance();
    }

    const std::filesystem::path outdir(dir);
    for (size_t j = 0; j < systems.size(); ++j) {
      const std::string tag = "_sweep" + std::to_string(j + 1) + ".mtx";
      mpac::write_matrix_market(systems[j].first, (outdir / ("K" + tag)).string());
      mpac::write_matrix_market_vector(systems[j].second, (outdir / ("rhs" + tag)).string());
    }
    mpac::write_matrix_market(fem.stiffness, (outdir / "stiffness.mtx").string());
    mpac::write_matrix_market_vector(fem.mass, (outdir / "mass.mtx").string());
    if (num_sweeps) *num_sweeps = static_cast<int>(systems.size());
  });
}

}  // extern "C"
