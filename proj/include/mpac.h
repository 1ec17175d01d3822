/* mpac.h -- C interface to the multiphase Allen-Cahn solver library.
 *
 * All entry points return an mpac_status; on failure mpac_last_error() gives
 * a human-readable message for the calling thread.  Objects are created and
 * released through the matching _free call; handles are not thread-safe, but
 * distinct handles may be used from distinct threads concurrently.
 */

#ifndef MPAC_H
#define MPAC_H

#include <stddef.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef enum mpac_status {
  MPAC_OK = 0,
  MPAC_ERR_INVALID_ARGUMENT = 1,
  MPAC_ERR_PARSE = 2,
  MPAC_ERR_IO = 3,
  MPAC_ERR_SOLVER = 4,   /* inner solver or PDAS did not converge */
  MPAC_ERR_STEP = 5,     /* time step underflow: tau fell below tau_min */
  MPAC_ERR_UNSUPPORTED = 6,
  MPAC_ERR_INTERNAL = 7
} mpac_status;

/* Opaque handles. */
typedef struct mpac_config mpac_config;
typedef struct mpac_sim mpac_sim;

/* Per-step statistics of the most recent accepted time step. */
typedef struct mpac_step_stats {
  int step_index;         /* 1-based accepted step counter */
  double time;            /* simulation time after the step */
  double tau;             /* step size used */
  int pdas_iters;         /* active-set sweeps */
  int max_gmres;          /* max GMRES iterations over the sweeps */
  double avg_gmres;       /* mean GMRES iterations over the sweeps */
  double active_fraction; /* |union of active sets| / (N * nodes) */
  double energy;          /* interfacial energy after the step */
  int retries;            /* tau halvings before the step was accepted */
} mpac_step_stats;

/* Whole-run summary produced by mpac_run / mpac_sim_run. */
typedef struct mpac_run_summary {
  int steps;
  double final_time;
  int max_gmres;          /* max over every saddle solve in the run */
  double avg_gmres;       /* mean over every saddle solve in the run */
  int total_retries;
  double final_energy;
  int reached_final_time; /* 0 when the run stopped at a step limit */
} mpac_run_summary;

/* Two-phase preconditioned-operator spectrum report. */
typedef struct mpac_spectrum_summary {
  double a;               /* the nonunit eigenvalue */
  double max_distance;    /* max over eigenvalues of min(|z-1|, |z-a|) */
  int num_eigenvalues;
} mpac_spectrum_summary;

/* ---- library ---------------------------------------------------------- */

const char* mpac_version(void);
const char* mpac_status_string(mpac_status status);
/* Message of the last failing call on this thread; empty string if none. */
const char* mpac_last_error(void);

/* ---- configuration ---------------------------------------------------- */

/* Loads a flat key=value run config.  Rejects grid_* keys. */
mpac_status mpac_config_load(const char* path, mpac_config** out);
/* Loads a benchmark grid config: a run config plus optional grid_* axes. */
mpac_status mpac_config_load_grid(const char* path, mpac_config** out);
/* Parses run-config text (same format as mpac_config_load). */
mpac_status mpac_config_parse(const char* text, mpac_config** out);
/* Sets one run-config key, e.g. ("epsilon", "0.02").  Re-validates lazily:
 * errors surface when the config is used. */
mpac_status mpac_config_set(mpac_config* config, const char* key, const char* value);
/* Reads one run-config key as text into buffer (NUL-terminated). */
mpac_status mpac_config_get(const mpac_config* config, const char* key, char* buffer,
                            size_t buffer_size);
/* Writes the validated run config back out in canonical key order. */
mpac_status mpac_config_save(const mpac_config* config, const char* path);
void mpac_config_free(mpac_config* config);

/* ---- simulation handle ------------------------------------------------ */

/* Builds mesh, FEM matrices, and the seeded initial state. */
mpac_status mpac_sim_create(const mpac_config* config, mpac_sim** out);
void mpac_sim_free(mpac_sim* sim);

/* Advances one accepted time step; *done becomes nonzero when the configured
 * horizon (final_time or max_steps) has been reached. */
mpac_status mpac_sim_advance(mpac_sim* sim, int* done);
/* Runs until done; optionally fills a summary (may be NULL). */
mpac_status mpac_sim_run(mpac_sim* sim, mpac_run_summary* summary);

double mpac_sim_time(const mpac_sim* sim);
int mpac_sim_steps(const mpac_sim* sim);
int mpac_sim_num_nodes(const mpac_sim* sim);
int mpac_sim_num_phases(const mpac_sim* sim);
/* Copies the nodal values of one phase (1-based) into out[0..num_nodes). */
mpac_status mpac_sim_phase_values(const mpac_sim* sim, int phase, double* out,
                                  size_t out_size);
mpac_status mpac_sim_energy(const mpac_sim* sim, double* out);
/* Lumped mass of one phase (1-based). */
mpac_status mpac_sim_mass(const mpac_sim* sim, int phase, double* out);
/* Statistics of the most recent accepted step; fails before the first step. */
mpac_status mpac_sim_last_step_stats(const mpac_sim* sim, mpac_step_stats* out);
mpac_status mpac_sim_write_stats_csv(const mpac_sim* sim, const char* path);
mpac_status mpac_sim_write_vtk(const mpac_sim* sim, const char* path);

/* ---- one-call drivers (the CLI surface) ------------------------------- */

/* Full run with file output: <output_dir>/stats.csv, <output_dir>/final.vtk,
 * and <output_dir>/snapshot_<k>.vtk at the configured snapshot times.
 * summary may be NULL. */
mpac_status mpac_run(const mpac_config* config, mpac_run_summary* summary);

/* Runs the benchmark grid; writes CSV and an aligned text table.  Either
 * path may be NULL to skip that output.  Per-cell failures are recorded in
 * the table; the call itself fails only on setup or write errors. */
mpac_status mpac_bench(const mpac_config* config, const char* csv_path,
                       const char* text_path);

/* Eigenvalues of the preconditioned two-phase operator on the all-interface
 * system at the configured (n, epsilon, tau0).  Requires N = 2.  csv_path
 * may be NULL; summary may be NULL. */
mpac_status mpac_spectrum(const mpac_config* config, const char* csv_path,
                          mpac_spectrum_summary* summary);

/* Runs to time step `step` (1-based) and dumps every PDAS sweep's saddle
 * matrix and right-hand side of that step as Matrix Market files
 * (K_sweep<j>.mtx, rhs_sweep<j>.mtx) plus the mesh stiffness and lumped
 * mass (stiffness.mtx, mass.mtx) into dir.  num_sweeps may be NULL. */
mpac_status mpac_export_system(const mpac_config* config, int step, const char* dir,
                               int* num_sweeps);

#ifdef __cplusplus
}
#endif

#endif /* MPAC_H */
