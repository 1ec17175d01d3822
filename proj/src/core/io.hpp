// core/io.hpp -- file output: stats CSV, VTK snapshots, Matrix Market dumps.

#pragma once

#include "mesh.hpp"
#include "model.hpp"
#include "timeloop.hpp"
#include "types.hpp"

#include <complex>
#include <string>
#include <vector>

namespace mpac {

// %.17g, enough digits to round-trip any double exactly.
std::string format_double(double value);

// Per-step statistics with a `# max_gmres_overall=<a> avg_gmres_overall=<b>`
// footer; <b> averages over every GMRES solve of the run.
std::string stats_csv_string(const std::vector<SolveStats>& stats);
void write_stats_csv(const std::vector<SolveStats>& stats, const std::string& path);

// Legacy ASCII VTK unstructured grid with one scalar field per phase
// (phase_1..phase_N), the saturation multiplier (Lambda), and the bound
// multipliers (mu_1..mu_N).
void write_vtk_snapshot(const PhaseState& state, const Mesh& mesh, const std::string& path);

// Matrix Market exchange format (coordinate for sparse, array for vectors).
void write_matrix_market(const SpMat& matrix, const std::string& path);
void write_matrix_market_vector(const Vec& vector, const std::string& path);
SpMat read_matrix_market(const std::string& path);
Vec read_matrix_market_vector(const std::string& path);

// Eigenvalue report of the two-phase spectrum diagnostic.
void write_spectrum_csv(const std::vector<std::complex<double>>& eigenvalues, double a,
                        const std::string& path);

// Creates the parent directory of `path` (if any) and writes text atomically
// enough for our purposes (truncate + write + flush, error checked).
void write_text_file(const std::string& path, const std::string& content);

}  // namespace mpac
