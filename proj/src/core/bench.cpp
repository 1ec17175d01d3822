// core/bench.cpp -- benchmark grid runner and table formatting.

#include "bench.hpp"

#include "fem.hpp"
#include "io.hpp"
#include "timeloop.hpp"

#include <algorithm>
#include <cstdio>
#include <sstream>

namespace mpac {

namespace {

BenchCell run_cell(const GridConfig& grid, int n, double epsilon, int num_phases,
                   const std::string& preconditioner) {
  BenchCell cell;
  cell.n = n;
  cell.epsilon = epsilon;
  cell.num_phases = num_phases;
  cell.preconditioner = preconditioner;
  cell.kblock = grid.base.kblock;
  try {
    RunConfig config = grid.base;
    config.n = n;
    config.epsilon = epsilon;
    config.preconditioner = preconditioner;
    if (num_phases != grid.base.num_phases) {
      // A and Q were sized for the base phase count; fall back to defaults.
      config.num_phases = num_phases;
      config.coupling.clear();
      config.target.clear();
    }
    config.snapshot_times.clear();
    validate_config(&config);

    const Mesh mesh = build_uniform_mesh(config.n, config.dim);
    const FemMatrices fem = assemble_fem(mesh);
    const ModelParams params = make_model_params(config, mesh.h);
    PhaseState state = make_initial_state(config, mesh, params);
    const SimulationResult result =
        run_simulation(params, mesh, fem, std::move(state), make_timeloop_options(config));

    cell.steps = static_cast<int>(result.stats.size());
    long long iters = 0, solves = 0;
    for (const auto& s : result.stats) {
      cell.max_gmres = std::max(cell.max_gmres, s.max_gmres);
      cell.total_retries += s.retries;
      for (int c : s.gmres_counts) {
        iters += c;
        ++solves;
      }
    }
    cell.avg_gmres =
        solves > 0 ? static_cast<double>(iters) / static_cast<double>(solves) : 0.0;
    cell.ok = true;
  } catch (const std::exception& e) {
    cell.ok = false;
    cell.error = e.what();
  }
  return cell;
}

template <typename T>
std::vector<T> axis_or(const std::vector<T>& axis, T base) {
  return axis.empty() ? std::vector<T>{base} : axis;
}

std::string iters_column(const BenchCell& cell) {
  if (!cell.ok) return "failed";
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%d/%.3g", cell.max_gmres, cell.avg_gmres);
  return buf;
}

}  // namespace

BenchTable run_bench(const GridConfig& grid,
                     const std::function<void(const BenchCell&)>& progress) {
  BenchTable table;
  for (int n : axis_or(grid.grid_n, grid.base.n))
    for (double epsilon : axis_or(grid.grid_epsilon, grid.base.epsilon))
      for (int num_phases : axis_or(grid.grid_phases, grid.base.num_phases))
        for (const auto& precond :
             axis_or(grid.grid_preconditioner, grid.base.preconditioner)) {
          table.cells.push_back(run_cell(grid, n, epsilon, num_phases, precond));
          if (progress) progress(table.cells.back());
        }
  return table;
}

std::string bench_csv_string(const BenchTable& table) {
  std::string out =
      "n,epsilon,N,preconditioner,kblock,steps,max_gmres,avg_gmres,retries,status\n";
  for (const auto& cell : table.cells) {
    std::string status = cell.ok ? "ok" : cell.error;
    std::replace(status.begin(), status.end(), ',', ';');
    std::replace(status.begin(), status.end(), '\n', ' ');
    out += std::to_string(cell.n) + "," + format_double(cell.epsilon) + "," +
           std::to_string(cell.num_phases) + "," + cell.preconditioner + "," + cell.kblock +
           "," + std::to_string(cell.steps) + "," + std::to_string(cell.max_gmres) + "," +
           format_double(cell.avg_gmres) + "," + std::to_string(cell.total_retries) + "," +
           status + "\n";
  }
  return out;
}

std::string bench_text_table(const BenchTable& table) {
  const std::vector<std::string> headers = {"n", "epsilon", "N", "precond", "kblock",
                                            "steps", "gmres(max/avg)", "retries"};
  std::vector<std::vector<std::string>> rows;
  rows.push_back(headers);
  for (const auto& cell : table.cells) {
    char eps[32];
    std::snprintf(eps, sizeof(eps), "%g", cell.epsilon);
    rows.push_back({std::to_string(cell.n), eps, std::to_string(cell.num_phases),
                    cell.preconditioner, cell.kblock, std::to_string(cell.steps),
                    iters_column(cell), std::to_string(cell.total_retries)});
  }
  std::vector<size_t> widths(headers.size(), 0);
  for (const auto& row : rows)
    for (size_t c = 0; c < row.size(); ++c) widths[c] = std::max(widths[c], row[c].size());

  std::ostringstream out;
  for (size_t r = 0; r < rows.size(); ++r) {
    for (size_t c = 0; c < rows[r].size(); ++c) {
      out << rows[r][c] << std::string(widths[c] - rows[r][c].size(), ' ');
      out << (c + 1 < rows[r].size() ? "  " : "");
    }
    out << "\n";
    if (r == 0) {
      size_t total = 0;
      for (size_t c = 0; c < widths.size(); ++c)
        total += widths[c] + (c + 1 < widths.size() ? 2 : 0);
      out << std::string(total, '-') << "\n";
    }
  }
  for (const auto& cell : table.cells)
    if (!cell.ok)
      out << "# cell n=" << cell.n << " N=" << cell.num_phases << " " << cell.preconditioner
          << ": " << cell.error << "\n";
  return out.str();
}

void write_bench_outputs(const BenchTable& table, const std::string& csv_path,
                         const std::string& text_path) {
  write_text_file(csv_path, bench_csv_string(table));
  write_text_file(text_path, bench_text_table(table));
}

}  // namespace mpac
