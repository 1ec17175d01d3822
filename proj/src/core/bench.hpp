// core/bench.hpp -- benchmark grid: sweep mesh x epsilon x phases x
// preconditioner, report per-cell GMRES statistics in max/avg form.

#pragma once

#include "config.hpp"
#include "types.hpp"

#include <functional>
#include <string>
#include <vector>

namespace mpac {

struct BenchCell {
  int n = 0;
  double epsilon = 0.0;
  int num_phases = 0;
  std::string preconditioner;
  std::string kblock;
  int steps = 0;
  int max_gmres = 0;        // a in the a/b report
  double avg_gmres = 0.0;   // b: mean over every saddle solve in the run
  int total_retries = 0;
  bool ok = false;
  std::string error;
};

struct BenchTable {
  std::vector<BenchCell> cells;
};

// Runs every cell of the grid sequentially (deterministic order: n outermost,
// then epsilon, phases, preconditioner).  A failing cell records its error and
// the sweep continues.  progress, when set, is called after each cell.
BenchTable run_bench(const GridConfig& grid,
                     const std::function<void(const BenchCell&)>& progress = {});

std::string bench_csv_string(const BenchTable& table);
std::string bench_text_table(const BenchTable& table);
void write_bench_outputs(const BenchTable& table, const std::string& csv_path,
                         const std::string& text_path);

}  // namespace mpac
