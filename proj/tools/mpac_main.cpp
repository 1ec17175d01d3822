// mpac_main.cpp -- command-line front end: run, bench, spectrum,
// export-system.  Uses only the public C API.

#include "mpac.h"

#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

namespace {

struct ConfigHandle {
  mpac_config* ptr = nullptr;
  ~ConfigHandle() { mpac_config_free(ptr); }
  ConfigHandle() = default;
  ConfigHandle(const ConfigHandle&) = delete;
  ConfigHandle& operator=(const ConfigHandle&) = delete;
};

int report_failure(mpac_status status) {
  std::fprintf(stderr, "mpac: %s: %s\n", mpac_status_string(status), mpac_last_error());
  return 1;
}

// Shared options of every subcommand: the config file, --set overrides, and
// an output directory shortcut.
struct CommonArgs {
  std::string config_path;
  std::vector<std::string> overrides;
  std::string output_dir;

  void attach(CLI::App* cmd, const char* config_desc) {
    cmd->add_option("config", config_path, config_desc)->required();
    cmd->add_option("--set", overrides, "override a config key, e.g. --set epsilon=0.02")
        ->type_name("KEY=VALUE");
    cmd->add_option("--output-dir", output_dir, "override the output directory");
  }

  // Loads and applies overrides; returns 0 / an exit code.
  int load(ConfigHandle* config, bool grid) const {
    const mpac_status status = grid ? mpac_config_load_grid(config_path.c_str(), &config->ptr)
                                    : mpac_config_load(config_path.c_str(), &config->ptr);
    if (status != MPAC_OK) return report_failure(status);
    for (const auto& kv : overrides) {
      const size_t eq = kv.find('=');
      if (eq == std::string::npos) {
        std::fprintf(stderr, "mpac: --set expects KEY=VALUE, got '%s'\n", kv.c_str());
        return 1;
      }
      const mpac_status set_status = mpac_config_set(
          config->ptr, kv.substr(0, eq).c_str(), kv.substr(eq + 1).c_str());
      if (set_status != MPAC_OK) return report_failure(set_status);
    }
    if (!output_dir.empty()) {
      const mpac_status dir_status =
          mpac_config_set(config->ptr, "output_dir", output_dir.c_str());
      if (dir_status != MPAC_OK) return report_failure(dir_status);
    }
    return 0;
  }
};

std::string config_value(const mpac_config* config, const char* key) {
  char buffer[4096];
  if (mpac_config_get(config, key, buffer, sizeof buffer) != MPAC_OK) return "";
  return buffer;
}

int cmd_run(const CommonArgs& args) {
  ConfigHandle config;
  if (int rc = args.load(&config, false)) return rc;
  mpac_run_summary summary{};
  const mpac_status status = mpac_run(config.ptr, &summary);
  if (status != MPAC_OK) return report_failure(status);
  const std::string outdir = config_value(config.ptr, "output_dir");
  std::printf("steps:            %d\n", summary.steps);
  std::printf("final time:       %.6g%s\n", summary.final_time,
              summary.reached_final_time ? "" : " (stopped at step limit)");
  std::printf("gmres (max/avg):  %d/%.3g\n", summary.max_gmres, summary.avg_gmres);
  std::printf("tau retries:      %d\n", summary.total_retries);
  std::printf("final energy:     %.10g\n", summary.final_energy);
  std::printf("output:           %s\n", outdir.c_str());
  return 0;
}

int cmd_bench(const CommonArgs& args) {
  ConfigHandle config;
  if (int rc = args.load(&config, true)) return rc;
  const std::string outdir = config_value(config.ptr, "output_dir");
  const std::string csv_path = outdir + "/bench.csv";
  const std::string text_path = outdir + "/bench.txt";
  const mpac_status status = mpac_bench(config.ptr, csv_path.c_str(), text_path.c_str());
  if (status != MPAC_OK) return report_failure(status);
  std::ifstream table(text_path);
  std::cout << table.rdbuf();
  std::printf("wrote %s and %s\n", csv_path.c_str(), text_path.c_str());
  return 0;
}

int cmd_spectrum(const CommonArgs& args) {
  ConfigHandle config;
  if (int rc = args.load(&config, false)) return rc;
  const std::string csv_path = config_value(config.ptr, "output_dir") + "/spectrum.csv";
  mpac_spectrum_summary summary{};
  const mpac_status status = mpac_spectrum(config.ptr, csv_path.c_str(), &summary);
  if (status != MPAC_OK) return report_failure(status);
  std::printf("eigenvalues:               %d\n", summary.num_eigenvalues);
  std::printf("a:                         %.12g\n", summary.a);
  std::printf("max distance to {1, a}:    %.3g\n", summary.max_distance);
  std::printf("wrote %s\n", csv_path.c_str());
  return 0;
}

int cmd_export(const CommonArgs& args, int step) {
  ConfigHandle config;
  if (int rc = args.load(&config, false)) return rc;
  const std::string outdir = config_value(config.ptr, "output_dir");
  int num_sweeps = 0;
  const mpac_status status = mpac_export_system(config.ptr, step, outdir.c_str(), &num_sweeps);
  if (status != MPAC_OK) return report_failure(status);
  std::printf("wrote %d sweep system(s) of step %d to %s\n", num_sweeps, step, outdir.c_str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"multiphase Allen-Cahn variational inequality solver"};
  app.set_version_flag("--version", mpac_version());
  app.require_subcommand(1);

  CommonArgs run_args, bench_args, spectrum_args, export_args;
  int export_step = 1;

  CLI::App* run = app.add_subcommand("run", "run one simulation, write stats and snapshots");
  run_args.attach(run, "run config file (key=value)");

  CLI::App* bench = app.add_subcommand("bench", "sweep a benchmark grid, tabulate GMRES counts");
  bench_args.attach(bench, "grid config file (run config plus grid_* axes)");

  CLI::App* spectrum =
      app.add_subcommand("spectrum", "two-phase preconditioned-operator eigenvalue report");
  spectrum_args.attach(spectrum, "run config file with N=2");

  CLI::App* export_system =
      app.add_subcommand("export-system", "dump one step's saddle systems as Matrix Market");
  export_args.attach(export_system, "run config file (key=value)");
  export_system->add_option("--step", export_step, "1-based time step to dump")
      ->check(CLI::PositiveNumber);

  CLI11_PARSE(app, argc, argv);

  if (app.got_subcommand(run)) return cmd_run(run_args);
  if (app.got_subcommand(bench)) return cmd_bench(bench_args);
  if (app.got_subcommand(spectrum)) return cmd_spectrum(spectrum_args);
  if (app.got_subcommand(export_system)) return cmd_export(export_args, export_step);
  return 1;
}
