// test_capi.cpp -- exercises the shared-library surface exactly as an
// external caller would: only mpac.h, no core headers.

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <mpac.h>

#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <unistd.h>
#include <vector>

namespace {

const char* kMinimal = "n = 4\nN = 2\nepsilon = 0.1\nT = 0.01\n";

struct Scratch {
  std::filesystem::path dir;
  Scratch() {
    dir = std::filesystem::temp_directory_path() /
          ("mpac_capi_" + std::to_string(::getpid()) + "_" + std::to_string(counter()++));
    std::filesystem::create_directories(dir);
  }
  ~Scratch() {
    std::error_code ec;
    std::filesystem::remove_all(dir, ec);
  }
  std::string path(const std::string& name) const { return (dir / name).string(); }
  static int& counter() {
    static int c = 0;
    return c;
  }
};

struct ConfigHandle {
  mpac_config* ptr = nullptr;
  ~ConfigHandle() { mpac_config_free(ptr); }
};

struct SimHandle {
  mpac_sim* ptr = nullptr;
  ~SimHandle() { mpac_sim_free(ptr); }
};

mpac_config* parse_or_die(const std::string& text) {
  mpac_config* config = nullptr;
  REQUIRE(mpac_config_parse(text.c_str(), &config) == MPAC_OK);
  REQUIRE(config != nullptr);
  return config;
}

std::string get_value(const mpac_config* config, const char* key) {
  char buffer[4096];
  REQUIRE(mpac_config_get(config, key, buffer, sizeof buffer) == MPAC_OK);
  return buffer;
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in.good());
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

}  // namespace

TEST_CASE("library identity and status strings") {
  CHECK(mpac_version() != nullptr);
  CHECK(std::strlen(mpac_version()) > 0);
  CHECK(std::string(mpac_status_string(MPAC_OK)) == "ok");
  CHECK(std::strlen(mpac_status_string(MPAC_ERR_PARSE)) > 0);
  CHECK(std::strlen(mpac_status_string(MPAC_ERR_STEP)) > 0);
  CHECK(mpac_last_error() != nullptr);
}

TEST_CASE("null arguments are rejected uniformly") {
  ConfigHandle config{parse_or_die(kMinimal)};
  CHECK(mpac_config_parse(nullptr, nullptr) == MPAC_ERR_INVALID_ARGUMENT);
  CHECK(mpac_config_load(nullptr, nullptr) == MPAC_ERR_INVALID_ARGUMENT);
  CHECK(mpac_config_set(nullptr, "n", "4") == MPAC_ERR_INVALID_ARGUMENT);
  CHECK(mpac_config_set(config.ptr, nullptr, "4") == MPAC_ERR_INVALID_ARGUMENT);
  CHECK(mpac_config_get(config.ptr, "n", nullptr, 16) == MPAC_ERR_INVALID_ARGUMENT);
  CHECK(mpac_sim_create(nullptr, nullptr) == MPAC_ERR_INVALID_ARGUMENT);
  CHECK(mpac_run(nullptr, nullptr) == MPAC_ERR_INVALID_ARGUMENT);
  CHECK(mpac_spectrum(nullptr, nullptr, nullptr) == MPAC_ERR_INVALID_ARGUMENT);
  CHECK(std::strlen(mpac_last_error()) > 0);
}

TEST_CASE("parse errors set status and message") {
  mpac_config* config = nullptr;
  CHECK(mpac_config_parse("n = 4\nN = 2\n", &config) == MPAC_ERR_PARSE);
  CHECK(config == nullptr);
  CHECK(std::string(mpac_last_error()).find("epsilon") != std::string::npos);

  CHECK(mpac_config_parse("n = 4\nN = 2\nepsilon = 0.1\nQ = 0.9,0.9\n", &config) ==
        MPAC_ERR_INVALID_ARGUMENT);
  CHECK(mpac_config_load("/no/such/file.cfg", &config) == MPAC_ERR_IO);
}

TEST_CASE("config set/get/save/load round trip") {
  ConfigHandle config{parse_or_die(kMinimal)};
  CHECK(get_value(config.ptr, "n") == "4");
  CHECK(get_value(config.ptr, "preconditioner") == "p3");

  CHECK(mpac_config_set(config.ptr, "epsilon", "0.25") == MPAC_OK);
  CHECK(get_value(config.ptr, "epsilon") == "0.25");
  CHECK(mpac_config_set(config.ptr, "bogus", "1") == MPAC_ERR_PARSE);

  // Buffer too small is reported, not truncated silently.
  char tiny[2];
  CHECK(mpac_config_get(config.ptr, "preconditioner", tiny, sizeof tiny) ==
        MPAC_ERR_INVALID_ARGUMENT);

  const Scratch scratch;
  const std::string path = scratch.path("saved.cfg");
  CHECK(mpac_config_save(config.ptr, path.c_str()) == MPAC_OK);
  ConfigHandle loaded;
  CHECK(mpac_config_load(path.c_str(), &loaded.ptr) == MPAC_OK);
  CHECK(get_value(loaded.ptr, "epsilon") == "0.25");
  CHECK(get_value(loaded.ptr, "A") == "1,0,0,1");  // defaults materialized
}

TEST_CASE("grid configs load through the dedicated entry point") {
  const Scratch scratch;
  const std::string path = scratch.path("grid.cfg");
  std::ofstream(path) << "n = 4\nN = 2\nepsilon = 0.2\nT = 0.01\ngrid_n = 4,8\n";

  ConfigHandle grid;
  CHECK(mpac_config_load_grid(path.c_str(), &grid.ptr) == MPAC_OK);
  // The plain loader rejects the same file.
  ConfigHandle plain;
  CHECK(mpac_config_load(path.c_str(), &plain.ptr) == MPAC_ERR_PARSE);
}

TEST_CASE("simulation lifecycle") {
  ConfigHandle config{parse_or_die("n = 4\nN = 2\nepsilon = 0.1\nT = 0.01\nseed = 9\n")};
  SimHandle sim;
  REQUIRE(mpac_sim_create(config.ptr, &sim.ptr) == MPAC_OK);

  CHECK(mpac_sim_num_nodes(sim.ptr) == 25);
  CHECK(mpac_sim_num_phases(sim.ptr) == 2);
  CHECK(mpac_sim_time(sim.ptr) == 0.0);
  CHECK(mpac_sim_steps(sim.ptr) == 0);

  // No step yet: last-step stats must fail.
  mpac_step_stats stats;
  CHECK(mpac_sim_last_step_stats(sim.ptr, &stats) == MPAC_ERR_INVALID_ARGUMENT);

  // Initial state: phases sum to one and masses match the targets.
  std::vector<double> u1(25), u2(25);
  REQUIRE(mpac_sim_phase_values(sim.ptr, 1, u1.data(), u1.size()) == MPAC_OK);
  REQUIRE(mpac_sim_phase_values(sim.ptr, 2, u2.data(), u2.size()) == MPAC_OK);
  for (int j = 0; j < 25; ++j) CHECK(u1[j] + u2[j] == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(mpac_sim_phase_values(sim.ptr, 0, u1.data(), u1.size()) ==
        MPAC_ERR_INVALID_ARGUMENT);  // phases are 1-based
  CHECK(mpac_sim_phase_values(sim.ptr, 3, u1.data(), u1.size()) ==
        MPAC_ERR_INVALID_ARGUMENT);
  CHECK(mpac_sim_phase_values(sim.ptr, 1, u1.data(), 5) == MPAC_ERR_INVALID_ARGUMENT);

  double mass1 = 0.0, mass2 = 0.0;
  REQUIRE(mpac_sim_mass(sim.ptr, 1, &mass1) == MPAC_OK);
  REQUIRE(mpac_sim_mass(sim.ptr, 2, &mass2) == MPAC_OK);
  CHECK(mass1 + mass2 == doctest::Approx(1.0).epsilon(1e-12));

  double initial_energy = 0.0;
  REQUIRE(mpac_sim_energy(sim.ptr, &initial_energy) == MPAC_OK);

  // Step to completion.
  int done = 0;
  int steps = 0;
  while (!done) {
    REQUIRE(mpac_sim_advance(sim.ptr, &done) == MPAC_OK);
    ++steps;
    REQUIRE(steps < 1000);
  }
  CHECK(mpac_sim_steps(sim.ptr) == steps);
  CHECK(mpac_sim_time(sim.ptr) >= 0.01);
  CHECK(mpac_sim_advance(sim.ptr, &done) == MPAC_ERR_INVALID_ARGUMENT);  // already done

  REQUIRE(mpac_sim_last_step_stats(sim.ptr, &stats) == MPAC_OK);
  CHECK(stats.step_index == steps);
  CHECK(stats.tau > 0.0);
  CHECK(stats.max_gmres <= 3);  // two-phase p3 bound

  // Mass conservation across the run.
  double mass1_after = 0.0;
  REQUIRE(mpac_sim_mass(sim.ptr, 1, &mass1_after) == MPAC_OK);
  CHECK(std::abs(mass1_after - mass1) < 1e-8 * std::max(std::abs(mass1), 1e-12));

  const Scratch scratch;
  CHECK(mpac_sim_write_stats_csv(sim.ptr, scratch.path("stats.csv").c_str()) == MPAC_OK);
  CHECK(mpac_sim_write_vtk(sim.ptr, scratch.path("state.vtk").c_str()) == MPAC_OK);
  CHECK(slurp(scratch.path("stats.csv")).rfind("step,time,tau,", 0) == 0);
  CHECK(slurp(scratch.path("state.vtk")).rfind("# vtk DataFile", 0) == 0);
}

TEST_CASE("mpac_sim_run and mpac_run produce matching summaries") {
  const Scratch scratch;
  const std::string out_dir = scratch.path("out");
  const std::string text =
      "n = 4\nN = 2\nepsilon = 0.1\nT = 0.01\nseed = 9\nsnapshot_times = 0\noutput_dir = " +
      out_dir + "\n";

  ConfigHandle config{parse_or_die(text)};
  SimHandle sim;
  REQUIRE(mpac_sim_create(config.ptr, &sim.ptr) == MPAC_OK);
  mpac_run_summary by_hand;
  REQUIRE(mpac_sim_run(sim.ptr, &by_hand) == MPAC_OK);
  CHECK(by_hand.reached_final_time == 1);
  CHECK(by_hand.steps > 0);
  CHECK(by_hand.final_time >= 0.01);

  mpac_run_summary one_call;
  REQUIRE(mpac_run(config.ptr, &one_call) == MPAC_OK);
  CHECK(one_call.steps == by_hand.steps);
  CHECK(one_call.final_time == by_hand.final_time);
  CHECK(one_call.max_gmres == by_hand.max_gmres);
  CHECK(one_call.final_energy == by_hand.final_energy);

  CHECK(std::filesystem::exists(out_dir + "/stats.csv"));
  CHECK(std::filesystem::exists(out_dir + "/final.vtk"));
  CHECK(std::filesystem::exists(out_dir + "/snapshot_0.vtk"));
}

TEST_CASE("a max_steps run reports not reaching the final time") {
  ConfigHandle config{
      parse_or_die("n = 4\nN = 2\nepsilon = 0.1\nT = 100\nmax_steps = 2\n")};
  SimHandle sim;
  REQUIRE(mpac_sim_create(config.ptr, &sim.ptr) == MPAC_OK);
  mpac_run_summary summary;
  REQUIRE(mpac_sim_run(sim.ptr, &summary) == MPAC_OK);
  CHECK(summary.steps == 2);
  CHECK(summary.reached_final_time == 0);
}

TEST_CASE("spectrum entry point") {
  const Scratch scratch;
  ConfigHandle config{parse_or_die("n = 4\nN = 2\nepsilon = 0.04\n")};
  mpac_spectrum_summary summary;
  const std::string csv = scratch.path("spec.csv");
  REQUIRE(mpac_spectrum(config.ptr, csv.c_str(), &summary) == MPAC_OK);
  CHECK(summary.num_eigenvalues > 0);
  CHECK(summary.max_distance < 1e-8);
  // Frozen value for n = 4, epsilon = 0.04, tau = epsilon^2.
  CHECK(summary.a == doctest::Approx(1.13222487664053).epsilon(1e-9));
  CHECK(slurp(csv).rfind("real,imag\n", 0) == 0);

  // Three phases are rejected.
  ConfigHandle three{parse_or_die("n = 4\nN = 3\nepsilon = 0.1\n")};
  CHECK(mpac_spectrum(three.ptr, nullptr, nullptr) == MPAC_ERR_INVALID_ARGUMENT);
}

TEST_CASE("system export writes one matrix per sweep") {
  const Scratch scratch;
  ConfigHandle config{parse_or_die("n = 4\nN = 2\nepsilon = 0.1\nT = 0.01\nseed = 9\n")};
  int sweeps = 0;
  REQUIRE(mpac_export_system(config.ptr, 1, scratch.dir.string().c_str(), &sweeps) ==
          MPAC_OK);
  CHECK(sweeps >= 1);
  CHECK(std::filesystem::exists(scratch.path("K_sweep1.mtx")));
  CHECK(std::filesystem::exists(scratch.path("rhs_sweep1.mtx")));
  CHECK(std::filesystem::exists(scratch.path("stiffness.mtx")));
  CHECK(std::filesystem::exists(scratch.path("mass.mtx")));
  CHECK(slurp(scratch.path("K_sweep1.mtx")).rfind("%%MatrixMarket", 0) == 0);

  // Step index past the horizon fails cleanly.
  CHECK(mpac_export_system(config.ptr, 100000, scratch.dir.string().c_str(), &sweeps) ==
        MPAC_ERR_INVALID_ARGUMENT);
}

TEST_CASE("bench entry point writes both outputs") {
  const Scratch scratch;
  const std::string path = scratch.path("grid.cfg");
  std::ofstream(path) << "n = 4\nN = 2\nepsilon = 0.2\nT = 0.01\ngrid_preconditioner = p1,p3\n";
  ConfigHandle grid;
  REQUIRE(mpac_config_load_grid(path.c_str(), &grid.ptr) == MPAC_OK);

  const std::string csv = scratch.path("bench.csv");
  const std::string table = scratch.path("bench.txt");
  REQUIRE(mpac_bench(grid.ptr, csv.c_str(), table.c_str()) == MPAC_OK);
  const std::string csv_text = slurp(csv);
  CHECK(csv_text.rfind("n,epsilon,N,preconditioner,", 0) == 0);
  CHECK(csv_text.find(",p1,") != std::string::npos);
  CHECK(csv_text.find(",p3,") != std::string::npos);
  CHECK(slurp(table).find("gmres(max/avg)") != std::string::npos);
}

TEST_CASE("solver failures surface as MPAC_ERR_STEP") {
  // One GMRES iteration cannot solve the saddle systems; tau collapses.
  ConfigHandle config{parse_or_die(
      "n = 4\nN = 2\nepsilon = 0.1\nT = 0.01\ngmres_max_iter = 1\ntau_min = 0.0004\n")};
  SimHandle sim;
  REQUIRE(mpac_sim_create(config.ptr, &sim.ptr) == MPAC_OK);
  int done = 0;
  CHECK(mpac_sim_advance(sim.ptr, &done) == MPAC_ERR_STEP);
  CHECK(std::strlen(mpac_last_error()) > 0);
}
