// core/config.cpp -- run configuration: flat key=value files and validation.

#include "config.hpp"

#include <cctype>
#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

namespace mpac {

namespace {

std::string trim(const std::string& s) {
  size_t begin = 0, end = s.size();
  while (begin < end && std::isspace(static_cast<unsigned char>(s[begin]))) ++begin;
  while (end > begin && std::isspace(static_cast<unsigned char>(s[end - 1]))) --end;
  return s.substr(begin, end - begin);
}

[[noreturn]] void parse_fail(int line, const std::string& what) {
  if (line > 0)
    fail(ErrorCode::parse_error, "line " + std::to_string(line) + ": " + what);
  fail(ErrorCode::parse_error, what);
}

long long to_int(const std::string& value, int line, const std::string& key) {
  errno = 0;
  char* end = nullptr;
  const long long v = std::strtoll(value.c_str(), &end, 10);
  if (errno != 0 || end == value.c_str() || *end != '\0')
    parse_fail(line, "key '" + key + "': expected an integer, got '" + value + "'");
  return v;
}

std::uint64_t to_uint64(const std::string& value, int line, const std::string& key) {
  errno = 0;
  char* end = nullptr;
  if (!value.empty() && value[0] == '-')
    parse_fail(line, "key '" + key + "': expected a nonnegative integer, got '" + value + "'");
  const unsigned long long v = std::strtoull(value.c_str(), &end, 10);
  if (errno != 0 || end == value.c_str() || *end != '\0')
    parse_fail(line, "key '" + key + "': expected a nonnegative integer, got '" + value + "'");
  return v;
}

double to_double(const std::string& value, int line, const std::string& key) {
  errno = 0;
  char* end = nullptr;
  const double v = std::strtod(value.c_str(), &end);
  if (errno != 0 || end == value.c_str() || *end != '\0' || !std::isfinite(v))
    parse_fail(line, "key '" + key + "': expected a finite number, got '" + value + "'");
  return v;
}

std::vector<double> to_double_list(const std::string& value, int line, const std::string& key) {
  std::vector<double> out;
  if (trim(value).empty()) return out;
  std::stringstream stream(value);
  std::string item;
  while (std::getline(stream, item, ',')) out.push_back(to_double(trim(item), line, key));
  return out;
}

std::vector<int> to_int_list(const std::string& value, int line, const std::string& key) {
  std::vector<int> out;
  if (trim(value).empty()) return out;
  std::stringstream stream(value);
  std::string item;
  while (std::getline(stream, item, ','))
    out.push_back(static_cast<int>(to_int(trim(item), line, key)));
  return out;
}

std::vector<std::string> to_string_list(const std::string& value) {
  std::vector<std::string> out;
  if (trim(value).empty()) return out;
  std::stringstream stream(value);
  std::string item;
  while (std::getline(stream, item, ',')) out.push_back(trim(item));
  return out;
}

bool to_on_off(const std::string& value, int line, const std::string& key) {
  if (value == "on") return true;
  if (value == "off") return false;
  parse_fail(line, "key '" + key + "': expected on or off, got '" + value + "'");
}

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string fmt_list(const std::vector<double>& values) {
  std::string out;
  for (size_t i = 0; i < values.size(); ++i) {
    if (i) out += ",";
    out += fmt(values[i]);
  }
  return out;
}

// Applies one key to the config; grid != nullptr admits the grid_* axes.
// Returns false when the key is unknown.
bool apply_key(RunConfig* cfg, GridConfig* grid, const std::string& key,
               const std::string& value, int line) {
  if (key == "dim") cfg->dim = static_cast<int>(to_int(value, line, key));
  else if (key == "n") cfg->n = static_cast<int>(to_int(value, line, key));
  else if (key == "N") cfg->num_phases = static_cast<int>(to_int(value, line, key));
  else if (key == "epsilon") cfg->epsilon = to_double(value, line, key);
  else if (key == "tau0") {
    if (value == "auto") {
      cfg->tau0_auto = true;
      cfg->tau0 = 0.0;
    } else {
      cfg->tau0_auto = false;
      cfg->tau0 = to_double(value, line, key);
    }
  } else if (key == "T") cfg->final_time = to_double(value, line, key);
  else if (key == "A") cfg->coupling = to_double_list(value, line, key);
  else if (key == "Q") cfg->target = to_double_list(value, line, key);
  else if (key == "c_mode") {
    if (value == "auto") {
      cfg->c_auto = true;
      cfg->c_value = 0.0;
    } else {
      cfg->c_auto = false;
      cfg->c_value = to_double(value, line, key);
    }
  } else if (key == "ic") cfg->ic = value;
  else if (key == "noise") cfg->noise = to_double(value, line, key);
  else if (key == "seed") cfg->seed = to_uint64(value, line, key);
  else if (key == "preconditioner") cfg->preconditioner = value;
  else if (key == "kblock") cfg->kblock = value;
  else if (key == "gmres_tol") cfg->gmres_tol = to_double(value, line, key);
  else if (key == "gmres_max_iter") cfg->gmres_max_iter = static_cast<int>(to_int(value, line, key));
  else if (key == "max_pdas") cfg->max_pdas = static_cast<int>(to_int(value, line, key));
  else if (key == "mass_constraint") cfg->mass_constraint = to_on_off(value, line, key);
  else if (key == "tau_min") cfg->tau_min = to_double(value, line, key);
  else if (key == "tau_max") cfg->tau_max = to_double(value, line, key);
  else if (key == "max_steps") cfg->max_steps = static_cast<int>(to_int(value, line, key));
  else if (key == "output_dir") cfg->output_dir = value;
  else if (key == "snapshot_times") cfg->snapshot_times = to_double_list(value, line, key);
  else if (grid && key == "grid_n") grid->grid_n = to_int_list(value, line, key);
  else if (grid && key == "grid_epsilon") grid->grid_epsilon = to_double_list(value, line, key);
  else if (grid && key == "grid_N") grid->grid_phases = to_int_list(value, line, key);
  else if (grid && key == "grid_preconditioner") grid->grid_preconditioner = to_string_list(value);
  else return false;
  return true;
}

struct KeyLines {
  std::map<std::string, int> line_of;
  int line(const std::string& key) const {
    auto it = line_of.find(key);
    return it == line_of.end() ? 0 : it->second;
  }
};

KeyLines parse_into(const std::string& text, RunConfig* cfg, GridConfig* grid) {
  KeyLines seen;
  std::stringstream stream(text);
  std::string raw;
  int line_no = 0;
  bool have_n = false, have_phases = false, have_epsilon = false;
  while (std::getline(stream, raw)) {
    ++line_no;
    const size_t hash = raw.find('#');
    if (hash != std::string::npos) raw.erase(hash);
    const std::string line = trim(raw);
    if (line.empty()) continue;
    const size_t eq = line.find('=');
    if (eq == std::string::npos) parse_fail(line_no, "expected key = value, got '" + line + "'");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty()) parse_fail(line_no, "empty key");
    if (seen.line_of.count(key))
      parse_fail(line_no, "duplicate key '" + key + "' (first on line " +
                              std::to_string(seen.line_of[key]) + ")");
    if (!apply_key(cfg, grid, key, value, line_no))
      parse_fail(line_no, "unknown key '" + key + "'");
    seen.line_of[key] = line_no;
    have_n = have_n || key == "n";
    have_phases = have_phases || key == "N";
    have_epsilon = have_epsilon || key == "epsilon";
  }
  if (!have_n) fail(ErrorCode::parse_error, "missing required key 'n'");
  if (!have_phases) fail(ErrorCode::parse_error, "missing required key 'N'");
  if (!have_epsilon) fail(ErrorCode::parse_error, "missing required key 'epsilon'");
  return seen;
}

[[noreturn]] void key_fail(const KeyLines& seen, const std::string& key,
                           const std::string& what) {
  const int line = seen.line(key);
  if (line > 0)
    fail(ErrorCode::invalid_argument,
         what + " (key '" + key + "', line " + std::to_string(line) + ")");
  fail(ErrorCode::invalid_argument, what + " (key '" + key + "')");
}

void validate_with_lines(RunConfig* cfg, const KeyLines& seen) {
  if (cfg->dim != 2) key_fail(seen, "dim", "only dim = 2 is supported");
  if (cfg->n < 1) key_fail(seen, "n", "mesh resolution must be >= 1");
  const int N = cfg->num_phases;
  if (N < 2) key_fail(seen, "N", "need at least 2 phases");
  if (!(cfg->epsilon > 0.0 && cfg->epsilon < 1.0))
    key_fail(seen, "epsilon", "epsilon must lie in (0, 1)");
  if (!cfg->tau0_auto && cfg->tau0 <= 0.0) key_fail(seen, "tau0", "tau0 must be positive");
  if (cfg->final_time <= 0.0) key_fail(seen, "T", "final time must be positive");

  if (cfg->coupling.empty()) {  // default: identity
    cfg->coupling.assign(static_cast<size_t>(N) * N, 0.0);
    for (int i = 0; i < N; ++i) cfg->coupling[static_cast<size_t>(i) * N + i] = 1.0;
  }
  if (cfg->coupling.size() != static_cast<size_t>(N) * N)
    key_fail(seen, "A", "coupling matrix needs N*N = " + std::to_string(N * N) + " entries");
  for (int i = 0; i < N; ++i)
    for (int j = 0; j < i; ++j)
      if (cfg->coupling[static_cast<size_t>(i) * N + j] !=
          cfg->coupling[static_cast<size_t>(j) * N + i])
        key_fail(seen, "A", "coupling matrix must be symmetric");

  if (cfg->target.empty()) cfg->target.assign(N, 1.0 / N);  // default: uniform
  if (cfg->target.size() != static_cast<size_t>(N))
    key_fail(seen, "Q", "target fractions need N = " + std::to_string(N) + " entries");
  double sum = 0.0;
  for (double q : cfg->target) {
    if (q < 0.0) key_fail(seen, "Q", "target fractions must be nonnegative");
    sum += q;
  }
  if (std::abs(sum - 1.0) > 1e-12) key_fail(seen, "Q", "target fractions must sum to 1");

  if (!cfg->c_auto && cfg->c_value <= 0.0)
    key_fail(seen, "c_mode", "threshold must be positive or auto");
  if (cfg->ic != "wellmixed" && cfg->ic != "quadruple")
    key_fail(seen, "ic", "initial condition must be wellmixed or quadruple");
  if (cfg->ic == "quadruple" && N != 5)
    key_fail(seen, "ic", "quadruple initial condition requires N = 5");
  if (cfg->noise < 0.0 || cfg->noise > 1.0 / N)
    key_fail(seen, "noise", "noise must lie in [0, 1/N]");
  if (cfg->preconditioner != "exact" && cfg->preconditioner != "p1" &&
      cfg->preconditioner != "p2" && cfg->preconditioner != "p3")
    key_fail(seen, "preconditioner", "preconditioner must be one of exact, p1, p2, p3");
  if (cfg->kblock != "direct" && cfg->kblock != "amg3")
    key_fail(seen, "kblock", "kblock must be direct or amg3");
  if (cfg->gmres_tol <= 0.0) key_fail(seen, "gmres_tol", "tolerance must be positive");
  if (cfg->gmres_max_iter < 1) key_fail(seen, "gmres_max_iter", "iteration cap must be >= 1");
  if (cfg->max_pdas < 1) key_fail(seen, "max_pdas", "sweep cap must be >= 1");
  if (!(cfg->tau_min > 0.0)) key_fail(seen, "tau_min", "tau_min must be positive");
  if (cfg->tau_min > cfg->tau_max) key_fail(seen, "tau_max", "tau_max must be >= tau_min");
  if (cfg->max_steps < 0) key_fail(seen, "max_steps", "max_steps must be >= 0");
  if (cfg->output_dir.empty()) key_fail(seen, "output_dir", "output directory must be nonempty");
  for (double t : cfg->snapshot_times)
    if (!(t >= 0.0)) key_fail(seen, "snapshot_times", "snapshot times must be >= 0");

  // Full model-level validation (positive eigenvalue etc.) happens here too,
  // so a loaded config is guaranteed to build.
  (void)make_model_params(*cfg, std::sqrt(2.0) / cfg->n);
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  require(in.good(), ErrorCode::io_error, "cannot open '" + path + "' for reading");
  std::stringstream buffer;
  buffer << in.rdbuf();
  require(!in.bad(), ErrorCode::io_error, "failed reading '" + path + "'");
  return buffer.str();
}

}  // namespace

RunConfig parse_config(const std::string& text) {
  RunConfig cfg;
  const KeyLines seen = parse_into(text, &cfg, nullptr);
  validate_with_lines(&cfg, seen);
  return cfg;
}

RunConfig load_config(const std::string& path) { return parse_config(read_file(path)); }

GridConfig parse_grid_config(const std::string& text) {
  GridConfig grid;
  const KeyLines seen = parse_into(text, &grid.base, &grid);
  validate_with_lines(&grid.base, seen);
  for (int n : grid.grid_n)
    require(n >= 1, ErrorCode::invalid_argument, "grid_n entries must be >= 1");
  for (double e : grid.grid_epsilon)
    require(e > 0.0 && e < 1.0, ErrorCode::invalid_argument,
            "grid_epsilon entries must lie in (0, 1)");
  for (int p : grid.grid_phases)
    require(p >= 2, ErrorCode::invalid_argument, "grid_N entries must be >= 2");
  for (const std::string& p : grid.grid_preconditioner) (void)parse_precond_kind(p);
  return grid;
}

GridConfig load_grid_config(const std::string& path) {
  return parse_grid_config(read_file(path));
}

std::string serialize_config(const RunConfig& config) {
  std::string out;
  out += "dim = " + std::to_string(config.dim) + "\n";
  out += "n = " + std::to_string(config.n) + "\n";
  out += "N = " + std::to_string(config.num_phases) + "\n";
  out += "epsilon = " + fmt(config.epsilon) + "\n";
  out += "tau0 = " + (config.tau0_auto ? std::string("auto") : fmt(config.tau0)) + "\n";
  out += "T = " + fmt(config.final_time) + "\n";
  out += "A = " + fmt_list(config.coupling) + "\n";
  out += "Q = " + fmt_list(config.target) + "\n";
  out += "c_mode = " + (config.c_auto ? std::string("auto") : fmt(config.c_value)) + "\n";
  out += "ic = " + config.ic + "\n";
  out += "noise = " + fmt(config.noise) + "\n";
  out += "seed = " + std::to_string(config.seed) + "\n";
  out += "preconditioner = " + config.preconditioner + "\n";
  out += "kblock = " + config.kblock + "\n";
  out += "gmres_tol = " + fmt(config.gmres_tol) + "\n";
  out += "gmres_max_iter = " + std::to_string(config.gmres_max_iter) + "\n";
  out += "max_pdas = " + std::to_string(config.max_pdas) + "\n";
  out += "mass_constraint = " + std::string(config.mass_constraint ? "on" : "off") + "\n";
  out += "tau_min = " + fmt(config.tau_min) + "\n";
  out += "tau_max = " + fmt(config.tau_max) + "\n";
  out += "max_steps = " + std::to_string(config.max_steps) + "\n";
  out += "output_dir = " + config.output_dir + "\n";
  out += "snapshot_times = " + fmt_list(config.snapshot_times) + "\n";
  return out;
}

void save_config(const RunConfig& config, const std::string& path) {
  RunConfig copy = config;
  validate_config(&copy);  // never persist an invalid config
  const auto parent = std::filesystem::path(path).parent_path();
  if (!parent.empty()) std::filesystem::create_directories(parent);
  std::ofstream out(path, std::ios::binary);
  require(out.good(), ErrorCode::io_error, "cannot open '" + path + "' for writing");
  out << serialize_config(copy);
  require(out.good(), ErrorCode::io_error, "failed writing '" + path + "'");
}

void validate_config(RunConfig* config) { validate_with_lines(config, KeyLines{}); }

void set_config_value(RunConfig* config, const std::string& key, const std::string& value) {
  if (!apply_key(config, nullptr, trim(key), trim(value), 0))
    fail(ErrorCode::parse_error, "unknown key '" + trim(key) + "'");
}

std::string get_config_value(const RunConfig& config, const std::string& key) {
  if (key == "dim") return std::to_string(config.dim);
  if (key == "n") return std::to_string(config.n);
  if (key == "N") return std::to_string(config.num_phases);
  if (key == "epsilon") return fmt(config.epsilon);
  if (key == "tau0") return config.tau0_auto ? "auto" : fmt(config.tau0);
  if (key == "T") return fmt(config.final_time);
  if (key == "A") return fmt_list(config.coupling);
  if (key == "Q") return fmt_list(config.target);
  if (key == "c_mode") return config.c_auto ? "auto" : fmt(config.c_value);
  if (key == "ic") return config.ic;
  if (key == "noise") return fmt(config.noise);
  if (key == "seed") return std::to_string(config.seed);
  if (key == "preconditioner") return config.preconditioner;
  if (key == "kblock") return config.kblock;
  if (key == "gmres_tol") return fmt(config.gmres_tol);
  if (key == "gmres_max_iter") return std::to_string(config.gmres_max_iter);
  if (key == "max_pdas") return std::to_string(config.max_pdas);
  if (key == "mass_constraint") return config.mass_constraint ? "on" : "off";
  if (key == "tau_min") return fmt(config.tau_min);
  if (key == "tau_max") return fmt(config.tau_max);
  if (key == "max_steps") return std::to_string(config.max_steps);
  if (key == "output_dir") return config.output_dir;
  if (key == "snapshot_times") return fmt_list(config.snapshot_times);
  fail(ErrorCode::parse_error, "unknown key '" + key + "'");
}

PrecondKind parse_precond_kind(const std::string& name) {
  if (name == "exact") return PrecondKind::exact;
  if (name == "p1") return PrecondKind::p1;
  if (name == "p2") return PrecondKind::p2;
  if (name == "p3") return PrecondKind::p3;
  fail(ErrorCode::invalid_argument, "unknown preconditioner '" + name + "'");
}

KblockMode parse_kblock_mode(const std::string& name) {
  if (name == "direct") return KblockMode::direct;
  if (name == "amg3") return KblockMode::amg3;
  fail(ErrorCode::invalid_argument, "unknown kblock mode '" + name + "'");
}

ModelParams make_model_params(const RunConfig& config, double mesh_h) {
  require(mesh_h > 0.0, ErrorCode::invalid_argument, "make_model_params: mesh size must be positive");
  const int N = config.num_phases;
  ModelParams params;
  params.num_phases = N;
  params.epsilon = config.epsilon;
  params.coupling = Mat::Identity(N, N);
  if (!config.coupling.empty()) {
    require(config.coupling.size() == static_cast<size_t>(N) * N, ErrorCode::invalid_argument,
            "coupling matrix needs N*N entries");
    for (int i = 0; i < N; ++i)
      for (int j = 0; j < N; ++j)
        params.coupling(i, j) = config.coupling[static_cast<size_t>(i) * N + j];
  }
  params.target_fractions = Vec::Constant(N, 1.0 / N);
  if (!config.target.empty()) {
    require(config.target.size() == static_cast<size_t>(N), ErrorCode::invalid_argument,
            "target fractions need N entries");
    for (int i = 0; i < N; ++i) params.target_fractions(i) = config.target[i];
  }
  params.pdas_threshold = config.c_auto ? 2.0 / (mesh_h * mesh_h) : config.c_value;
  params.validate();
  return params;
}

PhaseState make_initial_state(const RunConfig& config, const Mesh& mesh,
                              const ModelParams& params) {
  if (config.ic == "wellmixed")
    return initial_wellmixed(mesh, params, config.noise, config.seed);
  if (config.ic == "quadruple") return initial_quadruple(mesh, params);
  fail(ErrorCode::invalid_argument, "unknown initial condition '" + config.ic + "'");
}

TimeloopOptions make_timeloop_options(const RunConfig& config) {
  TimeloopOptions options;
  options.final_time = config.final_time;
  options.tau0 = config.tau0_auto ? -1.0 : config.tau0;
  options.tau_min = config.tau_min;
  options.tau_max = config.tau_max;
  options.max_steps = config.max_steps;
  options.snapshot_times = config.snapshot_times;
  options.pdas.precond = parse_precond_kind(config.preconditioner);
  options.pdas.kblock = parse_kblock_mode(config.kblock);
  options.pdas.gmres.rel_tol = config.gmres_tol;
  options.pdas.gmres.max_iter = config.gmres_max_iter;
  options.pdas.max_sweeps = config.max_pdas;
  options.pdas.mass_constrained = config.mass_constraint;
  return options;
}

}  // namespace mpac
