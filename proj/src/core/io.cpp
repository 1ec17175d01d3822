// core/io.cpp -- file output: stats CSV, VTK snapshots, Matrix Market dumps.

#include "io.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <vector>

namespace mpac {

std::string format_double(double value) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", value);
  return buf;
}

void write_text_file(const std::string& path, const std::string& content) {
  const auto parent = std::filesystem::path(path).parent_path();
  if (!parent.empty()) {
    std::error_code ec;
    std::filesystem::create_directories(parent, ec);
    require(!ec, ErrorCode::io_error, "cannot create directory '" + parent.string() + "'");
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  require(out.good(), ErrorCode::io_error, "cannot open '" + path + "' for writing");
  out << content;
  out.flush();
  require(out.good(), ErrorCode::io_error, "failed writing '" + path + "'");
}

std::string stats_csv_string(const std::vector<SolveStats>& stats) {
  require(!stats.empty(), ErrorCode::invalid_argument, "stats_csv_string: no steps recorded");
  std::string out =
      "step,time,tau,pdas_iters,max_gmres,avg_gmres,active_fraction,energy,retries\n";
  int overall_max = 0;
  long long total_iters = 0, total_solves = 0;
  for (const auto& s : stats) {
    out += std::to_string(s.step_index) + "," + format_double(s.time) + "," +
           format_double(s.tau) + "," + std::to_string(s.pdas_iters) + "," +
           std::to_string(s.max_gmres) + "," + format_double(s.avg_gmres) + "," +
           format_double(s.active_fraction) + "," + format_double(s.energy) + "," +
           std::to_string(s.retries) + "\n";
    overall_max = std::max(overall_max, s.max_gmres);
    for (int c : s.gmres_counts) {
      total_iters += c;
      ++total_solves;
    }
  }
  const double overall_avg =
      total_solves > 0 ? static_cast<double>(total_iters) / static_cast<double>(total_solves)
                       : 0.0;
  out += "# max_gmres_overall=" + std::to_string(overall_max) +
         " avg_gmres_overall=" + format_double(overall_avg) + "\n";
  return out;
}

void write_stats_csv(const std::vector<SolveStats>& stats, const std::string& path) {
  write_text_file(path, stats_csv_string(stats));
}

void write_vtk_snapshot(const PhaseState& state, const Mesh& mesh, const std::string& path) {
  require(mesh.dim == 2, ErrorCode::unsupported, "write_vtk_snapshot: 2D meshes only");
  require(state.num_nodes() == mesh.num_nodes(), ErrorCode::invalid_argument,
          "write_vtk_snapshot: state/mesh size mismatch");
  const int nn = mesh.num_nodes();
  const int ne = mesh.num_elements();
  const int N = state.num_phases();

  std::string out;
  out += "# vtk DataFile Version 3.0\n";
  out += "phase fields at t = " + format_double(state.time) + "\n";
  out += "ASCII\nDATASET UNSTRUCTURED_GRID\n";
  out += "POINTS " + std::to_string(nn) + " double\n";
  for (int j = 0; j < nn; ++j)
    out += format_double(mesh.nodes(j, 0)) + " " + format_double(mesh.nodes(j, 1)) + " 0\n";
  out += "CELLS " + std::to_string(ne) + " " + std::to_string(4 * ne) + "\n";
  for (const auto& el : mesh.elements)
    out += "3 " + std::to_string(el[0]) + " " + std::to_string(el[1]) + " " +
           std::to_string(el[2]) + "\n";
  out += "CELL_TYPES " + std::to_string(ne) + "\n";
  for (int e = 0; e < ne; ++e) out += "5\n";
  out += "POINT_DATA " + std::to_string(nn) + "\n";

  const auto scalar_field = [&out, nn](const std::string& name, auto value_at) {
    out += "SCALARS " + name + " double 1\nLOOKUP_TABLE default\n";
    for (int j = 0; j < nn; ++j) out += format_double(value_at(j)) + "\n";
  };
  for (int i = 0; i < N; ++i)
    scalar_field("phase_" + std::to_string(i + 1),
                 [&state, i](int j) { return state.u(j, i); });
  scalar_field("Lambda", [&state](int j) { return state.sat_mult(j); });
  for (int i = 0; i < N; ++i)
    scalar_field("mu_" + std::to_string(i + 1), [&state, i](int j) { return state.mu(j, i); });

  write_text_file(path, out);
}

void write_matrix_market(const SpMat& matrix, const std::string& path) {
  std::string out = "%%MatrixMarket matrix coordinate real general\n";
  out += std::to_string(matrix.rows()) + " " + std::to_string(matrix.cols()) + " " +
         std::to_string(matrix.nonZeros()) + "\n";
  for (int r = 0; r < matrix.rows(); ++r)
    for (SpMat::InnerIterator it(matrix, r); it; ++it)
      out += std::to_string(r + 1) + " " + std::to_string(it.col() + 1) + " " +
             format_double(it.value()) + "\n";
  write_text_file(path, out);
}

void write_matrix_market_vector(const Vec& vector, const std::string& path) {
  std::string out = "%%MatrixMarket matrix array real general\n";
  out += std::to_string(vector.size()) + " 1\n";
  for (int i = 0; i < vector.size(); ++i) out += format_double(vector(i)) + "\n";
  write_text_file(path, out);
}

namespace {

std::ifstream open_matrix_market(const std::string& path, bool coordinate, int* rows, int* cols,
                                 long long* entries) {
  std::ifstream in(path);
  require(in.good(), ErrorCode::io_error, "cannot open '" + path + "' for reading");
  std::string header;
  std::getline(in, header);
  const std::string want = coordinate ? "%%MatrixMarket matrix coordinate real general"
                                      : "%%MatrixMarket matrix array real general";
  require(header == want, ErrorCode::parse_error,
          "'" + path + "': unsupported Matrix Market header '" + header + "'");
  std::string line;
  while (std::getline(in, line) && (line.empty() || line[0] == '%')) {
  }
  std::istringstream sizes(line);
  *entries = 0;
  if (coordinate)
    sizes >> *rows >> *cols >> *entries;
  else
    sizes >> *rows >> *cols;
  require(!sizes.fail() && *rows >= 0 && *cols >= 0, ErrorCode::parse_error,
          "'" + path + "': malformed size line '" + line + "'");
  return in;
}

}  // namespace

SpMat read_matrix_market(const std::string& path) {
  int rows = 0, cols = 0;
  long long entries = 0;
  std::ifstream in = open_matrix_market(path, true, &rows, &cols, &entries);
  std::vector<Eigen::Triplet<double>> trips;
  trips.reserve(static_cast<size_t>(entries));
  for (long long k = 0; k < entries; ++k) {
    int r = 0, c = 0;
    double v = 0.0;
    in >> r >> c >> v;
    require(!in.fail() && r >= 1 && r <= rows && c >= 1 && c <= cols, ErrorCode::parse_error,
            "'" + path + "': malformed entry " + std::to_string(k + 1));
    trips.emplace_back(r - 1, c - 1, v);
  }
  SpMat m(rows, cols);
  m.setFromTriplets(trips.begin(), trips.end());
  m.makeCompressed();
  return m;
}

Vec read_matrix_market_vector(const std::string& path) {
  int rows = 0, cols = 0;
  long long entries = 0;
  std::ifstream in = open_matrix_market(path, false, &rows, &cols, &entries);
  require(cols == 1, ErrorCode::parse_error, "'" + path + "': expected a single-column array");
  Vec v(rows);
  for (int i = 0; i < rows; ++i) {
    in >> v(i);
    require(!in.fail(), ErrorCode::parse_error,
            "'" + path + "': malformed entry " + std::to_string(i + 1));
  }
  return v;
}

void write_spectrum_csv(const std::vector<std::complex<double>>& eigenvalues, double a,
                        const std::string& path) {
  std::string out = "real,imag\n";
  for (const auto& z : eigenvalues)
    out += format_double(z.real()) + "," + format_double(z.imag()) + "\n";
  out += "# a=" + format_double(a) + "\n";
  write_text_file(path, out);
}

}  // namespace mpac
