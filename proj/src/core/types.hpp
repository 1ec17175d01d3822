// core/types.hpp -- shared aliases and error machinery for the mpac core.

#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include <stdexcept>
#include <string>

namespace mpac {

// Compressed sparse row storage with sorted, unique column indices per row.
using SpMat = Eigen::SparseMatrix<double, Eigen::RowMajor>;
using Vec   = Eigen::VectorXd;
using Mat   = Eigen::MatrixXd;

enum class ErrorCode {
  invalid_argument,  // bad sizes, bad parameter values
  parse_error,       // malformed config text
  io_error,          // filesystem failures
  solver_failure,    // inner linear solve did not converge / factorization failed
  step_failure,      // time step unrecoverable (tau underflow, PDAS stuck)
  unsupported,       // valid request outside what this build implements
  internal,          // broken invariant; indicates a bug
};

// Single exception type for the core; the C API maps `code` onto status values.
class Error : public std::runtime_error {
public:
  Error(ErrorCode code, const std::string& what) : std::runtime_error(what), code_(code) {}
  ErrorCode code() const { return code_; }

private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& what) { throw Error(code, what); }

inline void require(bool ok, ErrorCode code, const std::string& what) {
  if (!ok) fail(code, what);
}

}  // namespace mpac
