// core/direct.cpp -- sparse direct factorizations (desk-scale exact solves).

#include "direct.hpp"

#include <Eigen/SparseCholesky>
#include <Eigen/SparseLU>

#include <string>

namespace mpac {

using ColMat = Eigen::SparseMatrix<double>;  // factorizations want column-major

struct SpdSolver::Impl {
  Eigen::SimplicialLLT<ColMat> llt;
};

SpdSolver::SpdSolver(const SpMat& matrix) : impl_(new Impl), size_(matrix.rows()) {
  require(matrix.rows() == matrix.cols(), ErrorCode::invalid_argument,
          "SpdSolver: matrix must be square");
  ColMat m(matrix);
  impl_->llt.compute(m);
  require(impl_->llt.info() == Eigen::Success, ErrorCode::solver_failure,
          "SpdSolver: Cholesky factorization failed (matrix not positive definite)");
}

SpdSolver::~SpdSolver() = default;
SpdSolver::SpdSolver(SpdSolver&&) noexcept = default;
SpdSolver& SpdSolver::operator=(SpdSolver&&) noexcept = default;

Vec SpdSolver::solve(const Vec& rhs) const {
  require(rhs.size() == size_, ErrorCode::invalid_argument, "SpdSolver: rhs size mismatch");
  return impl_->llt.solve(rhs);
}

struct SparseLuSolver::Impl {
  Eigen::SparseLU<ColMat> lu;
};

SparseLuSolver::SparseLuSolver(const SpMat& matrix) : impl_(new Impl), size_(matrix.rows()) {
  require(matrix.rows() == matrix.cols(), ErrorCode::invalid_argument,
          "SparseLuSolver: matrix must be square");
  ColMat m(matrix);
  impl_->lu.compute(m);
  require(impl_->lu.info() == Eigen::Success, ErrorCode::solver_failure,
          "SparseLuSolver: LU factorization failed: " + impl_->lu.lastErrorMessage());
}

SparseLuSolver::~SparseLuSolver() = default;
SparseLuSolver::SparseLuSolver(SparseLuSolver&&) noexcept = default;
SparseLuSolver& SparseLuSolver::operator=(SparseLuSolver&&) noexcept = default;

Vec SparseLuSolver::solve(const Vec& rhs) const {
  require(rhs.size() == size_, ErrorCode::invalid_argument, "SparseLuSolver: rhs size mismatch");
  return impl_->lu.solve(rhs);
}

Vec direct_solve(const SpMat& matrix, const Vec& rhs) {
  require(matrix.rows() == matrix.cols(), ErrorCode::invalid_argument,
          "direct_solve: matrix must be square");
  require(matrix.rows() == rhs.size(), ErrorCode::invalid_argument,
          "direct_solve: rhs size mismatch");
  SparseLuSolver solver(matrix);
  Vec x = solver.solve(rhs);
  // LU can "succeed" on a numerically singular matrix; verify the solve.
  const double scale = rhs.norm();
  const double residual = (matrix * x - rhs).norm();
  require(residual <= 1e-12 * (scale > 0.0 ? scale : 1.0), ErrorCode::solver_failure,
          "direct_solve: residual check failed (matrix singular or ill-conditioned), "
          "relative residual " + std::to_string(scale > 0.0 ? residual / scale : residual));
  return x;
}

}  // namespace mpac
