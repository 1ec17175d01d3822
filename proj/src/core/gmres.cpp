// core/gmres.cpp -- full (non-restarted) right-preconditioned GMRES.

#include "gmres.hpp"

#include <cmath>

namespace mpac {

namespace {

// Assembles x = M_inv * V(:,0..k) * y from the triangular least-squares data.
Vec assemble_iterate(const LinearOp& right_precond, const std::vector<Vec>& basis, const Mat& hess,
                     const Vec& rhs, int k) {
  Vec y = Vec::Zero(k + 1);
  for (int i = k; i >= 0; --i) {
    double s = rhs(i);
    for (int j = i + 1; j <= k; ++j) s -= hess(i, j) * y(j);
    y(i) = s / hess(i, i);
  }
  Vec v = Vec::Zero(basis.front().size());
  for (int i = 0; i <= k; ++i) v += y(i) * basis[i];
  return right_precond(v);
}

}  // namespace

GmresResult gmres(const LinearOp& op, const LinearOp& right_precond, const Vec& b,
                  const GmresConfig& cfg) {
  require(cfg.rel_tol > 0.0, ErrorCode::invalid_argument, "gmres: rel_tol must be positive");
  require(cfg.max_iter >= 1, ErrorCode::invalid_argument, "gmres: max_iter must be >= 1");

  GmresResult result;
  const double beta = b.norm();
  if (beta == 0.0) {
    result.x = Vec::Zero(b.size());
    result.converged = true;
    return result;
  }

  const int m = cfg.max_iter;
  std::vector<Vec> basis;
  basis.reserve(m + 1);
  basis.push_back(b / beta);

  Mat hess = Mat::Zero(m + 1, m);
  Vec givens_c = Vec::Zero(m), givens_s = Vec::Zero(m);
  Vec rhs = Vec::Zero(m + 1);
  rhs(0) = beta;

  // The Givens estimate can be slightly optimistic in finite precision; after
  // a failed true-residual recheck we keep iterating against a tighter target.
  double target = cfg.rel_tol;

  for (int k = 0; k < m; ++k) {
    Vec w = op(right_precond(basis[k]));

    // Modified Gram-Schmidt plus one reorthogonalization pass.
    for (int i = 0; i <= k; ++i) {
      const double hik = basis[i].dot(w);
      hess(i, k) = hik;
      w -= hik * basis[i];
    }
    for (int i = 0; i <= k; ++i) {
      const double correction = basis[i].dot(w);
      hess(i, k) += correction;
      w -= correction * basis[i];
    }
    hess(k + 1, k) = w.norm();
    const bool breakdown = hess(k + 1, k) == 0.0;
    if (!breakdown) basis.push_back(w / hess(k + 1, k));

    // Apply accumulated rotations to the new column, then zero its subdiagonal.
    for (int i = 0; i < k; ++i) {
      const double t = givens_c(i) * hess(i, k) + givens_s(i) * hess(i + 1, k);
      hess(i + 1, k) = -givens_s(i) * hess(i, k) + givens_c(i) * hess(i + 1, k);
      hess(i, k) = t;
    }
    const double denom = std::hypot(hess(k, k), hess(k + 1, k));
    require(denom > 0.0, ErrorCode::solver_failure, "gmres: breakdown with zero pivot");
    givens_c(k) = hess(k, k) / denom;
    givens_s(k) = hess(k + 1, k) / denom;
    hess(k, k) = denom;
    hess(k + 1, k) = 0.0;
    rhs(k + 1) = -givens_s(k) * rhs(k);
    rhs(k) = givens_c(k) * rhs(k);

    const double estimate = std::abs(rhs(k + 1)) / beta;
    result.residual_history.push_back(estimate);
    result.iterations = k + 1;

    if (estimate <= target || breakdown) {
      result.x = assemble_iterate(right_precond, basis, hess, rhs, k);
      result.rel_residual = (b - op(result.x)).norm() / beta;
      if (result.rel_residual <= cfg.rel_tol) {
        result.converged = true;
        return result;
      }
      if (breakdown) return result;  // exact breakdown: no further progress possible
      target *= 0.25;
    }
  }

  // Out of iterations: hand back the best (final) iterate.
  result.x = assemble_iterate(right_precond, basis, hess, rhs, m - 1);
  result.rel_residual = (b - op(result.x)).norm() / beta;
  result.converged = result.rel_residual <= cfg.rel_tol;
  return result;
}

GmresResult gmres(const LinearOp& op, const Vec& b, const GmresConfig& cfg) {
  return gmres(op, [](const Vec& v) { return v; }, b, cfg);
}

}  // namespace mpac
