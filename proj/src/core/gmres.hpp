// core/gmres.hpp -- full (non-restarted) right-preconditioned GMRES.

#pragma once

#include "types.hpp"

#include <functional>
#include <vector>

namespace mpac {

using LinearOp = std::function<Vec(const Vec&)>;

struct GmresConfig {
  double rel_tol = 1e-10;  // relative residual target (true residual, rechecked)
  int max_iter = 200;      // Krylov dimension cap; no restarting
};

struct GmresResult {
  Vec x;
  int iterations = 0;
  double rel_residual = 0.0;            // true relative residual of x
  bool converged = false;
  std::vector<double> residual_history; // Givens residual estimates, one per iteration
};

// Solves A x = b with right preconditioning: GMRES runs on A*M_inv and the
// returned x is M_inv applied to the Krylov solution.  Zero initial guess.
// Arnoldi uses modified Gram-Schmidt with one reorthogonalization pass; the
// least-squares problem is updated with Givens rotations.  Convergence is
// declared only after the unpreconditioned residual of the assembled iterate
// passes rel_tol.  b = 0 returns x = 0 in zero iterations.  Nonconvergence is
// reported in the result (best iterate retained), not thrown.
GmresResult gmres(const LinearOp& op, const LinearOp& right_precond, const Vec& b,
                  const GmresConfig& cfg = {});

// Unpreconditioned convenience overload.
GmresResult gmres(const LinearOp& op, const Vec& b, const GmresConfig& cfg = {});

}  // namespace mpac
