// core/amg.hpp -- smoothed-aggregation algebraic multigrid for SPD matrices.
//
// Used as the inexact K-block solver inside the saddle preconditioners: one
// application performs exactly three V(1,1)-cycles with Gauss-Seidel smoothing
// starting from zero, which is a fixed linear operator and therefore a valid
// right preconditioner for standard (non-flexible) GMRES.

#pragma once

#include "types.hpp"

#include <Eigen/Cholesky>

#include <vector>

namespace mpac {

struct AmgOptions {
  double strength_threshold = 0.08;  // |a_ij| > theta * sqrt(a_ii a_jj)
  int max_levels = 25;
  int coarse_size = 64;              // direct solve at or below this size
  int cycles_per_apply = 3;
  int power_iterations = 20;         // spectral-radius estimate for the smoothing weight
};

struct AmgHierarchy {
  std::vector<SpMat> operators;       // operators[0] = fine matrix
  std::vector<SpMat> prolongations;   // prolongations[l]: level l+1 -> level l
  Eigen::LLT<Mat> coarse_factor;      // dense Cholesky of the coarsest operator
  AmgOptions options;

  int num_levels() const { return static_cast<int>(operators.size()); }
};

// Builds the hierarchy: strength-filtered greedy aggregation (with a
// deterministic pairing fallback so every level coarsens by at least 2x),
// Jacobi-smoothed tentative prolongation, Galerkin coarse operators P'AP.
AmgHierarchy amg_setup(const SpMat& matrix, const AmgOptions& options = {});

// Exactly options.cycles_per_apply V(1,1)-cycles from a zero start: forward
// Gauss-Seidel pre-smoothing, backward post-smoothing, dense coarsest solve.
Vec amg_apply(const AmgHierarchy& hierarchy, const Vec& rhs);

}  // namespace mpac
