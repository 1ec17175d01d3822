// core/direct.hpp -- sparse direct factorizations (desk-scale exact solves).

#pragma once

#include "types.hpp"

#include <memory>

namespace mpac {

// Cholesky factorization for the SPD K blocks.  Build once per PDAS sweep,
// then solve repeatedly inside the preconditioner.
class SpdSolver {
public:
  explicit SpdSolver(const SpMat& matrix);
  ~SpdSolver();
  SpdSolver(SpdSolver&&) noexcept;
  SpdSolver& operator=(SpdSolver&&) noexcept;

  Vec solve(const Vec& rhs) const;
  int size() const { return size_; }

private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
  int size_ = 0;
};

// General sparse LU for symmetric-indefinite saddle matrices.
class SparseLuSolver {
public:
  explicit SparseLuSolver(const SpMat& matrix);
  ~SparseLuSolver();
  SparseLuSolver(SparseLuSolver&&) noexcept;
  SparseLuSolver& operator=(SparseLuSolver&&) noexcept;

  Vec solve(const Vec& rhs) const;
  int size() const { return size_; }

private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
  int size_ = 0;
};

// One-shot solve with a post-factorization residual verification, so a
// numerically singular matrix raises an error instead of returning garbage.
// Intended for desk-scale matrices (<= 2e5 unknowns).
Vec direct_solve(const SpMat& matrix, const Vec& rhs);

}  // namespace mpac
