// core/precond.hpp -- Schur-complement block preconditioners for the saddle system.
//
// All preconditioners share the block upper-triangular shape
//
//        P = [ K   B' ]         with  S approximating  S_exact = B K^-1 B',
//            [ 0  -S  ]
//
// so that K*P^-1 has eigenvalue 1 with high multiplicity plus the spectrum of
// S_exact*S^-1.  Application of P^-1 factors into (i) a Schur solve on the
// constraint components, (ii) the B' coupling with a sign flip, (iii) a
// K-block solve (direct Cholesky or exactly 3 AMG V-cycles).
//
// Variants:
//   exact  S = B K^-1 B' formed densely (desk-scale diagnostics only),
//   p1     S = diag((1/N) B1 K^-1 B1',  I + 11'),
//   p2     S = diag(D11 (B1 K B1')^-1 D11,  D22 (B2 K B2')^-1 D22),
//   p3     S = D (B K B')^-1 D  with  D = B B',
// where D11/D12/D22 are the blocks of D = B B' and D is inverted through the
// (N-1) x (N-1) Schur complement D11 - D12 D22^-1 D21 (D22 is diagonal).

#pragma once

#include "amg.hpp"
#include "direct.hpp"
#include "saddle.hpp"
#include "types.hpp"

#include <vector>

namespace mpac {

enum class PrecondKind { exact, p1, p2, p3 };
enum class KblockMode { direct, amg3 };

struct SchurBlocks {
  // Blocks of D = B B'.
  Mat d11;   // (N-1) x (N-1): diag(alpha_i) + alpha_N * ones, alpha_i = m_i'm_i
  Mat d12;   // (N-1) x |D|:   B1 B2' (zero in the two-phase case)
  Vec d22;   // diagonal of B2 B2': sum over phases containing j of M_j^2
  // Blocks of B K B'.
  Mat bkb11;    // B1 K B1'
  Mat bkb12;    // B1 K B2'
  SpMat bkb22;  // B2 K B2'
  // Two-phase diagnostic scalar of the spectrum theorem (0 unless N == 2 with
  // the mass constraint active): a = (m'K1^-1 m)(m'K1 m)/(m'm)^2.
  double a = 0.0;

  Vec apply_d(const Vec& v) const;    // D * v
  Vec apply_bkb(const Vec& v) const;  // B K B' * v
};

SchurBlocks build_schur_blocks(const SaddleSystem& sys);

// Projects the primal part of a solved saddle vector back onto the constraint
// rows:  x_u += B' (B B')^-1 (g - B x_u).  A Krylov solve stops at a relative
// residual over the whole system, which can leave the saturation rows (scaled
// by the small nodal masses) short of nodewise tolerances; this one cheap
// D-solve makes the constraint rows exact to rounding while perturbing the
// PDE rows by no more than the amount GMRES already left unresolved.
void restore_constraints(const SaddleSystem& sys, const SchurBlocks& blocks, Vec* x);

class Preconditioner {
public:
  // Borrows sys/blocks; both must outlive the preconditioner.
  Preconditioner(const SaddleSystem& sys, const SchurBlocks& blocks, PrecondKind kind,
                 KblockMode kblock_mode);

  Vec apply_inverse(const Vec& v) const;

  PrecondKind kind() const { return kind_; }
  KblockMode kblock_mode() const { return kblock_mode_; }

  // Schur factor alone (S^-1 on constraint components); used by tests.
  Vec apply_schur_inverse(const Vec& vc) const;

private:
  Vec solve_kblocks(const Vec& vu) const;
  Vec solve_d(const Vec& v) const;  // D^-1 via the block factorization

  const SaddleSystem* sys_;
  const SchurBlocks* blocks_;
  PrecondKind kind_;
  KblockMode kblock_mode_;

  std::vector<SpdSolver> kblock_direct_;
  std::vector<AmgHierarchy> kblock_amg_;
  Eigen::PartialPivLU<Mat> exact_schur_lu_;  // dense S_exact (exact kind)
  Eigen::FullPivLU<Mat> p1_s11_lu_;          // (1/N) B1 K^-1 B1'
  Eigen::FullPivLU<Mat> d11_lu_;             // D11 (p2)
  Eigen::FullPivLU<Mat> small_schur_lu_;     // D11 - D12 D22^-1 D21 (p3)
};

}  // namespace mpac
