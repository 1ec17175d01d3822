// core/spectrum.cpp -- two-phase eigenvalue diagnostic for K * P3^-1.

#include "spectrum.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>

namespace mpac {

namespace {

using Ld = long double;
using MatL = Eigen::Matrix<Ld, Eigen::Dynamic, Eigen::Dynamic>;
using VecL = Eigen::Matrix<Ld, Eigen::Dynamic, 1>;

}  // namespace

SpectrumResult two_phase_spectrum(const SaddleSystem& sys) {
  require(sys.num_phases == 2, ErrorCode::invalid_argument,
          "two_phase_spectrum: requires exactly two phases");
  require(sys.mass_constrained, ErrorCode::unsupported,
          "two_phase_spectrum: requires the mass-constrained problem");
  require(!sys.trivial, ErrorCode::invalid_argument, "two_phase_spectrum: trivial system");
  const int dim = sys.total_dim();
  require(dim <= 2000, ErrorCode::unsupported,
          "two_phase_spectrum: gated to desk-scale dimensions (<= 2000)");

  const int omega = sys.omega();
  const int nc = sys.num_lambda() + sys.num_union();

  // The sparse entries are exact doubles; lifting them to long double is
  // lossless.  All products and inverses from here on stay in long double.
  MatL full = MatL::Zero(dim, dim);
  {
    const SpMat k = sys.assemble_sparse();
    for (int r = 0; r < k.rows(); ++r)
      for (SpMat::InnerIterator it(k, r); it; ++it)
        full(r, it.col()) = static_cast<Ld>(it.value());
  }
  const MatL kblock = full.topLeftCorner(omega, omega);
  const MatL b = full.bottomLeftCorner(nc, omega);

  // P3's Schur block S = D (B K B')^-1 D with D = B B'.
  const MatL d = b * b.transpose();
  const MatL bkb = b * kblock * b.transpose();
  const MatL schur = d * bkb.partialPivLu().solve(d);

  MatL p = MatL::Zero(dim, dim);
  p.topLeftCorner(omega, omega) = kblock;
  p.topRightCorner(omega, nc) = b.transpose();
  p.bottomRightCorner(nc, nc) = -schur;

  // M = K P^-1  via  M' = P^-T K'.
  const MatL preconditioned =
      p.transpose().partialPivLu().solve(full.transpose()).transpose();

  Eigen::EigenSolver<MatL> es(preconditioned);
  require(es.info() == Eigen::Success, ErrorCode::solver_failure,
          "two_phase_spectrum: eigensolver did not converge");

  // Theorem scalar from phase 1's block.
  const int sz1 = sys.phase_offset[1];
  VecL m1(sz1);
  for (int k = 0; k < sz1; ++k) m1(k) = static_cast<Ld>(sys.restricted_mass[0](k));
  const MatL k1 = kblock.topLeftCorner(sz1, sz1);
  const Ld mm = m1.squaredNorm();
  const Ld a_ld = m1.dot(k1.llt().solve(m1)) * m1.dot(k1 * m1) / (mm * mm);

  SpectrumResult result;
  result.a = static_cast<double>(a_ld);
  result.eigenvalues.reserve(dim);
  Ld max_dist = 0.0;
  for (int i = 0; i < dim; ++i) {
    const std::complex<Ld> z = es.eigenvalues()(i);
    result.eigenvalues.emplace_back(static_cast<double>(z.real()),
                                    static_cast<double>(z.imag()));
    const Ld dist_one = std::abs(z - std::complex<Ld>(1.0L, 0.0L));
    const Ld dist_a = std::abs(z - std::complex<Ld>(a_ld, 0.0L));
    max_dist = std::max(max_dist, std::min(dist_one, dist_a));
  }
  result.max_distance = static_cast<double>(max_dist);
  std::sort(result.eigenvalues.begin(), result.eigenvalues.end(),
            [](const std::complex<double>& x, const std::complex<double>& y) {
              return x.real() != y.real() ? x.real() < y.real() : x.imag() < y.imag();
            });
  return result;
}

}  // namespace mpac
