// core/spectrum.hpp -- two-phase eigenvalue diagnostic for K * P3^-1.

#pragma once

#include "saddle.hpp"
#include "types.hpp"

#include <complex>
#include <vector>

namespace mpac {

struct SpectrumResult {
  std::vector<std::complex<double>> eigenvalues;  // spectrum of K * P3^-1
  double a = 0.0;          // theorem scalar (m'K1^-1 m)(m'K1 m)/(m'm)^2
  double max_distance = 0.0;  // max over eigenvalues of min(|z - 1|, |z - a|)
};

// Dense eigendecomposition of the P3-preconditioned two-phase saddle matrix.
// In the two-phase mass-constrained case the operator is block lower
// triangular with spectrum {1, a}, but it is defective at 1 (Jordan blocks of
// size 2), so a double-precision eigensolve scatters that cluster by roughly
// sqrt(machine epsilon) ~ 1e-8.  Everything here -- block formation, the
// Schur algebra, and the eigensolve -- therefore runs in 80-bit long double,
// which keeps the scatter near 1e-10.  Requires N = 2 with the mass
// constraint active and total dimension <= 2000.
SpectrumResult two_phase_spectrum(const SaddleSystem& sys);

}  // namespace mpac
