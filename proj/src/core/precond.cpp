// core/precond.cpp -- Schur-complement block preconditioners for the saddle system.

#include "precond.hpp"

namespace mpac {

namespace {

constexpr int kExactDeskLimit = 4000;  // constraint dimension cap for the exact kind

}  // namespace

Vec SchurBlocks::apply_d(const Vec& v) const {
  const int nl = static_cast<int>(d11.rows());
  const int nd = static_cast<int>(d22.size());
  require(v.size() == nl + nd, ErrorCode::invalid_argument, "SchurBlocks::apply_d: size mismatch");
  Vec y(nl + nd);
  y.head(nl) = d11 * v.head(nl) + d12 * v.tail(nd);
  y.tail(nd) = d12.transpose() * v.head(nl) + d22.cwiseProduct(v.tail(nd));
  return y;
}

Vec SchurBlocks::apply_bkb(const Vec& v) const {
  const int nl = static_cast<int>(bkb11.rows());
  const int nd = static_cast<int>(bkb22.rows());
  require(v.size() == nl + nd, ErrorCode::invalid_argument, "SchurBlocks::apply_bkb: size mismatch");
  Vec y(nl + nd);
  y.head(nl) = bkb11 * v.head(nl) + bkb12 * v.tail(nd);
  y.tail(nd) = bkb12.transpose() * v.head(nl) + bkb22 * v.tail(nd);
  return y;
}

SchurBlocks build_schur_blocks(const SaddleSystem& sys) {
  require(!sys.trivial, ErrorCode::invalid_argument,
          "build_schur_blocks: empty interface, nothing to precondition");
  const int N = sys.num_phases;
  const int nl = sys.num_lambda();
  const int nd = sys.num_union();

  SchurBlocks blocks;

  // k_i = K_i m_i feeds every B K B' block.
  std::vector<Vec> km(N);
  for (int i = 0; i < N; ++i) km[i] = sys.kblocks[i] * sys.restricted_mass[i];

  if (nl > 0) {
    // D11 = diag(alpha_i) + alpha_N * ones;  alpha_i = m_i'm_i.
    const double alpha_last = sys.restricted_mass[N - 1].squaredNorm();
    blocks.d11 = Mat::Constant(nl, nl, alpha_last);
    for (int l = 0; l < nl; ++l) blocks.d11(l, l) += sys.restricted_mass[l].squaredNorm();

    // D12(l, j) = M_j^2 [j in D_l] - M_j^2 [j in D_N].
    blocks.d12 = Mat::Zero(nl, nd);
    for (int l = 0; l < nl; ++l)
      for (size_t k = 0; k < sys.union_pos[l].size(); ++k) {
        const int p = sys.union_pos[l][k];
        blocks.d12(l, p) += sys.union_mass(p) * sys.union_mass(p);
      }
    for (size_t k = 0; k < sys.union_pos[N - 1].size(); ++k) {
      const int p = sys.union_pos[N - 1][k];
      for (int l = 0; l < nl; ++l) blocks.d12(l, p) -= sys.union_mass(p) * sys.union_mass(p);
    }

    // B1 K B1'(l, l') = delta * m_l'K_l m_l + m_N'K_N m_N.
    const double knn = sys.restricted_mass[N - 1].dot(km[N - 1]);
    blocks.bkb11 = Mat::Constant(nl, nl, knn);
    for (int l = 0; l < nl; ++l) blocks.bkb11(l, l) += sys.restricted_mass[l].dot(km[l]);

    // B1 K B2'(l, j) = M_j (K_l m_l)_j [j in D_l] - M_j (K_N m_N)_j [j in D_N].
    blocks.bkb12 = Mat::Zero(nl, nd);
    for (int l = 0; l < nl; ++l)
      for (size_t k = 0; k < sys.union_pos[l].size(); ++k) {
        const int p = sys.union_pos[l][k];
        blocks.bkb12(l, p) += sys.union_mass(p) * km[l](static_cast<int>(k));
      }
    for (size_t k = 0; k < sys.union_pos[N - 1].size(); ++k) {
      const int p = sys.union_pos[N - 1][k];
      for (int l = 0; l < nl; ++l)
        blocks.bkb12(l, p) -= sys.union_mass(p) * km[N - 1](static_cast<int>(k));
    }
  } else {
    blocks.d11.resize(0, 0);
    blocks.d12.resize(0, nd);
    blocks.bkb11.resize(0, 0);
    blocks.bkb12.resize(0, nd);
  }

  // D22 and B2 K B2' accumulate one scaled block per phase.
  blocks.d22 = Vec::Zero(nd);
  std::vector<Eigen::Triplet<double>> trips;
  for (int i = 0; i < N; ++i) {
    const auto& pos = sys.union_pos[i];
    for (size_t k = 0; k < pos.size(); ++k)
      blocks.d22(pos[k]) += sys.union_mass(pos[k]) * sys.union_mass(pos[k]);
    for (int r = 0; r < sys.kblocks[i].rows(); ++r)
      for (SpMat::InnerIterator it(sys.kblocks[i], r); it; ++it)
        trips.emplace_back(pos[r], pos[it.col()],
                           sys.union_mass(pos[r]) * sys.union_mass(pos[it.col()]) * it.value());
  }
  blocks.bkb22.resize(nd, nd);
  blocks.bkb22.setFromTriplets(trips.begin(), trips.end());
  blocks.bkb22.makeCompressed();
  require(blocks.d22.minCoeff() > 0.0, ErrorCode::solver_failure,
          "build_schur_blocks: singular D22 block (node in D belongs to no D_i)");

  if (N == 2 && sys.mass_constrained) {
    SpdSolver k1(sys.kblocks[0]);
    const Vec& m1 = sys.restricted_mass[0];
    const double mm = m1.squaredNorm();
    blocks.a = m1.dot(k1.solve(m1)) * m1.dot(km[0]) / (mm * mm);
  }
  return blocks;
}

void restore_constraints(const SaddleSystem& sys, const SchurBlocks& blocks, Vec* x) {
  require(x != nullptr && x->size() == sys.total_dim(), ErrorCode::invalid_argument,
          "restore_constraints: size mismatch");
  const int omega = sys.omega();
  const int nl = sys.num_lambda();
  const int nd = sys.num_union();
  if (nd == 0) return;

  const Vec rho = sys.rhs.tail(nl + nd) - sys.apply_constraints(x->head(omega));
  const Vec inv_d22 = blocks.d22.cwiseInverse();
  Vec y(nl + nd);
  if (nl == 0) {
    y = inv_d22.cwiseProduct(rho);
  } else {
    // D solve by block elimination; the pivot D11 - D12 D22^-1 D21 is the SPD
    // Gram Schur complement of B B'.
    const Mat pivot =
        blocks.d11 - blocks.d12 * inv_d22.asDiagonal() * blocks.d12.transpose();
    Eigen::LLT<Mat> llt(pivot);
    require(llt.info() == Eigen::Success, ErrorCode::solver_failure,
            "restore_constraints: rank-deficient constraint rows (degenerate active sets)");
    const Vec y1 = llt.solve(rho.head(nl) - blocks.d12 * inv_d22.cwiseProduct(rho.tail(nd)));
    y.head(nl) = y1;
    y.tail(nd) = inv_d22.cwiseProduct(rho.tail(nd) - blocks.d12.transpose() * y1);
  }
  x->head(omega) += sys.apply_constraints_t(y);
}

Preconditioner::Preconditioner(const SaddleSystem& sys, const SchurBlocks& blocks,
                               PrecondKind kind, KblockMode kblock_mode)
    : sys_(&sys), blocks_(&blocks), kind_(kind), kblock_mode_(kblock_mode) {
  require(!sys.trivial, ErrorCode::invalid_argument, "Preconditioner: trivial system");
  const int N = sys.num_phases;
  const int nl = sys.num_lambda();
  const int nd = sys.num_union();

  // Direct K factorizations: needed by the chosen kblock mode, and also by
  // the exact/p1 Schur constructions, which are defined through exact solves.
  if (kblock_mode == KblockMode::direct || kind == PrecondKind::exact || kind == PrecondKind::p1) {
    kblock_direct_.reserve(N);
    for (int i = 0; i < N; ++i) kblock_direct_.emplace_back(sys.kblocks[i]);
  }
  if (kblock_mode == KblockMode::amg3) {
    kblock_amg_.reserve(N);
    for (int i = 0; i < N; ++i) kblock_amg_.push_back(amg_setup(sys.kblocks[i]));
  }

  switch (kind) {
    case PrecondKind::exact: {
      require(kblock_mode == KblockMode::direct, ErrorCode::unsupported,
              "Preconditioner: exact Schur kind requires direct K-block solves");
      require(nl + nd <= kExactDeskLimit, ErrorCode::unsupported,
              "Preconditioner: exact Schur kind is gated to desk-scale instances");
      Mat s(nl + nd, nl + nd);
      Vec e = Vec::Zero(nl + nd);
      for (int c = 0; c < nl + nd; ++c) {
        e(c) = 1.0;
        s.col(c) = sys.apply_constraints(solve_kblocks(sys.apply_constraints_t(e)));
        e(c) = 0.0;
      }
      exact_schur_lu_.compute(s);
      require(exact_schur_lu_.matrixLU().diagonal().cwiseAbs().minCoeff() > 0.0,
              ErrorCode::solver_failure, "Preconditioner: exact Schur matrix is singular");
      break;
    }
    case PrecondKind::p1: {
      if (nl > 0) {
        // S11 = (1/N) B1 K^-1 B1' via exact per-phase solves.
        std::vector<Vec> kinv_m(N);
        for (int i = 0; i < N; ++i) kinv_m[i] = kblock_direct_[i].solve(sys.restricted_mass[i]);
        const double tail = sys.restricted_mass[N - 1].dot(kinv_m[N - 1]);
        Mat s11 = Mat::Constant(nl, nl, tail);
        for (int l = 0; l < nl; ++l) s11(l, l) += sys.restricted_mass[l].dot(kinv_m[l]);
        p1_s11_lu_.compute(s11 / static_cast<double>(N));
        require(p1_s11_lu_.isInvertible(), ErrorCode::solver_failure,
                "Preconditioner: singular P1 S11 block (degenerate active sets)");
      }
      break;
    }
    case PrecondKind::p2: {
      if (nl > 0) {
        d11_lu_.compute(blocks.d11);
        require(d11_lu_.isInvertible(), ErrorCode::solver_failure,
                "Preconditioner: singular D11 block (degenerate active sets)");
      }
      break;
    }
    case PrecondKind::p3: {
      if (nl > 0) {
        const Mat small_schur =
            blocks.d11 - blocks.d12 * blocks.d22.cwiseInverse().asDiagonal() *
                             blocks.d12.transpose();
        small_schur_lu_.compute(small_schur);
        require(small_schur_lu_.isInvertible(), ErrorCode::solver_failure,
                "Preconditioner: singular D Schur complement (degenerate active sets)");
      }
      break;
    }
  }
}

Vec Preconditioner::solve_kblocks(const Vec& vu) const {
  const int N = sys_->num_phases;
  Vec y(sys_->omega());
  for (int i = 0; i < N; ++i) {
    const int off = sys_->phase_offset[i];
    const int sz = sys_->phase_offset[i + 1] - off;
    if (sz == 0) continue;
    if (kblock_mode_ == KblockMode::direct)
      y.segment(off, sz) = kblock_direct_[i].solve(vu.segment(off, sz));
    else
      y.segment(off, sz) = amg_apply(kblock_amg_[i], vu.segment(off, sz));
  }
  return y;
}

Vec Preconditioner::solve_d(const Vec& v) const {
  const int nl = sys_->num_lambda();
  const int nd = sys_->num_union();
  const Vec inv_d22 = blocks_->d22.cwiseInverse();
  if (nl == 0) return inv_d22.cwiseProduct(v);
  // Block elimination through the (N-1) x (N-1) Schur complement.
  const Vec y1 = small_schur_lu_.solve(v.head(nl) -
                                       blocks_->d12 * inv_d22.cwiseProduct(v.tail(nd)));
  Vec y(nl + nd);
  y.head(nl) = y1;
  y.tail(nd) = inv_d22.cwiseProduct(v.tail(nd) - blocks_->d12.transpose() * y1);
  return y;
}

Vec Preconditioner::apply_schur_inverse(const Vec& vc) const {
  const int nl = sys_->num_lambda();
  const int nd = sys_->num_union();
  require(vc.size() == nl + nd, ErrorCode::invalid_argument,
          "apply_schur_inverse: size mismatch");

  switch (kind_) {
    case PrecondKind::exact:
      return exact_schur_lu_.solve(vc);
    case PrecondKind::p1: {
      Vec w(nl + nd);
      if (nl > 0) w.head(nl) = p1_s11_lu_.solve(vc.head(nl));
      // (I + 11')^-1 = I - 11'/(|D|+1).
      const double mean_shift = vc.tail(nd).sum() / (nd + 1.0);
      w.tail(nd) = vc.tail(nd).array() - mean_shift;
      return w;
    }
    case PrecondKind::p2: {
      Vec w(nl + nd);
      if (nl > 0) w.head(nl) = d11_lu_.solve(blocks_->bkb11 * d11_lu_.solve(vc.head(nl)));
      const Vec inv_d22 = blocks_->d22.cwiseInverse();
      w.tail(nd) = inv_d22.cwiseProduct(blocks_->bkb22 * inv_d22.cwiseProduct(vc.tail(nd)));
      return w;
    }
    case PrecondKind::p3:
      return solve_d(blocks_->apply_bkb(solve_d(vc)));
  }
  fail(ErrorCode::internal, "apply_schur_inverse: unknown preconditioner kind");
}

Vec Preconditioner::apply_inverse(const Vec& v) const {
  require(v.size() == sys_->total_dim(), ErrorCode::invalid_argument,
          "Preconditioner::apply_inverse: size mismatch");
  const int omega = sys_->omega();
  const int nc = sys_->num_lambda() + sys_->num_union();

  // (i) Schur part, (ii) B' coupling and sign flip, (iii) K-block solve.
  const Vec wc = apply_schur_inverse(v.tail(nc));
  const Vec zu = v.head(omega) + sys_->apply_constraints_t(wc);
  Vec x(v.size());
  x.head(omega) = solve_kblocks(zu);
  x.tail(nc) = -wc;
  return x;
}

}  // namespace mpac
