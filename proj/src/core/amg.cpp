// core/amg.cpp -- smoothed-aggregation algebraic multigrid for SPD matrices.

#include "amg.hpp"

#include <cmath>
#include <numeric>
#include <vector>

namespace mpac {

namespace {

// Strong-connection graph: keep off-diagonal (i,j) with |a_ij| > theta*sqrt(a_ii a_jj).
std::vector<std::vector<int>> strength_graph(const SpMat& a, double theta) {
  const int n = a.rows();
  Vec diag = a.diagonal();
  std::vector<std::vector<int>> strong(n);
  for (int i = 0; i < n; ++i)
    for (SpMat::InnerIterator it(a, i); it; ++it) {
      const int j = it.col();
      if (j == i) continue;
      if (std::abs(it.value()) > theta * std::sqrt(diag(i) * diag(j))) strong[i].push_back(j);
    }
  return strong;
}

// Greedy aggregation over the strength graph (root sweep, then attach
// leftovers to their strongest neighbor aggregate, then singletons).
std::vector<int> aggregate(const SpMat& a, const std::vector<std::vector<int>>& strong,
                           int* num_aggregates) {
  const int n = a.rows();
  std::vector<int> agg(n, -1);
  int count = 0;

  // Pass 1: nodes whose strong neighborhood is entirely unaggregated become
  // roots and absorb that neighborhood.
  for (int i = 0; i < n; ++i) {
    if (agg[i] != -1 || strong[i].empty()) continue;
    bool free_neighborhood = true;
    for (int j : strong[i])
      if (agg[j] != -1) {
        free_neighborhood = false;
        break;
      }
    if (!free_neighborhood) continue;
    agg[i] = count;
    for (int j : strong[i]) agg[j] = count;
    ++count;
  }

  // Pass 2: attach remaining nodes to the strongest neighboring aggregate.
  for (int i = 0; i < n; ++i) {
    if (agg[i] != -1) continue;
    int best = -1;
    double best_weight = 0.0;
    for (SpMat::InnerIterator it(a, i); it; ++it) {
      const int j = it.col();
      if (j == i || agg[j] == -1) continue;
      const double w = std::abs(it.value());
      if (w > best_weight || (w == best_weight && best != -1 && agg[j] < best)) {
        best_weight = w;
        best = agg[j];
      }
    }
    if (best != -1) agg[i] = best;
  }

  // Pass 3: whatever is left becomes singleton aggregates.
  for (int i = 0; i < n; ++i)
    if (agg[i] == -1) agg[i] = count++;

  *num_aggregates = count;
  return agg;
}

// Fallback pairing: merge aggregates (graph neighbors first, index order
// otherwise) until the count is at most n/2, so coarsening never stalls even
// when the mass term dominates and no connections pass the strength test.
void enforce_coarsening(const SpMat& a, std::vector<int>* agg, int* num_aggregates) {
  const int n = a.rows();
  const int target = std::max(1, n / 2);
  while (*num_aggregates > target) {
    const int count = *num_aggregates;
    std::vector<int> merge_with(count);
    std::iota(merge_with.begin(), merge_with.end(), 0);
    std::vector<bool> taken(count, false);

    // Prefer merging along matrix connectivity for better coarse operators.
    for (int i = 0; i < n; ++i) {
      const int gi = (*agg)[i];
      if (taken[gi]) continue;
      for (SpMat::InnerIterator it(a, i); it; ++it) {
        const int gj = (*agg)[it.col()];
        if (gj == gi || taken[gj]) continue;
        const int lo = std::min(gi, gj), hi = std::max(gi, gj);
        merge_with[hi] = lo;
        taken[lo] = taken[hi] = true;
        break;
      }
    }
    // Pair any aggregates the graph pass missed, in index order.
    int pending = -1;
    for (int g = 0; g < count; ++g) {
      if (taken[g]) continue;
      if (pending == -1) {
        pending = g;
      } else {
        merge_with[g] = pending;
        taken[pending] = taken[g] = true;
        pending = -1;
      }
    }

    // Compress merge targets to a dense renumbering.
    std::vector<int> renumber(count, -1);
    int next = 0;
    for (int g = 0; g < count; ++g)
      if (merge_with[g] == g) renumber[g] = next++;
    for (int g = 0; g < count; ++g)
      if (renumber[g] == -1) renumber[g] = renumber[merge_with[g]];
    for (int i = 0; i < n; ++i) (*agg)[i] = renumber[(*agg)[i]];
    if (next == count) break;  // nothing mergeable (should not happen for n >= 2)
    *num_aggregates = next;
  }
}

double estimate_spectral_radius(const SpMat& a, const Vec& inv_diag, int iterations) {
  const int n = a.rows();
  Vec v(n);
  for (int i = 0; i < n; ++i) v(i) = 1.0 + 0.5 * std::cos(static_cast<double>(i));
  v.normalize();
  double radius = 1.0;
  for (int k = 0; k < iterations; ++k) {
    Vec w = inv_diag.cwiseProduct(a * v);
    radius = w.norm();
    if (radius == 0.0) return 1.0;
    v = w / radius;
  }
  return radius;
}

void gauss_seidel_forward(const SpMat& a, const Vec& f, Vec* x) {
  const int n = a.rows();
  for (int i = 0; i < n; ++i) {
    double sum = f(i);
    double diag = 0.0;
    for (SpMat::InnerIterator it(a, i); it; ++it) {
      if (it.col() == i)
        diag = it.value();
      else
        sum -= it.value() * (*x)(it.col());
    }
    (*x)(i) = sum / diag;
  }
}

void gauss_seidel_backward(const SpMat& a, const Vec& f, Vec* x) {
  for (int i = a.rows() - 1; i >= 0; --i) {
    double sum = f(i);
    double diag = 0.0;
    for (SpMat::InnerIterator it(a, i); it; ++it) {
      if (it.col() == i)
        diag = it.value();
      else
        sum -= it.value() * (*x)(it.col());
    }
    (*x)(i) = sum / diag;
  }
}

Vec vcycle(const AmgHierarchy& h, int level, const Vec& f) {
  const SpMat& a = h.operators[level];
  if (level == h.num_levels() - 1) return h.coarse_factor.solve(f);

  Vec x = Vec::Zero(a.rows());
  gauss_seidel_forward(a, f, &x);
  const Vec residual = f - a * x;
  const Vec coarse = vcycle(h, level + 1, h.prolongations[level].transpose() * residual);
  x += h.prolongations[level] * coarse;
  gauss_seidel_backward(a, f, &x);
  return x;
}

}  // namespace

AmgHierarchy amg_setup(const SpMat& matrix, const AmgOptions& options) {
  require(matrix.rows() == matrix.cols(), ErrorCode::invalid_argument,
          "amg_setup: matrix must be square");
  require(matrix.rows() >= 1, ErrorCode::invalid_argument, "amg_setup: empty matrix");

  AmgHierarchy h;
  h.options = options;
  h.operators.push_back(matrix);
  h.operators.back().makeCompressed();

  while (h.operators.back().rows() > options.coarse_size &&
         h.num_levels() < options.max_levels) {
    const SpMat& a = h.operators.back();
    const int n = a.rows();

    Vec diag = a.diagonal();
    require(diag.minCoeff() > 0.0, ErrorCode::solver_failure,
            "amg_setup: non-SPD input (nonpositive diagonal entry)");

    const auto strong = strength_graph(a, options.strength_threshold);
    int num_agg = 0;
    std::vector<int> agg = aggregate(a, strong, &num_agg);
    enforce_coarsening(a, &agg, &num_agg);

    // Tentative piecewise-constant prolongation, then one Jacobi smoothing
    // step P = (I - omega D^-1 A) T with omega = 4/3 / rho(D^-1 A).
    const Vec inv_diag = diag.cwiseInverse();
    const double rho = estimate_spectral_radius(a, inv_diag, options.power_iterations);
    const double omega = (4.0 / 3.0) / rho;

    std::vector<Eigen::Triplet<double>> trips;
    trips.reserve(a.nonZeros());
    for (int i = 0; i < n; ++i) {
      for (SpMat::InnerIterator it(a, i); it; ++it)
        trips.emplace_back(i, agg[it.col()], -omega * inv_diag(i) * it.value());
      trips.emplace_back(i, agg[i], 1.0);
    }
    SpMat p(n, num_agg);
    p.setFromTriplets(trips.begin(), trips.end());
    p.prune([](int, int, double v) { return v != 0.0; });
    p.makeCompressed();

    // Galerkin triple product through column-major intermediates (Eigen's
    // pruned product is not instantiated for the all-row-major case).
    using SpMatCol = Eigen::SparseMatrix<double>;
    const SpMatCol pc = p;
    SpMat coarse = SpMat(SpMatCol((pc.transpose() * SpMatCol(a * p)).pruned()));
    coarse.makeCompressed();
    h.prolongations.push_back(std::move(p));
    h.operators.push_back(std::move(coarse));
  }

  Mat dense = Mat(h.operators.back());
  h.coarse_factor.compute(dense);
  require(h.coarse_factor.info() == Eigen::Success, ErrorCode::solver_failure,
          "amg_setup: coarsest-level Cholesky failed (matrix not SPD)");
  return h;
}

Vec amg_apply(const AmgHierarchy& hierarchy, const Vec& rhs) {
  require(rhs.size() == hierarchy.operators.front().rows(), ErrorCode::invalid_argument,
          "amg_apply: rhs size mismatch");
  Vec x = Vec::Zero(rhs.size());
  for (int cycle = 0; cycle < hierarchy.options.cycles_per_apply; ++cycle) {
    const Vec residual = rhs - hierarchy.operators.front() * x;
    x += vcycle(hierarchy, 0, residual);
  }
  return x;
}

}  // namespace mpac
