#pragma once

#include "adacur/rank_est.hpp"

namespace adacur {

/// Row indices I, column indices J and oversampling rows I0, all 0-based and
/// global, most important first.
struct IndexSelection {
  IndexList rows;
  IndexList cols;
  IndexList oversample_rows;

  Index rank() const { return static_cast<Index>(cols.size()); }
  /// I followed by I0.
  IndexList all_rows() const { return concat(rows, oversample_rows); }
  bool empty() const { return rows.empty() && cols.empty() && oversample_rows.empty(); }

  friend bool operator==(const IndexSelection&, const IndexSelection&) = default;
};

/// Checks the structural invariants against an m x n matrix.
inline bool is_valid_selection(const IndexSelection& sel, Index m, Index n) {
  auto in = [](const IndexList& l, Index b) {
    return std::all_of(l.begin(), l.end(), [b](Index i) { return i >= 0 && i < b; });
  };
  return in(sel.rows, m) && in(sel.oversample_rows, m) && in(sel.cols, n) && !has_duplicates(sel.rows) &&
         !has_duplicates(sel.cols) && !has_duplicates(sel.oversample_rows) &&
         disjoint(sel.rows, sel.oversample_rows);
}

/// Row ids of the first `count` CPQR pivots of A(:, cols)^T, i.e. CPQR on the
/// selected columns rather than on a column sketch.
inline IndexList row_pivots_from_columns(const Matrix& columns, Index count) {
  if (columns.cols() == 0 || count <= 0) return {};
  return cpqr_pivots(columns.transpose(), count);
}

/// Pivoting on a random sketch. J: first r CPQR pivots of X = Gamma A (the
/// given presketch, or a fresh Gaussian sketch with min(2r, n) rows).
/// I: first r CPQR pivots of A(:, J)^T. I0 is left empty.
inline IndexSelection rand_pivot(const MatrixOracle& oracle, Index r, std::uint64_t seed,
                                 const Matrix* presketch = nullptr) {
  const Index m = oracle.rows();
  const Index n = oracle.cols();
  require(r >= 1 && r <= std::min(m, n), "rand_pivot: r must be in [1, min(m, n)]");

  Matrix fresh;
  if (presketch) {
    require(presketch->rows() >= r && presketch->cols() == n,
            "rand_pivot: presketch must have >= r rows and n columns");
  } else {
    GaussianEmbedding gamma(std::min(2 * r, n), m, seed, true);
    fresh = row_sketch(gamma, oracle);
  }
  const Matrix& x = presketch ? *presketch : fresh;

  IndexSelection sel;
  sel.cols = cpqr_pivots(x, r);
  sel.rows = row_pivots_from_columns(oracle.col_block(sel.cols), r);
  return sel;
}

struct PivotResult {
  IndexSelection selection;
  Index estimated_rank = 0;
  /// Rank estimate was zero; the selection is empty.
  bool degenerate = false;
  /// The rank tolerance was not resolved within the sketch budget; the
  /// capped rank was used.
  bool rank_capped = false;
};

/// Randomized rank estimation fused with pivoting: the row sketch Gamma_1 A
/// formed by the estimator is reused as the pivoting presketch, so A is
/// sketched only once.
inline PivotResult rand_pivot_rankest(const MatrixOracle& oracle, double tol, std::uint64_t seed,
                                      TolKind kind = TolKind::absolute) {
  require(tol > 0, "rand_pivot_rankest: tolerance must be positive");
  PivotResult out;
  RankEstimate est;
  try {
    est = estimate_rank(oracle, tol, seed, {.kind = kind});
  } catch (const RankTolNotResolved& e) {
    est = e.partial();
    out.rank_capped = true;
  }
  out.estimated_rank = est.rank;
  if (est.rank == 0) {
    out.degenerate = true;
    return out;
  }
  const Index r = std::min(est.rank, std::min(oracle.rows(), oracle.cols()));
  if (est.row_sketch.rows() < r) {
    // Saturated estimate above the sketch size: top up the same Gamma_1 stream.
    GaussianEmbedding gamma = est.embedding;
    const Index old = gamma.sketch_rows();
    gamma.extend(r - old);
    Matrix extra = row_sketch(gamma.raw().bottomRows(r - old), oracle);
    Matrix x(r, oracle.cols());
    x.topRows(old) = est.row_sketch;
    x.bottomRows(r - old) = extra / std::sqrt(static_cast<double>(old));
    est.row_sketch = std::move(x);
  }
  out.selection = rand_pivot(oracle, r, seed, &est.row_sketch);
  return out;
}

}  // namespace adacur
