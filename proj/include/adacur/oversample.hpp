#pragma once

#include "adacur/pivot.hpp"

#include <optional>

namespace adacur {

/// Extra rows from an already extracted column block C = A(:, J) (m x k) and
/// base rows I with |I| >= k - p. Takes the trailing p right singular vectors
/// V of Q_C(I, :) and returns the first p CPQR pivots of (Q_C([m] - I, :) V)^T
/// as global row ids. A tall base (|I| > k) is allowed; p <= k is required.
/// Returns fewer than p rows only when fewer unchosen rows exist.
inline IndexList oversample_rows_from_block(const Matrix& c_block, std::span<const Index> base_rows, Index p) {
  const Index m = c_block.rows();
  const Index k = c_block.cols();
  require(p >= 0, "oversample_rows: p must be >= 0");
  require(p <= k, "oversample_rows: p must not exceed the number of columns");
  if (p == 0 || k == 0) return {};

  const IndexList rest = complement(m, {base_rows});
  if (rest.empty()) return {};

  // Rows of Q_C come from C(S, :) R^{-1} when R is safely invertible (the
  // error is ~ cond(C) eps, far below what changes a pivot choice); otherwise
  // Q is formed explicitly.
  std::optional<Eigen::HouseholderQR<Matrix>> qr;
  Index kq = std::min(m, k);
  if (m >= k) {
    qr.emplace(c_block);
    const Vector d = qr->matrixQR().diagonal().cwiseAbs();
    if (!(d.minCoeff() > 1e-10 * d.maxCoeff())) qr.reset();
  }
  Matrix q;
  if (!qr) {
    q = thin_q(c_block);
    kq = q.cols();
  }
  auto rows_of_q = [&](const IndexList& ids) -> Matrix {
    if (!qr) return select_rows(q, ids);
    Matrix x = select_rows(c_block, ids);
    qr->matrixQR().topLeftCorner(k, k).triangularView<Eigen::Upper>().solveInPlace<Eigen::OnTheRight>(x);
    return x;
  };

  p = std::min(p, kq);
  const IndexList base(base_rows.begin(), base_rows.end());
  const Matrix q_base = rows_of_q(base);
  // Full V so that a short base (|I| < k) still yields k right singular vectors.
  Matrix v_trail = Matrix::Identity(kq, kq).rightCols(p);
  if (q_base.rows() > 0) v_trail = Eigen::BDCSVD<Matrix>(q_base, Eigen::ComputeFullV).matrixV().rightCols(p);
  Matrix q_rest;
  if (qr) {
    Matrix w = v_trail;
    qr->matrixQR().topLeftCorner(k, k).triangularView<Eigen::Upper>().solveInPlace(w);
    q_rest = select_rows(c_block, rest) * w;
  } else {
    q_rest = select_rows(q, rest) * v_trail;
  }
  const IndexList local = cpqr_pivots(q_rest.transpose(), p);
  return permute(rest, local);
}

/// Same selection with p > k allowed: runs ceil(p / k) rounds, each adding at
/// most k rows to the base before the next.
inline IndexList oversample_rows_rounds(const Matrix& c_block, std::span<const Index> base_rows, Index p) {
  require(p >= 0, "oversample_rows: p must be >= 0");
  const Index k = c_block.cols();
  IndexList base(base_rows.begin(), base_rows.end());
  IndexList added;
  while (static_cast<Index>(added.size()) < p && k > 0) {
    const Index want = std::min(k, p - static_cast<Index>(added.size()));
    IndexList more = oversample_rows_from_block(c_block, base, want);
    if (more.empty()) break;
    base.insert(base.end(), more.begin(), more.end());
    added.insert(added.end(), more.begin(), more.end());
  }
  return added;
}

/// I0 for a square selection |I| = |J| = r: p <= r rows disjoint from I that
/// raise sigma_min(Q_C(I u I0, :)). Reads A(:, J).
inline IndexList oversample_rows(const MatrixOracle& oracle, const IndexSelection& sel, Index p) {
  require(p >= 0, "oversample_rows: p must be >= 0");
  require(sel.rows.size() == sel.cols.size(), "oversample_rows: selection must be square (|I| = |J|)");
  require(p <= static_cast<Index>(sel.cols.size()), "oversample_rows: p must not exceed r");
  if (p == 0) return {};
  return oversample_rows_from_block(oracle.col_block(sel.cols), sel.rows, p);
}

/// Column counterpart: oversample_rows on A^T with the roles of I and J swapped.
inline IndexList oversample_cols(const MatrixOracle& oracle, const IndexSelection& sel, Index p) {
  TransposedOracle at(oracle);
  IndexSelection swapped{sel.cols, sel.rows, {}};
  return oversample_rows(at, swapped, p);
}

}  // namespace adacur
