#pragma once

#include "adacur/common.hpp"

#include <Eigen/SVD>

#include <optional>

namespace adacur {

/// A(:, pivots) = q * r. `q` is m x min(m,n) with orthonormal columns (empty
/// when not requested), `r` is min(m,n) x n upper trapezoidal, pivots are
/// 0-based column ids.
struct PivotedQR {
  Matrix q;
  Matrix r;
  IndexList pivots;
};

struct CpqrOptions {
  /// Stop after this many Householder steps (-1: min(m, n)). With a partial
  /// factorization the trailing rows of `r` hold the unreduced block.
  Index max_steps = -1;
  bool form_q = true;
};

namespace detail {

inline void check_finite(const Matrix& a, const char* who) {
  if (!all_finite(a)) throw InvalidInput(std::string(who) + ": non-finite entries");
}

// Explicit Q from the Householder vectors stored below the diagonal of `packed`.
inline Matrix form_q(const Matrix& packed, const Vector& tau, Index steps) {
  const Index m = packed.rows();
  const Index k = std::min(m, packed.cols());
  Matrix q = Matrix::Identity(m, k);
  Vector work(k);
  for (Index j = steps - 1; j >= 0; --j) {
    q.bottomRightCorner(m - j, k - j)
        .applyHouseholderOnTheLeft(packed.col(j).tail(m - j - 1), tau[j], work.data());
  }
  return q;
}

}  // namespace detail

/// Greedy column-pivoted Householder QR. At each step the trailing column
/// with the largest 2-norm is brought forward; exact ties go to the lowest
/// original column id. Partial norms are downdated and recomputed once they
/// lose more than half the digits.
inline PivotedQR cpqr(const Matrix& a, CpqrOptions opts = {}) {
  require(a.rows() > 0 && a.cols() > 0, "cpqr: empty matrix");
  detail::check_finite(a, "cpqr");

  const Index m = a.rows();
  const Index n = a.cols();
  const Index kmax = opts.max_steps < 0 ? std::min(m, n) : std::min({m, n, opts.max_steps});
  const double tol3z = std::sqrt(kEps);

  Matrix w = a;
  IndexList perm = iota_list(n);
  Vector vn1(n), vn2(n), tau = Vector::Zero(std::min(m, n));
  for (Index j = 0; j < n; ++j) vn1[j] = vn2[j] = w.col(j).norm();
  Vector work(n);

  for (Index k = 0; k < kmax; ++k) {
    Index best = k;
    for (Index j = k + 1; j < n; ++j) {
      if (vn1[j] > vn1[best] || (vn1[j] == vn1[best] && perm[j] < perm[best])) best = j;
    }
    if (best != k) {
      w.col(k).swap(w.col(best));
      std::swap(perm[k], perm[best]);
      std::swap(vn1[k], vn1[best]);
      std::swap(vn2[k], vn2[best]);
    }

    double beta = 0.0;
    w.col(k).tail(m - k).makeHouseholderInPlace(tau[k], beta);
    w(k, k) = beta;
    if (k + 1 < n) {
      w.bottomRightCorner(m - k, n - k - 1)
          .applyHouseholderOnTheLeft(w.col(k).tail(m - k - 1), tau[k], work.data());
    }

    for (Index j = k + 1; j < n; ++j) {
      if (vn1[j] == 0.0) continue;
      double temp = std::abs(w(k, j)) / vn1[j];
      temp = std::max(0.0, (1.0 + temp) * (1.0 - temp));
      const double ratio = vn1[j] / vn2[j];
      if (temp * ratio * ratio <= tol3z) {
        vn1[j] = k + 1 < m ? w.col(j).tail(m - k - 1).norm() : 0.0;
        vn2[j] = vn1[j];
      } else {
        vn1[j] *= std::sqrt(temp);
      }
    }
  }

  PivotedQR out;
  const Index kr = std::min(m, n);
  out.r = w.topRows(kr);
  for (Index j = 0; j < std::min(kmax, n); ++j)
    out.r.col(j).tail(kr - std::min(j + 1, kr)).setZero();
  if (opts.form_q) out.q = detail::form_q(w, tau, kmax);
  out.pivots = std::move(perm);
  return out;
}

/// First `count` CPQR pivots of `a` (runs only `count` Householder steps).
inline IndexList cpqr_pivots(const Matrix& a, Index count) {
  count = std::min({count, a.rows(), a.cols()});
  if (count <= 0) return {};
  auto qr = cpqr(a, {.max_steps = count, .form_q = false});
  return take(qr.pivots, count);
}

/// |{ i : |R_ii| > rel_tol * |R_11| }|; zero for an all-zero factor.
inline Index eps_rank_from_rdiag(const Matrix& r_factor, double rel_tol) {
  const Index kd = std::min(r_factor.rows(), r_factor.cols());
  if (kd == 0) return 0;
  const double lead = std::abs(r_factor(0, 0));
  if (lead == 0.0) return 0;
  Index count = 0;
  for (Index i = 0; i < kd; ++i)
    if (std::abs(r_factor(i, i)) > rel_tol * lead) ++count;
  return count;
}

struct StrongRRQR {
  PivotedQR qr;
  Index k = 0;       // size of the leading block carrying the guarantee
  Index swaps = 0;
};

struct SrrqrOptions {
  double f = 2.0;
  /// Leading block size; when absent, the CPQR rank at `rank_tol`.
  std::optional<Index> k;
  double rank_tol = -1.0;  // relative; negative selects eps * max(m, n)
  bool form_q = true;
};

/// Largest entry of |R11^{-1} R12| for the leading k x k block of r.
inline double max_abs_r11inv_r12(const Matrix& r, Index k) {
  const Index n = r.cols();
  if (k <= 0 || k >= n) return 0.0;
  Matrix x = r.topLeftCorner(k, k).triangularView<Eigen::Upper>().solve(r.topRightCorner(k, n - k));
  return x.cwiseAbs().maxCoeff();
}

/// Gu-Eisenstat strong rank-revealing QR. Starts from CPQR and interchanges
/// a leading column with a trailing one while
///   (R11^{-1} R12)_ij^2 + (gamma_j(R22) / omega_i(R11))^2 > f^2,
/// where gamma_j are the column norms of R22 and 1/omega_i the row norms of
/// R11^{-1}. On exit every entry of |R11^{-1} R12| is at most f and
/// sigma_i(R11) >= sigma_i(A) / sqrt(1 + f^2 k (n - k)).
inline StrongRRQR srrqr(const Matrix& a, SrrqrOptions opts = {}) {
  if (!(opts.f >= 1.0)) throw InvalidInput("srrqr: f must be >= 1");
  const Index m = a.rows();
  const Index n = a.cols();

  StrongRRQR out;
  out.qr = cpqr(a, {.form_q = opts.form_q});
  const Index kd = std::min(m, n);
  const double rank_tol = opts.rank_tol < 0 ? kEps * static_cast<double>(std::max(m, n)) : opts.rank_tol;
  Index k = opts.k ? *opts.k : eps_rank_from_rdiag(out.qr.r, rank_tol);
  if (opts.k) require(k >= 0 && k <= kd, "srrqr: k out of range");
  out.k = k;
  if (k == 0 || k >= n) return out;

  const double f2 = opts.f * opts.f;
  const Index max_iter = m * n;
  IndexList perm = out.qr.pivots;
  Matrix r = out.qr.r;

  for (Index iter = 0;; ++iter) {
    auto r11 = r.topLeftCorner(k, k);
    if (!(std::abs(r11(k - 1, k - 1)) > 0.0)) break;  // R11 singular: rank < k, nothing to gain
    Matrix r11_inv = r11.triangularView<Eigen::Upper>().solve(Matrix::Identity(k, k));
    Matrix coupling = r11_inv * r.topRightCorner(k, n - k);
    Vector inv_omega = r11_inv.rowwise().norm();
    Vector gamma = Vector::Zero(n - k);
    if (kd > k) gamma = r.bottomRightCorner(kd - k, n - k).colwise().norm().transpose();

    Index bi = 0, bj = 0;
    double best = -1.0;
    for (Index j = 0; j < n - k; ++j) {
      for (Index i = 0; i < k; ++i) {
        const double g = gamma[j] * inv_omega[i];
        const double v = coupling(i, j) * coupling(i, j) + g * g;
        if (v > best) {
          best = v;
          bi = i;
          bj = j;
        }
      }
    }
    if (!(best > f2) || !std::isfinite(best)) break;
    if (iter >= max_iter) throw NonConvergence("srrqr: interchange loop did not terminate");

    std::swap(perm[static_cast<std::size_t>(bi)], perm[static_cast<std::size_t>(k + bj)]);
    ++out.swaps;
    Eigen::HouseholderQR<Matrix> hqr(select_cols(a, perm));
    r = hqr.matrixQR().topRows(kd).triangularView<Eigen::Upper>();
    if (opts.form_q) out.qr.q = hqr.householderQ() * Matrix::Identity(m, kd);
  }

  out.qr.r = std::move(r);
  out.qr.pivots = std::move(perm);
  return out;
}

/// Thin orthonormal basis Q (m x k) of the columns of `a` from Householder QR.
inline Matrix thin_q(const Matrix& a) {
  if (a.cols() == 0) return Matrix(a.rows(), 0);
  Eigen::HouseholderQR<Matrix> qr(a);
  return qr.householderQ() * Matrix::Identity(a.rows(), std::min(a.rows(), a.cols()));
}

inline Vector singular_values(const Matrix& a) {
  if (a.size() == 0) return Vector();
  return Eigen::BDCSVD<Matrix>(a).singularValues();
}

/// Number of singular values above `tol` (absolute) or above tol * sigma_1 (relative).
inline Index eps_rank(const Vector& sv, double tol, bool relative) {
  if (sv.size() == 0) return 0;
  const double cut = relative ? tol * sv[0] : tol;
  return static_cast<Index>((sv.array() > cut).count());
}

// ---------------------------------------------------------------------------
// Stable CUR evaluation
// ---------------------------------------------------------------------------

/// Operator form of C * U^+ * R, with U^+ the truncated SVD pseudoinverse.
/// Never forms the m x n product unless asked to.
class CurOperator {
 public:
  CurOperator() = default;

  CurOperator(Matrix c, const Matrix& u, Matrix r, double trunc_tol = -1.0)
      : c_(std::move(c)), r_(std::move(r)) {
    if (u.rows() != r_.rows() || u.cols() != c_.cols())
      throw InvalidInput("stable_cur_eval: U must be |rows(R)| x |cols(C)|");
    if (u.size() == 0) {
      v_ = Matrix(u.cols(), 0);
      wt_ = Matrix(0, u.rows());
      return;
    }
    if (trunc_tol < 0) trunc_tol = kEps * static_cast<double>(std::max(u.rows(), u.cols()));
    Eigen::BDCSVD<Matrix> svd(u, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const Vector& sv = svd.singularValues();
    const double cut = sv.size() > 0 ? trunc_tol * sv[0] : 0.0;
    Index kept = 0;
    while (kept < sv.size() && sv[kept] > cut) ++kept;
    v_ = svd.matrixV().leftCols(kept);
    inv_sigma_ = sv.head(kept).cwiseInverse();
    wt_ = svd.matrixU().leftCols(kept).transpose();
  }

  Index rows() const { return c_.rows(); }
  Index cols() const { return r_.cols(); }
  /// Rank of the retained pseudoinverse.
  Index core_rank() const { return inv_sigma_.size(); }

  const Matrix& c() const { return c_; }
  const Matrix& r() const { return r_; }

  /// (C U^+ R) x for a block of vectors x (n x k).
  Matrix apply(const Matrix& x) const { return c_ * core(r_ * x); }

  /// (C U^+ R)^T y for a block y (m x k).
  Matrix apply_adjoint(const Matrix& y) const {
    Matrix t = wt_.transpose() * (inv_sigma_.asDiagonal() * (v_.transpose() * (c_.transpose() * y)));
    return r_.transpose() * t;
  }

  /// g * (C U^+ R) for a left block g (k x m), e.g. a sketching matrix.
  Matrix left_apply(const Matrix& g) const { return left_apply_to_c(g * c_); }

  /// Same as left_apply when g * C is already available.
  Matrix left_apply_to_c(const Matrix& gc) const {
    Matrix t = (gc * v_) * inv_sigma_.asDiagonal();
    return (t * wt_) * r_;
  }

  /// Rows [first, first + count) of C U^+ R.
  Matrix materialize_rows(Index first, Index count) const {
    Matrix t = (c_.middleRows(first, count) * v_) * inv_sigma_.asDiagonal();
    return (t * wt_) * r_;
  }

  Matrix materialize() const { return materialize_rows(0, rows()); }

 private:
  Matrix core(const Matrix& y) const { return v_ * (inv_sigma_.asDiagonal() * (wt_ * y)); }

  Matrix c_, r_;
  Matrix v_;          // |J| x k
  Vector inv_sigma_;  // k
  Matrix wt_;         // k x |I|
};

/// C * U^+ * R with singular values of U below trunc_tol * sigma_max(U)
/// discarded (default trunc_tol: eps * max(dim U)).
inline CurOperator stable_cur_eval(Matrix c, const Matrix& u, Matrix r, double trunc_tol = -1.0) {
  return CurOperator(std::move(c), u, std::move(r), trunc_tol);
}

}  // namespace adacur
