#pragma once

#include "adacur/common.hpp"

#include <Eigen/SparseCore>

#include <atomic>
#include <memory>

namespace adacur {

struct AccessCounts {
  std::uint64_t matvecs = 0;          // products A x, one per vector
  std::uint64_t adjoint_matvecs = 0;  // products A^T y, one per vector
  std::uint64_t entries_read = 0;     // entries returned by row/column/submatrix extraction

  std::uint64_t total_matvecs() const { return matvecs + adjoint_matvecs; }

  AccessCounts operator-(const AccessCounts& o) const {
    return {matvecs - o.matvecs, adjoint_matvecs - o.adjoint_matvecs, entries_read - o.entries_read};
  }
};

/// Access contract for one matrix A(t_j): products with blocks of vectors and
/// extraction of arbitrary rows, columns, and submatrices. Every public
/// access is counted; the counters are atomic so a shared oracle may be read
/// concurrently.
class MatrixOracle {
 public:
  virtual ~MatrixOracle() = default;
  MatrixOracle() = default;
  MatrixOracle(const MatrixOracle&) = delete;
  MatrixOracle& operator=(const MatrixOracle&) = delete;

  virtual Index rows() const = 0;
  virtual Index cols() const = 0;

  /// A * x, x is n x k.
  Matrix multiply(const Matrix& x) const {
    require(x.rows() == cols(), "oracle: multiply dimension mismatch");
    matvecs_ += static_cast<std::uint64_t>(x.cols());
    return do_multiply(x);
  }

  /// A^T * y, y is m x k.
  Matrix multiply_adjoint(const Matrix& y) const {
    require(y.rows() == rows(), "oracle: adjoint multiply dimension mismatch");
    adjoint_matvecs_ += static_cast<std::uint64_t>(y.cols());
    return do_multiply_adjoint(y);
  }

  /// A(I, :).
  Matrix row_block(std::span<const Index> rows_idx) const {
    check_indices(rows_idx, rows());
    entries_read_ += static_cast<std::uint64_t>(rows_idx.size()) * static_cast<std::uint64_t>(cols());
    return do_row_block(rows_idx);
  }

  /// A(:, J).
  Matrix col_block(std::span<const Index> cols_idx) const {
    check_indices(cols_idx, cols());
    entries_read_ += static_cast<std::uint64_t>(cols_idx.size()) * static_cast<std::uint64_t>(rows());
    return do_col_block(cols_idx);
  }

  /// A(I, J).
  Matrix submatrix(std::span<const Index> rows_idx, std::span<const Index> cols_idx) const {
    check_indices(rows_idx, rows());
    check_indices(cols_idx, cols());
    entries_read_ += static_cast<std::uint64_t>(rows_idx.size()) * static_cast<std::uint64_t>(cols_idx.size());
    return do_submatrix(rows_idx, cols_idx);
  }

  /// The full matrix; counted as m * n entry reads.
  Matrix to_dense() const {
    const IndexList all = iota_list(cols());
    return col_block(all);
  }

  AccessCounts counts() const {
    return {matvecs_.load(), adjoint_matvecs_.load(), entries_read_.load()};
  }

  void reset_counts() const {
    matvecs_ = 0;
    adjoint_matvecs_ = 0;
    entries_read_ = 0;
  }

 protected:
  virtual Matrix do_multiply(const Matrix& x) const = 0;
  virtual Matrix do_multiply_adjoint(const Matrix& y) const = 0;
  virtual Matrix do_row_block(std::span<const Index> rows_idx) const = 0;
  virtual Matrix do_col_block(std::span<const Index> cols_idx) const = 0;
  virtual Matrix do_submatrix(std::span<const Index> rows_idx, std::span<const Index> cols_idx) const {
    return select_cols(do_row_block(rows_idx), cols_idx);
  }

 private:
  static void check_indices(std::span<const Index> idx, Index bound) {
    for (Index i : idx)
      if (i < 0 || i >= bound) throw InvalidInput("oracle: index out of range");
  }

  mutable std::atomic<std::uint64_t> matvecs_{0};
  mutable std::atomic<std::uint64_t> adjoint_matvecs_{0};
  mutable std::atomic<std::uint64_t> entries_read_{0};
};

using OraclePtr = std::shared_ptr<const MatrixOracle>;

// ---------------------------------------------------------------------------

class DenseOracle final : public MatrixOracle {
 public:
  explicit DenseOracle(Matrix a) : a_(std::make_shared<const Matrix>(std::move(a))) { validate(); }
  explicit DenseOracle(std::shared_ptr<const Matrix> a) : a_(std::move(a)) { validate(); }

  Index rows() const override { return a_->rows(); }
  Index cols() const override { return a_->cols(); }
  const Matrix& matrix() const { return *a_; }

 protected:
  Matrix do_multiply(const Matrix& x) const override { return *a_ * x; }
  Matrix do_multiply_adjoint(const Matrix& y) const override { return a_->transpose() * y; }
  Matrix do_row_block(std::span<const Index> r) const override { return select_rows(*a_, r); }
  Matrix do_col_block(std::span<const Index> c) const override { return select_cols(*a_, c); }
  Matrix do_submatrix(std::span<const Index> r, std::span<const Index> c) const override {
    Matrix out(static_cast<Index>(r.size()), static_cast<Index>(c.size()));
    for (std::size_t j = 0; j < c.size(); ++j)
      for (std::size_t i = 0; i < r.size(); ++i)
        out(static_cast<Index>(i), static_cast<Index>(j)) = (*a_)(r[i], c[j]);
    return out;
  }

 private:
  void validate() const {
    if (!all_finite(*a_)) throw InvalidInput("dense oracle: non-finite entries");
  }

  std::shared_ptr<const Matrix> a_;
};

using SparseMatrix = Eigen::SparseMatrix<double, Eigen::ColMajor, Index>;
using SparseRowMatrix = Eigen::SparseMatrix<double, Eigen::RowMajor, Index>;

/// Sparse matrix in compressed-column form with a row-major copy for row access.
/// Explicitly stored zeros are kept.
class SparseOracle final : public MatrixOracle {
 public:
  explicit SparseOracle(SparseMatrix a) : csc_(std::move(a)), csr_(csc_) {
    for (Index k = 0; k < csc_.nonZeros(); ++k)
      if (!std::isfinite(csc_.valuePtr()[k])) throw InvalidInput("sparse oracle: non-finite entries");
  }

  Index rows() const override { return csc_.rows(); }
  Index cols() const override { return csc_.cols(); }
  const SparseMatrix& matrix() const { return csc_; }
  Index stored_entries() const { return csc_.nonZeros(); }

 protected:
  Matrix do_multiply(const Matrix& x) const override { return csc_ * x; }
  Matrix do_multiply_adjoint(const Matrix& y) const override { return csc_.transpose() * y; }
  Matrix do_row_block(std::span<const Index> r) const override {
    Matrix out = Matrix::Zero(static_cast<Index>(r.size()), cols());
    for (std::size_t i = 0; i < r.size(); ++i)
      for (SparseRowMatrix::InnerIterator it(csr_, r[i]); it; ++it) out(static_cast<Index>(i), it.col()) = it.value();
    return out;
  }
  Matrix do_col_block(std::span<const Index> c) const override {
    Matrix out = Matrix::Zero(rows(), static_cast<Index>(c.size()));
    for (std::size_t j = 0; j < c.size(); ++j)
      for (SparseMatrix::InnerIterator it(csc_, c[j]); it; ++it) out(it.row(), static_cast<Index>(j)) = it.value();
    return out;
  }

 private:
  SparseMatrix csc_;
  SparseRowMatrix csr_;
};

/// Low-rank base plus scaled sparse perturbation: A = U diag(s) V^T + delta * S.
///
/// Products use the factored form, O((m + n) r + nnz(S)) per vector. Entry
/// access reads a dense copy of the static base, shared by every oracle built
/// on the same base, plus the sparse term; no oracle ever forms its own
/// m x n matrix.
class LowRankPlusSparseOracle final : public MatrixOracle {
 public:
  struct Base {
    Matrix u;       // m x r, orthonormal columns
    Vector sigma;   // r
    Matrix v;       // n x r, orthonormal columns
    Matrix dense;   // u * diag(sigma) * v^T
  };

  static std::shared_ptr<const Base> make_base(Matrix u, Vector sigma, Matrix v) {
    auto base = std::make_shared<Base>();
    base->dense = u * sigma.asDiagonal() * v.transpose();
    base->u = std::move(u);
    base->sigma = std::move(sigma);
    base->v = std::move(v);
    return base;
  }

  LowRankPlusSparseOracle(std::shared_ptr<const Base> base, SparseMatrix perturbation, double delta)
      : base_(std::move(base)), s_(std::move(perturbation)), s_rows_(s_), delta_(delta) {
    require(s_.rows() == base_->u.rows() && s_.cols() == base_->v.rows(),
            "low-rank-plus-sparse oracle: dimension mismatch");
  }

  Index rows() const override { return base_->u.rows(); }
  Index cols() const override { return base_->v.rows(); }
  Index perturbation_nnz() const { return s_.nonZeros(); }
  const SparseMatrix& perturbation() const { return s_; }
  const Base& base() const { return *base_; }
  /// Multiply-adds spent in products so far: 2(m + n)r + 2 nnz per vector.
  std::uint64_t product_flops() const { return flops_.load(); }

 protected:
  Matrix do_multiply(const Matrix& x) const override {
    count_flops(x.cols());
    Matrix out = base_->u * (base_->sigma.asDiagonal() * (base_->v.transpose() * x));
    if (s_.nonZeros() > 0) out += delta_ * (s_ * x);
    return out;
  }
  Matrix do_multiply_adjoint(const Matrix& y) const override {
    count_flops(y.cols());
    Matrix out = base_->v * (base_->sigma.asDiagonal() * (base_->u.transpose() * y));
    if (s_.nonZeros() > 0) out += delta_ * (s_.transpose() * y);
    return out;
  }
  Matrix do_row_block(std::span<const Index> r) const override {
    Matrix out = select_rows(base_->dense, r);
    for (std::size_t i = 0; i < r.size(); ++i)
      for (SparseRowMatrix::InnerIterator it(s_rows_, r[i]); it; ++it)
        out(static_cast<Index>(i), it.col()) += delta_ * it.value();
    return out;
  }
  Matrix do_col_block(std::span<const Index> c) const override {
    Matrix out = select_cols(base_->dense, c);
    for (std::size_t j = 0; j < c.size(); ++j)
      for (SparseMatrix::InnerIterator it(s_, c[j]); it; ++it)
        out(it.row(), static_cast<Index>(j)) += delta_ * it.value();
    return out;
  }
  Matrix do_submatrix(std::span<const Index> r, std::span<const Index> c) const override {
    Matrix out(static_cast<Index>(r.size()), static_cast<Index>(c.size()));
    for (std::size_t j = 0; j < c.size(); ++j)
      for (std::size_t i = 0; i < r.size(); ++i) out(static_cast<Index>(i), static_cast<Index>(j)) = base_->dense(r[i], c[j]);
    if (s_.nonZeros() > 0) {
      std::vector<Index> col_pos(static_cast<std::size_t>(cols()), -1);
      for (std::size_t j = 0; j < c.size(); ++j) col_pos[static_cast<std::size_t>(c[j])] = static_cast<Index>(j);
      for (std::size_t i = 0; i < r.size(); ++i)
        for (SparseRowMatrix::InnerIterator it(s_rows_, r[i]); it; ++it)
          if (Index j = col_pos[static_cast<std::size_t>(it.col())]; j >= 0)
            out(static_cast<Index>(i), j) += delta_ * it.value();
    }
    return out;
  }

 private:
  void count_flops(Index vectors) const {
    const auto per = 2 * static_cast<std::uint64_t>((rows() + cols()) * base_->sigma.size() + s_.nonZeros());
    flops_ += per * static_cast<std::uint64_t>(vectors);
  }

  std::shared_ptr<const Base> base_;
  SparseMatrix s_;
  SparseRowMatrix s_rows_;
  double delta_;
  mutable std::atomic<std::uint64_t> flops_{0};
};

/// A^T as an oracle. Accesses are forwarded to (and counted by) the wrapped oracle.
class TransposedOracle final : public MatrixOracle {
 public:
  explicit TransposedOracle(const MatrixOracle& a) : a_(a) {}

  Index rows() const override { return a_.cols(); }
  Index cols() const override { return a_.rows(); }

 protected:
  Matrix do_multiply(const Matrix& x) const override { return a_.multiply_adjoint(x); }
  Matrix do_multiply_adjoint(const Matrix& y) const override { return a_.multiply(y); }
  Matrix do_row_block(std::span<const Index> r) const override { return a_.col_block(r).transpose(); }
  Matrix do_col_block(std::span<const Index> c) const override { return a_.row_block(c).transpose(); }
  Matrix do_submatrix(std::span<const Index> r, std::span<const Index> c) const override {
    return a_.submatrix(c, r).transpose();
  }

 private:
  const MatrixOracle& a_;
};

}  // namespace adacur
