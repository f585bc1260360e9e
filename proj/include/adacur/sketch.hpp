#pragma once

#include "adacur/oracle.hpp"
#include "adacur/rng.hpp"

#include <optional>

namespace adacur {

/// Seeded Gaussian test matrix Gamma (s x m). Raw entries are standard
/// normals; `scale()` is 1/sqrt(s) for a normalized embedding and 1 otherwise.
/// Row i depends only on (seed, i), so growing the embedding keeps old rows.
class GaussianEmbedding {
 public:
  GaussianEmbedding() = default;

  GaussianEmbedding(Index sketch_rows, Index ambient_dim, std::uint64_t seed, bool normalized)
      : ambient_dim_(ambient_dim), seed_(seed), normalized_(normalized) {
    require(sketch_rows >= 1 && ambient_dim >= 1, "draw_gaussian: s and m must be >= 1");
    raw_.resize(sketch_rows, ambient_dim);
    fill_gaussian_rows(raw_, seed_);
  }

  Index sketch_rows() const { return raw_.rows(); }
  Index ambient_dim() const { return ambient_dim_; }
  std::uint64_t seed() const { return seed_; }
  bool normalized() const { return normalized_; }
  double scale() const {
    return normalized_ ? 1.0 / std::sqrt(static_cast<double>(raw_.rows())) : 1.0;
  }

  /// Unscaled standard-normal entries.
  const Matrix& raw() const { return raw_; }
  /// scale() * raw().
  Matrix matrix() const { return scale() * raw_; }

  /// Appends `extra` rows continuing the same stream.
  void extend(Index extra) {
    if (extra <= 0) return;
    const Index old = raw_.rows();
    Matrix more(extra, ambient_dim_);
    fill_gaussian_rows(more, seed_, old);
    raw_.conservativeResize(old + extra, Eigen::NoChange);
    raw_.bottomRows(extra) = more;
  }

 private:
  Matrix raw_;
  Index ambient_dim_ = 0;
  std::uint64_t seed_ = 0;
  bool normalized_ = false;
};

inline GaussianEmbedding draw_gaussian(Index s, Index m, std::uint64_t seed, bool normalized) {
  return GaussianEmbedding(s, m, seed, normalized);
}

/// gamma * A computed as (A^T gamma^T)^T: one adjoint product per sketch row.
inline Matrix row_sketch(const Matrix& gamma, const MatrixOracle& oracle) {
  if (gamma.cols() != oracle.rows()) throw InvalidInput("row_sketch: embedding/oracle dimension mismatch");
  return oracle.multiply_adjoint(gamma.transpose()).transpose();
}

inline Matrix row_sketch(const GaussianEmbedding& emb, const MatrixOracle& oracle) {
  return row_sketch(emb.matrix(), oracle);
}

/// Gaussian test matrix, its row sketch X_s = Gamma A, and optionally the
/// sketch of a residual E_s = Gamma (A - A_hat). Gamma is unnormalized.
struct SketchPack {
  GaussianEmbedding embedding;
  Matrix row_sketch;
  std::optional<Matrix> residual_sketch;
};

}  // namespace adacur
