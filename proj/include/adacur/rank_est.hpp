#pragma once

#include "adacur/linalg.hpp"
#include "adacur/sketch.hpp"

namespace adacur {

/// Whether a rank tolerance is an absolute singular-value cutoff or a
/// fraction of the largest singular value.
enum class TolKind { absolute, relative };

struct RankEstimate {
  Index rank = 0;
  Index sketch_size_used = 0;
  /// Gamma_1 A with Gamma_1 normalized to variance 1/sketch_size_used.
  Matrix row_sketch;
  GaussianEmbedding embedding;  // Gamma_1 (raw entries, normalized flag set)
  /// True when s reached min(m, n); the rank then comes from an exact SVD of A.
  bool saturated = false;
};

class RankTolNotResolved : public Error {
 public:
  explicit RankTolNotResolved(RankEstimate partial)
      : Error("rank tolerance not resolved at the maximum sketch size"), partial_(std::move(partial)) {}
  const RankEstimate& partial() const { return partial_; }

 private:
  RankEstimate partial_;
};

struct RankEstOptions {
  Index s_init = 8;
  Index s_max = -1;  // -1: min(m, n)
  TolKind kind = TolKind::absolute;
};

/// Randomized eps-rank: the number of singular values of the two-sided sketch
/// Gamma_1 A Gamma_2^T (s x 2s) above `tol`. The sketch doubles in size,
/// appending rows to both test matrices, until its smallest singular value
/// drops below the cutoff. Gamma_1 has variance 1/s, Gamma_2 variance 1/(2s).
inline RankEstimate estimate_rank(const MatrixOracle& oracle, double tol, std::uint64_t seed,
                                  RankEstOptions opts = {}) {
  require(tol > 0, "estimate_rank: tolerance must be positive");
  const Index m = oracle.rows();
  const Index n = oracle.cols();
  const Index cap = std::min(m, n);
  const Index s_max = opts.s_max < 0 ? cap : opts.s_max;
  require(opts.s_init >= 2 || opts.s_init >= s_max, "estimate_rank: s_init must be >= 2");
  require(s_max >= 1 && s_max <= cap, "estimate_rank: s_max must be in [1, min(m, n)]");

  Index s = std::min(opts.s_init, s_max);
  GaussianEmbedding gamma1(s, m, derive_seed(seed, 1), true);
  GaussianEmbedding gamma2(2 * s, n, derive_seed(seed, 2), true);
  Matrix raw_sketch = row_sketch(gamma1.raw(), oracle);  // unnormalized Gamma_1 A

  RankEstimate est;
  for (;;) {
    const double scale = 1.0 / std::sqrt(static_cast<double>(s) * static_cast<double>(2 * s));
    Matrix two_sided = scale * (raw_sketch * gamma2.raw().transpose());
    Vector sv = singular_values(two_sided);
    const double cut = opts.kind == TolKind::relative ? tol * (sv.size() ? sv[0] : 0.0) : tol;
    const double smallest = sv.size() ? sv[sv.size() - 1] : 0.0;

    est.sketch_size_used = s;
    est.embedding = gamma1;
    est.row_sketch = raw_sketch / std::sqrt(static_cast<double>(s));

    if (s >= cap) {
      // The sketch no longer compresses A; read A and count exactly.
      Vector exact = singular_values(oracle.to_dense());
      est.rank = eps_rank(exact, tol, opts.kind == TolKind::relative);
      est.saturated = true;
      return est;
    }
    if (smallest < cut || (sv.size() && sv[0] == 0.0)) {
      est.rank = eps_rank(sv, tol, opts.kind == TolKind::relative);
      return est;
    }
    if (s >= s_max) {
      est.rank = s;
      throw RankTolNotResolved(std::move(est));
    }
    const Index grown = std::min(2 * s, s_max);
    gamma1.extend(grown - s);
    gamma2.extend(2 * grown - 2 * s);
    Matrix extra = row_sketch(gamma1.raw().bottomRows(grown - s), oracle);
    raw_sketch.conservativeResize(grown, Eigen::NoChange);
    raw_sketch.bottomRows(grown - s) = extra;
    s = grown;
  }
}

}  // namespace adacur
