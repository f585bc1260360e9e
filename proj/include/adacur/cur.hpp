#pragma once

#include "adacur/oversample.hpp"

namespace adacur {

/// C = A(:, J), R = A(I u I0, :), U = A(I u I0, J) for one matrix.
struct CURFactors {
  Matrix c;
  Matrix u;
  Matrix r;
  IndexSelection selection;

  Index rank() const { return c.cols(); }
  CurOperator op(double trunc_tol = -1.0) const { return stable_cur_eval(c, u, r, trunc_tol); }
};

/// Reads C and R from the oracle; U is cut out of R so no entry is read twice.
inline CURFactors extract_factors(const MatrixOracle& oracle, const IndexSelection& sel) {
  CURFactors f;
  f.selection = sel;
  const IndexList rows = sel.all_rows();
  f.c = oracle.col_block(sel.cols);
  f.r = oracle.row_block(rows);
  f.u = select_cols(f.r, sel.cols);
  return f;
}

/// Gaussian sketch X_s = Gamma_s A with an unnormalized s x m Gamma_s.
inline SketchPack draw_error_sketch(const MatrixOracle& oracle, Index s, std::uint64_t seed) {
  require(s >= 1, "estimate_cur_error: s must be >= 1");
  SketchPack pack;
  pack.embedding = draw_gaussian(s, oracle.rows(), seed, false);
  pack.row_sketch = row_sketch(pack.embedding, oracle);
  return pack;
}

struct ErrorEstimate {
  double rel_error = 0.0;
  SketchPack sketch;  // X_s and the residual sketch E_s
};

/// E = ||X_s - Gamma_s C U^+ R||_F / ||X_s||_F using the pack's Gamma_s and X_s.
/// No oracle access: this is the path for testing several selections against
/// one sketch.
inline ErrorEstimate estimate_cur_error(const SketchPack& pack, const CURFactors& f) {
  require(pack.embedding.ambient_dim() == f.c.rows() && pack.row_sketch.cols() == f.r.cols(),
          "estimate_cur_error: sketch does not match the factors");
  const double xnorm = pack.row_sketch.norm();
  if (!(xnorm > 0.0)) throw ZeroMatrixSketch();
  ErrorEstimate est;
  est.sketch.embedding = pack.embedding;
  est.sketch.row_sketch = pack.row_sketch;
  Matrix res = pack.row_sketch;
  if (f.rank() > 0) res -= f.op().left_apply(pack.embedding.raw());
  est.rel_error = res.norm() / xnorm;
  est.sketch.residual_sketch = std::move(res);
  return est;
}

/// Estimates the relative Frobenius error of the CUR on `sel`. With `reuse`,
/// Gamma_s and X_s come from the pack and only the residual is recomputed;
/// otherwise s adjoint products form a fresh sketch.
inline ErrorEstimate estimate_cur_error(const MatrixOracle& oracle, const IndexSelection& sel, Index s,
                                        std::uint64_t seed, const SketchPack* reuse = nullptr) {
  require(is_valid_selection(sel, oracle.rows(), oracle.cols()), "estimate_cur_error: invalid selection");
  SketchPack fresh;
  if (!reuse) fresh = draw_error_sketch(oracle, s, seed);
  const SketchPack& pack = reuse ? *reuse : fresh;
  require(pack.embedding.ambient_dim() == oracle.rows(), "estimate_cur_error: sketch dimension mismatch");
  return estimate_cur_error(pack, extract_factors(oracle, sel));
}

/// ||A - C U^+ R||_F / ||A||_F with A and the approximation materialized a
/// row block at a time. Returns 0 for A = 0.
inline double true_relative_error(const MatrixOracle& oracle, const CURFactors& f) {
  const Index m = oracle.rows();
  const Index n = oracle.cols();
  require(f.c.rows() == m && f.r.cols() == n, "true_relative_error: dimension mismatch");
  const CurOperator op = f.op();
  const Index block = std::max<Index>(1, std::min<Index>(m, (Index{1} << 22) / std::max<Index>(n, 1)));
  double res2 = 0.0;
  double a2 = 0.0;
  for (Index first = 0; first < m; first += block) {
    const Index cnt = std::min(block, m - first);
    const IndexList ids = iota_list(cnt, first);
    Matrix a = oracle.row_block(ids);
    a2 += a.squaredNorm();
    if (f.rank() > 0) a -= op.materialize_rows(first, cnt);
    res2 += a.squaredNorm();
  }
  if (a2 == 0.0) return 0.0;
  return std::sqrt(res2 / a2);
}

}  // namespace adacur
