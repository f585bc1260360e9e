#pragma once

#include "adacur/ada.hpp"

namespace adacur {

struct FastConfig {
  double tol = 1e-6;
  Index buffer = 5;
  Index oversample = 5;
  std::uint64_t seed = 0;
  double rank_safety = 0.5;
  double srrqr_f = 2.0;
  bool true_error = false;
};

inline void validate(const FastConfig& c) {
  require(c.tol > 0 && c.tol < 1, "fastadacur: tol must be in (0, 1)");
  require(c.buffer >= 0, "fastadacur: buffer must be >= 0");
  require(c.oversample >= 0, "fastadacur: oversample must be >= 0");
  require(c.rank_safety > 0 && c.rank_safety <= 1, "fastadacur: rank_safety must be in (0, 1]");
  require(c.srrqr_f >= 1, "fastadacur: srrqr_f must be >= 1");
}

namespace detail {

/// Factors from the leading r columns and r + p rows, given the blocks
/// C = A(:, J(1:r)) and R = A(I(1:r+p), :) already read.
inline CURFactors fast_factors(Matrix c, Matrix r_block, const IndexList& rows, const IndexList& cols, Index r,
                               Index p) {
  CURFactors f;
  f.selection.cols = take(cols, r);
  f.selection.rows = take(rows, r);
  const IndexList lead = take(rows, r + p);
  f.selection.oversample_rows.assign(lead.begin() + static_cast<std::ptrdiff_t>(f.selection.rows.size()), lead.end());
  f.c = std::move(c);
  f.r = std::move(r_block);
  f.u = select_cols(f.r, f.selection.cols);
  return f;
}

}  // namespace detail

/// Sketch-free rank tracking. Carries |I| = r + b + p rows and |J| = r + b
/// columns; each step after the first reads only the core A(I, J) plus the
/// final factors, re-estimates the rank from the core, and either truncates
/// or replenishes the buffer by oversampling.
inline std::vector<StepTrace> fastadacur_run(const ParamMatrixSequence& seq, const FastConfig& cfg,
                                             const StepSink& sink) {
  validate_sequence(seq);
  validate(cfg);
  const double rtol = rank_tolerance(cfg.tol, cfg.rank_safety, seq.n);
  const Index b = cfg.buffer;
  const Index p = cfg.oversample;
  detail::TraceRecorder rec(seq, cfg.true_error, sink);
  IndexList rows, cols;  // I and J including buffer and oversampling, importance order
  Index r = 0;

  return detail::run_steps(seq, rec, [&](Index k) {
    OraclePtr a = seq.at(k);
    const AccessCounts before = a->counts();
    detail::Stopwatch clock;
    StepTrace tr;
    Matrix c_read, r_read;

    if (k == 0) {
      tr.action = Action::recompute;
      PivotResult pr = rand_pivot_rankest(*a, rtol, derive_seed(cfg.seed, 0), TolKind::relative);
      if (pr.rank_capped) tr.notes.emplace_back("rank tolerance not resolved; capped rank used");
      if (pr.degenerate) tr.notes.emplace_back("zero rank estimate");
      rows = std::move(pr.selection.rows);
      cols = std::move(pr.selection.cols);
      r = static_cast<Index>(cols.size());
      c_read = a->col_block(cols);
      IndexList i0 = oversample_rows_rounds(c_read, rows, p + b);
      rows = concat(rows, i0);
      // The factor rows I(1:r+p) extend past the pivot rows into I0 and
      // contain A(I(1:r), :), the input for J0.
      r_read = a->row_block(take(rows, r + p));
      IndexList j0 = oversample_rows_rounds(r_read.topRows(r).transpose(), cols, b);
      if (static_cast<Index>(i0.size()) < p + b || static_cast<Index>(j0.size()) < b)
        tr.notes.emplace_back("buffer clamped to matrix dimensions");
      cols = concat(cols, j0);
    } else {
      const Matrix core = a->submatrix(rows, cols);
      Index r0 = 0;
      IndexList col_order = iota_list(static_cast<Index>(cols.size()));
      IndexList row_order = iota_list(static_cast<Index>(rows.size()));
      if (core.size() > 0) {
        StrongRRQR sc = srrqr(core, {.f = cfg.srrqr_f, .k = std::nullopt, .rank_tol = rtol, .form_q = false});
        r0 = eps_rank_from_rdiag(sc.qr.r, rtol);
        col_order = std::move(sc.qr.pivots);
        StrongRRQR sr = srrqr(core.transpose(), {.f = cfg.srrqr_f, .k = std::max<Index>(r0, 1), .form_q = false});
        row_order = std::move(sr.qr.pivots);
      }
      IndexList rows_ord = permute(rows, row_order);
      IndexList cols_ord = permute(cols, col_order);
      if (r0 <= r) {
        tr.action = Action::truncate;
        rows = take(rows_ord, r0 + b + p);
        cols = take(cols_ord, r0 + b);
        c_read = a->col_block(take(cols, r0));
        r_read = a->row_block(take(rows, r0 + p));
      } else {
        tr.action = Action::expand;
        const Index delta = r0 - r;
        // The factor blocks double as the oversampling inputs, so expansion
        // reads nothing beyond the final factors.
        c_read = a->col_block(take(cols_ord, r0));
        r_read = a->row_block(take(rows_ord, r0 + p));
        IndexList i2 = oversample_rows_rounds(c_read, rows_ord, delta);
        IndexList j2 = oversample_rows_rounds(r_read.transpose(), cols_ord, delta);
        if (static_cast<Index>(i2.size()) < delta || static_cast<Index>(j2.size()) < delta)
          tr.notes.emplace_back("replenishment clamped to matrix dimensions");
        rows = concat(rows_ord, i2);
        cols = concat(cols_ord, j2);
      }
      r = r0;
    }

    CURFactors f = detail::fast_factors(std::move(c_read), std::move(r_read), rows, cols, r, p);
    rec.finish(*a, k, before, clock.ms(), f, std::move(tr));
  });
}

inline std::vector<StepResult> fastadacur_run(const ParamMatrixSequence& seq, const FastConfig& cfg) {
  std::vector<StepResult> out;
  fastadacur_run(seq, cfg, [&](const CURFactors& f, const StepTrace& t) { out.push_back({f, t}); });
  return out;
}

}  // namespace adacur
