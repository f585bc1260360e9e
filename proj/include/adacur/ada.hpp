#pragma once

#include "adacur/trace.hpp"

namespace adacur {

struct AdaCurConfig {
  double tol = 1e-6;
  Index err_samples = 5;
  Index oversample = 5;
  std::uint64_t seed = 0;
  double rank_safety = 0.5;  // rank tolerance is rank_safety * tol / sqrt(n)
  double srrqr_f = 2.0;
  /// On a failed minor modification, double the error sample size (up to
  /// four times) and retry before recomputing from scratch.
  bool escalate_s = false;
  bool true_error = false;
};

inline void validate(const AdaCurConfig& c) {
  require(c.tol > 0 && c.tol < 1, "adacur: tol must be in (0, 1)");
  require(c.err_samples >= 1, "adacur: err_samples must be >= 1");
  require(c.oversample >= 0, "adacur: oversample must be >= 0");
  require(c.rank_safety > 0 && c.rank_safety <= 1, "adacur: rank_safety must be in (0, 1]");
  require(c.srrqr_f >= 1, "adacur: srrqr_f must be >= 1");
}

/// Relative tolerance used for every rank decision: rank_safety * tol / sqrt(n).
inline double rank_tolerance(double tol, double rank_safety, Index n) {
  return rank_safety * tol / std::sqrt(static_cast<double>(n));
}

struct ScratchResult {
  IndexSelection selection;
  std::vector<std::string> notes;
};

/// Indices from scratch: relative rank estimate fused with pivoting, then p
/// oversampling rows.
inline ScratchResult indices_from_scratch(const MatrixOracle& a, double rank_tol, Index p, std::uint64_t seed) {
  ScratchResult out;
  PivotResult pr = rand_pivot_rankest(a, rank_tol, seed, TolKind::relative);
  if (pr.rank_capped) out.notes.emplace_back("rank tolerance not resolved; capped rank used");
  if (pr.degenerate) {
    out.notes.emplace_back("zero rank estimate");
    return out;
  }
  out.selection = std::move(pr.selection);
  if (p > 0) {
    out.selection.oversample_rows = oversample_rows_rounds(a.col_block(out.selection.cols), out.selection.rows, p);
    if (static_cast<Index>(out.selection.oversample_rows.size()) < p) out.notes.emplace_back("oversampling clamped");
  }
  return out;
}

struct RefineResult {
  IndexSelection selection;
  CURFactors factors;
  ErrorEstimate estimate;
  bool accepted = false;
  std::vector<std::string> notes;
};

/// Minor modification of a selection whose residual sketch is in `pack`:
/// s extra columns from CPQR on the residual sketch, s extra rows from CPQR
/// on the new columns, sRRQR ordering of the enlarged core, truncation to its
/// relative rank, and a new estimate that reuses Gamma_s.
inline RefineResult refine_indices(const MatrixOracle& a, const IndexSelection& sel, const SketchPack& pack,
                                   const AdaCurConfig& cfg) {
  require(pack.residual_sketch.has_value(), "refine_indices: pack has no residual sketch");
  const Matrix& es = *pack.residual_sketch;
  const Index m = a.rows();
  const Index n = a.cols();
  const Index s = es.rows();
  const double rtol = rank_tolerance(cfg.tol, cfg.rank_safety, n);
  RefineResult out;

  const IndexList free_cols = complement(n, {sel.cols});
  const IndexList j1 = permute(free_cols, cpqr_pivots(select_cols(es, free_cols), s));
  const IndexList free_rows = complement(m, {sel.rows, sel.oversample_rows});
  IndexList i1;
  if (!j1.empty() && !free_rows.empty())
    i1 = permute(free_rows, cpqr_pivots(a.submatrix(free_rows, j1).transpose(), s));

  const IndexList rows_all = concat(concat(sel.rows, i1), sel.oversample_rows);
  const IndexList cols_all = concat(sel.cols, j1);
  const Matrix core = a.submatrix(rows_all, cols_all);

  Index r = 0;
  IndexList col_order, row_order;
  if (core.size() > 0) {
    StrongRRQR sc = srrqr(core, {.f = cfg.srrqr_f, .k = std::nullopt, .rank_tol = rtol, .form_q = false});
    r = eps_rank_from_rdiag(sc.qr.r, rtol);
    col_order = std::move(sc.qr.pivots);
    if (r > 0) {
      StrongRRQR sr = srrqr(core.transpose(), {.f = cfg.srrqr_f, .k = r, .form_q = false});
      row_order = std::move(sr.qr.pivots);
    }
  }

  if (r > 0) {
    const Index avail = static_cast<Index>(rows_all.size()) - r;
    const Index p = std::min(cfg.oversample, avail);
    if (p < cfg.oversample) out.notes.emplace_back("oversampling shrunk to " + std::to_string(p));
    out.selection.rows = permute(rows_all, row_order, r);
    for (Index k = r; k < r + p; ++k) out.selection.oversample_rows.push_back(rows_all[static_cast<std::size_t>(row_order[static_cast<std::size_t>(k)])]);
    out.selection.cols = permute(cols_all, col_order, r);
  }
  out.factors = extract_factors(a, out.selection);
  out.estimate = estimate_cur_error(pack, out.factors);
  out.accepted = out.estimate.rel_error <= cfg.tol;
  return out;
}

namespace detail {

/// Appends `extra` rows to an error sketch pack, keeping the existing rows.
inline void grow_error_sketch(SketchPack& pack, const MatrixOracle& a, Index extra) {
  const Index old = pack.embedding.sketch_rows();
  pack.embedding.extend(extra);
  Matrix more = row_sketch(pack.embedding.raw().bottomRows(extra), a);
  pack.row_sketch.conservativeResize(old + extra, Eigen::NoChange);
  pack.row_sketch.bottomRows(extra) = more;
  pack.residual_sketch.reset();
}

}  // namespace detail

/// Certified rank-adaptive CUR along a parameter sequence. Each step after
/// the first reuses the previous indices when the estimated relative error is
/// within tol, otherwise tries a minor modification and finally recomputes
/// from scratch. Factors are handed to `sink` one step at a time.
inline std::vector<StepTrace> adacur_run(const ParamMatrixSequence& seq, const AdaCurConfig& cfg,
                                         const StepSink& sink) {
  validate_sequence(seq);
  validate(cfg);
  const double rtol = rank_tolerance(cfg.tol, cfg.rank_safety, seq.n);
  detail::TraceRecorder rec(seq, cfg.true_error, sink);
  IndexSelection sel;

  return detail::run_steps(seq, rec, [&](Index k) {
    OraclePtr a = seq.at(k);
    const std::uint64_t step_seed = derive_seed(cfg.seed, static_cast<std::uint64_t>(k));
    const AccessCounts before = a->counts();
    detail::Stopwatch clock;
    StepTrace tr;
    CURFactors f;

    auto recompute = [&](const SketchPack* pack) {
      ScratchResult sr = indices_from_scratch(*a, rtol, cfg.oversample, derive_seed(step_seed, 1));
      sel = std::move(sr.selection);
      tr.notes.insert(tr.notes.end(), sr.notes.begin(), sr.notes.end());
      tr.action = Action::recompute;
      f = extract_factors(*a, sel);
      if (pack) tr.est_rel_error = estimate_cur_error(*pack, f).rel_error;
    };

    if (k == 0) {
      recompute(nullptr);
    } else {
      SketchPack pack = draw_error_sketch(*a, cfg.err_samples, derive_seed(step_seed, 2));
      try {
        f = extract_factors(*a, sel);
        ErrorEstimate est = estimate_cur_error(pack, f);
        tr.est_rel_error = est.rel_error;
        tr.action = Action::reuse;
        if (est.rel_error > cfg.tol) {
          RefineResult ref = refine_indices(*a, sel, est.sketch, cfg);
          for (int round = 0; !ref.accepted && cfg.escalate_s && round < 4; ++round) {
            detail::grow_error_sketch(pack, *a, pack.embedding.sketch_rows());
            ErrorEstimate wider = estimate_cur_error(pack, f);
            ref = refine_indices(*a, sel, wider.sketch, cfg);
            pack = wider.sketch;
          }
          if (ref.accepted) {
            sel = std::move(ref.selection);
            f = std::move(ref.factors);
            tr.est_rel_error = ref.estimate.rel_error;
            tr.action = Action::minor_mod;
            tr.notes.insert(tr.notes.end(), ref.notes.begin(), ref.notes.end());
          } else {
            recompute(&pack);
            if (*tr.est_rel_error > cfg.tol) tr.notes.emplace_back("estimate above tol after recomputation");
          }
        }
      } catch (const ZeroMatrixSketch&) {
        sel = {};
        f = extract_factors(*a, sel);
        tr.est_rel_error.reset();
        tr.action = Action::recompute;
        tr.notes.emplace_back("zero row sketch; rank 0");
      }
    }
    rec.finish(*a, k, before, clock.ms(), f, std::move(tr));
  });
}

inline std::vector<StepResult> adacur_run(const ParamMatrixSequence& seq, const AdaCurConfig& cfg) {
  std::vector<StepResult> out;
  adacur_run(seq, cfg, [&](const CURFactors& f, const StepTrace& t) { out.push_back({f, t}); });
  return out;
}

/// Baseline: indices from scratch at every step, no error estimation.
inline std::vector<StepTrace> recompute_baseline_run(const ParamMatrixSequence& seq, const AdaCurConfig& cfg,
                                                     const StepSink& sink = {}) {
  validate_sequence(seq);
  validate(cfg);
  const double rtol = rank_tolerance(cfg.tol, cfg.rank_safety, seq.n);
  detail::TraceRecorder rec(seq, cfg.true_error, sink);
  return detail::run_steps(seq, rec, [&](Index k) {
    OraclePtr a = seq.at(k);
    const std::uint64_t step_seed = derive_seed(cfg.seed, static_cast<std::uint64_t>(k));
    const AccessCounts before = a->counts();
    detail::Stopwatch clock;
    StepTrace tr;
    ScratchResult sr = indices_from_scratch(*a, rtol, cfg.oversample, derive_seed(step_seed, 1));
    tr.notes = std::move(sr.notes);
    tr.action = Action::recompute;
    CURFactors f = extract_factors(*a, sr.selection);
    rec.finish(*a, k, before, clock.ms(), f, std::move(tr));
  });
}

}  // namespace adacur
