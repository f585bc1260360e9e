#pragma once

#include "adacur/cur.hpp"

#include <chrono>
#include <functional>
#include <optional>
#include <string>
#include <string_view>

namespace adacur {

/// A parameter-dependent matrix sampled at t_1 < ... < t_q. The provider
/// returns an oracle for A(t_k), k = 0..q-1; all share the dimensions m x n.
struct ParamMatrixSequence {
  std::vector<double> params;
  Index m = 0;
  Index n = 0;
  std::function<OraclePtr(Index)> provider;

  Index size() const { return static_cast<Index>(params.size()); }
  OraclePtr at(Index k) const {
    require(k >= 0 && k < size(), "sequence: step out of range");
    OraclePtr a = provider(k);
    require(a && a->rows() == m && a->cols() == n, "sequence: provider returned a mismatched oracle");
    return a;
  }
};

inline void validate_sequence(const ParamMatrixSequence& seq) {
  require(seq.size() >= 1, "sequence: at least one parameter value is required");
  require(static_cast<bool>(seq.provider), "sequence: missing provider");
  require(seq.m >= 1 && seq.n >= 1, "sequence: empty dimensions");
  for (std::size_t k = 1; k < seq.params.size(); ++k)
    require(seq.params[k] > seq.params[k - 1], "sequence: parameters must be strictly increasing");
}

enum class Action { reuse, minor_mod, recompute, truncate, expand };

inline std::string_view action_name(Action a) {
  switch (a) {
    case Action::reuse: return "REUSE";
    case Action::minor_mod: return "MINOR_MOD";
    case Action::recompute: return "RECOMPUTE";
    case Action::truncate: return "TRUNCATE";
    case Action::expand: return "EXPAND";
  }
  return "?";
}

inline Action parse_action(std::string_view s) {
  if (s == "REUSE") return Action::reuse;
  if (s == "MINOR_MOD") return Action::minor_mod;
  if (s == "RECOMPUTE") return Action::recompute;
  if (s == "TRUNCATE") return Action::truncate;
  if (s == "EXPAND") return Action::expand;
  throw InvalidInput("unknown action '" + std::string(s) + "'");
}

/// One parameter value's record. step is 1-based. h1_cum counts MINOR_MOD
/// steps so far, h2_cum counts RECOMPUTE steps after the first.
struct StepTrace {
  Index step = 0;
  double t = 0.0;
  Index rank = 0;
  std::optional<double> est_rel_error;
  std::optional<double> true_rel_error;
  Action action = Action::recompute;
  Index h1_cum = 0;
  Index h2_cum = 0;
  std::uint64_t matvecs = 0;  // products with A and A^T during the step
  std::uint64_t entries_read = 0;
  double wall_ms = 0.0;
  std::vector<std::string> notes;
};

struct StepResult {
  CURFactors factors;
  StepTrace trace;
};

using StepSink = std::function<void(const CURFactors&, const StepTrace&)>;

/// A run stopped by an exception; carries the steps completed before it.
class RunAborted : public Error {
 public:
  RunAborted(const std::string& what, std::vector<StepTrace> partial)
      : Error(what), partial_(std::move(partial)) {}
  const std::vector<StepTrace>& partial() const { return partial_; }

 private:
  std::vector<StepTrace> partial_;
};

namespace detail {

class Stopwatch {
 public:
  Stopwatch() : start_(std::chrono::steady_clock::now()) {}
  double ms() const {
    return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_;
};

/// Shared per-step bookkeeping of the drivers: timing, counters, h-counts,
/// optional truth and delivery to the sink.
class TraceRecorder {
 public:
  TraceRecorder(const ParamMatrixSequence& seq, bool true_error, StepSink sink)
      : seq_(seq), true_error_(true_error), sink_(std::move(sink)) {}

  void finish(const MatrixOracle& a, Index k, const AccessCounts& before, double wall_ms, const CURFactors& f,
              StepTrace tr) {
    const AccessCounts used = a.counts() - before;
    tr.step = k + 1;
    tr.t = seq_.params[static_cast<std::size_t>(k)];
    tr.rank = f.rank();
    tr.matvecs = used.total_matvecs();
    tr.entries_read = used.entries_read;
    tr.wall_ms = wall_ms;
    if (tr.action == Action::minor_mod) ++h1_;
    if (tr.action == Action::recompute && k > 0) ++h2_;
    tr.h1_cum = h1_;
    tr.h2_cum = h2_;
    if (true_error_) tr.true_rel_error = true_relative_error(a, f);
    if (sink_) sink_(f, tr);
    traces_.push_back(std::move(tr));
  }

  std::vector<StepTrace>& traces() { return traces_; }

 private:
  const ParamMatrixSequence& seq_;
  bool true_error_;
  StepSink sink_;
  Index h1_ = 0;
  Index h2_ = 0;
  std::vector<StepTrace> traces_;
};

/// Runs `body(k)` for every step, wrapping failures in RunAborted.
template <class Body>
std::vector<StepTrace> run_steps(const ParamMatrixSequence& seq, TraceRecorder& rec, Body&& body) {
  for (Index k = 0; k < seq.size(); ++k) {
    try {
      body(k);
    } catch (const std::exception& e) {
      throw RunAborted("step " + std::to_string(k + 1) + ": " + e.what(), rec.traces());
    }
  }
  return std::move(rec.traces());
}

}  // namespace detail
}  // namespace adacur
