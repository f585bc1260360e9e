#pragma once

// Command-line experiment runner: builds a problem, runs one driver and
// writes the per-step trace as CSV (plus an optional gnuplot script).

#include "adacur/adacur.hpp"

#include <CLI11.hpp>

#include <iostream>
#include <optional>
#include <regex>

namespace adacur::cli {

enum ExitCode : int { kOk = 0, kConfigError = 2, kRuntimeError = 3 };

struct ExperimentOptions {
  std::string problem = "synthetic";
  std::string dir;
  std::string algo = "adacur";
  double tol = 1e-8;
  Index oversample = 5;
  Index err_samples = 5;
  Index buffer = 5;
  std::uint64_t seed = 1;
  std::optional<Index> n;
  std::optional<Index> steps;
  std::optional<double> t_end;
  double rank_safety = 0.5;
  bool escalate_s = false;
  bool true_error = false;
  bool step_change = false;
  std::string out;
  std::string gnuplot;
  std::string seeds;  // "A..B"
};

struct RunSummary {
  std::vector<StepTrace> traces;
  double total_ms = 0.0;
  std::optional<double> min_step_change;
};

inline Index default_n(const std::string& problem) {
  if (problem == "schrodinger") return 128;
  if (problem == "speed") return 1000;
  return 200;
}

/// Speed problem at desk scale: m = 5n, r = n/10 (the original is 50000 x 5000, r = 500).
inline ParamMatrixSequence build_problem(const ExperimentOptions& o, std::uint64_t seed) {
  const Index n = o.n.value_or(default_n(o.problem));
  const Index q = o.steps.value_or(101);
  if (o.problem == "synthetic") return make_synthetic_expm(n, q, seed);
  if (o.problem == "schrodinger") return make_schrodinger(n, q, seed, o.t_end.value_or(0.1));
  if (o.problem == "adversarial") return make_adversarial(seed, q, o.t_end.value_or(100.0));
  if (o.problem == "speed") return make_speed_problem(5 * n, n, std::max<Index>(1, n / 10), q, seed).sequence;
  if (o.problem == "from-dir") return load_sequence_dir(o.dir);
  throw InvalidInput("unknown problem '" + o.problem + "'");
}

inline RunSummary run_once(const ExperimentOptions& o, std::uint64_t seed) {
  ParamMatrixSequence seq = build_problem(o, seed);
  RunSummary s;
  if (o.step_change) s.min_step_change = min_step_change(seq);
  detail::Stopwatch clock;
  if (o.algo == "fastadacur") {
    FastConfig c;
    c.tol = o.tol;
    c.buffer = o.buffer;
    c.oversample = o.oversample;
    c.seed = seed;
    c.rank_safety = o.rank_safety;
    c.true_error = o.true_error;
    s.traces = fastadacur_run(seq, c, {});
  } else {
    AdaCurConfig c;
    c.tol = o.tol;
    c.err_samples = o.err_samples;
    c.oversample = o.oversample;
    c.seed = seed;
    c.rank_safety = o.rank_safety;
    c.escalate_s = o.escalate_s;
    c.true_error = o.true_error;
    s.traces = o.algo == "adacur" ? adacur_run(seq, c, {}) : recompute_baseline_run(seq, c);
  }
  s.total_ms = clock.ms();
  return s;
}

/// Plot script reading only the CSV columns: error (log scale) and rank against t.
inline void write_gnuplot(const std::filesystem::path& script, const std::vector<std::filesystem::path>& csvs,
                          double tol) {
  std::ofstream g(script);
  if (!g) throw IoError("cannot write " + script.string());
  g << "set datafile separator ','\n"
    << "set key autotitle columnhead\n"
    << "set terminal pngcairo size 1200,500\n"
    << "set output '" << script.stem().string() << ".png'\n"
    << "set multiplot layout 1,2\n"
    << "set logscale y\nset format y '10^{%L}'\nset xlabel 't'\nset ylabel 'relative error'\n"
    << "plot ";
  for (std::size_t i = 0; i < csvs.size(); ++i)
    g << (i ? ", " : "") << "'" << csvs[i].string() << "' using 2:($5 == $5 ? $5 : 1/0) with lines title '"
      << csvs[i].stem().string() << " true', '" << csvs[i].string() << "' using 2:4 with points title '"
      << csvs[i].stem().string() << " est'";
  g << ", " << tol << " with lines dt 2 title 'tol'\n"
    << "unset logscale y\nset format y '%g'\nset ylabel 'rank'\nplot ";
  for (std::size_t i = 0; i < csvs.size(); ++i)
    g << (i ? ", " : "") << "'" << csvs[i].string() << "' using 2:3 with steps title '" << csvs[i].stem().string()
      << "'";
  g << "\nunset multiplot\n";
}

inline std::filesystem::path suffixed(const std::filesystem::path& out, std::uint64_t seed) {
  std::filesystem::path p = out;
  p.replace_filename(out.stem().string() + "_seed" + std::to_string(seed) + out.extension().string());
  return p;
}

inline int run_experiment(int argc, const char* const* argv, std::ostream& log = std::cout,
                          std::ostream& err = std::cerr) {
  ExperimentOptions o;
  CLI::App app{"Rank-adaptive CUR of parameter-dependent matrices"};
  app.option_defaults()->always_capture_default();
  app.add_option("--problem", o.problem, "Test problem")
      ->check(CLI::IsMember({"synthetic", "schrodinger", "adversarial", "speed", "from-dir"}));
  app.add_option("--dir", o.dir, "Directory of step_<k>.mtx files (from-dir)");
  app.add_option("--algo", o.algo, "Driver")->check(CLI::IsMember({"adacur", "fastadacur", "recompute-baseline"}));
  app.add_option("--tol", o.tol, "Relative error tolerance")->check(CLI::Range(0.0, 1.0));
  app.add_option("--oversample", o.oversample, "Oversampling rows p")->check(CLI::NonNegativeNumber);
  app.add_option("--err-samples", o.err_samples, "Error sample size s")->check(CLI::PositiveNumber);
  app.add_option("--buffer", o.buffer, "Buffer size b (fastadacur)")->check(CLI::NonNegativeNumber);
  app.add_option("--seed", o.seed, "Random seed");
  app.add_option("--n", o.n, "Problem size (speed: m = 5n, r = n/10)")->check(CLI::Range(Index{2}, Index{1} << 20));
  app.add_option("--steps", o.steps, "Number of parameter values")->check(CLI::Range(Index{1}, Index{1} << 20));
  app.add_option("--t-end", o.t_end, "End of the parameter interval (schrodinger, adversarial)")
      ->check(CLI::PositiveNumber);
  app.add_option("--rank-safety", o.rank_safety, "Rank tolerance factor")->check(CLI::Range(0.0, 1.0));
  app.add_flag("--escalate-s", o.escalate_s, "Double s before recomputing (adacur)");
  app.add_flag("--true-error", o.true_error, "Compute the true relative error at each step");
  app.add_flag("--step-change", o.step_change, "Log min_j ||A(t_j) - A(t_j-1)||_2 (dense; small problems)");
  app.add_option("--out", o.out, "Output CSV path")->required();
  app.add_option("--gnuplot", o.gnuplot, "Also write a gnuplot script here");
  app.add_option("--seeds", o.seeds, "Seed range A..B; writes one suffixed CSV per seed");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    log << app.help();
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n\n" << app.help();
    return kConfigError;
  }

  std::vector<std::uint64_t> seeds{o.seed};
  if (!o.seeds.empty()) {
    std::smatch mt;
    static const std::regex re(R"(^(\d+)\.\.(\d+)$)");
    if (!std::regex_match(o.seeds, mt, re) || std::stoull(mt[1]) > std::stoull(mt[2])) {
      err << "error: --seeds expects A..B with A <= B\n\n" << app.help();
      return kConfigError;
    }
    seeds.clear();
    for (auto s = std::stoull(mt[1]); s <= std::stoull(mt[2]); ++s) seeds.push_back(s);
  }
  if (o.problem == "from-dir" && o.dir.empty()) {
    err << "error: --problem from-dir requires --dir\n\n" << app.help();
    return kConfigError;
  }
  if (o.problem == "from-dir" && !std::filesystem::is_directory(o.dir)) {
    err << "error: --dir " << o.dir << " is not a directory\n";
    return kConfigError;
  }
  if (o.problem == "schrodinger" && o.n && *o.n % 2 != 0) {
    err << "error: schrodinger requires an even --n\n";
    return kConfigError;
  }

  try {
    std::vector<std::filesystem::path> written;
    for (std::uint64_t seed : seeds) {
      const std::filesystem::path path = o.seeds.empty() ? std::filesystem::path(o.out) : suffixed(o.out, seed);
      RunSummary s = run_once(o, seed);
      write_trace_csv(s.traces, path);
      written.push_back(path);
      double max_true = -1.0;
      for (const auto& t : s.traces)
        if (t.true_rel_error) max_true = std::max(max_true, *t.true_rel_error);
      const StepTrace& last = s.traces.back();
      log << path.string() << ": steps=" << s.traces.size() << " final_rank=" << last.rank << " h1=" << last.h1_cum
          << " h2=" << last.h2_cum << " total_ms=" << shortest(s.total_ms);
      if (max_true >= 0) log << " max_true_rel_err=" << shortest(max_true);
      if (s.min_step_change) log << " min_step_change=" << shortest(*s.min_step_change);
      log << '\n';
    }
    if (!o.gnuplot.empty()) write_gnuplot(o.gnuplot, written, o.tol);
  } catch (const InvalidInput& e) {
    err << "configuration error: " << e.what() << '\n';
    return kConfigError;
  } catch (const std::exception& e) {
    err << "runtime error: " << e.what() << '\n';
    return kRuntimeError;
  }
  return kOk;
}

}  // namespace adacur::cli
