#pragma once

#include "adacur/trace.hpp"

#include <Eigen/SparseCore>

#include <charconv>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

namespace adacur {

// ---------------------------------------------------------------------------
// Matrix Market
// ---------------------------------------------------------------------------

struct MatrixMarketData {
  bool coordinate = false;  // sparse storage when true
  Matrix dense;
  SparseMatrix sparse;

  Index rows() const { return coordinate ? sparse.rows() : dense.rows(); }
  Index cols() const { return coordinate ? sparse.cols() : dense.cols(); }
  Matrix to_dense() const { return coordinate ? Matrix(sparse) : dense; }
};

namespace detail {

inline std::string lower(std::string s) {
  for (char& ch : s) ch = static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
  return s;
}

inline double parse_real(std::string_view tok, std::size_t line) {
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (ec != std::errc() || ptr != tok.data() + tok.size())
    throw ParseError("bad number '" + std::string(tok) + "'", line);
  return v;
}

inline long long parse_int(std::string_view tok, std::size_t line) {
  long long v = 0;
  auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (ec != std::errc() || ptr != tok.data() + tok.size())
    throw ParseError("bad integer '" + std::string(tok) + "'", line);
  return v;
}

inline std::vector<std::string_view> split_ws(std::string_view s) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && std::isspace(static_cast<unsigned char>(s[i]))) ++i;
    const std::size_t j = i;
    while (i < s.size() && !std::isspace(static_cast<unsigned char>(s[i]))) ++i;
    if (i > j) out.push_back(s.substr(j, i - j));
  }
  return out;
}

}  // namespace detail

/// Reads a real or integer Matrix Market file in coordinate or array format,
/// general or symmetric. Explicit zeros in coordinate files stay stored.
inline MatrixMarketData read_matrix_market(std::istream& in) {
  std::string line;
  std::size_t lineno = 0;
  if (!std::getline(in, line)) throw ParseError("empty Matrix Market input", 1);
  ++lineno;
  const auto head = detail::split_ws(line);
  if (head.size() != 5 || detail::lower(std::string(head[0])) != "%%matrixmarket" ||
      detail::lower(std::string(head[1])) != "matrix")
    throw ParseError("missing %%MatrixMarket matrix header", lineno);
  const std::string format = detail::lower(std::string(head[2]));
  const std::string field = detail::lower(std::string(head[3]));
  const std::string symmetry = detail::lower(std::string(head[4]));
  if (format != "coordinate" && format != "array") throw ParseError("unsupported format '" + format + "'", lineno);
  if (field != "real" && field != "integer" && field != "double")
    throw ParseError("unsupported field '" + field + "'", lineno);
  if (symmetry != "general" && symmetry != "symmetric")
    throw ParseError("unsupported symmetry '" + symmetry + "'", lineno);
  const bool symmetric = symmetry == "symmetric";

  auto next_data_line = [&](std::vector<std::string_view>& toks) {
    while (std::getline(in, line)) {
      ++lineno;
      if (!line.empty() && line[0] == '%') continue;
      toks = detail::split_ws(line);
      if (!toks.empty()) return true;
    }
    return false;
  };

  std::vector<std::string_view> toks;
  if (!next_data_line(toks)) throw ParseError("missing size line", lineno + 1);
  MatrixMarketData out;
  out.coordinate = format == "coordinate";
  if (toks.size() != (out.coordinate ? 3u : 2u)) throw ParseError("malformed size line", lineno);
  const long long m = detail::parse_int(toks[0], lineno);
  const long long n = detail::parse_int(toks[1], lineno);
  if (m < 0 || n < 0) throw ParseError("negative dimensions", lineno);
  if (symmetric && m != n) throw ParseError("symmetric matrix must be square", lineno);

  if (out.coordinate) {
    const long long nnz = detail::parse_int(toks[2], lineno);
    if (nnz < 0) throw ParseError("negative entry count", lineno);
    std::vector<Eigen::Triplet<double, Index>> trip;
    trip.reserve(static_cast<std::size_t>(symmetric ? 2 * nnz : nnz));
    for (long long e = 0; e < nnz; ++e) {
      if (!next_data_line(toks)) throw ParseError("unexpected end of file", lineno + 1);
      if (toks.size() != 3) throw ParseError("expected 'row col value'", lineno);
      const long long i = detail::parse_int(toks[0], lineno);
      const long long j = detail::parse_int(toks[1], lineno);
      const double v = detail::parse_real(toks[2], lineno);
      if (i < 1 || i > m || j < 1 || j > n) throw ParseError("entry index out of range", lineno);
      trip.emplace_back(static_cast<Index>(i - 1), static_cast<Index>(j - 1), v);
      if (symmetric && i != j) trip.emplace_back(static_cast<Index>(j - 1), static_cast<Index>(i - 1), v);
    }
    out.sparse.resize(static_cast<Index>(m), static_cast<Index>(n));
    out.sparse.setFromTriplets(trip.begin(), trip.end());
  } else {
    out.dense.resize(static_cast<Index>(m), static_cast<Index>(n));
    for (long long j = 0; j < n; ++j) {
      for (long long i = symmetric ? j : 0; i < m; ++i) {
        if (!next_data_line(toks)) throw ParseError("unexpected end of file", lineno + 1);
        if (toks.size() != 1) throw ParseError("expected one value per line", lineno);
        const double v = detail::parse_real(toks[0], lineno);
        out.dense(static_cast<Index>(i), static_cast<Index>(j)) = v;
        if (symmetric) out.dense(static_cast<Index>(j), static_cast<Index>(i)) = v;
      }
    }
  }
  if (next_data_line(toks)) throw ParseError("trailing data after the last entry", lineno);
  return out;
}

inline MatrixMarketData read_matrix_market(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  try {
    return read_matrix_market(in);
  } catch (const ParseError& e) {
    throw ParseError(path.filename().string() + ": " + e.what(), e.line());
  }
}

namespace detail {

inline std::ofstream open_for_write(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  return out;
}

inline std::string g17(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace detail

/// Array format, column-major, %.17g (round-trips bit-exactly).
inline void write_matrix_market(const std::filesystem::path& path, const Matrix& a) {
  auto out = detail::open_for_write(path);
  out << "%%MatrixMarket matrix array real general\n" << a.rows() << ' ' << a.cols() << '\n';
  for (Index j = 0; j < a.cols(); ++j)
    for (Index i = 0; i < a.rows(); ++i) out << detail::g17(a(i, j)) << '\n';
  if (!out) throw IoError("write failed: " + path.string());
}

/// Coordinate format; every stored entry is written, zeros included.
inline void write_matrix_market(const std::filesystem::path& path, const SparseMatrix& a) {
  auto out = detail::open_for_write(path);
  out << "%%MatrixMarket matrix coordinate real general\n"
      << a.rows() << ' ' << a.cols() << ' ' << a.nonZeros() << '\n';
  for (Index j = 0; j < a.outerSize(); ++j)
    for (SparseMatrix::InnerIterator it(a, j); it; ++it)
      out << it.row() + 1 << ' ' << it.col() + 1 << ' ' << detail::g17(it.value()) << '\n';
  if (!out) throw IoError("write failed: " + path.string());
}

/// Loads step_<k>.mtx files ordered by the integer k, with parameters from
/// params.txt (one per line) or t = k when that file is absent.
inline ParamMatrixSequence load_sequence_dir(const std::filesystem::path& dir) {
  namespace fs = std::filesystem;
  if (!fs::is_directory(dir)) throw IoError("not a directory: " + dir.string());
  std::map<long long, fs::path> files;
  for (const auto& entry : fs::directory_iterator(dir)) {
    const std::string name = entry.path().filename().string();
    if (!entry.is_regular_file() || name.size() <= 9 || name.rfind("step_", 0) != 0 ||
        name.substr(name.size() - 4) != ".mtx")
      continue;
    const std::string key = name.substr(5, name.size() - 9);
    long long k = 0;
    auto [ptr, ec] = std::from_chars(key.data(), key.data() + key.size(), k);
    if (ec != std::errc() || ptr != key.data() + key.size()) continue;
    if (!files.emplace(k, entry.path()).second) throw InvalidInput("duplicate step key in " + name);
  }
  if (files.empty()) throw InvalidInput("no step_<k>.mtx files in " + dir.string());

  std::vector<OraclePtr> oracles;
  std::vector<double> params;
  Index m = -1, n = -1;
  for (const auto& [k, path] : files) {
    MatrixMarketData d = read_matrix_market(path);
    if (m < 0) {
      m = d.rows();
      n = d.cols();
    } else if (d.rows() != m || d.cols() != n) {
      throw InvalidInput("dimension mismatch in " + path.filename().string());
    }
    if (m == 0 || n == 0) throw InvalidInput("empty matrix in " + path.filename().string());
    if (d.coordinate)
      oracles.push_back(std::make_shared<SparseOracle>(std::move(d.sparse)));
    else
      oracles.push_back(std::make_shared<DenseOracle>(std::move(d.dense)));
    params.push_back(static_cast<double>(k));
  }

  const fs::path ppath = dir / "params.txt";
  if (fs::exists(ppath)) {
    std::ifstream in(ppath);
    if (!in) throw IoError("cannot open " + ppath.string());
    std::vector<double> given;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      const auto toks = detail::split_ws(line);
      if (toks.empty()) continue;
      if (toks.size() != 1) throw ParseError("params.txt: expected one value per line", lineno);
      given.push_back(detail::parse_real(toks[0], lineno));
    }
    if (given.size() != params.size())
      throw InvalidInput("params.txt has " + std::to_string(given.size()) + " values for " +
                         std::to_string(params.size()) + " matrices");
    params = std::move(given);
  }
  for (std::size_t k = 1; k < params.size(); ++k)
    if (!(params[k] > params[k - 1])) throw InvalidInput("parameters must be strictly increasing");

  ParamMatrixSequence seq;
  seq.m = m;
  seq.n = n;
  seq.params = std::move(params);
  auto store = std::make_shared<std::vector<OraclePtr>>(std::move(oracles));
  seq.provider = [store](Index k) { return (*store)[static_cast<std::size_t>(k)]; };
  return seq;
}

// ---------------------------------------------------------------------------
// Trace CSV
// ---------------------------------------------------------------------------

inline constexpr std::string_view kTraceHeader =
    "step,t,rank,est_rel_err,true_rel_err,action,h1_cum,h2_cum,matvecs,wall_ms";

/// Shortest decimal form that parses back to the same double.
inline std::string shortest(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  if (ec != std::errc()) throw IoError("number formatting failed");
  return std::string(buf, ptr);
}

inline void write_trace_csv(std::ostream& out, const std::vector<StepTrace>& traces) {
  out << kTraceHeader << '\n';
  for (const StepTrace& s : traces) {
    out << s.step << ',' << shortest(s.t) << ',' << s.rank << ',';
    if (s.est_rel_error) out << shortest(*s.est_rel_error);
    out << ',';
    if (s.true_rel_error) out << shortest(*s.true_rel_error);
    out << ',' << action_name(s.action) << ',' << s.h1_cum << ',' << s.h2_cum << ',' << s.matvecs << ','
        << shortest(s.wall_ms) << '\n';
  }
}

inline void write_trace_csv(const std::vector<StepTrace>& traces, const std::filesystem::path& path) {
  auto out = detail::open_for_write(path);
  write_trace_csv(out, traces);
  out.flush();
  if (!out) throw IoError("write failed: " + path.string());
}

inline std::vector<StepTrace> read_trace_csv(std::istream& in) {
  std::string line;
  std::size_t lineno = 1;
  if (!std::getline(in, line) || line != kTraceHeader) throw ParseError("unexpected trace header", lineno);
  std::vector<StepTrace> out;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::vector<std::string_view> f;
    std::string_view rest(line);
    for (;;) {
      const auto comma = rest.find(',');
      f.push_back(rest.substr(0, comma));
      if (comma == std::string_view::npos) break;
      rest.remove_prefix(comma + 1);
    }
    if (f.size() != 10) throw ParseError("expected 10 fields", lineno);
    StepTrace s;
    s.step = static_cast<Index>(detail::parse_int(f[0], lineno));
    s.t = detail::parse_real(f[1], lineno);
    s.rank = static_cast<Index>(detail::parse_int(f[2], lineno));
    if (!f[3].empty()) s.est_rel_error = detail::parse_real(f[3], lineno);
    if (!f[4].empty()) s.true_rel_error = detail::parse_real(f[4], lineno);
    try {
      s.action = parse_action(f[5]);
    } catch (const InvalidInput& e) {
      throw ParseError(e.what(), lineno);
    }
    s.h1_cum = static_cast<Index>(detail::parse_int(f[6], lineno));
    s.h2_cum = static_cast<Index>(detail::parse_int(f[7], lineno));
    s.matvecs = static_cast<std::uint64_t>(detail::parse_int(f[8], lineno));
    s.wall_ms = detail::parse_real(f[9], lineno);
    out.push_back(std::move(s));
  }
  return out;
}

inline std::vector<StepTrace> read_trace_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  return read_trace_csv(in);
}

}  // namespace adacur
