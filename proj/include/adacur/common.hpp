#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <span>
#include <stdexcept>
#include <string>
#include <unordered_set>
#include <vector>

namespace adacur {

// Dense storage is column-major throughout (Eigen default).
using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;
using IndexList = std::vector<Index>;

// ---------------------------------------------------------------------------
// Errors
// ---------------------------------------------------------------------------

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidInput : public Error {
 public:
  using Error::Error;
};

class NonConvergence : public Error {
 public:
  using Error::Error;
};

class ZeroMatrixSketch : public Error {
 public:
  ZeroMatrixSketch() : Error("row sketch of the matrix is exactly zero") {}
};

class IntegratorAccuracy : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t line)
      : Error(what + " (line " + std::to_string(line) + ")"), line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

// ---------------------------------------------------------------------------
// Small helpers
// ---------------------------------------------------------------------------

inline void require(bool cond, const std::string& msg) {
  if (!cond) throw InvalidInput(msg);
}

inline bool all_finite(const Matrix& a) { return a.allFinite(); }

inline IndexList iota_list(Index n, Index start = 0) {
  IndexList out(static_cast<std::size_t>(n));
  std::iota(out.begin(), out.end(), start);
  return out;
}

/// Elements of `a` followed by elements of `b`.
inline IndexList concat(std::span<const Index> a, std::span<const Index> b) {
  IndexList out(a.begin(), a.end());
  out.insert(out.end(), b.begin(), b.end());
  return out;
}

inline IndexList take(std::span<const Index> a, Index count) {
  count = std::clamp<Index>(count, 0, static_cast<Index>(a.size()));
  return IndexList(a.begin(), a.begin() + count);
}

/// a[perm[0]], a[perm[1]], ... for the first `count` entries of perm.
inline IndexList permute(std::span<const Index> a, std::span<const Index> perm,
                         Index count = -1) {
  if (count < 0 || count > static_cast<Index>(perm.size())) count = static_cast<Index>(perm.size());
  IndexList out;
  out.reserve(static_cast<std::size_t>(count));
  for (Index k = 0; k < count; ++k) out.push_back(a[static_cast<std::size_t>(perm[static_cast<std::size_t>(k)])]);
  return out;
}

/// Indices in [0, n) that do not appear in any of the excluded lists, ascending.
inline IndexList complement(Index n, std::initializer_list<std::span<const Index>> excluded) {
  std::vector<char> used(static_cast<std::size_t>(n), 0);
  for (auto list : excluded)
    for (Index i : list) used[static_cast<std::size_t>(i)] = 1;
  IndexList out;
  out.reserve(static_cast<std::size_t>(n));
  for (Index i = 0; i < n; ++i)
    if (!used[static_cast<std::size_t>(i)]) out.push_back(i);
  return out;
}

inline bool has_duplicates(std::span<const Index> a) {
  std::unordered_set<Index> seen;
  for (Index i : a)
    if (!seen.insert(i).second) return true;
  return false;
}

inline bool disjoint(std::span<const Index> a, std::span<const Index> b) {
  std::unordered_set<Index> seen(a.begin(), a.end());
  return std::none_of(b.begin(), b.end(), [&](Index i) { return seen.count(i) > 0; });
}

inline Matrix select_rows(const Matrix& a, std::span<const Index> rows) {
  Matrix out(static_cast<Index>(rows.size()), a.cols());
  for (std::size_t k = 0; k < rows.size(); ++k) out.row(static_cast<Index>(k)) = a.row(rows[k]);
  return out;
}

inline Matrix select_cols(const Matrix& a, std::span<const Index> cols) {
  Matrix out(a.rows(), static_cast<Index>(cols.size()));
  for (std::size_t k = 0; k < cols.size(); ++k) out.col(static_cast<Index>(k)) = a.col(cols[k]);
  return out;
}

inline constexpr double kEps = std::numeric_limits<double>::epsilon();

}  // namespace adacur
