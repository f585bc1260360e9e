#pragma once

#include "adacur/trace.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SparseCore>
#include <Eigen/SVD>

#include <memory>
#include <numbers>
#include <sstream>

namespace adacur {

inline std::vector<double> equispaced(Index q, double t0, double t1) {
  require(q >= 1, "problem: at least one parameter value is required");
  std::vector<double> t(static_cast<std::size_t>(q), t0);
  for (Index k = 1; k < q; ++k)
    t[static_cast<std::size_t>(k)] = t0 + (t1 - t0) * static_cast<double>(k) / static_cast<double>(q - 1);
  return t;
}

/// Wraps precomputed dense matrices, one per parameter value.
inline ParamMatrixSequence dense_sequence(std::vector<double> params, std::vector<Matrix> mats) {
  require(!mats.empty() && mats.size() == params.size(), "dense_sequence: size mismatch");
  ParamMatrixSequence seq;
  seq.m = mats.front().rows();
  seq.n = mats.front().cols();
  for (const Matrix& a : mats)
    require(a.rows() == seq.m && a.cols() == seq.n, "dense_sequence: mixed dimensions");
  seq.params = std::move(params);
  auto store = std::make_shared<std::vector<std::shared_ptr<const Matrix>>>();
  for (Matrix& a : mats) store->push_back(std::make_shared<const Matrix>(std::move(a)));
  seq.provider = [store](Index k) -> OraclePtr {
    return std::make_shared<DenseOracle>((*store)[static_cast<std::size_t>(k)]);
  };
  return seq;
}

/// min over j of ||A(t_j) - A(t_{j-1})||_2, from dense copies; a diagnostic for
/// how far apart consecutive parameter values are. 0 for a single step.
inline double min_step_change(const ParamMatrixSequence& seq) {
  validate_sequence(seq);
  double out = seq.size() > 1 ? std::numeric_limits<double>::infinity() : 0.0;
  Matrix prev = seq.at(0)->to_dense();
  for (Index k = 1; k < seq.size(); ++k) {
    Matrix cur = seq.at(k)->to_dense();
    const Eigen::BDCSVD<Matrix> svd(cur - prev);
    out = std::min(out, svd.singularValues().size() ? svd.singularValues()[0] : 0.0);
    prev = std::move(cur);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Synthetic problem: A(t) = e^{t W1} e^t D e^{t W2}
// ---------------------------------------------------------------------------

/// exp(tW) for a real skew-symmetric W from one real Schur form W = Z T Z^T.
/// T is block diagonal with 2x2 blocks [[a, b], [c, a]] (a ~ 0, bc < 0).
class SkewExp {
 public:
  explicit SkewExp(const Matrix& w) {
    Eigen::RealSchur<Matrix> schur(w);
    z_ = schur.matrixU();
    t_ = schur.matrixT();
  }

  Matrix operator()(double t) const {
    const Index n = t_.rows();
    if (t == 0.0) return Matrix::Identity(n, n);
    Matrix e = Matrix::Zero(n, n);
    for (Index i = 0; i < n;) {
      if (i + 1 < n && t_(i + 1, i) != 0.0) {
        const double a = t * t_(i, i);
        const double b = t * t_(i, i + 1);
        const double c = t * t_(i + 1, i);
        const double d = t * t_(i + 1, i + 1);
        const double mean = 0.5 * (a + d);
        const double omega = std::sqrt(std::max(0.0, -b * c));
        const double sinc = omega > 0 ? std::sin(omega) / omega : 1.0;
        const double g = std::exp(mean);
        e(i, i) = g * std::cos(omega);
        e(i, i + 1) = g * b * sinc;
        e(i + 1, i) = g * c * sinc;
        e(i + 1, i + 1) = g * std::cos(omega);
        i += 2;
      } else {
        e(i, i) = std::exp(t * t_(i, i));
        i += 1;
      }
    }
    return z_ * e * z_.transpose();
  }

 private:
  Matrix z_, t_;
};

inline Matrix random_skew(Index n, std::uint64_t seed) {
  Matrix g = gaussian_matrix(n, n, seed);
  return 0.5 * (g - g.transpose());
}

/// Dense A(t) of the synthetic problem; singular values e^t 2^{-j}, j = 1..n.
class SyntheticExpm {
 public:
  SyntheticExpm(Index n, std::uint64_t seed)
      : n_(n), e1_(random_skew(n, derive_seed(seed, 1))), e2_(random_skew(n, derive_seed(seed, 2))) {
    require(n >= 2, "synthetic: n must be >= 2");
  }

  Matrix diag() const {
    Vector d(n_);
    for (Index j = 0; j < n_; ++j) d[j] = std::ldexp(1.0, -static_cast<int>(j + 1));
    return d.asDiagonal();
  }

  Matrix at(double t) const {
    if (t == 0.0) return diag();
    return e1_(t) * (std::exp(t) * diag()) * e2_(t);
  }

 private:
  Index n_;
  SkewExp e1_, e2_;
};

/// Number of singular values above rel_tol * sigma_1 for the synthetic
/// problem; independent of t since sigma_j / sigma_1 = 2^{-(j-1)}.
inline Index synthetic_relative_rank(Index n, double rel_tol) {
  Index r = 0;
  for (Index j = 1; j <= n; ++j)
    if (std::ldexp(1.0, -static_cast<int>(j - 1)) > rel_tol) ++r;
  return r;
}

/// q equispaced t in [0, 1]. Matrices are formed on demand.
inline ParamMatrixSequence make_synthetic_expm(Index n, Index q, std::uint64_t seed) {
  auto gen = std::make_shared<const SyntheticExpm>(n, seed);
  ParamMatrixSequence seq;
  seq.params = equispaced(q, 0.0, 1.0);
  seq.m = n;
  seq.n = n;
  auto params = seq.params;
  seq.provider = [gen, params](Index k) -> OraclePtr {
    return std::make_shared<DenseOracle>(gen->at(params[static_cast<std::size_t>(k)]));
  };
  return seq;
}

// ---------------------------------------------------------------------------
// Schrodinger problem in imaginary time
// ---------------------------------------------------------------------------

struct SchrodingerOptions {
  double t_end = 0.1;
  /// Drops the potential term; the solution is then e^{tD/2} A0 e^{tD/2}.
  bool zero_potential = false;
  double richardson_tol = 1e-10;
};

/// dA/dt = (D A + A D) / 2 - V A V with D = tridiag(-1, 2, -1) and
/// V = diag(1 - cos(2 pi j / n)), j = -n/2 .. n/2 - 1.
class SchrodingerRhs {
 public:
  SchrodingerRhs(Index n, bool zero_potential) : v_(Vector::Zero(n)) {
    if (!zero_potential)
      for (Index i = 0; i < n; ++i) {
        const double j = static_cast<double>(i - n / 2);
        v_[i] = 1.0 - std::cos(2.0 * std::numbers::pi * j / static_cast<double>(n));
      }
  }

  Matrix operator()(const Matrix& a) const {
    const Index n = a.rows();
    Matrix da(n, n);
    // D A and A D without forming D.
    for (Index i = 0; i < n; ++i) {
      da.row(i) = 2.0 * a.row(i);
      if (i > 0) da.row(i) -= a.row(i - 1);
      if (i + 1 < n) da.row(i) -= a.row(i + 1);
    }
    Matrix ad(n, n);
    for (Index j = 0; j < n; ++j) {
      ad.col(j) = 2.0 * a.col(j);
      if (j > 0) ad.col(j) -= a.col(j - 1);
      if (j + 1 < n) ad.col(j) -= a.col(j + 1);
    }
    Matrix out = 0.5 * (da + ad);
    out.noalias() -= v_.asDiagonal() * a * v_.asDiagonal();
    return out;
  }

  /// Upper bound on the 1-norm of the linear map A -> rhs(A).
  double norm_bound() const { return 4.0 + v_.cwiseAbs2().maxCoeff(); }

 private:
  Vector v_;
};

inline Matrix rk4_step(const SchrodingerRhs& f, const Matrix& a, double h) {
  Matrix k1 = f(a);
  Matrix k2 = f(a + 0.5 * h * k1);
  Matrix k3 = f(a + 0.5 * h * k2);
  Matrix k4 = f(a + h * k3);
  return a + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

/// Random n x n matrix with singular values 10^{-i}, i = 1..n.
inline Matrix schrodinger_initial(Index n, std::uint64_t seed) {
  Vector s(n);
  for (Index i = 0; i < n; ++i) s[i] = std::pow(10.0, -static_cast<double>(i + 1));
  Matrix u = haar_orthonormal(n, n, derive_seed(seed, 1));
  Matrix v = haar_orthonormal(n, n, derive_seed(seed, 2));
  return u * s.asDiagonal() * v.transpose();
}

/// States at q equispaced times in [0, t_end] by fixed-step RK4. Each output
/// interval starts with ceil(dt * 4 * ||L||_1) substeps; the run is compared
/// with one using twice as many and the substep count is doubled until the
/// final states agree to richardson_tol relative. The finer states are
/// returned; IntegratorAccuracy after kMaxDoublings failed comparisons.
inline std::vector<Matrix> integrate_schrodinger(Index n, Index q, std::uint64_t seed, SchrodingerOptions opt = {}) {
  constexpr int kMaxDoublings = 6;
  require(n >= 2 && n % 2 == 0, "schrodinger: n must be even and >= 2");
  require(opt.t_end > 0, "schrodinger: t_end must be positive");
  const SchrodingerRhs rhs(n, opt.zero_potential);
  const std::vector<double> t = equispaced(q, 0.0, opt.t_end);
  const double dt = q > 1 ? t[1] - t[0] : 0.0;
  Index sub = std::max<Index>(1, static_cast<Index>(std::ceil(dt * 4.0 * rhs.norm_bound())));
  const Matrix a0 = schrodinger_initial(n, seed);

  double diff = 0;
  for (int attempt = 0; attempt <= kMaxDoublings; ++attempt, sub *= 2) {
    std::vector<Matrix> fine;
    fine.reserve(static_cast<std::size_t>(q));
    fine.push_back(a0);
    Matrix coarse = a0;
    for (Index k = 1; k < q; ++k) {
      Matrix a = fine.back();
      for (Index i = 0; i < 2 * sub; ++i) a = rk4_step(rhs, a, dt / static_cast<double>(2 * sub));
      for (Index i = 0; i < sub; ++i) coarse = rk4_step(rhs, coarse, dt / static_cast<double>(sub));
      fine.push_back(std::move(a));
    }
    diff = (fine.back() - coarse).norm() / fine.back().norm();
    if (diff <= opt.richardson_tol) return fine;
  }
  std::ostringstream msg;
  msg << "schrodinger: step-halving check failed (relative difference " << diff << ")";
  throw IntegratorAccuracy(msg.str());
}

inline ParamMatrixSequence make_schrodinger(Index n, Index q, std::uint64_t seed, double t_end = 0.1,
                                            bool zero_potential = false) {
  SchrodingerOptions opt;
  opt.t_end = t_end;
  opt.zero_potential = zero_potential;
  return dense_sequence(equispaced(q, 0.0, t_end), integrate_schrodinger(n, q, seed, opt));
}

// ---------------------------------------------------------------------------
// Adversarial block problem
// ---------------------------------------------------------------------------

/// 300 x 100 matrix: A1 (100 x 20) in rows 0-99, cols 0-19, and
/// c(t) t A2 (200 x 10) in rows 100-299, cols 90-99, c(t) = 10^{-5 + t/10}.
class Adversarial {
 public:
  static constexpr Index kRows = 300, kCols = 100;

  explicit Adversarial(std::uint64_t seed)
      : a1_(gaussian_matrix(100, 20, derive_seed(seed, 1))), a2_(gaussian_matrix(200, 10, derive_seed(seed, 2))) {}

  static double scale(double t) { return std::pow(10.0, -5.0 + t / 10.0) * t; }

  Matrix at(double t) const {
    Matrix a = Matrix::Zero(kRows, kCols);
    a.topLeftCorner(100, 20) = a1_;
    a.bottomRightCorner(200, 10) = scale(t) * a2_;
    return a;
  }

  const Matrix& a1() const { return a1_; }
  const Matrix& a2() const { return a2_; }

 private:
  Matrix a1_, a2_;
};

/// q equispaced t in [0, t_end]. The default t_end = 100 (t = 0, 1, ..., 100)
/// lets the second block overtake the first; on [0, 1] it stays below 1e-4
/// of the first block's norm.
inline ParamMatrixSequence make_adversarial(std::uint64_t seed, Index q = 101, double t_end = 100.0) {
  auto gen = std::make_shared<const Adversarial>(seed);
  ParamMatrixSequence seq;
  seq.params = equispaced(q, 0.0, t_end);
  seq.m = Adversarial::kRows;
  seq.n = Adversarial::kCols;
  auto params = seq.params;
  seq.provider = [gen, params](Index k) -> OraclePtr {
    return std::make_shared<DenseOracle>(gen->at(params[static_cast<std::size_t>(k)]));
  };
  return seq;
}

// ---------------------------------------------------------------------------
// Speed problem: A(i) = U S V^T + delta * sum_{j < i} X_j
// ---------------------------------------------------------------------------

struct SpeedProblem {
  ParamMatrixSequence sequence;
  std::shared_ptr<const LowRankPlusSparseOracle::Base> base;
  /// Triplets of X_1, X_2, ... (X_j is used from step j + 1 on).
  std::shared_ptr<const std::vector<std::vector<Eigen::Triplet<double, Index>>>> noise;
};

/// Haar U (m x r), V (n x r), singular values geometric from 1 to 1e-8, and
/// sparse Gaussian X_j with round(density * m * n) entries at uniformly
/// drawn positions (duplicates summed).
inline SpeedProblem make_speed_problem(Index m, Index n, Index r, Index q, std::uint64_t seed, double delta = 1e-12,
                                       double density = 1e-5) {
  require(r >= 1 && r <= std::min(m, n), "speed problem: r must be in [1, min(m, n)]");
  require(q >= 1, "speed problem: q must be >= 1");
  require(density >= 0 && density <= 1, "speed problem: density must be in [0, 1]");
  Vector sigma(r);
  for (Index i = 0; i < r; ++i)
    sigma[i] = r == 1 ? 1.0 : std::pow(10.0, -8.0 * static_cast<double>(i) / static_cast<double>(r - 1));
  auto base = LowRankPlusSparseOracle::make_base(haar_orthonormal(m, r, derive_seed(seed, 1)), sigma,
                                                 haar_orthonormal(n, r, derive_seed(seed, 2)));

  using Triplet = Eigen::Triplet<double, Index>;
  auto noise = std::make_shared<std::vector<std::vector<Triplet>>>();
  const auto nnz = static_cast<Index>(std::llround(density * static_cast<double>(m) * static_cast<double>(n)));
  for (Index j = 1; j < q; ++j) {
    NormalStream rng(derive_seed(seed, 100 + static_cast<std::uint64_t>(j)));
    std::vector<Triplet> x;
    x.reserve(static_cast<std::size_t>(nnz));
    for (Index e = 0; e < nnz; ++e) {
      const auto i = static_cast<Index>(rng.below(static_cast<std::uint64_t>(m)));
      const auto c = static_cast<Index>(rng.below(static_cast<std::uint64_t>(n)));
      x.emplace_back(i, c, rng.normal());
    }
    noise->push_back(std::move(x));
  }

  SpeedProblem out;
  out.base = base;
  out.noise = noise;
  ParamMatrixSequence& seq = out.sequence;
  seq.params.resize(static_cast<std::size_t>(q));
  for (Index k = 0; k < q; ++k) seq.params[static_cast<std::size_t>(k)] = static_cast<double>(k + 1);
  seq.m = m;
  seq.n = n;
  seq.provider = [base, noise, m, n, delta](Index k) -> OraclePtr {
    std::vector<Triplet> all;
    for (Index j = 0; j < k; ++j) {
      const auto& x = (*noise)[static_cast<std::size_t>(j)];
      all.insert(all.end(), x.begin(), x.end());
    }
    SparseMatrix s(m, n);
    s.setFromTriplets(all.begin(), all.end());
    return std::make_shared<LowRankPlusSparseOracle>(base, std::move(s), delta);
  };
  return out;
}

}  // namespace adacur
