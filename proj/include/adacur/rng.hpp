#pragma once

// Reproducible Gaussian streams.
//
// Every random matrix in the library is generated row by row: row `i` of a
// stream keyed by `seed` comes from std::mt19937_64 seeded with
// splitmix64(seed, i), and standard normals are produced by the Box-Muller
// transform on 53-bit uniforms. Both algorithms are fully specified, so the
// same (seed, row) gives bitwise-identical values on every conforming
// platform. Appending rows never touches the existing ones.

#include "adacur/common.hpp"

#include <random>

namespace adacur {

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

/// Derives an independent child seed, e.g. one per parameter step.
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
  return splitmix64(splitmix64(seed) ^ splitmix64(stream + 0x632BE59BD9B4E019ULL));
}

class NormalStream {
 public:
  explicit NormalStream(std::uint64_t seed) : engine_(splitmix64(seed)) {}

  /// Uniform in (0, 1], 53 random bits.
  double uniform() {
    return (static_cast<double>(engine_() >> 11) + 1.0) * 0x1.0p-53;
  }

  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    const double u1 = uniform();
    const double u2 = uniform();
    const double radius = std::sqrt(-2.0 * std::log(u1));
    const double angle = 2.0 * 3.14159265358979323846 * u2;
    spare_ = radius * std::sin(angle);
    has_spare_ = true;
    return radius * std::cos(angle);
  }

  std::uint64_t bits() { return engine_(); }

  /// Uniform integer in [0, n).
  std::uint64_t below(std::uint64_t n) {
    // Lemire's multiply-shift with rejection.
    unsigned __int128 prod = static_cast<unsigned __int128>(engine_()) * n;
    auto low = static_cast<std::uint64_t>(prod);
    if (low < n) {
      const std::uint64_t threshold = (0 - n) % n;
      while (low < threshold) {
        prod = static_cast<unsigned __int128>(engine_()) * n;
        low = static_cast<std::uint64_t>(prod);
      }
    }
    return static_cast<std::uint64_t>(prod >> 64);
  }

 private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

/// Fills rows [first_row, first_row + out.rows()) of the standard-normal stream `seed`.
inline void fill_gaussian_rows(Matrix& out, std::uint64_t seed, Index first_row = 0) {
  // Row-wise generation into a column-major matrix: write through a row buffer.
  Vector buf(out.cols());
  for (Index i = 0; i < out.rows(); ++i) {
    NormalStream stream(derive_seed(seed, static_cast<std::uint64_t>(first_row + i)));
    for (Index j = 0; j < out.cols(); ++j) buf[j] = stream.normal();
    out.row(i) = buf.transpose();
  }
}

inline Matrix gaussian_matrix(Index rows, Index cols, std::uint64_t seed) {
  Matrix out(rows, cols);
  fill_gaussian_rows(out, seed);
  return out;
}

/// Haar-distributed matrix with orthonormal columns (QR of a Gaussian with sign fix).
inline Matrix haar_orthonormal(Index rows, Index cols, std::uint64_t seed) {
  Matrix g = gaussian_matrix(rows, cols, seed);
  Eigen::HouseholderQR<Matrix> qr(g);
  Matrix q = qr.householderQ() * Matrix::Identity(rows, cols);
  const auto& packed = qr.matrixQR();
  for (Index j = 0; j < cols; ++j)
    if (packed(j, j) < 0) q.col(j) *= -1.0;
  return q;
}

}  // namespace adacur
