#include "test_support.hpp"

#include <gtest/gtest.h>

using namespace adacur;
namespace ts = testing_support;

namespace {

IndexSelection random_selection(Index m, Index n, Index k, unsigned seed) {
  std::mt19937 gen(seed);
  IndexList rows = iota_list(m), cols = iota_list(n);
  std::shuffle(rows.begin(), rows.end(), gen);
  std::shuffle(cols.begin(), cols.end(), gen);
  return {take(rows, k), take(cols, k), {}};
}

}  // namespace

TEST(NormEst, ExactRankResidualVanishes) {
  DenseOracle o(ts::low_rank(80, 60, 5, 2));
  const IndexSelection sel = rand_pivot(o, 5, 1);
  EXPECT_LE(estimate_cur_error(o, sel, 5, 9).rel_error, 1e-10);
}

TEST(NormEst, WithinFactorTwoOfTruth) {
  int ok = 0;
  for (unsigned k = 0; k < 100; ++k) {
    const Matrix a = ts::randn(100, 80, 300 + k);
    DenseOracle o(a);
    const IndexSelection sel = rand_pivot(o, 10, k);
    const double truth = ts::cur_error(a, sel.rows, sel.cols);
    const double est = estimate_cur_error(o, sel, 5, derive_seed(11, k)).rel_error;
    ok += est <= 2 * truth && truth <= 2 * est;
  }
  EXPECT_GE(ok, 99);
}

TEST(NormEst, MissesOnlyOnRankOneResiduals) {
  // Uniformly random (I, J) can leave U nearly singular; the residual is then
  // dominated by one direction and s = 5 samples of it scatter widely.
  int ok = 0;
  for (unsigned k = 0; k < 100; ++k) {
    const Matrix a = ts::randn(100, 80, 300 + k);
    DenseOracle o(a);
    const IndexSelection sel = random_selection(100, 80, 10, k);
    const Matrix u = select_cols(select_rows(a, sel.rows), sel.cols);
    const Matrix res = a - select_cols(a, sel.cols) * ts::pinv(u) * select_rows(a, sel.rows);
    const double truth = res.norm() / a.norm();
    const double est = estimate_cur_error(o, sel, 5, derive_seed(11, k)).rel_error;
    if (est <= 2 * truth && truth <= 2 * est) {
      ++ok;
    } else {
      const Vector sv = ts::jacobi_sv(res);
      EXPECT_LT(sv.squaredNorm() / (sv[0] * sv[0]), 2.0) << "trial " << k;
    }
  }
  EXPECT_GE(ok, 95);
}

TEST(NormEst, ReusedSketchCostsSAdjointProducts) {
  const Matrix a = ts::randn(70, 50, 4);
  DenseOracle o(a);
  const SketchPack pack = draw_error_sketch(o, 5, 3);
  const IndexSelection s1 = random_selection(70, 50, 6, 1);
  const IndexSelection s2 = random_selection(70, 50, 9, 2);
  const ErrorEstimate e1 = estimate_cur_error(o, s1, 5, 0, &pack);
  const ErrorEstimate e2 = estimate_cur_error(o, s2, 5, 0, &pack);
  EXPECT_EQ(o.counts().adjoint_matvecs, 5u);
  EXPECT_EQ(o.counts().matvecs, 0u);
  EXPECT_EQ(e1.sketch.row_sketch, e2.sketch.row_sketch);
  EXPECT_NE(e1.rel_error, e2.rel_error);
}

TEST(NormEst, PackEstimateMatchesDirectFormula) {
  const Matrix a = ts::randn(40, 30, 5);
  DenseOracle o(a);
  const IndexSelection sel = random_selection(40, 30, 7, 5);
  const SketchPack pack = draw_error_sketch(o, 6, 8);
  const ErrorEstimate est = estimate_cur_error(o, sel, 6, 0, &pack);
  const Matrix g = pack.embedding.raw();
  const Matrix u = select_cols(select_rows(a, sel.rows), sel.cols);
  const Matrix cur = select_cols(a, sel.cols) * ts::pinv(u) * select_rows(a, sel.rows);
  const double direct = (g * a - g * cur).norm() / (g * a).norm();
  EXPECT_NEAR(est.rel_error, direct, 1e-12 * direct);
  EXPECT_LE((*est.sketch.residual_sketch - (g * a - g * cur)).norm(), 1e-12 * (g * a).norm());
}

TEST(NormEst, ScaleInvariant) {
  const Matrix a = ts::randn(50, 40, 6);
  DenseOracle o1(a), o2(3.7 * a);
  const IndexSelection sel = random_selection(50, 40, 8, 6);
  const double e1 = estimate_cur_error(o1, sel, 5, 42).rel_error;
  const double e2 = estimate_cur_error(o2, sel, 5, 42).rel_error;
  EXPECT_NEAR(e1, e2, 1e-12 * e1);
}

TEST(NormEst, ZeroMatrixThrows) {
  DenseOracle o(Matrix::Zero(20, 10));
  EXPECT_THROW(estimate_cur_error(o, random_selection(20, 10, 2, 1), 5, 1), ZeroMatrixSketch);
}

TEST(NormEst, BadArguments) {
  DenseOracle o(ts::randn(20, 10, 1));
  EXPECT_THROW(estimate_cur_error(o, random_selection(20, 10, 2, 1), 0, 1), InvalidInput);
  IndexSelection bad{{0, 0}, {1, 2}, {}};
  EXPECT_THROW(estimate_cur_error(o, bad, 5, 1), InvalidInput);
  DenseOracle other(ts::randn(30, 10, 2));
  const SketchPack pack = draw_error_sketch(other, 5, 1);
  EXPECT_THROW(estimate_cur_error(o, random_selection(20, 10, 2, 1), 5, 1, &pack), InvalidInput);
}

TEST(NormEst, ConcentrationAtTauTwo) {
  // Fixed A with stable rank >= 25; the randomness is in Gamma.
  const Matrix a = ts::randn(200, 150, 17);
  const Vector sv = ts::jacobi_sv(a);
  ASSERT_GE(sv.squaredNorm() / (sv[0] * sv[0]), 25.0);
  DenseOracle o(a);
  int fails = 0;
  for (unsigned k = 0; k < 1000; ++k) {
    const double est = draw_error_sketch(o, 5, derive_seed(123, k)).row_sketch.norm() / std::sqrt(5.0);
    fails += !(a.norm() / 2 < est && est <= 2 * a.norm());
  }
  EXPECT_LE(fails, 10);
}

TEST(TrueError, ExactRecoveryAndEmptySelection) {
  const Matrix a = ts::low_rank(60, 45, 4, 8);
  DenseOracle o(a);
  EXPECT_LE(true_relative_error(o, extract_factors(o, rand_pivot(o, 4, 2))), 1e-10);
  EXPECT_DOUBLE_EQ(true_relative_error(o, extract_factors(o, IndexSelection{})), 1.0);
  DenseOracle zero(Matrix::Zero(5, 4));
  EXPECT_EQ(true_relative_error(zero, extract_factors(zero, IndexSelection{{1}, {2}, {}})), 0.0);
}

TEST(TrueError, MatchesDenseReferenceAcrossRowBlocks) {
  // 600 x 8000 is split into two row blocks internally.
  const Matrix a = ts::randn(600, 8000, 12);
  DenseOracle o(a);
  const IndexSelection sel = random_selection(600, 8000, 12, 3);
  const double ref = ts::cur_error(a, sel.rows, sel.cols);
  EXPECT_NEAR(true_relative_error(o, extract_factors(o, sel)), ref, 1e-12 * ref);
}

TEST(TrueError, UsesOversampledRows) {
  Vector s(30);
  for (Index i = 0; i < 30; ++i) s[i] = std::pow(0.6, double(i));
  const Matrix a = ts::with_singular_values(90, 70, s, 4);
  DenseOracle o(a);
  IndexSelection sel = rand_pivot(o, 8, 4);
  sel.oversample_rows = oversample_rows(o, sel, 4);
  const double ref = ts::cur_error(a, sel.all_rows(), sel.cols);
  EXPECT_NEAR(true_relative_error(o, extract_factors(o, sel)), ref, 1e-10 * ref);
}

TEST(Factors, CrossConsistency) {
  const Matrix a = ts::randn(40, 30, 3);
  DenseOracle o(a);
  IndexSelection sel = rand_pivot(o, 6, 3);
  sel.oversample_rows = oversample_rows(o, sel, 3);
  const CURFactors f = extract_factors(o, sel);
  EXPECT_EQ(f.rank(), 6);
  EXPECT_EQ(f.u, select_rows(f.c, sel.all_rows()));
  EXPECT_EQ(f.u, select_cols(f.r, sel.cols));
  EXPECT_EQ(f.r, select_rows(a, sel.all_rows()));
}

TEST(Factors, ReadEachEntryOnce) {
  DenseOracle o(ts::randn(40, 30, 3));
  const IndexSelection sel = rand_pivot(o, 6, 3);
  const AccessCounts before = o.counts();
  extract_factors(o, sel);
  EXPECT_EQ((o.counts() - before).entries_read, std::uint64_t(40 * 6 + 6 * 30));
}
