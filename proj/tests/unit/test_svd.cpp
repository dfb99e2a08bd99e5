#include <algorithm>
#include <cmath>

#include <gtest/gtest.h>

#include "ctlab/svd.hpp"

using namespace ctlab;

TEST(SvdFull, Diagonal) {
  const SvdFactors f = svd_full(Matrix{{3, 0}, {0, 1}});
  ASSERT_EQ(f.S.size(), 2u);
  EXPECT_NEAR(f.S[0], 3.0, 1e-14);
  EXPECT_NEAR(f.S[1], 1.0, 1e-14);
  EXPECT_LT(max_abs_diff(f.U * f.V.transpose(), Matrix::identity(2)), 1e-14);
}

TEST(SvdFull, Nilpotent) {
  const SvdFactors f = svd_full(Matrix{{0, 2}, {0, 0}});
  EXPECT_NEAR(f.S[0], 2.0, 1e-14);
  EXPECT_NEAR(f.S[1], 0.0, 1e-14);
  EXPECT_LT(max_abs_diff(reconstruct(f), Matrix{{0, 2}, {0, 0}}), 1e-14);
}

TEST(SvdFull, MatchesGramEigenvalues) {
  for (auto [r, c] : {std::pair{5, 4}, std::pair{4, 5}}) {
    const Matrix x = gaussian_matrix(r, c, 21);
    const SvdFactors f = svd_full(x);
    const SymEigen e = sym_eig(transpose_times(x, x));
    std::vector<double> ev = e.values;
    std::sort(ev.rbegin(), ev.rend());
    for (std::size_t i = 0; i < f.S.size(); ++i) EXPECT_NEAR(f.S[i], std::sqrt(std::max(ev[i], 0.0)), 1e-8);
    EXPECT_LT(max_abs_diff(reconstruct(f), x), 1e-10);
    EXPECT_LT(max_abs_diff(transpose_times(f.U, f.U), Matrix::identity(f.S.size())), 1e-10);
    EXPECT_LT(max_abs_diff(transpose_times(f.V, f.V), Matrix::identity(f.S.size())), 1e-10);
  }
}

TEST(SvdTruncate, KeepTopOnDiagonal) {
  const SvdFactors f = svd_full(Matrix::diagonal({3, 1}));
  const TruncationSpec t = TruncationSpec::keep_top(1);
  EXPECT_LT(max_abs_diff(svd_truncate(f, t), Matrix{{3, 0}, {0, 0}}), 1e-14);
  EXPECT_NEAR(truncation_residual_sq(f, t), 1.0, 1e-14);
}

TEST(SvdTruncate, DiscardPair) {
  const Matrix x = Matrix::diagonal({3, 2, 1});
  const SvdFactors f = svd_full(x);
  const TruncationSpec t = TruncationSpec::discard_pair(1);
  const Matrix y = svd_truncate(f, t);
  EXPECT_LT(max_abs_diff(y, Matrix::diagonal({0, 0, 1})), 1e-14);
  EXPECT_NEAR(std::sqrt(frobenius_distance_sq(x, y)), std::sqrt(13.0), 1e-12);
}

TEST(SvdTruncate, DiscardSingle) {
  const SvdFactors f = svd_full(Matrix::diagonal({3, 2, 1}));
  EXPECT_LT(max_abs_diff(svd_truncate(f, TruncationSpec::discard_single(2)), Matrix::diagonal({3, 0, 1})), 1e-14);
}

TEST(SvdTruncate, FullRankIsIdentity) {
  const Matrix x = gaussian_matrix(6, 4, 2);
  EXPECT_LT(max_abs_diff(svd_truncate(svd_full(x), TruncationSpec::keep_top(4)), x), 1e-10);
}

TEST(SvdTruncate, ValidationNamesField) {
  try {
    validate_truncation(TruncationSpec::keep_top(5), 4, 6);
    FAIL() << "expected throw";
  } catch (const std::invalid_argument& e) {
    EXPECT_NE(std::string(e.what()).find("svd.q"), std::string::npos);
  }
  EXPECT_THROW(validate_truncation(TruncationSpec::keep_top(0), 4, 6), std::invalid_argument);
  EXPECT_THROW(validate_truncation(TruncationSpec::discard_pair(4), 4, 6), std::invalid_argument);
}

TEST(Rsvd, RecoversExactRank) {
  const Matrix x = gaussian_matrix(10, 2, 3) * gaussian_matrix(2, 8, 4);
  const SvdFactors f = rsvd(x, 2, 2, 0, 9);
  EXPECT_LE(std::sqrt(frobenius_distance_sq(x, reconstruct(f))), 1e-8 * x.frobenius_norm());
}

TEST(Rsvd, CloseToExactTruncation) {
  const Matrix x = gaussian_matrix(32, 32, 5);
  const SvdFactors exact = svd_full(x);
  const double best = std::sqrt(truncation_residual_sq(exact, TruncationSpec::keep_top(8)));
  const SvdFactors f = rsvd(x, 8, 8, 2, 6);
  EXPECT_LE(std::sqrt(frobenius_distance_sq(x, reconstruct(f))), 1.5 * best);
}

TEST(Rsvd, Deterministic) {
  const Matrix x = gaussian_matrix(12, 9, 8);
  const SvdFactors a = rsvd(x, 3, 4, 2, 1), b = rsvd(x, 3, 4, 2, 1);
  EXPECT_EQ(a.U, b.U);
  EXPECT_EQ(a.S, b.S);
  EXPECT_EQ(a.V, b.V);
}

TEST(EckartYoung, Diagonal) {
  const EckartYoungReport r = eckart_young_check(Matrix::diagonal({3, 1}), 1, 50, 1);
  EXPECT_NEAR(r.truncated_error, 1.0, 1e-14);
  EXPECT_TRUE(r.holds);
  EXPECT_LE(r.truncated_error, r.min_competitor_error);
}

TEST(EckartYoung, RandomCompetitors) {
  const EckartYoungReport r = eckart_young_check(gaussian_matrix(6, 5, 10), 2, 100, 2);
  EXPECT_EQ(r.trials, 100u);
  EXPECT_EQ(r.violations, 0u);
  EXPECT_TRUE(r.holds);
}

TEST(EckartYoung, ExactRankGivesZero) {
  const Matrix x = gaussian_matrix(5, 2, 1) * gaussian_matrix(2, 5, 2);
  EXPECT_LT(eckart_young_check(x, 2, 10, 3).truncated_error, 1e-10);
}
