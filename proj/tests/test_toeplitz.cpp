#include <gtest/gtest.h>

#include "nchs/random.hpp"
#include "nchs/toeplitz.hpp"

using namespace nchs;

namespace {

Laurent scalar(std::initializer_list<std::pair<int, Complex>> terms) {
  Laurent x(1);
  for (const auto& [k, c] : terms) x.set(k, CMat::Constant(1, 1, c));
  return x;
}

CMat cyclic_shift(Eigen::Index n) {
  CMat u = CMat::Zero(n, n);
  for (Eigen::Index i = 0; i + 1 < n; ++i) u(i + 1, i) = 1.0;
  u(0, n - 1) = 1.0;
  return u;
}

}  // namespace

TEST(ToeplitzMatrix, TriangularActsAsCompressedMultiplication) {
  Rng rng(1);
  const auto m = SubdiagonalModel::triangular(5);
  for (int t = 0; t < 5; ++t) {
    const CMat a = gaussian(rng, 5, 5);
    const CMat x = random_upper(rng, 5);
    const CVec lhs = toeplitz_matrix(m, a).matrix * h2_coordinates(m, x);
    CMat ax = a * x;
    ax.triangularView<Eigen::StrictlyLower>().setZero();
    EXPECT_LT((lhs - h2_coordinates(m, ax)).norm(), 1e-12);
    EXPECT_LT((from_h2_coordinates(m, h2_coordinates(m, x)).matrix() - x).norm(), 1e-12);
  }
}

TEST(ToeplitzMatrix, FourierSectionMatchesProjectedProduct) {
  Rng rng(2);
  const auto m = SubdiagonalModel::fourier(2, 3);
  const Laurent a = random_laurent(rng, 2, -3, 3);
  const Laurent x = random_laurent(rng, 2, 0, 5);
  const int c = 8;
  const CVec lhs = toeplitz_matrix(m, a, c).matrix * h2_coordinates(m, x, c);
  const Laurent ax = (a * x).band(0, c);
  EXPECT_LT((lhs - h2_coordinates(m, ax, c)).norm(), 1e-12);
}

TEST(ToeplitzMatrix, AnalyticSymbolsCompose) {
  // T_k T_{k^{-1}} = 1 for invertible k in A.
  Rng rng(3);
  const auto m = SubdiagonalModel::triangular(6);
  const CMat k = random_upper(rng, 6);
  const CMat T = toeplitz_matrix(m, k).matrix * toeplitz_matrix(m, CMat(k.inverse())).matrix;
  EXPECT_LT((T - CMat::Identity(T.rows(), T.cols())).norm(), 1e-10);
}

TEST(Hankel, VanishesOnTheAlgebraAndRestrictsCorrectly) {
  Rng rng(4);
  const auto m = SubdiagonalModel::triangular(4);
  // P_- keeps the diagonal, so only the restricted operator vanishes on A.
  EXPECT_LT(hankel_norm(m, random_upper(rng, 4), 0, true), 1e-14);
  EXPECT_NEAR(hankel_norm(m, identity(m)), 1.0, 1e-15);
  for (int t = 0; t < 5; ++t) {
    const CMat f = gaussian(rng, 4, 4);
    const double full = hankel_norm(m, f), restricted = hankel_norm(m, f, 0, true);
    EXPECT_LE(restricted, full + 1e-12);
    EXPECT_NEAR(restricted, hankel_restricted_norm(m, f), 1e-12);
  }
}

TEST(Hankel, ConjugateShiftHasUnitRestrictedNorm) {
  const auto m = SubdiagonalModel::fourier(1, 4);
  const Laurent zbar = scalar({{-1, 1}});
  const CMat H = hankel_matrix(m, zbar, 8, true).matrix;
  EXPECT_EQ(H.rows(), 1);
  EXPECT_EQ((H.array().abs() > 0).count(), 1);
  EXPECT_EQ(op_norm(H), 1.0);
}

TEST(Invertibility, ConjugateShiftKillsTheConstant) {
  const auto m = SubdiagonalModel::fourier(1, 4);
  const Laurent zbar = scalar({{-1, 1}});
  const InvertibilityResult r = invertibility_test(m, zbar, {4, 8, 16});
  EXPECT_EQ(r.verdict, InvertibilityVerdict::NotInvertible);
  const CMat T = toeplitz_matrix(m, zbar, 16).matrix;
  EXPECT_EQ((T * h2_coordinates(m, identity(m), 16)).norm(), 0.0);
}

TEST(Invertibility, Examples) {
  const auto t = SubdiagonalModel::triangular(4);
  EXPECT_EQ(invertibility_test(t, identity(t)).verdict, InvertibilityVerdict::Invertible);
  EXPECT_EQ(invertibility_test(t, cyclic_shift(4)).verdict, InvertibilityVerdict::NotInvertible);
  const auto f = SubdiagonalModel::fourier(1, 4);
  // The shift is an isometry but not onto: its sections lose the top degree.
  EXPECT_EQ(invertibility_test(f, scalar({{1, 1}})).verdict, InvertibilityVerdict::NotInvertible);
  const Laurent v = detail::synthesize(f, {}, [](const std::vector<CMat>&) { return CMat::Identity(1, 1); });
  EXPECT_EQ(invertibility_test(f, v).verdict, InvertibilityVerdict::Invertible);
}

TEST(InvToep, DiagonalPhases) {
  const auto m = SubdiagonalModel::triangular(3);
  const CVec ph = (CVec(3) << std::polar(1.0, 0.3), std::polar(1.0, -1.1), std::polar(1.0, 2.0)).finished();
  const CMat u = ph.asDiagonal();
  const InvToepStructure s = extract_invtoep(m, u);
  EXPECT_LT((s.g0.matrix() - u.adjoint()).norm(), 1e-12);
  EXPECT_LT((s.d.matrix() - u.adjoint()).norm(), 1e-12);
  EXPECT_LT((s.g1.matrix() - u).norm(), 1e-12);
}

TEST(InvToep, RecoversPlantedStructure) {
  Rng rng(5);
  for (int n : {2, 4, 6}) {
    const auto m = SubdiagonalModel::triangular(n);
    for (int t = 0; t < 10; ++t) {
      const PlantedInvToep p = invtoep_planted(rng, m, 1.0);
      EXPECT_LT((p.u.adjoint() * p.u - CMat::Identity(n, n)).norm(), 1e-12);
      const InvToepStructure s = extract_invtoep(m, p.u);
      EXPECT_LT((s.g0.matrix() - p.g0).norm(), 1e-7);
      EXPECT_LT((s.g1.matrix() - p.g1).norm(), 1e-7);
      EXPECT_LT((s.d.matrix() - p.d).norm(), 1e-7);
      EXPECT_LE(s.max_identity_residual(), 1e-8);
      EXPECT_LE(std::max(s.outer_gap_0, s.outer_gap_1), 1e-6);
    }
  }
}

TEST(InvToep, RejectsNonInvertible) {
  const auto m = SubdiagonalModel::triangular(4);
  try {
    extract_invtoep(m, cyclic_shift(4));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::NotInvertible);
  }
}

TEST(InvToep, FourierSmoothSymbol) {
  const auto m = SubdiagonalModel::fourier(1, 8);
  const Laurent c = scalar({{-1, 0.25}, {1, 0.25}});
  const Laurent u = detail::synthesize(m, {&c}, [](const std::vector<CMat>& v) { return unitary_exp(v[0]); });
  const InvToepStructure s = extract_invtoep(m, u, 1e-6, {16, 32, 64});
  EXPECT_LE(s.max_identity_residual(), 1e-6);
  EXPECT_LT(std::abs(s.d.laurent().coeff(0)(0, 0) - s.g0.laurent().coeff(0)(0, 0)), 1e-14);
}

TEST(PositiveAngle, PlantedWeightsArePositive) {
  Rng rng(6);
  const auto m = SubdiagonalModel::triangular(5);
  for (int t = 0; t < 5; ++t) {
    const PlantedInvToep p = invtoep_planted(rng, m);
    const PositiveAngleResult r = positive_angle_weight_test(m, p.u);
    EXPECT_TRUE(r.positive);
    EXPECT_TRUE(r.agree);
    EXPECT_LT((r.w.matrix() - p.g0.adjoint() * p.g0).norm(), 1e-8);
  }
}

TEST(Equivalence, IdentityAndCyclicShift) {
  const auto m = SubdiagonalModel::triangular(4);
  const EquivalenceReport a = equivalence_check(m, identity(m));
  EXPECT_TRUE(a.verdict_invertible && a.verdict_hankel && a.verdict_certificate);
  EXPECT_TRUE(a.agree);
  EXPECT_FALSE(a.flagged_ambiguous);
  EXPECT_TRUE(a.norm_one_checked);
  EXPECT_TRUE(a.norm_one_ok);

  const EquivalenceReport b = equivalence_check(m, cyclic_shift(4));
  EXPECT_FALSE(b.verdict_invertible || b.verdict_hankel || b.verdict_certificate);
  EXPECT_TRUE(b.agree);
  // dist(u, A) <= 1 for unitary u, so a negative Hankel verdict sits within tol of its threshold.
  EXPECT_TRUE(b.flagged_ambiguous);
}

TEST(Equivalence, VerdictsAgreeAwayFromTheBoundary) {
  Rng rng(7);
  const double tol = 1e-6;
  for (int n : {3, 5}) {
    const auto m = SubdiagonalModel::triangular(n);
    for (double s : {0.0, 0.5, 1.0, 2.0, 4.0}) {
      const EquivalenceReport r = equivalence_check(m, unitary_scaled(rng, m, s), {}, tol);
      if (!r.flagged_ambiguous) {
        EXPECT_TRUE(r.agree) << n << " " << s;
      }
      if (r.verdict_invertible && r.norm_one_checked) {
        EXPECT_TRUE(r.norm_one_ok);
      }
    }
  }
}

TEST(Equivalence, FourierScalarSymbol) {
  Rng rng(8);
  const auto m = SubdiagonalModel::fourier(1, 3);
  const EquivalenceReport r = equivalence_check(m, unitary_scaled(rng, m, 0.3), {6, 12, 24});
  EXPECT_EQ(r.invertibility, InvertibilityVerdict::Invertible);
  EXPECT_TRUE(r.agree);
}

TEST(UnitaryScaled, ZeroScaleIsIdentity) {
  Rng rng(9);
  const auto t = SubdiagonalModel::triangular(4);
  EXPECT_EQ((unitary_scaled(rng, t, 0.0).matrix() - CMat::Identity(4, 4)).norm(), 0.0);
  const auto f = SubdiagonalModel::fourier(2, 3);
  EXPECT_LT(l2_norm(f, unitary_scaled(rng, f, 0.0) - identity(f)), 1e-14);
}
