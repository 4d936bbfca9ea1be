#include <gtest/gtest.h>

#include "nchs/opcore.hpp"
#include "nchs/random.hpp"

using namespace nchs;

namespace {

CMat diag(std::initializer_list<double> v) {
  CMat a = CMat::Zero(static_cast<Eigen::Index>(v.size()), static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) a(i, i) = x, ++i;
  return a;
}

CMat unit(Eigen::Index n, Eigen::Index i, Eigen::Index j) {
  CMat e = CMat::Zero(n, n);
  e(i, j) = 1.0;
  return e;
}

}  // namespace

TEST(TraceState, IdentityAndUnit) {
  EXPECT_NEAR(std::abs(trace_state(identity(3)) - Complex(1.0)), 0.0, 1e-15);
  EXPECT_NEAR(std::abs(trace_state(unit(2, 0, 0)) - Complex(0.5)), 0.0, 1e-15);
}

TEST(TraceState, Tracial) {
  Rng rng(1);
  for (int t = 0; t < 20; ++t) {
    const CMat a = gaussian(rng, 4, 4), b = gaussian(rng, 4, 4);
    EXPECT_LE(std::abs(trace_state(a * b) - trace_state(b * a)), 1e-12);
  }
}

TEST(TraceState, RejectsNonSquare) {
  EXPECT_THROW(trace_state(CMat::Zero(2, 3)), Error);
}

TEST(FkDet, Basics) {
  EXPECT_NEAR(fk_det(identity(5)), 1.0, 1e-15);
  EXPECT_NEAR(fk_det(diag({1, 4})), 2.0, 1e-14);
  EXPECT_EQ(fk_det(unit(2, 0, 0)), 0.0);
  EXPECT_EQ(fk_det(CMat::Zero(3, 3)), 0.0);
}

TEST(FkDet, Multiplicative) {
  Rng rng(2);
  for (int t = 0; t < 100; ++t) {
    const Eigen::Index n = rng.integer(1, 6);
    const CMat a = gaussian(rng, n, n), b = gaussian(rng, n, n);
    if (sigma_min(a) < 1e-6 || sigma_min(b) < 1e-6) continue;
    const double lhs = fk_det(a * b), rhs = fk_det(a) * fk_det(b);
    EXPECT_LE(std::abs(lhs - rhs), 1e-8 * std::max(1.0, rhs));
  }
}

TEST(FkDet, UnitaryAdjointModulus) {
  Rng rng(3);
  for (int t = 0; t < 50; ++t) {
    const Eigen::Index n = rng.integer(1, 7);
    EXPECT_NEAR(fk_det(random_unitary(rng, n)), 1.0, 1e-10);
    const CMat a = gaussian(rng, n, n);
    EXPECT_NEAR(fk_det(a), fk_det(a.adjoint()), 1e-10 * std::max(1.0, fk_det(a)));
    EXPECT_NEAR(fk_det(a), fk_det(abs_op(a)), 1e-10 * std::max(1.0, fk_det(a)));
  }
}

TEST(FkDet, LogSpaceAvoidsUnderflow) {
  // 64 singular values of 1e-10: the plain product underflows below 1e-300.
  EXPECT_NEAR(fk_det(1e-10 * identity(64), 1e-12) / 1e-10, 1.0, 1e-12);
}

TEST(FkDetCompressed, Examples) {
  EXPECT_NEAR(fk_det_compressed(identity(3), unit(3, 0, 0)), 1.0, 1e-14);
  EXPECT_NEAR(fk_det_compressed(diag({2, 3}), unit(2, 0, 0)), 2.0, 1e-14);
  Rng rng(4);
  for (int t = 0; t < 10; ++t) {
    const CMat g = random_pd(rng, 4);
    EXPECT_NEAR(fk_det_compressed(g, identity(4)), fk_det(g), 1e-12);
  }
}

TEST(FkDetCompressed, Errors) {
  EXPECT_THROW(fk_det_compressed(identity(2), diag({0.5, 1})), Error);
  EXPECT_THROW(fk_det_compressed(identity(2), CMat::Zero(2, 2)), Error);
}

TEST(SupportProj, Examples) {
  EXPECT_LE((support_proj(identity(3)) - identity(3)).norm(), 1e-14);
  EXPECT_LE((support_proj(unit(2, 0, 0)) - unit(2, 0, 0)).norm(), 1e-14);
}

TEST(SupportProj, RankDeficient) {
  Rng rng(5);
  for (int t = 0; t < 30; ++t) {
    const CMat b = gaussian(rng, 4, 2);
    const CMat g = b * b.adjoint();
    const CMat s = support_proj(g);
    const double top = lambda_max(g);
    EXPECT_EQ(projection_rank(s), 2);
    EXPECT_LE((s * g - g).norm(), 1e-9);
    EXPECT_LE((s * s - s).norm(), 1e-10);
    EXPECT_LE((s - s.adjoint()).norm(), 1e-10);
    EXPECT_LE((s * g * s - g).norm(), 1e-8 * top);
  }
}

TEST(SupportProj, RejectsIndefinite) {
  EXPECT_THROW(support_proj(diag({1, -1})), Error);
}

TEST(Polar, Examples) {
  const Polar p = polar(identity(2));
  EXPECT_LE((p.w - identity(2)).norm(), 1e-14);
  EXPECT_LE((p.p - identity(2)).norm(), 1e-14);
  const Polar q = polar(diag({-2, 3}));
  EXPECT_LE((q.w - diag({-1, 1})).norm(), 1e-14);
  EXPECT_LE((q.p - diag({2, 3})).norm(), 1e-14);
}

TEST(Polar, Recomposition) {
  Rng rng(6);
  for (int t = 0; t < 30; ++t) {
    const CMat a = gaussian(rng, 4, 4);
    const Polar p = polar(a);
    EXPECT_LE((p.w.adjoint() * p.w - identity(4)).norm(), 1e-10);
    EXPECT_LE((a - p.w * p.p).norm(), 1e-9 * op_norm(a));
  }
}

TEST(Polar, SingularGivesPartialIsometry) {
  Rng rng(7);
  const CMat b = gaussian(rng, 4, 2);
  const CMat a = b * gaussian(rng, 2, 4);
  const Polar p = polar(a);
  EXPECT_LE((a - p.w * p.p).norm(), 1e-9 * op_norm(a));
  EXPECT_LE((p.w.adjoint() * p.w - support_proj(p.p * p.p)).norm(), 1e-9);
}

TEST(FunctionalCalculus, Examples) {
  EXPECT_LE((psd_sqrt(diag({4, 9})) - diag({2, 3})).norm(), 1e-14);
  EXPECT_LE((pinv(unit(2, 0, 0)) - unit(2, 0, 0)).norm(), 1e-14);
  EXPECT_THROW(psd_sqrt(diag({1, -2})), Error);
  Rng rng(8);
  for (int t = 0; t < 20; ++t) {
    const CMat g = random_pd(rng, 5);
    const CMat r = psd_sqrt(g);
    EXPECT_LE((r * r - g).norm(), 1e-10);
    const CMat l = log_abs(g);
    EXPECT_NEAR(trace_state(l).real(), std::log(fk_det(g)), 1e-10);
  }
}

TEST(Hermitian, SymmetrizesSmallSkew) {
  CMat g = identity(2);
  g(0, 1) = 1e-12;
  EXPECT_NO_THROW(psd_spectrum(g, "test"));
  g(0, 1) = 0.5;
  EXPECT_THROW(psd_spectrum(g, "test"), Error);
}
