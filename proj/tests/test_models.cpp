#include <gtest/gtest.h>

#include "nchs/models.hpp"
#include "nchs/random.hpp"

using namespace nchs;

namespace {

const SubdiagonalModel kTri2 = SubdiagonalModel::triangular(2);
const SubdiagonalModel kScalar = SubdiagonalModel::fourier(1, 8);

CMat m2(Complex a, Complex b, Complex c, Complex d) {
  CMat x(2, 2);
  x << a, b, c, d;
  return x;
}

Laurent scalar(std::initializer_list<std::pair<int, Complex>> terms) {
  Laurent x(1);
  for (const auto& [k, c] : terms) x.set(k, CMat::Constant(1, 1, c));
  return x;
}

double dist(const SubdiagonalModel& m, const ModelElement& a, const ModelElement& b) { return l2_norm(m, a - b); }

}  // namespace

TEST(ModelSpec, ParseAndValidate) {
  const auto t = SubdiagonalModel::parse("triangular:n=6");
  EXPECT_TRUE(t.triangular_kind());
  EXPECT_EQ(t.n, 6);
  const auto f = SubdiagonalModel::parse("fourier:d=2,deg=16");
  EXPECT_EQ(f.d, 2);
  EXPECT_EQ(f.deg, 16);
  EXPECT_EQ(f.grid, 256);
  EXPECT_EQ(SubdiagonalModel::fourier(1, 100).grid, 1024);
  EXPECT_THROW(SubdiagonalModel::parse("fourier:d=2,deg=16,grid=100"), Error);
  EXPECT_THROW(SubdiagonalModel::parse("triangular:n=0"), Error);
  EXPECT_THROW(SubdiagonalModel::parse("circle:n=2"), Error);
  EXPECT_THROW(SubdiagonalModel::parse("triangular:n=x"), Error);
}

TEST(Phi, Examples) {
  const ModelElement x = m2(1, 2, 3, 4);
  EXPECT_EQ(dist(kTri2, phi(kTri2, x), m2(1, 0, 0, 4)), 0.0);
  EXPECT_EQ(dist(kScalar, phi(kScalar, scalar({{0, 2}, {1, 1}})), scalar({{0, 2}})), 0.0);
}

TEST(Phi, BimoduleAndMultiplicative) {
  Rng rng(11);
  for (const auto& m : {SubdiagonalModel::triangular(5), SubdiagonalModel::fourier(2, 4)}) {
    for (int t = 0; t < 200; ++t) {
      const ModelElement x = random_element(rng, m);
      const ModelElement a = phi(m, random_element(rng, m)), b = phi(m, random_element(rng, m));
      EXPECT_LE(dist(m, phi(m, a * x * b), a * phi(m, x) * b), 1e-12);
      EXPECT_LE(dist(m, phi(m, phi(m, x)), phi(m, x)), 0.0);
      EXPECT_LE(std::abs(trace(m, phi(m, x)) - trace(m, x)), 1e-12);
      const ModelElement h = random_analytic(rng, m), k = random_analytic(rng, m);
      EXPECT_LE(dist(m, phi(m, h * k), phi(m, h) * phi(m, k)), 1e-10);
    }
  }
}

TEST(Decompose, Examples) {
  const Laurent x = scalar({{-1, 1}, {0, 3}, {1, 1}});
  EXPECT_EQ(dist(kScalar, p_plus(kScalar, x), scalar({{0, 3}, {1, 1}})), 0.0);
  EXPECT_EQ(dist(kTri2, p_minus(kTri2, m2(1, 2, 3, 4)), m2(1, 0, 3, 4)), 0.0);
}

TEST(Decompose, IdentityAndOrthogonality) {
  Rng rng(12);
  for (const auto& m : {SubdiagonalModel::triangular(4), SubdiagonalModel::fourier(2, 3)}) {
    for (int t = 0; t < 50; ++t) {
      const ModelElement x = random_element(rng, m);
      const Decomposition dec = decompose(m, x);
      EXPECT_LE(dist(m, x, dec.plus0 + dec.diag + dec.minus0), 1e-12);
      EXPECT_LE(dist(m, x, p_plus(m, x) + p_minus(m, x) - phi(m, x)), 1e-12);
      EXPECT_LE(std::abs(inner(m, dec.plus0, dec.diag)), 1e-12);
      EXPECT_LE(std::abs(inner(m, dec.plus0, dec.minus0)), 1e-12);
      EXPECT_LE(std::abs(inner(m, dec.diag, dec.minus0)), 1e-12);
    }
  }
}

TEST(Algebra, ExactLaurentProducts) {
  const Laurent z = Laurent::monomial(1, CMat::Identity(2, 2));
  const ModelElement prod = mul(SubdiagonalModel::fourier(2, 2), z, z.adjoint());
  EXPECT_EQ(prod.laurent().coeffs().size(), 1u);
  EXPECT_EQ((prod.laurent().coeff(0) - CMat::Identity(2, 2)).norm(), 0.0);

  // Integer coefficients: the convolution is reproduced bitwise and degrees add.
  Rng rng(13);
  Laurent a(2), b(2);
  for (int k = -2; k <= 3; ++k) a.set(k, CMat::Constant(2, 2, Complex(rng.integer(-5, 5), rng.integer(-5, 5))));
  for (int k = 0; k <= 4; ++k) b.set(k, CMat::Constant(2, 2, Complex(rng.integer(-5, 5), 0)));
  const Laurent c = a * b;
  EXPECT_EQ(c.min_degree(), -2);
  EXPECT_EQ(c.max_degree(), 7);
  for (int k = -2; k <= 7; ++k) {
    CMat ref = CMat::Zero(2, 2);
    for (int i = -2; i <= 3; ++i)
      if (k - i >= 0 && k - i <= 4) ref += a.coeff(i) * b.coeff(k - i);
    EXPECT_EQ((c.coeff(k) - ref).norm(), 0.0);
  }
}

TEST(Algebra, AdjointInvolutionAndTrace) {
  Rng rng(14);
  for (const auto& m : {SubdiagonalModel::triangular(3), SubdiagonalModel::fourier(2, 3)}) {
    for (int t = 0; t < 20; ++t) {
      const ModelElement x = random_element(rng, m), y = random_element(rng, m);
      EXPECT_EQ(dist(m, adj(m, adj(m, x)), x), 0.0);
      EXPECT_LE(std::abs(trace(m, adj(m, x * y)) - std::conj(trace(m, x * y))), 1e-12);
    }
  }
  EXPECT_THROW(mul(kTri2, ModelElement(CMat(CMat::Identity(2, 2))), ModelElement(scalar({{0, 1}}))), Error);
}

TEST(Flip, AntiAutomorphism) {
  Rng rng(15);
  for (const auto& m : {SubdiagonalModel::triangular(4), SubdiagonalModel::fourier(2, 3)}) {
    for (int t = 0; t < 20; ++t) {
      const ModelElement x = random_element(rng, m), y = random_element(rng, m);
      EXPECT_LE(dist(m, flip(m, x * y), flip(m, y) * flip(m, x)), 1e-12);
      EXPECT_LE(dist(m, flip(m, x.adjoint()), flip(m, x).adjoint()), 1e-14);
      EXPECT_TRUE(in_algebra(m, flip(m, random_analytic(rng, m))));
      EXPECT_LE(std::abs(trace(m, flip(m, x)) - trace(m, x)), 1e-12);
    }
  }
}

TEST(Norms, Identity) {
  for (const auto& m : {SubdiagonalModel::triangular(3), SubdiagonalModel::fourier(2, 3)}) {
    EXPECT_NEAR(sup_norm(m, identity(m)), 1.0, 1e-14);
    EXPECT_NEAR(l2_norm(m, identity(m)), 1.0, 1e-14);
    EXPECT_NEAR(l1_norm(m, identity(m)), 1.0, 1e-12);
  }
  for (int k : {-5, 0, 3}) EXPECT_NEAR(l2_norm(kScalar, Laurent::monomial(k, CMat::Identity(1, 1))), 1.0, 1e-15);
}

TEST(Norms, SupNormRefinement) {
  Rng rng(16);
  const auto m = SubdiagonalModel::fourier(1, 16);
  const auto fine_model = SubdiagonalModel::fourier(1, 16, 8 * m.grid);
  for (int t = 0; t < 20; ++t) {
    const Laurent x = random_laurent(rng, 1, -16, 16, 0.9);
    const double coarse = sup_norm(m, x);
    EXPECT_LE(std::abs(coarse - sup_norm(fine_model, x)), 1e-6 * coarse);
    double dense = 0.0;
    for (const CMat& v : sample(x, 1 << 18)) dense = std::max(dense, std::abs(v(0, 0)));
    EXPECT_GE(coarse, dense - 1e-12);
    EXPECT_LE(coarse - dense, 1e-6 * dense);
  }
}

TEST(Norms, SupNormSubmultiplicative) {
  Rng rng(17);
  for (const auto& m : {SubdiagonalModel::triangular(4), SubdiagonalModel::fourier(2, 4)}) {
    for (int t = 0; t < 20; ++t) {
      const ModelElement x = random_element(rng, m), y = random_element(rng, m);
      EXPECT_LE(sup_norm(m, x * y), sup_norm(m, x) * sup_norm(m, y) + 1e-8);
    }
  }
}

TEST(Det, FourierMatchesQuadrature) {
  Rng rng(18);
  const auto m = SubdiagonalModel::fourier(2, 3);
  for (int t = 0; t < 10; ++t) {
    const ModelElement x = random_element(rng, m);
    double acc = 0.0;
    const int M = 1 << 14;
    for (const CMat& v : sample(x.laurent(), M)) acc += std::log(std::abs(v.determinant())) / 2.0;
    EXPECT_NEAR(std::log(det(m, x)), acc / M, 1e-6);
  }
  // |1 + z/2|: Mahler measure 1.
  EXPECT_NEAR(det(kScalar, scalar({{0, 1}, {1, 0.5}})), 1.0, 1e-12);
  // 2 + z: log 2.
  EXPECT_NEAR(det(kScalar, scalar({{0, 2}, {1, 1}})), 2.0, 1e-12);
  // z^{-3}(1/2 + z): Mahler measure 1.
  EXPECT_NEAR(det(kScalar, scalar({{-3, 0.5}, {-2, 1}})), 1.0, 1e-12);
}

TEST(Basis, ExamplesAndOrthonormality) {
  const auto a0 = basis(kTri2, Space::A0);
  ASSERT_EQ(a0.size(), 1u);
  EXPECT_NEAR(std::abs(a0[0].matrix()(0, 1)), std::sqrt(2.0), 1e-15);
  EXPECT_EQ(basis(SubdiagonalModel::triangular(3), Space::Astar).size(), 6u);

  for (const auto& m : {SubdiagonalModel::triangular(4), SubdiagonalModel::fourier(2, 4)}) {
    const int cutoff = m.triangular_kind() ? 0 : 5;
    for (Space s : {Space::A0, Space::Astar, Space::D, Space::H2}) {
      const auto b = basis(m, s, cutoff);
      for (std::size_t i = 0; i < b.size(); ++i)
        for (std::size_t j = 0; j < b.size(); ++j)
          EXPECT_NEAR(std::abs(inner(m, b[i], b[j]) - Complex(i == j ? 1.0 : 0.0)), 0.0, 1e-12);
    }
    for (const auto& a : basis(m, Space::A0, cutoff))
      for (const auto& b : basis(m, Space::Astar, cutoff)) EXPECT_LE(std::abs(inner(m, a, b)), 1e-12);
  }
  EXPECT_THROW(basis(SubdiagonalModel::fourier(1, 4), Space::A0, 1000), Error);
}

TEST(Compress, Examples) {
  const auto m = SubdiagonalModel::triangular(3);
  const Compression all = compress(m, CMat(CMat::Identity(3, 3)));
  EXPECT_EQ(all.model, m);
  CMat e = CMat::Zero(3, 3);
  e(0, 0) = e(1, 1) = 1.0;
  const Compression c = compress(m, e);
  EXPECT_EQ(c.model, SubdiagonalModel::triangular(2));
  Rng rng(19);
  const ModelElement x = gaussian(rng, 3, 3);
  const ModelElement y = c.restrict_to(x);
  EXPECT_LE(std::abs(trace(c.model, y) - trace(m, constant(m, e) * x * constant(m, e)) / (2.0 / 3.0)), 1e-12);
  EXPECT_LE(dist(m, c.embed(y), constant(m, e) * x * constant(m, e)), 1e-14);

  EXPECT_THROW(compress(m, CMat(CMat::Zero(3, 3))), Error);
  CMat off = CMat::Zero(3, 3);
  off.topLeftCorner(2, 2).setConstant(0.5);
  EXPECT_THROW(compress(m, off), Error);  // projection but not diagonal
}

TEST(Compress, FourierFrame) {
  const auto m = SubdiagonalModel::fourier(2, 4);
  CMat e = CMat::Constant(2, 2, 0.5);  // projection onto (1,1)/sqrt 2, an element of D = M_2
  const Compression c = compress(m, e);
  EXPECT_EQ(c.model.d, 1);
  Rng rng(20);
  const ModelElement x = random_element(rng, m);
  const ModelElement ex = Laurent(x.laurent()).left_mul(e).right_mul(e);
  EXPECT_LE(std::abs(trace(c.model, c.restrict_to(x)) - trace(m, ex) / 0.5), 1e-12);
  EXPECT_LE(dist(m, c.embed(c.restrict_to(x)), ex), 1e-12);
}
