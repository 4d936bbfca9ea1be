#pragma once
// Seeded random elements. A given seed reproduces the same stream on a given
// standard library.

#include <cstdint>
#include <random>

#include "nchs/factor.hpp"

namespace nchs {

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : eng_(seed) {}

  double normal() { return normal_(eng_); }
  double uniform(double lo = 0.0, double hi = 1.0) { return std::uniform_real_distribution<double>(lo, hi)(eng_); }
  int integer(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(eng_); }
  Complex cnormal() { return Complex(normal(), normal()) * std::sqrt(0.5); }
  std::mt19937_64& engine() { return eng_; }

 private:
  std::mt19937_64 eng_;
  std::normal_distribution<double> normal_{0.0, 1.0};
};

/// Complex Gaussian matrix with E|a_ij|^2 = 1.
inline CMat gaussian(Rng& rng, Eigen::Index rows, Eigen::Index cols) {
  CMat a(rows, cols);
  for (Eigen::Index j = 0; j < cols; ++j)
    for (Eigen::Index i = 0; i < rows; ++i) a(i, j) = rng.cnormal();
  return a;
}

/// Haar-distributed unitary (QR of a Gaussian matrix with phase correction).
inline CMat random_unitary(Rng& rng, Eigen::Index n) {
  Eigen::HouseholderQR<CMat> qr(gaussian(rng, n, n));
  CMat q = qr.householderQ();
  const CMat r = qr.matrixQR();
  for (Eigen::Index i = 0; i < n; ++i) {
    const Complex v = r(i, i);
    if (std::abs(v) > 0.0) q.col(i) *= v / std::abs(v);
  }
  return q;
}

inline CMat random_hermitian(Rng& rng, Eigen::Index n) { return real_part(gaussian(rng, n, n)); }

/// g = b* b / n + eps 1.
inline CMat random_pd(Rng& rng, Eigen::Index n, double eps = 0.1) {
  const CMat b = gaussian(rng, n, n);
  return real_part(b.adjoint() * b / static_cast<double>(n)) + eps * CMat::Identity(n, n);
}

/// Upper triangular with diagonal moduli in [lo, hi] and Gaussian off-diagonal
/// entries scaled by `off`.
inline CMat random_upper(Rng& rng, Eigen::Index n, double lo = 0.5, double hi = 2.0, double off = 1.0) {
  CMat a = CMat::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    a(i, i) = std::polar(rng.uniform(lo, hi), rng.uniform(0.0, 2.0 * std::numbers::pi));
    for (Eigen::Index j = i + 1; j < n; ++j) a(i, j) = off * rng.cnormal();
  }
  return a;
}

inline Laurent random_laurent(Rng& rng, Eigen::Index d, int lo, int hi, double decay = 1.0) {
  Laurent x(d);
  for (int k = lo; k <= hi; ++k) x.set(k, gaussian(rng, d, d) * std::pow(decay, std::abs(k)));
  return x;
}

/// Random element of A (analytic / upper triangular).
inline ModelElement random_analytic(Rng& rng, const SubdiagonalModel& m, double decay = 0.6) {
  if (m.triangular_kind()) return random_upper(rng, m.n, 0.2, 2.0);
  return random_laurent(rng, m.d, 0, m.deg, decay);
}

inline ModelElement random_element(Rng& rng, const SubdiagonalModel& m, double decay = 0.6) {
  if (m.triangular_kind()) return gaussian(rng, m.n, m.n);
  return random_laurent(rng, m.d, -m.deg, m.deg, decay);
}

/// Strictly positive weight: x* x + eps with x random of degree <= deg.
inline ModelElement random_pd_element(Rng& rng, const SubdiagonalModel& m, double eps = 0.2, int deg = -1) {
  if (m.triangular_kind()) return random_pd(rng, m.n, eps);
  const int k = deg < 0 ? m.deg : deg;
  const Laurent x = random_laurent(rng, m.d, 0, k, 0.7);
  Laurent g = x.adjoint() * x;
  g *= Complex(1.0 / static_cast<double>(k + 1));
  g += Laurent::constant(eps * CMat::Identity(m.d, m.d));
  return g;
}


/// u = exp(i s H) with H Hermitian (a Hermitian trigonometric polynomial in
/// the Fourier model, exponentiated pointwise on the grid).
inline ModelElement unitary_scaled(Rng& rng, const SubdiagonalModel& m, double s) {
  if (m.triangular_kind()) return unitary_exp(s * random_hermitian(rng, m.n));
  const Laurent x = random_laurent(rng, m.d, 0, m.deg, 0.6);
  Laurent h = x + x.adjoint();
  h *= Complex(0.5 * s);
  return detail::synthesize(m, {&h}, [](const std::vector<CMat>& v) { return unitary_exp(v[0]); });
}

/// Unitary u with invertible T_u and known ground truth: L unit lower
/// triangular, L* L = R* R, u = L R^{-1}. Then g0 = R, d = Phi(R) and
/// g1 = L^{-*} d*.
struct PlantedInvToep {
  CMat u, g0, g1, d;
};

inline PlantedInvToep invtoep_planted(Rng& rng, const SubdiagonalModel& m, double spread = 1.0) {
  if (!m.triangular_kind()) fail(ErrorKind::InvalidArgument, "invtoep_planted: only the triangular model is supported");
  const Eigen::Index n = m.n;
  CMat L = CMat::Identity(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < i; ++j) L(i, j) = spread * rng.cnormal() / std::sqrt(static_cast<double>(n));
  const CMat G = L.adjoint() * L;
  PlantedInvToep p;
  p.g0 = Eigen::LLT<CMat>(G).matrixU();
  p.d = p.g0.diagonal().asDiagonal();
  p.u = L * p.g0.triangularView<Eigen::Upper>().solve(CMat(CMat::Identity(n, n)));
  const CMat Linv = L.triangularView<Eigen::UnitLower>().solve(CMat(CMat::Identity(n, n)));
  p.g1 = Linv.adjoint() * p.d.adjoint();
  return p;
}

}  // namespace nchs
