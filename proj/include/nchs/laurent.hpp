#pragma once
// Matrix-valued Laurent polynomials on the circle and their grid transforms.

#include <unsupported/Eigen/FFT>

#include <cmath>
#include <map>
#include <numbers>
#include <vector>

#include "nchs/opcore.hpp"

namespace nchs {

/// x(z) = sum_k c_k z^k with d x d coefficient blocks; only nonzero degrees
/// are stored. Products are exact convolutions.
class Laurent {
 public:
  Laurent() = default;
  explicit Laurent(Eigen::Index d) : d_(d) {}

  static Laurent constant(const CMat& c) {
    Laurent x(c.rows());
    x.set(0, c);
    return x;
  }
  static Laurent monomial(int k, const CMat& c) {
    Laurent x(c.rows());
    x.set(k, c);
    return x;
  }
  static Laurent identity(Eigen::Index d) { return constant(CMat::Identity(d, d)); }

  Eigen::Index dim() const { return d_; }
  const std::map<int, CMat>& coeffs() const { return c_; }
  bool empty() const { return c_.empty(); }

  CMat coeff(int k) const {
    auto it = c_.find(k);
    return it == c_.end() ? CMat::Zero(d_, d_) : it->second;
  }

  void set(int k, const CMat& c) {
    if (c.rows() != d_ || c.cols() != d_)
      fail(ErrorKind::InvalidArgument, "Laurent::set: block size mismatch");
    c_[k] = c;
  }
  void add(int k, const CMat& c) {
    auto it = c_.find(k);
    if (it == c_.end())
      set(k, c);
    else
      it->second += c;
  }

  int min_degree() const { return c_.empty() ? 0 : c_.begin()->first; }
  int max_degree() const { return c_.empty() ? 0 : c_.rbegin()->first; }
  /// Largest |k| among stored coefficients.
  int degree() const { return std::max(std::abs(min_degree()), std::abs(max_degree())); }

  /// Drops coefficients whose Frobenius norm is <= tol (exact zeros by default).
  Laurent& prune(double tol = 0.0) {
    for (auto it = c_.begin(); it != c_.end();) {
      if (it->second.norm() <= tol)
        it = c_.erase(it);
      else
        ++it;
    }
    return *this;
  }

  /// Keeps only degrees in [lo, hi].
  Laurent band(int lo, int hi) const {
    Laurent out(d_);
    for (const auto& [k, c] : c_)
      if (k >= lo && k <= hi) out.c_[k] = c;
    return out;
  }

  CMat evaluate(double theta) const {
    CMat v = CMat::Zero(d_, d_);
    for (const auto& [k, c] : c_) v += c * std::polar(1.0, k * theta);
    return v;
  }

  Laurent adjoint() const {
    Laurent out(d_);
    for (const auto& [k, c] : c_) out.c_[-k] = c.adjoint();
    return out;
  }

  /// Coefficientwise transpose; an anti-automorphism that preserves analyticity.
  Laurent transpose() const {
    Laurent out(d_);
    for (const auto& [k, c] : c_) out.c_[k] = c.transpose();
    return out;
  }

  Laurent& operator+=(const Laurent& o) {
    check_dim(o);
    for (const auto& [k, c] : o.c_) add(k, c);
    return *this;
  }
  Laurent& operator-=(const Laurent& o) {
    check_dim(o);
    for (const auto& [k, c] : o.c_) add(k, -c);
    return *this;
  }
  Laurent& operator*=(Complex s) {
    for (auto& [k, c] : c_) c *= s;
    return *this;
  }

  friend Laurent operator+(Laurent a, const Laurent& b) { return a += b; }
  friend Laurent operator-(Laurent a, const Laurent& b) { return a -= b; }
  friend Laurent operator*(Complex s, Laurent a) { return a *= s; }

  friend Laurent operator*(const Laurent& a, const Laurent& b) {
    a.check_dim(b);
    Laurent out(a.d_);
    for (const auto& [i, ci] : a.c_)
      for (const auto& [j, cj] : b.c_) out.add(i + j, ci * cj);
    return out;
  }

  /// Left/right multiplication by a constant block.
  Laurent left_mul(const CMat& m) const {
    Laurent out(m.rows());
    for (const auto& [k, c] : c_) out.c_[k] = m * c;
    return out;
  }
  Laurent right_mul(const CMat& m) const {
    Laurent out(m.cols());
    for (const auto& [k, c] : c_) out.c_[k] = c * m;
    return out;
  }

 private:
  void check_dim(const Laurent& o) const {
    if (o.d_ != d_) fail(ErrorKind::InvalidArgument, "Laurent: block size mismatch");
  }

  Eigen::Index d_ = 1;
  std::map<int, CMat> c_;
};

inline int next_pow2(int v) {
  int p = 1;
  while (p < v) p <<= 1;
  return p;
}

inline bool is_pow2(int v) { return v > 0 && (v & (v - 1)) == 0; }

/// Grid points theta_j = 2 pi (j + offset) / M.
inline double grid_angle(int j, int M, double offset = 0.0) {
  return 2.0 * std::numbers::pi * (j + offset) / M;
}

/// Samples x on the M-point grid. Exact for any degree (folding is aliasing
/// of the exponentials, which coincide on the grid).
inline std::vector<CMat> sample(const Laurent& x, int M, double offset = 0.0) {
  const Eigen::Index d = x.dim();
  std::vector<CMat> out(M, CMat::Zero(d, d));
  if (x.empty()) return out;
  Eigen::FFT<double> fft;
  std::vector<Complex> spec(M), vals(M);
  for (Eigen::Index p = 0; p < d; ++p) {
    for (Eigen::Index q = 0; q < d; ++q) {
      std::fill(spec.begin(), spec.end(), Complex(0.0));
      for (const auto& [k, c] : x.coeffs()) {
        const int idx = ((k % M) + M) % M;
        spec[idx] += c(p, q) * std::polar(1.0, 2.0 * std::numbers::pi * k * offset / M);
      }
      fft.inv(vals, spec);
      for (int j = 0; j < M; ++j) out[j](p, q) = vals[j] * static_cast<double>(M);
    }
  }
  return out;
}

/// Inverse of sample(): the Laurent polynomial with degrees in [-M/2, M/2)
/// that interpolates the samples. Coefficients with norm <= prune_tol dropped.
inline Laurent from_samples(const std::vector<CMat>& vals, double offset = 0.0, double prune_tol = 0.0) {
  const int M = static_cast<int>(vals.size());
  const Eigen::Index d = vals.front().rows();
  Laurent x(d);
  Eigen::FFT<double> fft;
  std::vector<Complex> in(M), spec(M);
  std::vector<CMat> coef(M, CMat::Zero(d, d));
  for (Eigen::Index p = 0; p < d; ++p) {
    for (Eigen::Index q = 0; q < d; ++q) {
      for (int j = 0; j < M; ++j) in[j] = vals[j](p, q);
      fft.fwd(spec, in);
      for (int idx = 0; idx < M; ++idx) coef[idx](p, q) = spec[idx] / static_cast<double>(M);
    }
  }
  for (int idx = 0; idx < M; ++idx) {
    const int k = idx < M / 2 ? idx : idx - M;
    CMat c = coef[idx] * std::polar(1.0, -2.0 * std::numbers::pi * k * offset / M);
    if (c.norm() > prune_tol) x.set(k, c);
  }
  return x;
}

/// Scalar convenience wrappers.
inline std::vector<Complex> sample_scalar(const Laurent& x, int M, double offset = 0.0) {
  std::vector<Complex> out(M);
  const auto s = sample(x, M, offset);
  for (int j = 0; j < M; ++j) out[j] = s[j](0, 0);
  return out;
}

inline Laurent from_scalar_samples(const std::vector<Complex>& v, double offset = 0.0, double prune_tol = 0.0) {
  std::vector<CMat> m(v.size(), CMat(1, 1));
  for (std::size_t j = 0; j < v.size(); ++j) m[j](0, 0) = v[j];
  return from_samples(m, offset, prune_tol);
}

}  // namespace nchs
