#pragma once
// Weights sampled on the circle: geometric mean, conjugate function, the
// scalar positivity certificate, A_2 and Treil-Volberg constants over a finite
// arc family, and the support projection check.

#include <functional>
#include <ostream>
#include <vector>

#include "nchs/angle.hpp"

namespace nchs {

/// Samples of a PSD weight at theta_j = 2 pi (j + offset) / M.
struct GridWeight {
  int M = 0;
  double offset = 0.0;
  std::vector<CMat> samples;

  Eigen::Index dim() const { return samples.empty() ? 0 : samples.front().rows(); }
  bool scalar() const { return dim() == 1; }
  double theta(int j) const { return grid_angle(j, M, offset); }

  std::vector<double> scalar_values() const {
    if (!scalar()) fail(ErrorKind::InvalidArgument, "GridWeight: scalar samples required");
    std::vector<double> v(samples.size());
    for (std::size_t j = 0; j < samples.size(); ++j) v[j] = samples[j](0, 0).real();
    return v;
  }

  void validate() const {
    if (M < 2 || !is_pow2(M)) fail(ErrorKind::InvalidArgument, "GridWeight: M must be a power of two >= 2");
    if (static_cast<int>(samples.size()) != M) fail(ErrorKind::InvalidArgument, "GridWeight: expected M samples");
    const Eigen::Index d = dim();
    for (const CMat& s : samples) {
      if (s.rows() != d || s.cols() != d) fail(ErrorKind::InvalidArgument, "GridWeight: inconsistent sample sizes");
      psd_spectrum(s, "GridWeight");
    }
  }

  static GridWeight from_scalars(const std::vector<double>& v, double offset = 0.0) {
    GridWeight w;
    w.M = static_cast<int>(v.size());
    w.offset = offset;
    for (double x : v) w.samples.push_back(CMat::Constant(1, 1, x));
    w.validate();
    return w;
  }

  static GridWeight from_function(const std::function<CMat(double)>& f, int M, double offset = 0.0) {
    GridWeight w;
    w.M = M;
    w.offset = offset;
    for (int j = 0; j < M; ++j) w.samples.push_back(f(grid_angle(j, M, offset)));
    w.validate();
    return w;
  }

  static GridWeight from_scalar_function(const std::function<double(double)>& f, int M, double offset = 0.0) {
    return from_function([&f](double t) { return CMat(CMat::Constant(1, 1, f(t))); }, M, offset);
  }
};

/// w_alpha(theta) = |1 - e^{i theta}|^{2 alpha}.
inline double w_alpha_value(double alpha, double theta) {
  return std::pow(2.0 * std::abs(std::sin(0.5 * theta)), 2.0 * alpha);
}

/// w_alpha on the half-sample grid, which never hits the zero at theta = 0.
inline GridWeight w_alpha(double alpha, int M) {
  return GridWeight::from_scalar_function([alpha](double t) { return w_alpha_value(alpha, t); }, M, 0.5);
}

/// Exact Fourier coefficients of w_alpha.
inline double w_alpha_coefficient(double alpha, int k) {
  k = std::abs(k);
  const double lg = std::lgamma(1.0 + 2.0 * alpha) - std::lgamma(1.0 + alpha + k);
  // 1 / Gamma(1 + alpha - k) changes sign with the integer part of k - alpha.
  const double x = 1.0 + alpha - k;
  double inv_gamma;
  if (x > 0.0) {
    inv_gamma = std::exp(-std::lgamma(x));
  } else if (x == std::floor(x)) {
    inv_gamma = 0.0;
  } else {
    inv_gamma = std::sin(std::numbers::pi * x) * std::tgamma(1.0 - x) / std::numbers::pi;
  }
  return (k % 2 ? -1.0 : 1.0) * std::exp(lg) * inv_gamma;
}

inline double geometric_mean(const GridWeight& w) {
  const auto v = w.scalar_values();
  double acc = 0.0;
  for (double x : v) {
    if (x <= kUnderflowFloor) return 0.0;
    acc += std::log(x);
  }
  return std::exp(acc / static_cast<double>(v.size()));
}

/// Harmonic conjugate on the grid: multiplier -i sgn(k), with the mean and the
/// Nyquist coefficient removed.
inline std::vector<double> conjugate_function(const std::vector<double>& v) {
  const int M = static_cast<int>(v.size());
  if (M < 2 || !is_pow2(M)) fail(ErrorKind::InvalidArgument, "conjugate_function: size must be a power of two");
  Eigen::FFT<double> fft;
  std::vector<Complex> in(v.begin(), v.end()), spec(M), out(M);
  fft.fwd(spec, in);
  spec[0] = 0.0;
  spec[M / 2] = 0.0;
  for (int i = 1; i < M / 2; ++i) {
    spec[i] *= Complex(0.0, -1.0);
    spec[M - i] *= Complex(0.0, 1.0);
  }
  fft.inv(out, spec);
  std::vector<double> r(M);
  for (int j = 0; j < M; ++j) r[j] = out[j].real();
  return r;
}

/// Fourier coefficients of a grid weight (aliased, degrees in [-M/2, M/2)).
inline Laurent grid_coefficients(const GridWeight& w) { return from_samples(w.samples, w.offset); }

// ---------------------------------------------------------------------------

struct HsCertificate {
  double rho_hat = 1.0;           ///< dist(e^{-i psi}, H^infty) at the cutoff
  int cutoff = 0;
  Laurent k0{1};                  ///< analytic approximant of e^{-i psi}
  double approx_achieved = 1.0;   ///< max |e^{-i psi} - k0| on the weight grid
  double eps = 0.0;
  double angle_excess = 0.0;      ///< max |psi + arg k0| - (pi/2 - eps)
  bool positive = false;
  std::vector<double> psi;
};

namespace detail {

inline std::vector<double> log_samples(const GridWeight& w, const char* what) {
  const auto v = w.scalar_values();
  std::vector<double> logw(v.size());
  for (std::size_t j = 0; j < v.size(); ++j) {
    if (!(v[j] > 0.0)) fail(ErrorKind::NonPositiveWeight, std::string(what) + ": weight sample " + std::to_string(j) + " is not positive");
    logw[j] = std::log(v[j]);
  }
  return logw;
}

inline std::vector<Complex> phase_samples(const std::vector<double>& psi) {
  std::vector<Complex> us(psi.size());
  for (std::size_t j = 0; j < psi.size(); ++j) us[j] = std::polar(1.0, -psi[j]);
  return us;
}

}  // namespace detail

/// dist(e^{-i psi}, H^infty) with psi the conjugate of log w. The default
/// cutoff M/2 covers every negative frequency of the grid symbol.
inline double hs_rho_hat(const GridWeight& w, int cutoff = 0) {
  w.validate();
  const auto us = detail::phase_samples(conjugate_function(detail::log_samples(w, "hs_rho_hat")));
  const auto m = SubdiagonalModel::fourier(1, 1, std::max(w.M, 8));
  return dist_to_algebra(m, from_scalar_samples(us, w.offset), cutoff > 0 ? cutoff : w.M / 2);
}

/// psi is the conjugate of log w and u = e^{-i psi}. When dist(u, H^infty) <
/// 1 - tol the best analytic approximant k0 gives |psi + arg k0| <= pi/2 - eps
/// with eps = min(1 - rho_hat, min |k0|).
inline HsCertificate hs_certificate(const GridWeight& w, double tol = 1e-6, int cutoff = 0, int max_iter = 1500) {
  w.validate();
  HsCertificate c;
  c.cutoff = cutoff > 0 ? cutoff : w.M / 2;
  c.psi = conjugate_function(detail::log_samples(w, "hs_certificate"));
  const auto us = detail::phase_samples(c.psi);
  const Laurent u = from_scalar_samples(us, w.offset);
  const auto m = SubdiagonalModel::fourier(1, 1, std::max(w.M, 8));
  c.rho_hat = dist_to_algebra(m, u, c.cutoff);
  if (c.rho_hat >= 1.0 - tol) {
    c.angle_excess = std::numbers::pi / 2;
    return c;
  }
  const Approximation ap = best_analytic_approx(m, u, c.cutoff, tol, max_iter);
  c.k0 = ap.f.laurent();
  const auto kv = sample_scalar(c.k0, w.M, w.offset);
  double kmin = std::numeric_limits<double>::infinity(), worst = 0.0, achieved = 0.0;
  for (int j = 0; j < w.M; ++j) {
    kmin = std::min(kmin, std::abs(kv[j]));
    worst = std::max(worst, std::abs(std::arg(std::polar(1.0, c.psi[j]) * kv[j])));
    achieved = std::max(achieved, std::abs(us[j] - kv[j]));
  }
  c.approx_achieved = achieved;
  c.eps = std::min(1.0 - c.rho_hat, kmin);
  c.angle_excess = worst - (std::numbers::pi / 2 - c.eps);
  c.positive = c.angle_excess <= 0.0;
  return c;
}

// ---------------------------------------------------------------------------

/// Largest arc average found, with the window attaining it.
struct ArcConstant {
  double value = 1.0;
  int start = 0;
  int length = 0;
};

namespace detail {

/// Scans every cyclic window of length 2^j (this contains the dyadic arcs).
/// `score` receives (start, length) and returns the arc statistic.
inline ArcConstant scan_arcs(int M, const std::function<double(int, int)>& score) {
  ArcConstant best{0.0, 0, 0};
  for (int L = 1; L <= M; L *= 2) {
    const int starts = L == M ? 1 : M;
    for (int s = 0; s < starts; ++s) {
      const double v = score(s, L);
      if (v > best.value) best = {v, s, L};
    }
  }
  return best;
}

template <class T>
std::vector<T> cyclic_prefix(const std::vector<T>& x, const T& zero) {
  const std::size_t M = x.size();
  std::vector<T> p(2 * M + 1, zero);
  for (std::size_t i = 0; i < 2 * M; ++i) p[i + 1] = p[i] + x[i % M];
  return p;
}

}  // namespace detail

/// sup over the arc family of <w>_I <w^{-1}>_I. Diagnostic: the family is all
/// windows of dyadic length, not all arcs.
inline ArcConstant a2_constant(const GridWeight& w) {
  w.validate();
  const auto v = w.scalar_values();
  std::vector<double> inv(v.size());
  for (std::size_t j = 0; j < v.size(); ++j) {
    if (!(v[j] > 0.0)) fail(ErrorKind::NonPositiveWeight, "a2_constant: weight must be positive");
    inv[j] = 1.0 / v[j];
  }
  const auto pw = detail::cyclic_prefix(v, 0.0), pi = detail::cyclic_prefix(inv, 0.0);
  return detail::scan_arcs(w.M, [&](int s, int L) {
    return (pw[s + L] - pw[s]) / L * (pi[s + L] - pi[s]) / L;
  });
}

/// sup over the arc family of || <W>^{1/2} <W^{-1}> <W>^{1/2} ||.
inline ArcConstant treil_volberg_constant(const GridWeight& W) {
  W.validate();
  const Eigen::Index d = W.dim();
  std::vector<CMat> inv(W.samples.size());
  for (std::size_t j = 0; j < inv.size(); ++j) {
    if (lambda_min(W.samples[j]) <= kDefaultZeroTol * std::max(1.0, lambda_max(W.samples[j])))
      fail(ErrorKind::NonPositiveWeight, "treil_volberg_constant: weight samples must be invertible");
    inv[j] = W.samples[j].inverse();
  }
  const CMat z = CMat::Zero(d, d);
  const auto pw = detail::cyclic_prefix(W.samples, z), pi = detail::cyclic_prefix(inv, z);
  return detail::scan_arcs(W.M, [&](int s, int L) {
    const CMat a = real_part(CMat((pw[s + L] - pw[s]) / L));
    const CMat b = real_part(CMat((pi[s + L] - pi[s]) / L));
    const CMat r = psd_sqrt(a);
    return lambda_max(real_part(CMat(r * b * r)));
  });
}

struct A2Refinement {
  double coarse = 0.0;  ///< A_2 at M
  double fine = 0.0;    ///< A_2 at 2M
  double ratio = 0.0;   ///< fine / coarse
};

inline A2Refinement a2_refinement(const std::function<double(double)>& f, int M, double offset = 0.5) {
  A2Refinement r;
  r.coarse = a2_constant(GridWeight::from_scalar_function(f, M, offset)).value;
  r.fine = a2_constant(GridWeight::from_scalar_function(f, 2 * M, offset)).value;
  r.ratio = r.fine / r.coarse;
  return r;
}

// ---------------------------------------------------------------------------

struct PhiSuppResult {
  bool holds = false;
  Eigen::Index rank_phi = 0;  ///< rank of s(Phi(g))
  Eigen::Index rank_g = 0;    ///< rank of s(g) (Fourier: largest pointwise rank)
  double defect = 0.0;        ///< ||s_Phi s - s|| (Fourier: max over the grid)
};

/// Checks s(Phi(g)) >= s(g).
inline PhiSuppResult phisupp_check(const SubdiagonalModel& m, const ModelElement& g, double tol = 1e-8) {
  require_member(m, g, "phisupp_check");
  PhiSuppResult r;
  const CMat sphi = support_proj(real_part(phi_block(m, g)));
  r.rank_phi = projection_rank(sphi);
  auto one = [&](const CMat& x) {
    const CMat s = support_proj(real_part(x));
    r.rank_g = std::max(r.rank_g, projection_rank(s));
    r.defect = std::max(r.defect, (sphi * s - s).norm());
  };
  if (m.triangular_kind()) {
    one(g.matrix());
  } else {
    const Laurent& l = g.laurent();
    for (const CMat& v : sample(l, 4 * eval_grid(m, l))) one(v);
  }
  r.holds = r.defect <= tol;
  return r;
}

// ---------------------------------------------------------------------------

/// Verdicts of the three scalar tests on one weight. Each test is run at two
/// resolutions and judged by how much its margin moves under refinement.
struct CircleVerdicts {
  std::vector<int> cutoffs;
  std::vector<double> rho;
  double rho_shrink = 0.0;       ///< (1 - rho) at the last cutoff over the previous one
  bool rho_positive = false;
  HsCertificate hs;              ///< at M
  double rho_hat_fine = 0.0;     ///< at 2M
  double hs_shrink = 0.0;        ///< (1 - rho_hat at 2M) / (1 - rho_hat at M)
  bool hs_positive = false;
  A2Refinement a2;
  bool a2_stable = false;
};

/// Decision rules for the scalar circle suite. The defaults are the midpoints
/// between the w_alpha statistics at alpha = 0.45 and alpha = 0.5 recorded in
/// tests/fixtures/walpha_oracle.log (M = 512, cutoffs 16/32/64).
struct CircleThresholds {
  double tol = 1e-6;
  double min_rho_shrink = 0.860;
  double min_hs_shrink = 0.874;
  double max_a2_growth = 1.112;
};

inline CircleVerdicts circle_verdicts(const std::function<double(double)>& f, int M, std::vector<int> cutoffs,
                                      const CircleThresholds& th = {}) {
  if (cutoffs.size() < 2) fail(ErrorKind::InvalidArgument, "circle_verdicts: need at least two cutoffs");
  CircleVerdicts out;
  out.cutoffs = cutoffs;
  const GridWeight w = GridWeight::from_scalar_function(f, M, 0.5);
  const Laurent coeffs = grid_coefficients(w);
  const auto m = SubdiagonalModel::fourier(1, 1, M);
  for (int c : cutoffs) {
    if (c > max_cutoff(m)) fail(ErrorKind::InvalidArgument, "circle_verdicts: cutoff exceeds M/4");
    out.rho.push_back(rho_gram(m, [&coeffs](int k) { return coeffs.coeff(k); }, c).rho);
  }
  const double last = 1.0 - out.rho.back(), prev = 1.0 - out.rho[out.rho.size() - 2];
  out.rho_shrink = last / prev;
  out.rho_positive = last > th.tol && out.rho_shrink >= th.min_rho_shrink;

  out.hs = hs_certificate(w, th.tol);
  out.rho_hat_fine = hs_rho_hat(GridWeight::from_scalar_function(f, 2 * M, 0.5));
  out.hs_shrink = (1.0 - out.rho_hat_fine) / (1.0 - out.hs.rho_hat);
  out.hs_positive = out.hs.positive && out.hs_shrink >= th.min_hs_shrink;

  out.a2 = a2_refinement(f, M);
  out.a2_stable = out.a2.ratio < th.max_a2_growth;
  return out;
}

// ---------------------------------------------------------------------------

/// CSV columns theta, w, log w, psi (scalar weights).
inline void write_weight_csv(std::ostream& os, const GridWeight& w) {
  const auto v = w.scalar_values();
  std::vector<double> logw(v.size());
  for (std::size_t j = 0; j < v.size(); ++j) logw[j] = v[j] > 0.0 ? std::log(v[j]) : -INFINITY;
  std::vector<double> psi(v.size(), 0.0);
  bool finite = true;
  for (double x : logw) finite = finite && std::isfinite(x);
  if (finite) psi = conjugate_function(logw);
  os << "theta,w,log_w,psi\n";
  os.precision(17);
  for (int j = 0; j < w.M; ++j) os << w.theta(j) << ',' << v[j] << ',' << logw[j] << ',' << psi[j] << '\n';
}

}  // namespace nchs
