#pragma once
// Past-future angle, distance to the algebra, restricted Hankel norms and
// positivity certificates Re(u* k) >= alpha.

#include <functional>
#include <optional>
#include <variant>

#include "nchs/models.hpp"

namespace nchs {

enum class AngleMethod { GramPrincipalAngles, DistanceToAlgebra };

inline std::string_view to_string(AngleMethod m) {
  return m == AngleMethod::GramPrincipalAngles ? "GramPrincipalAngles" : "DistanceToAlgebra";
}

struct AngleReport {
  double rho = 0.0;
  AngleMethod method = AngleMethod::GramPrincipalAngles;
  int cutoff = 0;
  Eigen::Index gram_rank = 0;       ///< retained rank of the A_0 Gram matrix
  Eigen::Index gram_rank_star = 0;  ///< retained rank of the A* Gram matrix
  double margin = 1.0;              ///< 1 - rho
};

/// Fourier coefficient k of the weight (d x d block).
using CoefficientFn = std::function<CMat(int)>;

namespace detail {

/// tau(g b* a) for basis elements a, b (closed forms of the weighted inner product).
inline Complex weighted_inner(const SubdiagonalModel& m, const CMat& g_tri, const CoefficientFn& ghat,
                              const BasisIndex& a, const BasisIndex& b) {
  if (m.triangular_kind()) return a.p == b.p ? g_tri(a.q, b.q) : Complex(0.0);
  if (a.p != b.p) return Complex(0.0);
  return ghat(b.k - a.k)(a.q, b.q);
}

inline AngleReport rho_from_coefficients(const SubdiagonalModel& m, const CMat& g_tri, const CoefficientFn& ghat,
                                         int cutoff) {
  const auto b0 = basis_indices(m, Space::A0, cutoff);
  const auto bs = basis_indices(m, Space::Astar, cutoff);
  AngleReport rep;
  rep.cutoff = m.triangular_kind() ? 0 : cutoff;
  if (b0.empty() || bs.empty()) return rep;
  // Cache the coefficient blocks that appear (k in [-2 cutoff, 2 cutoff]).
  std::map<int, CMat> cache;
  CoefficientFn cached = ghat;
  if (m.fourier_kind()) {
    for (int k = -2 * cutoff; k <= 2 * cutoff; ++k) cache[k] = ghat(k);
    cached = [&cache](int k) { return cache.at(k); };
  }
  auto gram = [&](const std::vector<BasisIndex>& x, const std::vector<BasisIndex>& y) {
    CMat G(static_cast<Eigen::Index>(y.size()), static_cast<Eigen::Index>(x.size()));
    for (std::size_t j = 0; j < x.size(); ++j)
      for (std::size_t i = 0; i < y.size(); ++i)
        G(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = weighted_inner(m, g_tri, cached, x[j], y[i]);
    return G;
  };
  const CMat G1 = gram(b0, b0), G2 = gram(bs, bs), C = gram(b0, bs);
  const CMat W1 = psd_inv_sqrt(real_part(G1), 1e-10, &rep.gram_rank);
  const CMat W2 = psd_inv_sqrt(real_part(G2), 1e-10, &rep.gram_rank_star);
  rep.rho = op_norm(W2 * C * W1);
  rep.margin = 1.0 - rep.rho;
  return rep;
}

}  // namespace detail

/// rho = sup |tau(g b* a)| over a in A_0, b in A* with tau(g|a|^2), tau(g|b|^2) <= 1,
/// computed as the top singular value of the whitened cross-Gram matrix.
inline AngleReport rho_gram(const SubdiagonalModel& m, const ModelElement& g, int cutoff = 0) {
  require_member(m, g, "rho_gram");
  if (m.triangular_kind()) {
    psd_spectrum(g.matrix(), "rho_gram");
    return detail::rho_from_coefficients(m, real_part(g.matrix()), {}, 0);
  }
  const Laurent& l = g.laurent();
  for (const CMat& v : sample(l, 4 * eval_grid(m, l))) psd_spectrum(v, "rho_gram");
  return detail::rho_from_coefficients(m, CMat(), [&l](int k) { return l.coeff(k); }, cutoff);
}

/// Variant for weights known only through their Fourier coefficients.
inline AngleReport rho_gram(const SubdiagonalModel& m, const CoefficientFn& ghat, int cutoff) {
  if (!m.fourier_kind()) fail(ErrorKind::ModelMismatch, "rho_gram: coefficient form needs a fourier model");
  return detail::rho_from_coefficients(m, CMat(), ghat, cutoff);
}

// ---------------------------------------------------------------------------

/// Block Hankel matrix [x(-(i+j))], i = 0..cutoff-1, j = 1..cutoff.
inline CMat nehari_hankel(const Laurent& x, int cutoff) {
  const Eigen::Index d = x.dim();
  CMat H = CMat::Zero(cutoff * d, cutoff * d);
  for (const auto& [k, c] : x.coeffs()) {
    if (k >= 0) continue;
    const int s = -k;  // i + j = s with i >= 0, 1 <= j <= cutoff
    for (int j = 1; j <= cutoff; ++j) {
      const int i = s - j;
      if (i < 0 || i >= cutoff) continue;
      H.block(i * d, (j - 1) * d, d, d) = c;
    }
  }
  return H;
}

struct DistanceReport {
  double dist = 0.0;
  int cutoff = 0;
  double doubling_increase = 0.0;  ///< value at 2 cutoff minus value at cutoff (Fourier)
  bool exact = true;               ///< no coefficients beyond the truncation
};

/// Arveson corner formula (Triangular): max_k ||x[k+1..n, 1..k]||.
inline double arveson_distance(const CMat& x) {
  const Eigen::Index n = x.rows();
  double best = 0.0;
  for (Eigen::Index k = 1; k < n; ++k) best = std::max(best, op_norm(x.bottomLeftCorner(n - k, k)));
  return best;
}

inline DistanceReport dist_to_algebra_report(const SubdiagonalModel& m, const ModelElement& x, int cutoff = 0) {
  require_member(m, x, "dist_to_algebra");
  DistanceReport r;
  if (m.triangular_kind()) {
    r.dist = arveson_distance(x.matrix());
    return r;
  }
  if (cutoff < 1) fail(ErrorKind::InvalidArgument, "dist_to_algebra: cutoff must be >= 1");
  const Laurent& l = x.laurent();
  r.cutoff = cutoff;
  r.dist = op_norm(nehari_hankel(l, cutoff));
  const int neg = std::max(0, -l.min_degree());
  r.exact = neg <= cutoff;
  r.doubling_increase = r.exact ? 0.0 : op_norm(nehari_hankel(l, 2 * cutoff)) - r.dist;
  return r;
}

inline double dist_to_algebra(const SubdiagonalModel& m, const ModelElement& x, int cutoff = 0) {
  return dist_to_algebra_report(m, x, cutoff).dist;
}

// ---------------------------------------------------------------------------

/// Matrix of x -> P_-(f x) from H^2_0 (Triangular: strict uppers; Fourier:
/// z^k blocks with 1 <= k <= cutoff) into orthonormal coordinates of H^2*.
inline CMat restricted_hankel_matrix(const SubdiagonalModel& m, const ModelElement& f, int cutoff = 0) {
  require_member(m, f, "hankel_restricted_norm");
  const auto dom = basis_indices(m, Space::H20, m.triangular_kind() ? 0 : cutoff);
  std::vector<BasisIndex> cod;
  if (m.triangular_kind()) {
    cod = basis_indices(m, Space::Astar);
  } else {
    const int lo = std::min(0, f.laurent().min_degree() + 1);
    for (int k = lo; k <= 0; ++k)
      for (Eigen::Index p = 0; p < m.d; ++p)
        for (Eigen::Index q = 0; q < m.d; ++q) cod.push_back({k, p, q});
  }
  CMat H = CMat::Zero(static_cast<Eigen::Index>(cod.size()), static_cast<Eigen::Index>(dom.size()));
  for (std::size_t j = 0; j < dom.size(); ++j) {
    const ModelElement y = p_minus(m, f * basis_element(m, dom[j]));
    for (std::size_t i = 0; i < cod.size(); ++i)
      H(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = coordinate(m, cod[i], y);
  }
  return H;
}

inline double hankel_restricted_norm(const SubdiagonalModel& m, const ModelElement& f, int cutoff = 0) {
  const CMat H = restricted_hankel_matrix(m, f, cutoff);
  return H.size() == 0 ? 0.0 : op_norm(H);
}

// ---------------------------------------------------------------------------

struct Approximation {
  ModelElement f;         ///< element of A
  double achieved = 0.0;  ///< ||u - f||_inf
  int iterations = 0;
  bool converged = true;
};

namespace detail {

/// Central norm-minimal completion of [[A, Z], [B, C]] at level rho.
inline CMat parrott_central(const CMat& A, const CMat& B, const CMat& C, double rho) {
  if (A.size() == 0 || C.size() == 0) return CMat::Zero(A.rows(), C.cols());
  const double r2 = rho * rho;
  const Eigen::Index p = B.cols(), q = B.rows();
  CMat left = CMat::Identity(p, p) * r2, right = CMat::Identity(q, q) * r2;
  if (B.size() > 0) {
    left -= B.adjoint() * B;
    right -= B * B.adjoint();
  }
  const CMat li = psd_inv_sqrt(real_part(left), 1e-12);
  const CMat ri = psd_inv_sqrt(real_part(right), 1e-12);
  if (B.size() == 0) return CMat::Zero(A.rows(), C.cols());
  return -A * li * B.adjoint() * ri * C;
}

inline double max_over_grid(const std::vector<CMat>& vals, int* arg) {
  double best = -1.0;
  for (std::size_t j = 0; j < vals.size(); ++j) {
    const double v = op_norm(vals[j]);
    if (v > best) best = v, *arg = static_cast<int>(j);
  }
  return best;
}

}  // namespace detail

/// Triangular: Parrott recursion over the upper triangle, diagonal by diagonal,
/// with the central completion at each step (achieves the Arveson distance).
/// Fourier: subgradient descent with Polyak steps on max_theta ||u - f||_op over
/// analytic f of degree <= cutoff, started from P_+ u.
inline Approximation best_analytic_approx(const SubdiagonalModel& m, const ModelElement& u, int cutoff = 0,
                                          double tol = 1e-6, int max_iter = 1500) {
  require_member(m, u, "best_analytic_approx");
  Approximation out;
  if (m.triangular_kind()) {
    const CMat& x = u.matrix();
    const Eigen::Index n = x.rows();
    CMat Y = CMat::Zero(n, n);
    Y.triangularView<Eigen::StrictlyLower>() = x.triangularView<Eigen::StrictlyLower>();
    for (Eigen::Index off = 0; off < n; ++off) {
      for (Eigen::Index i = 0; i + off < n; ++i) {
        const Eigen::Index j = i + off;
        // Rectangle rows i..n-1, cols 0..j with the unknown at (i, j).
        const CMat A = Y.block(i, 0, 1, j);
        const CMat B = Y.block(i + 1, 0, n - i - 1, j);
        const CMat C = Y.block(i + 1, j, n - i - 1, 1);
        CMat col(n - i, j), row(n - i - 1, j + 1);
        col << A, B;
        row << B, C;
        const double rho = std::max(col.size() ? op_norm(col) : 0.0, row.size() ? op_norm(row) : 0.0);
        Y(i, j) = rho > 0.0 ? detail::parrott_central(A, B, C, rho)(0, 0) : Complex(0.0);
      }
    }
    CMat f = x - Y;
    f.triangularView<Eigen::StrictlyLower>().setZero();
    out.f = f;
    out.achieved = op_norm(x - f);
    return out;
  }

  if (cutoff < 1) fail(ErrorKind::InvalidArgument, "best_analytic_approx: cutoff must be >= 1");
  const Laurent& ul = u.laurent();
  const Eigen::Index d = m.d;
  const int M = std::max(eval_grid(m, ul), next_pow2(8 * cutoff));
  const std::vector<CMat> uv = sample(ul, M);
  const double target = dist_to_algebra(m, u, std::max(cutoff, 1));

  Laurent f = ul.band(0, cutoff);
  auto objective = [&](const Laurent& cand, int* arg, std::vector<CMat>* diff) {
    const std::vector<CMat> fv = sample(cand, M);
    for (int j = 0; j < M; ++j) (*diff)[j] = uv[j] - fv[j];
    return detail::max_over_grid(*diff, arg);
  };
  std::vector<CMat> diff(M);
  int arg = 0;
  double val = objective(f, &arg, &diff);
  Laurent best = f;
  double best_val = val;
  // Nehari ratio candidate in the scalar case: u - f = (H_u v) / v for the top
  // singular vector v of the Hankel operator.
  if (d == 1) {
    // Rows: output degree -r (r = 1..K); columns: input degree j (j = 0..K-1).
    const int K = std::max(cutoff, 1);
    CMat H = CMat::Zero(K, K);
    for (int r = 1; r <= K; ++r)
      for (int j = 0; j < K; ++j) H(r - 1, j) = ul.coeff(-(r + j))(0, 0);
    const SpectralData sv = singular_spectrum(H);
    if (sv.values(0) > 0.0) {
      Laurent v(1), hv(1);
      for (int j = 0; j < K; ++j) v.set(j, CMat::Constant(1, 1, sv.right(j, 0)));
      for (int r = 1; r <= K; ++r) hv.set(-r, CMat::Constant(1, 1, sv.values(0) * sv.left(r - 1, 0)));
      const std::vector<CMat> vv = sample(v, M), hvv = sample(hv, M);
      std::vector<CMat> cand(M);
      bool ok = true;
      for (int j = 0; j < M && ok; ++j) {
        if (std::abs(vv[j](0, 0)) < 1e-8) ok = false;
        else cand[j] = uv[j] - hvv[j] / vv[j](0, 0);
      }
      if (ok) {
        const Laurent c = from_samples(cand).band(0, M / 2 - 1);
        std::vector<CMat> cd(M);
        int carg = 0;
        const double cval = objective(c, &carg, &cd);
        if (cval < best_val) f = best = c, best_val = val = cval, arg = carg, diff = cd;
      }
    }
  }
  int it = 0;
  for (; it < max_iter; ++it) {
    if (best_val - target <= tol) break;
    const SpectralData sv = singular_spectrum(diff[arg]);
    const CMat dir = sv.left.col(0) * sv.right.col(0).adjoint();
    const double theta = grid_angle(arg, M);
    const double gnorm2 = static_cast<double>(cutoff + 1);
    const double step = std::max(val - target, tol * 0.1) / gnorm2;
    for (int k = 0; k <= cutoff; ++k) f.add(k, step * std::polar(1.0, -k * theta) * dir);
    val = objective(f, &arg, &diff);
    if (val < best_val) best_val = val, best = f;
  }
  out.f = best;
  out.iterations = it;
  out.achieved = sup_norm(m, u - ModelElement(best));
  out.converged = best_val - target <= tol;
  return out;
}

// ---------------------------------------------------------------------------

enum class CertificateSource { FromApproximant, FromAscent };

inline std::string_view to_string(CertificateSource s) {
  return s == CertificateSource::FromApproximant ? "FromApproximant" : "FromAscent";
}

/// k in A with Re(u* k) >= alpha 1.
struct Certificate {
  ModelElement k;
  double alpha = 0.0;
  double k_norm = 0.0;
  double lambda_min = 0.0;  ///< measured lambda_min(Re(u* k))
  CertificateSource source = CertificateSource::FromApproximant;
};

/// lambda_min(Re(u* k)) (Fourier: min over the refined grid).
inline double min_real_part(const SubdiagonalModel& m, const ModelElement& u, const ModelElement& k) {
  const ModelElement p = u.adjoint() * k;
  if (m.triangular_kind()) return lambda_min(real_part(p.matrix()));
  double best = std::numeric_limits<double>::infinity();
  for (const CMat& v : sample(p.laurent(), 4 * eval_grid(m, p.laurent()))) best = std::min(best, lambda_min(real_part(v)));
  return best;
}

/// If ||u - f|| = a' < 1 then Re(u* f) >= (1 - a') 1.
inline Certificate approximant_to_certificate(const SubdiagonalModel& m, const ModelElement& u, const ModelElement& f) {
  require_member(m, u, "approximant_to_certificate u");
  require_member(m, f, "approximant_to_certificate f");
  if (!in_algebra(m, f)) fail(ErrorKind::InvalidArgument, "approximant_to_certificate: f is not in A");
  const double gap = sup_norm(m, u - f);
  if (!(gap < 1.0)) fail(ErrorKind::ApproximantTooFar, "||u - f|| = " + std::to_string(gap) + " >= 1");
  Certificate c;
  c.k = f;
  c.alpha = 1.0 - gap;
  c.k_norm = sup_norm(m, f);
  c.lambda_min = min_real_part(m, u, f);
  c.source = CertificateSource::FromApproximant;
  if (c.lambda_min < c.alpha - 1e-9)
    fail(ErrorKind::InvalidCertificate, "approximant_to_certificate: lambda_min(Re(u*f)) = " +
                                            std::to_string(c.lambda_min) + " below alpha");
  return c;
}

struct ApproximantFromCertificate {
  ModelElement f;
  double eps = 0.0;
  double delta = 0.0;
  double bound = 1.0;     ///< sqrt(1 - delta)
  double achieved = 1.0;  ///< ||u - f||_inf
};

/// f = (eps / ||k||) k gives ||u - f|| <= sqrt(1 - delta) with
/// delta = 2 alpha eps / ||k|| - eps^2; eps defaults to the maximizer alpha / ||k||.
inline ApproximantFromCertificate certificate_to_approximant(const SubdiagonalModel& m, const ModelElement& u,
                                                             const Certificate& cert,
                                                             std::optional<double> eps = std::nullopt) {
  require_member(m, u, "certificate_to_approximant");
  require_member(m, cert.k, "certificate_to_approximant k");
  if (!(cert.alpha > 0.0) || !in_algebra(m, cert.k))
    fail(ErrorKind::InvalidCertificate, "certificate needs alpha > 0 and k in A");
  const double knorm = sup_norm(m, cert.k);
  const double lmin = min_real_part(m, u, cert.k);
  if (lmin < cert.alpha - 1e-9)
    fail(ErrorKind::InvalidCertificate, "lambda_min(Re(u*k)) = " + std::to_string(lmin) + " < alpha");
  ApproximantFromCertificate out;
  const double upper = std::min(1.0, 2.0 * cert.alpha / knorm);
  out.eps = eps ? *eps : std::min(cert.alpha / knorm, upper);
  out.delta = 2.0 * cert.alpha * out.eps / knorm - out.eps * out.eps;
  if (!(out.delta > 0.0) || out.delta > 1.0)
    fail(ErrorKind::InvalidArgument, "certificate_to_approximant: eps gives delta outside (0, 1]");
  out.f = Complex(out.eps / knorm) * cert.k;
  out.bound = std::sqrt(std::max(0.0, 1.0 - out.delta));
  out.achieved = sup_norm(m, u - out.f);
  if (out.achieved > out.bound + 1e-9)
    fail(ErrorKind::InvalidCertificate, "certificate_to_approximant: ||u - f|| = " + std::to_string(out.achieved) +
                                            " exceeds the bound " + std::to_string(out.bound));
  return out;
}

struct Infeasible {
  double gap = 0.0;     ///< max(0, dist - 1)
  double dist = 0.0;    ///< distance estimate used
  double best_lambda = 0.0;  ///< best lambda_min(Re(u*k)) found by ascent
};

using CertifyResult = std::variant<Certificate, Infeasible>;

namespace detail {

/// Supergradient ascent on lambda_min(Re(u* k)) over k in A with ||k||_2 <= 1.
inline Certificate ascent_certificate(const SubdiagonalModel& m, const ModelElement& u, int cutoff, int iters) {
  ModelElement k = p_plus(m, u);
  if (m.fourier_kind()) k = k.laurent().band(0, cutoff);
  auto normalize = [&](ModelElement& x) {
    const double nrm = l2_norm(m, x);
    if (nrm > 1.0) x = Complex(1.0 / nrm) * x;
  };
  if (l2_norm(m, k) < 1e-12) k = identity(m);
  normalize(k);
  ModelElement best = k;
  double best_val = -std::numeric_limits<double>::infinity();
  const int M = m.fourier_kind() ? std::max(eval_grid(m, u.laurent()), next_pow2(8 * std::max(cutoff, 1))) : 0;
  const std::vector<CMat> uv = m.fourier_kind() ? sample(u.laurent(), M) : std::vector<CMat>{};
  for (int t = 0; t < iters; ++t) {
    double val;
    ModelElement grad;
    if (m.triangular_kind()) {
      const CMat& U = u.matrix();
      const SpectralData sp = hermitian_spectrum(real_part(U.adjoint() * k.matrix()));
      const Eigen::Index last = sp.values.size() - 1;
      val = sp.values(last);
      const CVec v = sp.left.col(last);
      grad = p_plus(m, CMat(U * v * v.adjoint()));
    } else {
      const std::vector<CMat> kv = sample(k.laurent(), M);
      val = std::numeric_limits<double>::infinity();
      int arg = 0;
      CVec vbest;
      for (int j = 0; j < M; ++j) {
        const SpectralData sp = hermitian_spectrum(real_part(uv[j].adjoint() * kv[j]));
        const double lv = sp.values(sp.values.size() - 1);
        if (lv < val) val = lv, arg = j, vbest = sp.left.col(sp.values.size() - 1);
      }
      const CMat g0 = uv[arg] * vbest * vbest.adjoint();
      Laurent g(m.d);
      const double theta = grid_angle(arg, M);
      for (int kk = 0; kk <= cutoff; ++kk) g.set(kk, std::polar(1.0, -kk * theta) * g0);
      grad = g;
    }
    if (val > best_val) best_val = val, best = k;
    const double step = 0.5 / std::sqrt(1.0 + t);
    const double gn = std::max(l2_norm(m, grad), 1e-300);
    k = k + Complex(step / gn) * grad;
    normalize(k);
  }
  Certificate c;
  c.k = best;
  c.lambda_min = min_real_part(m, u, best);
  c.alpha = c.lambda_min;
  c.k_norm = sup_norm(m, best);
  c.source = CertificateSource::FromAscent;
  return c;
}

}  // namespace detail

/// Certificate k in A with Re(u* k) >= alpha > 0, or Infeasible.
inline CertifyResult certify_positive_real(const SubdiagonalModel& m, const ModelElement& u, int cutoff = 0,
                                           double tol = 1e-6, int ascent_iters = 500) {
  require_member(m, u, "certify_positive_real");
  const Approximation ap = best_analytic_approx(m, u, cutoff, tol * 0.1);
  if (ap.achieved < 1.0 - tol) return approximant_to_certificate(m, u, ap.f);
  const double dist = dist_to_algebra(m, u, cutoff);
  if (ap.achieved <= 1.0 + tol) {
    Certificate c = detail::ascent_certificate(m, u, cutoff, ascent_iters);
    if (c.alpha > tol) return c;
    return Infeasible{std::max(0.0, dist - 1.0), dist, c.alpha};
  }
  return Infeasible{std::max(0.0, dist - 1.0), dist, 0.0};
}

}  // namespace nchs
