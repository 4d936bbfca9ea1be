#pragma once
// Toeplitz and Hankel operators on H^2, finite-section invertibility verdicts,
// the (g0, g1, d) structure of invertible T_u and the equivalence checker.

#include <optional>
#include <vector>

#include "nchs/angle.hpp"
#include "nchs/factor.hpp"

namespace nchs {

struct OperatorMatrix {
  CMat matrix;
  int cutoff = 0;
  std::string basis_id;
};

namespace detail {

inline std::vector<BasisIndex> h2_indices(const SubdiagonalModel& m, int cutoff, bool strict = false) {
  std::vector<BasisIndex> out;
  if (m.triangular_kind()) return basis_indices(m, strict ? Space::H20 : Space::H2);
  for (int k = strict ? 1 : 0; k <= cutoff; ++k)
    for (Eigen::Index p = 0; p < m.d; ++p)
      for (Eigen::Index q = 0; q < m.d; ++q) out.push_back({k, p, q});
  return out;
}

inline std::string h2_basis_id(const SubdiagonalModel& m, int cutoff, bool strict) {
  std::string s = strict ? "H20" : "H2";
  if (m.triangular_kind()) return s + ":" + m.describe();
  return s + ":" + m.describe() + ",cutoff=" + std::to_string(cutoff);
}

}  // namespace detail

/// Coordinates of P_+ x in the orthonormal H^2 basis (degrees <= cutoff).
inline CVec h2_coordinates(const SubdiagonalModel& m, const ModelElement& x, int cutoff = 0) {
  const auto idx = detail::h2_indices(m, cutoff);
  CVec v(static_cast<Eigen::Index>(idx.size()));
  for (std::size_t i = 0; i < idx.size(); ++i) v(static_cast<Eigen::Index>(i)) = coordinate(m, idx[i], x);
  return v;
}

inline ModelElement from_h2_coordinates(const SubdiagonalModel& m, const CVec& v, int cutoff = 0) {
  const auto idx = detail::h2_indices(m, cutoff);
  ModelElement x = zero(m);
  for (std::size_t i = 0; i < idx.size(); ++i)
    x = x + v(static_cast<Eigen::Index>(i)) * basis_element(m, idx[i]);
  if (m.fourier_kind()) return Laurent(x.laurent()).prune();
  return x;
}

/// Matrix of b -> P_+(a b) on H^2 (Fourier: finite section on degrees 0..cutoff).
inline OperatorMatrix toeplitz_matrix(const SubdiagonalModel& m, const ModelElement& a, int cutoff = 0) {
  require_member(m, a, "toeplitz_matrix");
  OperatorMatrix out;
  out.cutoff = m.triangular_kind() ? 0 : cutoff;
  out.basis_id = detail::h2_basis_id(m, cutoff, false);
  if (m.triangular_kind()) {
    const auto idx = detail::h2_indices(m, 0);
    const Eigen::Index N = static_cast<Eigen::Index>(idx.size());
    out.matrix = CMat::Zero(N, N);
    for (Eigen::Index j = 0; j < N; ++j) {
      const ModelElement y = a * basis_element(m, idx[j]);
      for (Eigen::Index i = 0; i < N; ++i) out.matrix(i, j) = coordinate(m, idx[i], y);
    }
    return out;
  }
  if (cutoff < 0) fail(ErrorKind::InvalidArgument, "toeplitz_matrix: cutoff must be >= 0");
  const Eigen::Index d = m.d;
  const Laurent& l = a.laurent();
  const Eigen::Index N = (cutoff + 1) * d * d;
  out.matrix = CMat::Zero(N, N);
  auto at = [d](int k, Eigen::Index p, Eigen::Index q) { return (k * d + p) * d + q; };
  for (int k = 0; k <= cutoff; ++k)
    for (int j = 0; j <= cutoff; ++j) {
      auto it = l.coeffs().find(k - j);
      if (it == l.coeffs().end()) continue;
      const CMat& c = it->second;
      for (Eigen::Index r = 0; r < d; ++r)
        for (Eigen::Index p = 0; p < d; ++p)
          for (Eigen::Index q = 0; q < d; ++q) out.matrix(at(k, r, q), at(j, p, q)) = c(r, p);
    }
  return out;
}

/// Matrix of x -> P_-(f x) from H^2 (or H^2_0 when restricted) to H^2*.
inline OperatorMatrix hankel_matrix(const SubdiagonalModel& m, const ModelElement& f, int cutoff = 0,
                                    bool restricted = false) {
  require_member(m, f, "hankel_matrix");
  OperatorMatrix out;
  out.cutoff = m.triangular_kind() ? 0 : cutoff;
  out.basis_id = detail::h2_basis_id(m, cutoff, restricted);
  const auto dom = detail::h2_indices(m, cutoff, restricted);
  std::vector<BasisIndex> cod;
  if (m.triangular_kind()) {
    cod = basis_indices(m, Space::Astar);
  } else {
    const int lo = std::min(0, f.laurent().min_degree() + (restricted ? 1 : 0));
    for (int k = lo; k <= 0; ++k)
      for (Eigen::Index p = 0; p < m.d; ++p)
        for (Eigen::Index q = 0; q < m.d; ++q) cod.push_back({k, p, q});
  }
  out.matrix = CMat::Zero(static_cast<Eigen::Index>(cod.size()), static_cast<Eigen::Index>(dom.size()));
  for (std::size_t j = 0; j < dom.size(); ++j) {
    const ModelElement y = f * basis_element(m, dom[j]);
    for (std::size_t i = 0; i < cod.size(); ++i)
      out.matrix(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = coordinate(m, cod[i], y);
  }
  return out;
}

inline double hankel_norm(const SubdiagonalModel& m, const ModelElement& f, int cutoff = 0, bool restricted = false) {
  const CMat H = hankel_matrix(m, f, cutoff, restricted).matrix;
  return H.size() == 0 ? 0.0 : op_norm(H);
}

// ---------------------------------------------------------------------------

enum class InvertibilityVerdict { Invertible, NotInvertible, Ambiguous };

inline std::string_view to_string(InvertibilityVerdict v) {
  switch (v) {
    case InvertibilityVerdict::Invertible: return "Invertible";
    case InvertibilityVerdict::NotInvertible: return "NotInvertible";
    case InvertibilityVerdict::Ambiguous: return "Ambiguous";
  }
  return "?";
}

struct InvertibilityResult {
  InvertibilityVerdict verdict = InvertibilityVerdict::Ambiguous;
  std::vector<int> cutoffs;
  std::vector<double> sigma_min;
};

inline std::vector<int> default_cutoffs(const SubdiagonalModel& m, const ModelElement& a) {
  if (m.triangular_kind()) return {0};
  const int N = std::max({m.deg, a.laurent().degree(), 1});
  return {N, 2 * N, 4 * N};
}

/// Triangular: exact, sigma_min(T_a) > tol. Fourier: sigma_min over the given
/// sections; Invertible when it stays above tol with relative change < 10%,
/// NotInvertible when it is below tol or halves at every doubling.
inline InvertibilityResult invertibility_test(const SubdiagonalModel& m, const ModelElement& a,
                                              std::vector<int> cutoffs = {}, double tol = 1e-6) {
  require_member(m, a, "invertibility_test");
  InvertibilityResult r;
  if (cutoffs.empty()) cutoffs = default_cutoffs(m, a);
  if (m.triangular_kind()) cutoffs = {0};
  r.cutoffs = cutoffs;
  for (int c : cutoffs) r.sigma_min.push_back(sigma_min(toeplitz_matrix(m, a, c).matrix));
  if (m.triangular_kind()) {
    r.verdict = r.sigma_min[0] > tol ? InvertibilityVerdict::Invertible : InvertibilityVerdict::NotInvertible;
    return r;
  }
  const double last = r.sigma_min.back();
  if (last <= tol) {
    r.verdict = InvertibilityVerdict::NotInvertible;
    return r;
  }
  bool halving = r.sigma_min.size() > 1;
  for (std::size_t i = 1; i < r.sigma_min.size(); ++i)
    if (r.sigma_min[i] > 0.5 * r.sigma_min[i - 1]) halving = false;
  if (halving) {
    r.verdict = InvertibilityVerdict::NotInvertible;
    return r;
  }
  const double prev = r.sigma_min.size() > 1 ? r.sigma_min[r.sigma_min.size() - 2] : last;
  r.verdict = std::abs(last - prev) < 0.1 * prev ? InvertibilityVerdict::Invertible : InvertibilityVerdict::Ambiguous;
  return r;
}

// ---------------------------------------------------------------------------

struct InvToepStructure {
  ModelElement g0;  ///< T_u g0 = 1
  ModelElement g1;  ///< T_{u*} g1 = 1
  ModelElement d;   ///< Phi(g0)
  int cutoff = 0;
  double solve_residual_0 = 0.0;
  double solve_residual_1 = 0.0;
  double phi_residual = 0.0;        ///< ||Phi(g1*) - d||_2
  double unitary_residual = 0.0;    ///< ||u - (g1*)^{-1} d g0^{-1}||_2
  double modulus_residual = 0.0;    ///< ||g0* g0 - d* (g1* g1)^{-1} d||_2
  double outer_gap_0 = 0.0;         ///< |Delta(g0) - Delta(Phi(g0))| / max(1, Delta(g0))
  double outer_gap_1 = 0.0;         ///< |Delta(g1) - Delta(Phi(g1*))| / max(1, Delta(g1))
  double det_g0 = 0.0;
  double det_g1 = 0.0;

  double max_identity_residual() const { return std::max({phi_residual, unitary_residual, modulus_residual}); }
};

namespace detail {

inline CVec least_squares(const CMat& T, const CVec& rhs) {
  return T.completeOrthogonalDecomposition().solve(rhs);
}

}  // namespace detail

/// Solves T_u g0 = 1 and T_{u*} g1 = 1 and checks d = Phi(g0) = Phi(g1*),
/// u = (g1*)^{-1} d g0^{-1} and g0* g0 = d* (g1* g1)^{-1} d.
inline InvToepStructure extract_invtoep(const SubdiagonalModel& m, const ModelElement& u, double tol = 1e-8,
                                        std::vector<int> cutoffs = {}, double verdict_tol = 1e-6) {
  require_member(m, u, "extract_invtoep");
  const InvertibilityResult inv = invertibility_test(m, u, cutoffs, verdict_tol);
  if (inv.verdict != InvertibilityVerdict::Invertible)
    fail(ErrorKind::NotInvertible, "extract_invtoep: T_u is not invertible (sigma_min = " +
                                       std::to_string(inv.sigma_min.back()) + ")");
  InvToepStructure s;
  s.cutoff = m.triangular_kind() ? 0 : inv.cutoffs.back();
  const OperatorMatrix T0 = toeplitz_matrix(m, u, s.cutoff);
  const OperatorMatrix T1 = toeplitz_matrix(m, u.adjoint(), s.cutoff);
  const CVec one = h2_coordinates(m, identity(m), s.cutoff);
  const CVec x0 = detail::least_squares(T0.matrix, one), x1 = detail::least_squares(T1.matrix, one);
  s.solve_residual_0 = (T0.matrix * x0 - one).norm();
  s.solve_residual_1 = (T1.matrix * x1 - one).norm();
  s.g0 = from_h2_coordinates(m, x0, s.cutoff);
  s.g1 = from_h2_coordinates(m, x1, s.cutoff);
  s.d = phi(m, s.g0);
  const ModelElement g1s = s.g1.adjoint();
  s.phi_residual = l2_norm(m, phi(m, g1s) - s.d);
  if (m.triangular_kind()) {
    const CMat& G0 = s.g0.matrix();
    const CMat& G1 = s.g1.matrix();
    const CMat D = s.d.matrix();
    const CMat G1s = G1.adjoint();
    s.unitary_residual = l2_norm(m, u - ModelElement(CMat(pinv(G1s) * D * pinv(G0))));
    s.modulus_residual = l2_norm(m, ModelElement(CMat(G0.adjoint() * G0 - D.adjoint() * pinv(G1s * G1) * D)));
  } else {
    const Laurent& G0 = s.g0.laurent();
    const Laurent G1s = g1s.laurent();
    const CMat D = s.d.laurent().coeff(0);
    const Laurent rec = detail::synthesize(m, {&G1s, &G0}, [&D](const std::vector<CMat>& v) {
      return CMat(pinv(v[0]) * D * pinv(v[1]));
    });
    s.unitary_residual = l2_norm(m, u - ModelElement(rec));
    const Laurent rhs = detail::synthesize(m, {&G1s}, [&D](const std::vector<CMat>& v) {
      return CMat(D.adjoint() * pinv(v[0] * v[0].adjoint()) * D);
    });
    s.modulus_residual = l2_norm(m, ModelElement(Laurent(G0.adjoint() * G0 - rhs)));
  }
  s.det_g0 = det(m, s.g0);
  s.det_g1 = det(m, s.g1);
  s.outer_gap_0 = std::abs(s.det_g0 - det(m, phi(m, s.g0))) / std::max(1.0, s.det_g0);
  s.outer_gap_1 = std::abs(s.det_g1 - det(m, phi(m, g1s))) / std::max(1.0, s.det_g1);

  auto check = [&](double v, const char* what) {
    if (v > tol) fail(ErrorKind::ResidualExceeded, std::string("extract_invtoep: ") + what + " residual " + std::to_string(v));
  };
  check(s.phi_residual, "d = Phi(g1*)");
  check(s.unitary_residual, "u = (g1*)^{-1} d g0^{-1}");
  check(s.modulus_residual, "g0* g0 = d* (g1* g1)^{-1} d");
  if (s.outer_gap_0 > 1e-6 || s.outer_gap_1 > 1e-6)
    fail(ErrorKind::ResidualExceeded, "extract_invtoep: g0 or g1 fails the strong outerness test");
  if (s.det_g0 < verdict_tol || s.det_g1 < verdict_tol)
    fail(ErrorKind::ResidualExceeded, "extract_invtoep: Delta(g0) or Delta(g1) below tolerance");
  return s;
}

struct PositiveAngleResult {
  bool positive = false;   ///< rho < 1 - tol
  double rho = 1.0;
  ModelElement w;          ///< g0* g0
  bool invertible = false; ///< from invertibility_test
  bool agree = false;
};

/// The weight w = g0* g0 of an invertible T_u is at positive angle.
inline PositiveAngleResult positive_angle_weight_test(const SubdiagonalModel& m, const ModelElement& u, double tol = 1e-6,
                                                      std::vector<int> cutoffs = {}) {
  const InvToepStructure s = extract_invtoep(m, u, 1e-6, cutoffs, tol);
  PositiveAngleResult r;
  r.w = s.g0.adjoint() * s.g0;
  r.rho = rho_gram(m, r.w, m.triangular_kind() ? 0 : std::min(s.cutoff, max_cutoff(m))).rho;
  r.positive = r.rho < 1.0 - tol;
  r.invertible = true;
  r.agree = r.positive == r.invertible;
  return r;
}

// ---------------------------------------------------------------------------

struct EquivalenceReport {
  std::vector<int> cutoffs;
  std::vector<double> sigma_min;
  InvertibilityVerdict invertibility = InvertibilityVerdict::Ambiguous;
  double dist = 0.0;
  double hankel_restricted = 0.0;
  std::optional<Certificate> certificate;
  double infeasible_gap = 0.0;
  double best_lambda = 0.0;  ///< alpha, or the best ascent value when infeasible
  double full_hankel_norm = 0.0;

  bool verdict_invertible = false;
  bool verdict_hankel = false;
  bool verdict_certificate = false;
  double margin_invertible = 0.0;
  double margin_hankel = 0.0;
  double margin_certificate = 0.0;
  bool agree = false;
  bool flagged_ambiguous = false;

  bool norm_one_checked = false;  ///< extract_invtoep succeeded
  bool norm_one_ok = false;       ///< | ||H_u|| - 1 | <= 1e-6
  std::string invtoep_error;
};

/// Runs the three equivalent tests on a unitary u: invertibility of T_u, the
/// restricted Hankel norm < 1 and a positivity certificate Re(u* k) >= alpha.
inline EquivalenceReport equivalence_check(const SubdiagonalModel& m, const ModelElement& u, std::vector<int> cutoffs = {},
                                           double tol = 1e-6) {
  require_member(m, u, "equivalence_check");
  {
    const ModelElement uu = u.adjoint() * u;
    if (sup_norm(m, uu - identity(m)) > 1e-8) fail(ErrorKind::UnitarityFailure, "equivalence_check: u is not unitary");
  }
  EquivalenceReport r;
  const InvertibilityResult inv = invertibility_test(m, u, cutoffs, tol);
  r.cutoffs = inv.cutoffs;
  r.sigma_min = inv.sigma_min;
  r.invertibility = inv.verdict;
  const int c = m.triangular_kind() ? 0 : inv.cutoffs.back();

  r.dist = dist_to_algebra(m, u, c);
  r.hankel_restricted = hankel_norm(m, u, c, true);
  r.full_hankel_norm = hankel_norm(m, u, c, false);
  const CertifyResult cr = certify_positive_real(m, u, c, tol);
  if (const auto* cert = std::get_if<Certificate>(&cr)) {
    r.certificate = *cert;
    r.best_lambda = cert->alpha;
  } else {
    const auto& inf = std::get<Infeasible>(cr);
    r.infeasible_gap = inf.gap;
    r.best_lambda = inf.best_lambda;
  }

  const double smin = inv.sigma_min.back();
  r.verdict_invertible = inv.verdict == InvertibilityVerdict::Invertible;
  r.verdict_hankel = r.hankel_restricted < 1.0 - tol;
  r.verdict_certificate = r.certificate.has_value() && r.certificate->alpha > tol;
  r.margin_invertible = std::abs(smin - tol);
  r.margin_hankel = std::abs((1.0 - tol) - r.hankel_restricted);
  r.margin_certificate = std::abs(r.best_lambda - tol);
  r.agree = r.verdict_invertible == r.verdict_hankel && r.verdict_hankel == r.verdict_certificate;
  r.flagged_ambiguous = inv.verdict == InvertibilityVerdict::Ambiguous ||
                        std::min({r.margin_invertible, r.margin_hankel, r.margin_certificate}) < 10.0 * tol;

  if (r.verdict_invertible) {
    try {
      extract_invtoep(m, u, 1e-6, inv.cutoffs, tol);
      r.norm_one_checked = true;
      r.norm_one_ok = std::abs(r.full_hankel_norm - 1.0) <= 1e-6;
    } catch (const Error& e) {
      r.invtoep_error = e.what();
    }
  }
  return r;
}

}  // namespace nchs
