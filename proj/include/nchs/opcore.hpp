#pragma once
// Dense complex-matrix operator core on (M_n, tr/n).

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <string>

#include "nchs/error.hpp"

namespace nchs {

using Complex = std::complex<double>;
using CMat = Eigen::MatrixXcd;
using CVec = Eigen::VectorXcd;
using RVec = Eigen::VectorXd;

inline constexpr double kDefaultZeroTol = 1e-12;
inline constexpr double kUnderflowFloor = 1e-300;

/// Eigenvalues or singular values in descending order together with the
/// unitary factors (for Hermitian input left == right == eigenvectors).
struct SpectralData {
  RVec values;
  CMat left;
  CMat right;
};

inline void require_square(const CMat& a, const char* what) {
  if (a.rows() != a.cols() || a.rows() == 0)
    fail(ErrorKind::NotSquare, std::string(what) + ": expected a non-empty square matrix, got " +
                                   std::to_string(a.rows()) + "x" + std::to_string(a.cols()));
}

inline CMat identity(Eigen::Index n) { return CMat::Identity(n, n); }

/// Re(a) = (a + a*)/2.
inline CMat real_part(const CMat& a) { return (a + a.adjoint()) * 0.5; }

inline SpectralData hermitian_spectrum(const CMat& h) {
  require_square(h, "hermitian_spectrum");
  Eigen::SelfAdjointEigenSolver<CMat> es(real_part(h));
  const Eigen::Index n = h.rows();
  SpectralData out;
  out.values.resize(n);
  out.left.resize(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    out.values(i) = es.eigenvalues()(n - 1 - i);
    out.left.col(i) = es.eigenvectors().col(n - 1 - i);
  }
  out.right = out.left;
  return out;
}

inline SpectralData singular_spectrum(const CMat& a) {
  SpectralData out;
  if (std::max(a.rows(), a.cols()) > 48) {
    Eigen::BDCSVD<CMat> svd(a, Eigen::ComputeFullU | Eigen::ComputeFullV);
    out.values = svd.singularValues();
    out.left = svd.matrixU();
    out.right = svd.matrixV();
  } else {
    Eigen::JacobiSVD<CMat> svd(a, Eigen::ComputeFullU | Eigen::ComputeFullV);
    out.values = svd.singularValues();
    out.left = svd.matrixU();
    out.right = svd.matrixV();
  }
  return out;
}

inline RVec singular_values(const CMat& a) {
  if (a.size() == 0) return RVec();
  if (std::max(a.rows(), a.cols()) > 48) return Eigen::BDCSVD<CMat>(a).singularValues();
  return Eigen::JacobiSVD<CMat>(a).singularValues();
}

inline double op_norm(const CMat& a) {
  if (a.size() == 0) return 0.0;
  return singular_values(a)(0);
}

inline double sigma_min(const CMat& a) {
  if (a.size() == 0) return 0.0;
  const RVec s = singular_values(a);
  return a.rows() == a.cols() ? s(s.size() - 1) : (a.rows() > a.cols() ? s(s.size() - 1) : 0.0);
}

inline double lambda_min(const CMat& h) { return hermitian_spectrum(h).values.minCoeff(); }
inline double lambda_max(const CMat& h) { return hermitian_spectrum(h).values.maxCoeff(); }

/// Normalized trace tau(a) = tr(a)/n.
inline Complex trace_state(const CMat& a) {
  require_square(a, "trace_state");
  return a.trace() / static_cast<double>(a.rows());
}

/// Symmetrizes a matrix claimed Hermitian; rejects it when the skew part is
/// larger than 1e-8 relative to its size.
inline CMat hermitian_checked(const CMat& g, const char* what) {
  require_square(g, what);
  const double scale = std::max(g.norm(), kUnderflowFloor);
  if ((g - g.adjoint()).norm() * 0.5 > 1e-8 * scale)
    fail(ErrorKind::NotPSD, std::string(what) + ": input is not Hermitian");
  return real_part(g);
}

/// Hermitian PSD check: lambda_min >= -1e-10 * lambda_max.
inline SpectralData psd_spectrum(const CMat& g, const char* what) {
  const CMat h = hermitian_checked(g, what);
  SpectralData sp = hermitian_spectrum(h);
  const double top = std::max(sp.values(0), 0.0);
  if (sp.values(sp.values.size() - 1) < -1e-10 * std::max(top, kUnderflowFloor))
    fail(ErrorKind::NotPSD, std::string(what) + ": negative eigenvalue " +
                                std::to_string(sp.values(sp.values.size() - 1)));
  return sp;
}

inline bool is_psd(const CMat& g) {
  try {
    psd_spectrum(g, "is_psd");
    return true;
  } catch (const Error&) {
    return false;
  }
}

/// Mean of log over a descending list of magnitudes; -inf when the list
/// contains a value below zero_tol relative to its first entry.
inline double log_geometric_mean(const RVec& desc, double zero_tol) {
  if (desc.size() == 0) return 0.0;
  const double top = desc(0);
  if (!(top > 0.0)) return -std::numeric_limits<double>::infinity();
  double acc = 0.0;
  for (Eigen::Index i = 0; i < desc.size(); ++i) {
    if (desc(i) < zero_tol * top || desc(i) < kUnderflowFloor)
      return -std::numeric_limits<double>::infinity();
    acc += std::log(desc(i));
  }
  return acc / static_cast<double>(desc.size());
}

/// Fuglede-Kadison determinant Delta(a) = exp(tau(log|a|)) on (M_n, tr/n),
/// evaluated in log space from the singular values.
inline double fk_det(const CMat& a, double zero_tol = kDefaultZeroTol) {
  require_square(a, "fk_det");
  return std::exp(log_geometric_mean(singular_values(a), zero_tol));
}

inline bool is_projection(const CMat& s, double tol = 1e-10) {
  if (s.rows() != s.cols()) return false;
  return (s * s - s).norm() <= tol && (s - s.adjoint()).norm() <= tol;
}

inline Eigen::Index projection_rank(const CMat& s) {
  return static_cast<Eigen::Index>(std::llround(s.trace().real()));
}

/// Determinant of s g s regarded as an element of (sMs, tau(.)/tau(s)).
inline double fk_det_compressed(const CMat& g, const CMat& s, double zero_tol = kDefaultZeroTol) {
  require_square(g, "fk_det_compressed");
  if (s.rows() != g.rows() || !is_projection(s))
    fail(ErrorKind::NotProjection, "fk_det_compressed: s is not a projection of matching size");
  const Eigen::Index r = projection_rank(s);
  if (r <= 0) fail(ErrorKind::NotProjection, "fk_det_compressed: tau(s) = 0");
  const RVec sv = singular_values(s * g * s);
  return std::exp(log_geometric_mean(sv.head(r), zero_tol));
}

/// Spectral projection of a PSD matrix onto eigenvalues >= zero_tol * lambda_max.
inline CMat support_proj(const CMat& g, double zero_tol = kDefaultZeroTol) {
  const SpectralData sp = psd_spectrum(g, "support_proj");
  const Eigen::Index n = g.rows();
  CMat s = CMat::Zero(n, n);
  const double top = sp.values(0);
  if (!(top > 0.0)) return s;
  for (Eigen::Index i = 0; i < n; ++i)
    if (sp.values(i) >= zero_tol * top) s += sp.left.col(i) * sp.left.col(i).adjoint();
  return s;
}

/// Applies a real function to the spectrum of a Hermitian matrix.
template <class F>
CMat hermitian_function(const SpectralData& sp, F&& f) {
  const Eigen::Index n = sp.values.size();
  RVec fv(n);
  for (Eigen::Index i = 0; i < n; ++i) fv(i) = f(sp.values(i));
  return sp.left * fv.cast<Complex>().asDiagonal() * sp.left.adjoint();
}

inline CMat psd_sqrt(const CMat& g) {
  const SpectralData sp = psd_spectrum(g, "psd_sqrt");
  return hermitian_function(sp, [](double x) { return std::sqrt(std::max(x, 0.0)); });
}

/// |a| = (a*a)^{1/2}.
inline CMat abs_op(const CMat& a) {
  const SpectralData sv = singular_spectrum(a);
  const Eigen::Index k = sv.values.size();
  return sv.right.leftCols(k) * sv.values.cast<Complex>().asDiagonal() * sv.right.leftCols(k).adjoint();
}

/// log|a|; a must be invertible.
inline CMat log_abs(const CMat& a, double zero_tol = kDefaultZeroTol) {
  require_square(a, "log_abs");
  const SpectralData sv = singular_spectrum(a);
  if (!(sv.values(0) > 0.0) || sv.values(sv.values.size() - 1) < zero_tol * sv.values(0))
    fail(ErrorKind::DeterminantZero, "log_abs: singular input");
  RVec lg = sv.values.array().log();
  return sv.right * lg.cast<Complex>().asDiagonal() * sv.right.adjoint();
}

/// Moore-Penrose pseudoinverse with singular values below zero_tol * sigma_1 cut.
inline CMat pinv(const CMat& a, double zero_tol = kDefaultZeroTol) {
  const SpectralData sv = singular_spectrum(a);
  CMat out = CMat::Zero(a.cols(), a.rows());
  if (sv.values.size() == 0 || !(sv.values(0) > 0.0)) return out;
  for (Eigen::Index i = 0; i < sv.values.size(); ++i) {
    if (sv.values(i) < zero_tol * sv.values(0)) break;
    out += sv.right.col(i) * (1.0 / sv.values(i)) * sv.left.col(i).adjoint();
  }
  return out;
}

/// Pseudo-inverse square root of a PSD matrix with eigenvalues below
/// rel_cut * lambda_max dropped. Also reports the retained rank.
inline CMat psd_inv_sqrt(const CMat& g, double rel_cut, Eigen::Index* rank = nullptr) {
  const SpectralData sp = hermitian_spectrum(g);
  const double top = std::max(sp.values(0), 0.0);
  Eigen::Index r = 0;
  CMat out = CMat::Zero(g.rows(), g.cols());
  if (top > 0.0) {
    for (Eigen::Index i = 0; i < sp.values.size(); ++i) {
      if (sp.values(i) <= rel_cut * top) break;
      out += sp.left.col(i) * (1.0 / std::sqrt(sp.values(i))) * sp.left.col(i).adjoint();
      ++r;
    }
  }
  if (rank) *rank = r;
  return out;
}

struct Polar {
  CMat w;  ///< partial isometry, unitary when a is invertible
  CMat p;  ///< |a|
};

/// a = w p with p = |a| and w*w = s(|a|).
inline Polar polar(const CMat& a, double zero_tol = kDefaultZeroTol) {
  require_square(a, "polar");
  const SpectralData sv = singular_spectrum(a);
  const Eigen::Index n = a.rows();
  Polar out{CMat::Zero(n, n), CMat::Zero(n, n)};
  const double top = sv.values(0);
  for (Eigen::Index i = 0; i < n; ++i) {
    out.p += sv.right.col(i) * sv.values(i) * sv.right.col(i).adjoint();
    if (top > 0.0 && sv.values(i) >= zero_tol * top)
      out.w += sv.left.col(i) * sv.right.col(i).adjoint();
  }
  return out;
}

/// Unitary exp(i H) for Hermitian H.
inline CMat unitary_exp(const CMat& h) {
  const SpectralData sp = hermitian_spectrum(h);
  const Eigen::Index n = sp.values.size();
  CVec ph(n);
  for (Eigen::Index i = 0; i < n; ++i) ph(i) = std::polar(1.0, sp.values(i));
  return sp.left * ph.asDiagonal() * sp.left.adjoint();
}

}  // namespace nchs
