#pragma once
// The two finite subdiagonal algebra models (M, A, D, Phi):
//   Triangular(n): M = M_n, A = upper triangular matrices, D = diagonal.
//   Fourier(d, deg, grid): M = L^inf(T; M_d), A = analytic symbols, D = M_d
//   (constant symbols). Elements are Laurent polynomials; grids are used only
//   for evaluation-based quantities.

#include <unsupported/Eigen/Polynomials>

#include <charconv>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include "nchs/laurent.hpp"
#include "nchs/opcore.hpp"

namespace nchs {

enum class ModelKind { Triangular, Fourier };

struct SubdiagonalModel {
  ModelKind kind = ModelKind::Triangular;
  int n = 1;      // Triangular matrix size
  int d = 1;      // Fourier block size
  int deg = 1;    // Fourier nominal Laurent degree
  int grid = 256; // Fourier evaluation grid size

  static SubdiagonalModel triangular(int n) {
    SubdiagonalModel m;
    m.kind = ModelKind::Triangular;
    m.n = n;
    m.validate();
    return m;
  }

  /// grid = 0 selects max(256, 8 deg) rounded up to a power of two.
  static SubdiagonalModel fourier(int d, int deg, int grid = 0) {
    SubdiagonalModel m;
    m.kind = ModelKind::Fourier;
    m.d = d;
    m.deg = deg;
    m.grid = grid > 0 ? grid : next_pow2(std::max(256, 8 * deg));
    m.validate();
    return m;
  }

  bool triangular_kind() const { return kind == ModelKind::Triangular; }
  bool fourier_kind() const { return kind == ModelKind::Fourier; }

  /// Size of the matrix blocks (n or d).
  Eigen::Index block() const { return triangular_kind() ? n : d; }

  void validate() const {
    if (triangular_kind()) {
      if (n < 1) fail(ErrorKind::InvalidArgument, "triangular model needs n >= 1");
      return;
    }
    if (d < 1 || deg < 1) fail(ErrorKind::InvalidArgument, "fourier model needs d >= 1 and deg >= 1");
    if (grid < 8 * deg || !is_pow2(grid))
      fail(ErrorKind::InvalidArgument, "fourier model grid must be a power of two >= 8 deg");
  }

  std::string describe() const {
    if (triangular_kind()) return "triangular:n=" + std::to_string(n);
    return "fourier:d=" + std::to_string(d) + ",deg=" + std::to_string(deg) + ",grid=" + std::to_string(grid);
  }

  /// Parses "triangular:n=6" or "fourier:d=2,deg=16[,grid=256]".
  static SubdiagonalModel parse(std::string_view spec) {
    const auto colon = spec.find(':');
    const std::string_view head = spec.substr(0, colon);
    std::string_view rest = colon == std::string_view::npos ? std::string_view{} : spec.substr(colon + 1);
    int n = 0, d = 1, deg = 0, grid = 0;
    while (!rest.empty()) {
      const auto comma = rest.find(',');
      const std::string_view item = rest.substr(0, comma);
      rest = comma == std::string_view::npos ? std::string_view{} : rest.substr(comma + 1);
      const auto eq = item.find('=');
      if (eq == std::string_view::npos) fail(ErrorKind::ParseError, "model spec item without '=': " + std::string(item));
      const std::string_view key = item.substr(0, eq), val = item.substr(eq + 1);
      int v = 0;
      const auto res = std::from_chars(val.data(), val.data() + val.size(), v);
      if (res.ec != std::errc{} || res.ptr != val.data() + val.size())
        fail(ErrorKind::ParseError, "model spec value is not an integer: " + std::string(item));
      if (key == "n") n = v;
      else if (key == "d") d = v;
      else if (key == "deg") deg = v;
      else if (key == "grid") grid = v;
      else fail(ErrorKind::ParseError, "unknown model spec key: " + std::string(key));
    }
    if (head == "triangular") return triangular(n);
    if (head == "fourier") return fourier(d, deg, grid);
    fail(ErrorKind::ParseError, "unknown model kind: " + std::string(head));
  }

  friend bool operator==(const SubdiagonalModel&, const SubdiagonalModel&) = default;
};

/// A member of M in either model: a dense matrix (Triangular) or a
/// matrix-valued Laurent polynomial (Fourier).
class ModelElement {
 public:
  ModelElement() : v_(CMat()) {}
  ModelElement(CMat m) : v_(std::move(m)) {}
  ModelElement(Laurent l) : v_(std::move(l)) {}

  bool is_matrix() const { return std::holds_alternative<CMat>(v_); }
  bool is_laurent() const { return std::holds_alternative<Laurent>(v_); }

  const CMat& matrix() const {
    if (!is_matrix()) fail(ErrorKind::ModelMismatch, "expected a triangular-model element");
    return std::get<CMat>(v_);
  }
  const Laurent& laurent() const {
    if (!is_laurent()) fail(ErrorKind::ModelMismatch, "expected a fourier-model element");
    return std::get<Laurent>(v_);
  }

  ModelElement adjoint() const {
    if (is_matrix()) return CMat(matrix().adjoint());
    return laurent().adjoint();
  }

  friend ModelElement operator+(const ModelElement& a, const ModelElement& b) {
    same_kind(a, b);
    if (a.is_matrix()) return CMat(a.matrix() + b.matrix());
    return a.laurent() + b.laurent();
  }
  friend ModelElement operator-(const ModelElement& a, const ModelElement& b) {
    same_kind(a, b);
    if (a.is_matrix()) return CMat(a.matrix() - b.matrix());
    return a.laurent() - b.laurent();
  }
  friend ModelElement operator*(const ModelElement& a, const ModelElement& b) {
    same_kind(a, b);
    if (a.is_matrix()) return CMat(a.matrix() * b.matrix());
    return a.laurent() * b.laurent();
  }
  friend ModelElement operator*(Complex s, const ModelElement& a) {
    if (a.is_matrix()) return CMat(s * a.matrix());
    return s * a.laurent();
  }

 private:
  static void same_kind(const ModelElement& a, const ModelElement& b) {
    if (a.is_matrix() != b.is_matrix()) fail(ErrorKind::ModelMismatch, "elements from different models");
  }

  std::variant<CMat, Laurent> v_;
};

// ---------------------------------------------------------------------------
// Membership and basic algebra

inline void require_member(const SubdiagonalModel& m, const ModelElement& x, const char* what = "element") {
  if (m.triangular_kind()) {
    if (!x.is_matrix() || x.matrix().rows() != m.n || x.matrix().cols() != m.n)
      fail(ErrorKind::ModelMismatch, std::string(what) + " is not a member of " + m.describe());
  } else {
    if (!x.is_laurent() || x.laurent().dim() != m.d)
      fail(ErrorKind::ModelMismatch, std::string(what) + " is not a member of " + m.describe());
  }
}

inline ModelElement identity(const SubdiagonalModel& m) {
  if (m.triangular_kind()) return CMat(CMat::Identity(m.n, m.n));
  return Laurent::identity(m.d);
}

inline ModelElement zero(const SubdiagonalModel& m) {
  if (m.triangular_kind()) return CMat(CMat::Zero(m.n, m.n));
  return Laurent(m.d);
}

/// Embeds a constant block (an element of D when diagonal/constant).
inline ModelElement constant(const SubdiagonalModel& m, const CMat& c) {
  if (m.triangular_kind()) return c;
  return Laurent::constant(c);
}

inline ModelElement mul(const SubdiagonalModel& m, const ModelElement& x, const ModelElement& y) {
  require_member(m, x, "mul lhs");
  require_member(m, y, "mul rhs");
  return x * y;
}

inline ModelElement adj(const SubdiagonalModel& m, const ModelElement& x) {
  require_member(m, x, "adj");
  return x.adjoint();
}

/// Anti-automorphism of M that preserves A, D, tau and commutes with *:
/// reversed transpose P x^T P (Triangular) / coefficientwise transpose (Fourier).
inline ModelElement flip(const SubdiagonalModel& m, const ModelElement& x) {
  require_member(m, x, "flip");
  if (m.fourier_kind()) return x.laurent().transpose();
  const CMat& a = x.matrix();
  const Eigen::Index n = a.rows();
  CMat out(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) out(i, j) = a(n - 1 - j, n - 1 - i);
  return out;
}

/// Normalized trace tau.
inline Complex trace(const SubdiagonalModel& m, const ModelElement& x) {
  require_member(m, x, "trace");
  if (m.triangular_kind()) return trace_state(x.matrix());
  return x.laurent().coeff(0).trace() / static_cast<double>(m.d);
}

/// Conditional expectation onto D.
inline ModelElement phi(const SubdiagonalModel& m, const ModelElement& x) {
  require_member(m, x, "phi");
  if (m.triangular_kind()) return CMat(x.matrix().diagonal().asDiagonal());
  return Laurent::constant(x.laurent().coeff(0));
}

/// The constant block of Phi(x).
inline CMat phi_block(const SubdiagonalModel& m, const ModelElement& x) {
  require_member(m, x, "phi");
  if (m.triangular_kind()) return CMat(x.matrix().diagonal().asDiagonal());
  return x.laurent().coeff(0);
}

struct Decomposition {
  ModelElement plus0;   ///< H^2_0 part
  ModelElement diag;    ///< L^2(D) part
  ModelElement minus0;  ///< (H^2_0)^* part
};

inline Decomposition decompose(const SubdiagonalModel& m, const ModelElement& x) {
  require_member(m, x, "decompose");
  if (m.triangular_kind()) {
    const CMat& a = x.matrix();
    CMat up = a.triangularView<Eigen::StrictlyUpper>();
    CMat lo = a.triangularView<Eigen::StrictlyLower>();
    return {up, CMat(a.diagonal().asDiagonal()), lo};
  }
  const Laurent& l = x.laurent();
  const int lo = std::min(l.min_degree(), 0), hi = std::max(l.max_degree(), 0);
  return {l.band(1, std::max(hi, 1)), l.band(0, 0), l.band(std::min(lo, -1), -1)};
}

/// Orthogonal projection onto H^2.
inline ModelElement p_plus(const SubdiagonalModel& m, const ModelElement& x) {
  const Decomposition dec = decompose(m, x);
  return dec.plus0 + dec.diag;
}

/// Orthogonal projection onto (H^2)^* = L^2(D) + (H^2_0)^*.
inline ModelElement p_minus(const SubdiagonalModel& m, const ModelElement& x) {
  const Decomposition dec = decompose(m, x);
  return dec.diag + dec.minus0;
}

/// Structural membership in A (no strictly lower entries / no negative degrees).
inline bool in_algebra(const SubdiagonalModel& m, const ModelElement& x, double tol = 0.0) {
  require_member(m, x);
  if (m.triangular_kind()) {
    const CMat& a = x.matrix();
    return CMat(a.triangularView<Eigen::StrictlyLower>()).norm() <= tol;
  }
  for (const auto& [k, c] : x.laurent().coeffs())
    if (k < 0 && c.norm() > tol) return false;
  return true;
}

// ---------------------------------------------------------------------------
// Grids (Fourier model)

/// Evaluation grid for x: the model grid, enlarged to resolve x's degree.
inline int eval_grid(const SubdiagonalModel& m, const Laurent& x) {
  return std::max(m.grid, next_pow2(8 * std::max(x.degree(), 1)));
}

inline std::vector<CMat> grid_values(const SubdiagonalModel& m, const ModelElement& x, int M = 0) {
  require_member(m, x, "grid_values");
  return sample(x.laurent(), M > 0 ? M : eval_grid(m, x.laurent()));
}

// ---------------------------------------------------------------------------
// Norms

inline double l2_norm(const SubdiagonalModel& m, const ModelElement& x) {
  require_member(m, x, "l2_norm");
  if (m.triangular_kind()) return x.matrix().norm() / std::sqrt(static_cast<double>(m.n));
  double acc = 0.0;
  for (const auto& [k, c] : x.laurent().coeffs()) acc += c.squaredNorm();
  return std::sqrt(acc / m.d);
}

/// <x, y> = tau(y* x).
inline Complex inner(const SubdiagonalModel& m, const ModelElement& x, const ModelElement& y) {
  return trace(m, y.adjoint() * x);
}

struct NormEstimate {
  double value = 0.0;
  double resolution = 0.0;  ///< |fine - coarse| after one x4 refinement (0 when exact)
  int grid = 0;
};

inline NormEstimate sup_norm_estimate(const SubdiagonalModel& m, const ModelElement& x) {
  require_member(m, x, "sup_norm");
  if (m.triangular_kind()) return {op_norm(x.matrix()), 0.0, 0};
  const Laurent& l = x.laurent();
  const int M0 = eval_grid(m, l);
  const int M = 4 * M0;
  std::vector<double> vals(M);
  double coarse = 0.0;
  {
    const auto s = sample(l, M);
    for (int j = 0; j < M; ++j) {
      vals[j] = op_norm(s[j]);
      if (j % 4 == 0) coarse = std::max(coarse, vals[j]);
    }
  }
  // Golden-section refinement around the largest local maxima of the fine grid.
  std::vector<int> peaks;
  for (int j = 0; j < M; ++j)
    if (vals[j] >= vals[(j + M - 1) % M] && vals[j] >= vals[(j + 1) % M]) peaks.push_back(j);
  std::sort(peaks.begin(), peaks.end(), [&](int a, int b) { return vals[a] > vals[b]; });
  if (peaks.size() > 4) peaks.resize(4);
  double best = *std::max_element(vals.begin(), vals.end());
  const double h = 2.0 * std::numbers::pi / M;
  const double gr = (std::sqrt(5.0) - 1.0) / 2.0;
  for (int j : peaks) {
    double a = grid_angle(j, M) - h, b = grid_angle(j, M) + h;
    double c = b - gr * (b - a), d = a + gr * (b - a);
    double fc = op_norm(l.evaluate(c)), fd = op_norm(l.evaluate(d));
    for (int it = 0; it < 40; ++it) {
      if (fc > fd) {
        b = d, d = c, fd = fc;
        c = b - gr * (b - a);
        fc = op_norm(l.evaluate(c));
      } else {
        a = c, c = d, fc = fd;
        d = a + gr * (b - a);
        fd = op_norm(l.evaluate(d));
      }
    }
    best = std::max({best, fc, fd});
  }
  return {best, best - coarse, M};
}

inline double sup_norm(const SubdiagonalModel& m, const ModelElement& x) { return sup_norm_estimate(m, x).value; }

inline double l1_norm(const SubdiagonalModel& m, const ModelElement& x) {
  require_member(m, x, "l1_norm");
  if (m.triangular_kind()) return singular_values(x.matrix()).sum() / m.n;
  const int M = 4 * eval_grid(m, x.laurent());
  double acc = 0.0;
  for (const CMat& v : sample(x.laurent(), M)) acc += singular_values(v).sum() / m.d;
  return acc / M;
}

/// lambda_min of a Hermitian element (min over the refined grid for Fourier).
inline double lambda_min(const SubdiagonalModel& m, const ModelElement& x) {
  require_member(m, x, "lambda_min");
  if (m.triangular_kind()) return lambda_min(x.matrix());
  double best = std::numeric_limits<double>::infinity();
  for (const CMat& v : sample(x.laurent(), 4 * eval_grid(m, x.laurent()))) best = std::min(best, lambda_min(v));
  return best;
}

// ---------------------------------------------------------------------------
// Fuglede-Kadison determinant in the model

namespace detail {

/// log of the Mahler measure of a polynomial given by ascending coefficients:
/// log|lead| + sum log max(1, |root|).
inline double log_mahler(std::vector<Complex> c) {
  double cmax = 0.0;
  for (const Complex& v : c) cmax = std::max(cmax, std::abs(v));
  if (!(cmax > 0.0)) return -std::numeric_limits<double>::infinity();
  const double cut = 1e-13 * cmax;
  while (!c.empty() && std::abs(c.back()) <= cut) c.pop_back();
  std::size_t lo = 0;
  while (lo < c.size() && std::abs(c[lo]) <= cut) ++lo;
  c.erase(c.begin(), c.begin() + static_cast<std::ptrdiff_t>(lo));
  if (c.size() <= 1) return std::log(std::abs(c.front()));
  Eigen::VectorXcd coeffs(static_cast<Eigen::Index>(c.size()));
  for (std::size_t i = 0; i < c.size(); ++i) coeffs(static_cast<Eigen::Index>(i)) = c[i];
  Eigen::PolynomialSolver<Complex, Eigen::Dynamic> solver(coeffs);
  double acc = std::log(std::abs(c.back()));
  for (Eigen::Index i = 0; i < solver.roots().size(); ++i) acc += std::log(std::max(1.0, std::abs(solver.roots()(i))));
  return acc;
}

inline double fourier_log_det(const SubdiagonalModel& m, const Laurent& x, double zero_tol) {
  const Eigen::Index d = x.dim();
  if (x.empty()) return -std::numeric_limits<double>::infinity();
  const int lo = x.min_degree(), hi = x.max_degree();
  const int span = hi - lo;
  const int D = static_cast<int>(d) * span;
  if (D == 0) return log_geometric_mean(singular_values(x.coeff(lo)), zero_tol);
  if (D <= 256) {
    // det(z^{-lo} x(z)) is a polynomial of degree <= D; interpolate it on
    // roots of unity and take its Mahler measure.
    Laurent shifted(d);
    for (const auto& [k, c] : x.coeffs()) shifted.set(k - lo, c);
    const int K = next_pow2(D + 1);
    const auto vals = sample(shifted, K);
    std::vector<Complex> dets(K);
    for (int j = 0; j < K; ++j) dets[j] = vals[j].determinant();
    const Laurent q = from_scalar_samples(dets);
    std::vector<Complex> coeffs(static_cast<std::size_t>(K), Complex(0.0));
    for (const auto& [k, c] : q.coeffs()) coeffs[static_cast<std::size_t>((k + K) % K)] = c(0, 0);
    return log_mahler(coeffs) / static_cast<double>(d);
  }
  const int M = std::max({m.grid, next_pow2(8 * span), 4096});
  double acc = 0.0;
  for (const CMat& v : sample(x, M)) {
    const double lg = log_geometric_mean(singular_values(v), zero_tol);
    if (!std::isfinite(lg)) return lg;
    acc += lg;
  }
  return acc / M;
}

}  // namespace detail

/// Delta(x) = exp(tau(log|x|)).
inline double det(const SubdiagonalModel& m, const ModelElement& x, double zero_tol = kDefaultZeroTol) {
  require_member(m, x, "det");
  if (m.triangular_kind()) return fk_det(x.matrix(), zero_tol);
  return std::exp(detail::fourier_log_det(m, x.laurent(), zero_tol));
}

// ---------------------------------------------------------------------------
// Bases

enum class Space { A0, Astar, H20, D, H2 };

inline std::string_view to_string(Space s) {
  switch (s) {
    case Space::A0: return "A0";
    case Space::Astar: return "Astar";
    case Space::H20: return "H20";
    case Space::D: return "D";
    case Space::H2: return "H2";
  }
  return "?";
}

/// Basis element sqrt(blk) * z^k * E_pq (k = 0 in the Triangular model).
struct BasisIndex {
  int k = 0;
  Eigen::Index p = 0;
  Eigen::Index q = 0;
};

/// Largest cutoff the Fourier grid resolves without aliasing in products of
/// two basis elements.
inline int max_cutoff(const SubdiagonalModel& m) { return m.triangular_kind() ? 0 : m.grid / 4; }

inline std::vector<BasisIndex> basis_indices(const SubdiagonalModel& m, Space space, int cutoff = 0) {
  std::vector<BasisIndex> out;
  const Eigen::Index b = m.block();
  if (m.triangular_kind()) {
    for (Eigen::Index i = 0; i < b; ++i)
      for (Eigen::Index j = 0; j < b; ++j) {
        const bool keep = (space == Space::A0 || space == Space::H20) ? i < j
                          : space == Space::Astar                     ? i >= j
                          : space == Space::D                         ? i == j
                                                                      : i <= j;
        if (keep) out.push_back({0, i, j});
      }
    return out;
  }
  if (space != Space::D && (cutoff < 1 || cutoff > max_cutoff(m)))
    fail(ErrorKind::InvalidArgument, "basis cutoff " + std::to_string(cutoff) + " outside [1, " +
                                         std::to_string(max_cutoff(m)) + "] for " + m.describe());
  int klo = 0, khi = 0;
  switch (space) {
    case Space::A0:
    case Space::H20: klo = 1; khi = cutoff; break;
    case Space::Astar: klo = -cutoff; khi = 0; break;
    case Space::D: break;
    case Space::H2: klo = 0; khi = cutoff; break;
  }
  for (int k = klo; k <= khi; ++k)
    for (Eigen::Index p = 0; p < b; ++p)
      for (Eigen::Index q = 0; q < b; ++q) out.push_back({k, p, q});
  return out;
}

inline ModelElement basis_element(const SubdiagonalModel& m, const BasisIndex& idx) {
  const Eigen::Index b = m.block();
  CMat e = CMat::Zero(b, b);
  e(idx.p, idx.q) = std::sqrt(static_cast<double>(b));
  if (m.triangular_kind()) return e;
  return Laurent::monomial(idx.k, e);
}

/// Orthonormal basis of the requested subspace in L^2(tau).
inline std::vector<ModelElement> basis(const SubdiagonalModel& m, Space space, int cutoff = 0) {
  std::vector<ModelElement> out;
  for (const BasisIndex& idx : basis_indices(m, space, cutoff)) out.push_back(basis_element(m, idx));
  return out;
}

/// <x, b_idx> = tau(b* x).
inline Complex coordinate(const SubdiagonalModel& m, const BasisIndex& idx, const ModelElement& x) {
  const double s = std::sqrt(static_cast<double>(m.block()));
  if (m.triangular_kind()) return x.matrix()(idx.p, idx.q) / s;
  auto it = x.laurent().coeffs().find(idx.k);
  return it == x.laurent().coeffs().end() ? Complex(0.0) : it->second(idx.p, idx.q) / s;
}

// ---------------------------------------------------------------------------
// Compression to e M e for a projection e in D

struct Compression {
  SubdiagonalModel parent;
  SubdiagonalModel model;  ///< model over e A e with trace tau(.)/tau(e)
  CMat frame;              ///< block x r isometry whose range is e

  ModelElement restrict_to(const ModelElement& x) const {
    require_member(parent, x, "compress restrict");
    if (parent.triangular_kind()) return CMat(frame.adjoint() * x.matrix() * frame);
    return x.laurent().left_mul(frame.adjoint()).right_mul(frame);
  }
  ModelElement embed(const ModelElement& y) const {
    require_member(model, y, "compress embed");
    if (parent.triangular_kind()) return CMat(frame * y.matrix() * frame.adjoint());
    return y.laurent().left_mul(frame).right_mul(frame.adjoint());
  }
  CMat projection() const { return frame * frame.adjoint(); }
};

inline Compression compress(const SubdiagonalModel& m, const CMat& e) {
  const Eigen::Index b = m.block();
  if (e.rows() != b || e.cols() != b || !is_projection(e))
    fail(ErrorKind::NotProjection, "compress: e is not a projection of the block size");
  if (m.triangular_kind() && CMat(e - CMat(e.diagonal().asDiagonal())).norm() > 1e-12)
    fail(ErrorKind::NotProjection, "compress: e is not in the diagonal algebra");
  const Eigen::Index r = projection_rank(e);
  if (r <= 0) fail(ErrorKind::NotProjection, "compress: e = 0");
  CMat frame = CMat::Zero(b, r);
  if (m.triangular_kind()) {
    Eigen::Index c = 0;
    for (Eigen::Index i = 0; i < b; ++i)
      if (e(i, i).real() > 0.5) frame(i, c++) = 1.0;
    return {m, SubdiagonalModel::triangular(static_cast<int>(r)), frame};
  }
  const SpectralData sp = hermitian_spectrum(e);
  frame = sp.left.leftCols(r);
  return {m, SubdiagonalModel::fourier(static_cast<int>(r), m.deg, m.grid), frame};
}

inline Compression compress(const SubdiagonalModel& m, const ModelElement& e) {
  require_member(m, e, "compress");
  if (m.triangular_kind()) return compress(m, e.matrix());
  {
    for (const auto& [k, c] : e.laurent().coeffs())
      if (k != 0 && c.norm() > 1e-12) fail(ErrorKind::NotProjection, "compress: e is not a constant symbol");
  }
  return compress(m, phi_block(m, e));
}

}  // namespace nchs
