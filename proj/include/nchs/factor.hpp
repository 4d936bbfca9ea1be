#pragma once
// Outer (spectral) factorization and the factorizations built on it:
// Riesz-Szego f = u h, the weight factorization g = f_R u f_L with strongly
// outer f_L, f_R, and the symbol factorization a = u k with k invertible in A.

#include <deque>
#include <functional>
#include <string>
#include <vector>

#include "nchs/models.hpp"

namespace nchs {

struct FactorOptions {
  double tol = 1e-10;         ///< convergence / residual tolerance
  double zero_tol = kDefaultZeroTol;
  double eps_pos_rel = 1e-8;  ///< strict positivity threshold relative to the sup norm
  int max_blocks = 0;         ///< Bauer row cap; 0 selects 64 * max(deg, N)
};

struct OuterFactor {
  ModelElement h;           ///< outer element of H^2 with w = h* h
  double residual = 0.0;    ///< ||w - h* h||_2
  double delta_gap = 0.0;   ///< |Delta(h) - Delta(Phi(h))|
  double tail_energy = 0.0; ///< discarded coefficient energy (Fourier)
  int iterations = 0;       ///< Bauer rows processed
  std::string method;       ///< cholesky | exponential | bauer
};

namespace detail {

inline ModelElement hermitian_element(const SubdiagonalModel& m, const ModelElement& w, const char* what) {
  require_member(m, w, what);
  if (m.triangular_kind()) return hermitian_checked(w.matrix(), what);
  const Laurent& l = w.laurent();
  double scale = 0.0;
  for (const auto& [k, c] : l.coeffs()) scale += c.squaredNorm();
  scale = std::max(std::sqrt(scale), kUnderflowFloor);
  const Laurent skew = l - l.adjoint();
  double sk = 0.0;
  for (const auto& [k, c] : skew.coeffs()) sk += c.squaredNorm();
  if (0.5 * std::sqrt(sk) > 1e-8 * scale) fail(ErrorKind::NotPSD, std::string(what) + ": symbol is not Hermitian");
  Laurent out = l + l.adjoint();
  out *= 0.5;
  return out;
}

/// Builds a Laurent polynomial from a pointwise map of grid values, doubling
/// the grid until the coefficients near the Nyquist band are negligible.
inline Laurent synthesize(const SubdiagonalModel& m, const std::vector<const Laurent*>& inputs,
                          const std::function<CMat(const std::vector<CMat>&)>& pointwise) {
  int M = m.grid;
  for (const Laurent* x : inputs) M = std::max(M, eval_grid(m, *x));
  constexpr int kMaxGrid = 1 << 15;
  for (;;) {
    std::vector<std::vector<CMat>> vals;
    for (const Laurent* x : inputs) vals.push_back(sample(*x, M));
    std::vector<CMat> out(M);
    std::vector<CMat> args(inputs.size());
    for (int j = 0; j < M; ++j) {
      for (std::size_t i = 0; i < inputs.size(); ++i) args[i] = vals[i][j];
      out[j] = pointwise(args);
    }
    Laurent y = from_samples(out);
    double total = 0.0, tail = 0.0, cmax = 0.0;
    for (const auto& [k, c] : y.coeffs()) {
      const double e = c.squaredNorm();
      total += e;
      cmax = std::max(cmax, std::sqrt(e));
      if (std::abs(k) >= M / 4) tail += e;
    }
    if (tail <= 1e-28 * std::max(total, kUnderflowFloor) || M >= kMaxGrid) return y.prune(1e-16 * cmax);
    M *= 2;
  }
}

inline double frob_l2(const Laurent& x) {
  double acc = 0.0;
  for (const auto& [k, c] : x.coeffs()) acc += c.squaredNorm();
  return std::sqrt(acc / static_cast<double>(x.dim()));
}

/// Left-multiplies by the unitary that makes the constant coefficient
/// Hermitian PSD (the gauge fixing of outer factors in the Fourier model).
inline Laurent normalize_constant_term(const Laurent& h) {
  const Polar pol = polar(h.coeff(0));
  return h.left_mul(pol.w.adjoint());
}

/// Scalar outer factor via h = exp((log w + i conj(log w)) / 2) on a grid.
inline Laurent exponential_outer(const SubdiagonalModel& m, const Laurent& w, int target_deg, double* tail) {
  int M = std::max({m.grid, next_pow2(32 * std::max(target_deg, 1)), 1024});
  constexpr int kMaxGrid = 1 << 16;
  for (;;) {
    const std::vector<Complex> wv = sample_scalar(w, M);
    std::vector<Complex> lg(M);
    for (int j = 0; j < M; ++j) lg[j] = std::log(wv[j].real());
    const Laurent lc = from_scalar_samples(lg);
    Laurent analytic(1);
    for (const auto& [k, c] : lc.coeffs()) {
      if (k == 0) analytic.set(0, 0.5 * c);
      else if (k > 0 && k < M / 2) analytic.set(k, c);
    }
    const std::vector<Complex> av = sample_scalar(analytic, M);
    std::vector<Complex> hv(M);
    for (int j = 0; j < M; ++j) hv[j] = std::exp(av[j]);
    const Laurent hc = from_scalar_samples(hv);
    double tail_e = 0.0, alias = 0.0;
    for (const auto& [k, c] : hc.coeffs()) {
      if (k > target_deg) tail_e += c.squaredNorm();
      if (std::abs(k) >= M / 4) alias += c.squaredNorm();
    }
    if (alias <= 1e-30 || M >= kMaxGrid) {
      *tail = tail_e;
      return hc.band(0, target_deg);
    }
    M *= 2;
  }
}

/// Bauer's method: row-by-row block Cholesky of the banded block Toeplitz
/// matrix [W_{j-i}], whose last block row converges to the outer factor.
inline Laurent bauer_outer(const Laurent& w, int N, double tol, int max_rows, int* rows_used) {
  const Eigen::Index d = w.dim();
  std::vector<CMat> W(static_cast<std::size_t>(N + 1));
  for (int k = 0; k <= N; ++k) W[k] = w.coeff(k);  // block (i, i+k) of T; block (i+k, i) is W_k^*
  // rows[r][c - (r - N)] holds L(r, c) for r - N <= c <= r.
  std::deque<std::vector<CMat>> rows;
  std::vector<CMat> prev;
  auto block_at = [&](int r, int c, int current) -> const CMat& {
    return rows[static_cast<std::size_t>(rows.size() - 1 - (current - r))][static_cast<std::size_t>(c - (r - N))];
  };
  const CMat zero = CMat::Zero(d, d);
  for (int i = 0; i < max_rows; ++i) {
    std::vector<CMat> row(static_cast<std::size_t>(N + 1), zero);
    auto Lij = [&](int c) -> CMat& { return row[static_cast<std::size_t>(c - (i - N))]; };
    for (int j = std::max(0, i - N); j < i; ++j) {
      CMat acc = W[static_cast<std::size_t>(i - j)].adjoint();  // T(i, j) = W_{j-i}
      for (int l = std::max(0, i - N); l < j; ++l) {
        if (l < j - N) continue;
        acc -= Lij(l) * block_at(j, l, i - 1 + 0).adjoint();
      }
      const CMat& Ljj = block_at(j, j, i - 1);
      Lij(j) = CMat(Ljj.adjoint()).triangularView<Eigen::Upper>().solve<Eigen::OnTheRight>(acc);
    }
    CMat S = W[0];
    for (int l = std::max(0, i - N); l < i; ++l) S -= Lij(l) * Lij(l).adjoint();
    Eigen::LLT<CMat> llt(real_part(S));
    if (llt.info() != Eigen::Success) fail(ErrorKind::NoConvergence, "bauer: block Cholesky broke down");
    Lij(i) = llt.matrixL();
    rows.push_back(row);
    if (static_cast<int>(rows.size()) > N + 1) rows.pop_front();
    if (i >= N) {
      // H_k = L(i, i-k)^*
      std::vector<CMat> cur(static_cast<std::size_t>(N + 1));
      for (int k = 0; k <= N; ++k) cur[k] = Lij(i - k).adjoint();
      if (!prev.empty()) {
        double diff = 0.0;
        for (int k = 0; k <= N; ++k) diff += (cur[k] - prev[k]).squaredNorm();
        if (std::sqrt(diff / d) <= tol) {
          *rows_used = i + 1;
          Laurent h(d);
          for (int k = 0; k <= N; ++k) h.set(k, cur[k]);
          return h;
        }
      }
      prev = std::move(cur);
    }
  }
  fail(ErrorKind::NoConvergence, "bauer: no convergence within " + std::to_string(max_rows) + " block rows");
}

}  // namespace detail

/// Outer factor h in H^2 with w = h* h. Triangular: Cholesky w = R* R with R
/// upper triangular and positive diagonal. Fourier: exponential formula
/// (d = 1) or Bauer's method (d > 1), constant term Hermitian PSD.
inline OuterFactor outer_factor_psd(const SubdiagonalModel& m, const ModelElement& w_in, const FactorOptions& opt = {}) {
  const ModelElement w = detail::hermitian_element(m, w_in, "outer_factor_psd");
  OuterFactor out;
  if (m.triangular_kind()) {
    const CMat& a = w.matrix();
    psd_spectrum(a, "outer_factor_psd");
    if (!(fk_det(a, opt.zero_tol) > 0.0))
      fail(ErrorKind::DeterminantZero, "outer_factor_psd: Delta(w) = 0, no outer factor exists");
    Eigen::LLT<CMat> llt(a);
    if (llt.info() != Eigen::Success) fail(ErrorKind::DeterminantZero, "outer_factor_psd: Cholesky failed");
    out.h = CMat(llt.matrixL().adjoint());
    out.method = "cholesky";
  } else {
    const Laurent& l = w.laurent();
    const double top = sup_norm(m, w);
    const double low = lambda_min(m, w);
    if (low < -1e-10 * std::max(top, kUnderflowFloor)) fail(ErrorKind::NotPSD, "outer_factor_psd: symbol not PSD on the grid");
    if (!(top > 0.0) || low < opt.eps_pos_rel * top)
      fail(ErrorKind::DeterminantZero, "outer_factor_psd: symbol not bounded below on the grid (min eigenvalue " +
                                           std::to_string(low) + ")");
    const int N = std::max(l.max_degree(), 0);
    if (m.d == 1) {
      out.h = detail::exponential_outer(m, l, N, &out.tail_energy);
      out.method = "exponential";
    } else if (N == 0) {
      Eigen::LLT<CMat> llt(l.coeff(0));
      out.h = detail::normalize_constant_term(Laurent::constant(llt.matrixL().adjoint()));
      out.method = "bauer";
    } else {
      const int cap = opt.max_blocks > 0 ? opt.max_blocks : 64 * std::max(m.deg, N);
      out.h = detail::normalize_constant_term(detail::bauer_outer(l, N, opt.tol, cap, &out.iterations));
      out.method = "bauer";
    }
  }
  const ModelElement hh = out.h.adjoint() * out.h;
  out.residual = l2_norm(m, w - hh);
  out.delta_gap = std::abs(det(m, out.h, opt.zero_tol) - det(m, phi(m, out.h), opt.zero_tol));
  return out;
}

/// Bauer factor of a Fourier weight regardless of block size (used to
/// cross-check the exponential formula in the scalar case).
inline OuterFactor bauer_factor(const SubdiagonalModel& m, const ModelElement& w_in, const FactorOptions& opt = {}) {
  if (!m.fourier_kind()) fail(ErrorKind::ModelMismatch, "bauer_factor: fourier model required");
  const ModelElement w = detail::hermitian_element(m, w_in, "bauer_factor");
  const Laurent& l = w.laurent();
  const int N = std::max(l.max_degree(), 1);
  OuterFactor out;
  const int cap = opt.max_blocks > 0 ? opt.max_blocks : 64 * std::max(m.deg, N);
  out.h = detail::normalize_constant_term(detail::bauer_outer(l, N, opt.tol, cap, &out.iterations));
  out.method = "bauer";
  out.residual = l2_norm(m, w - out.h.adjoint() * out.h);
  out.delta_gap = std::abs(det(m, out.h, opt.zero_tol) - det(m, phi(m, out.h), opt.zero_tol));
  return out;
}

// ---------------------------------------------------------------------------

namespace detail {

/// x * h^{-1} for h invertible in A (right division).
inline ModelElement right_divide(const SubdiagonalModel& m, const ModelElement& x, const ModelElement& h) {
  if (m.triangular_kind())
    return CMat(h.matrix().triangularView<Eigen::Upper>().solve<Eigen::OnTheRight>(x.matrix()));
  return synthesize(m, {&x.laurent(), &h.laurent()}, [](const std::vector<CMat>& v) {
    return CMat(v[1].transpose().partialPivLu().solve(v[0].transpose()).transpose());
  });
}

inline double unitarity_defect(const SubdiagonalModel& m, const ModelElement& u) {
  if (m.triangular_kind()) {
    const CMat& a = u.matrix();
    return op_norm(a.adjoint() * a - CMat::Identity(a.rows(), a.cols()));
  }
  double worst = 0.0;
  for (const CMat& v : sample(u.laurent(), eval_grid(m, u.laurent())))
    worst = std::max(worst, op_norm(v.adjoint() * v - CMat::Identity(v.rows(), v.cols())));
  return worst;
}

}  // namespace detail

struct RieszSzego {
  ModelElement u;
  OuterFactor h;
  double unitarity = 0.0;      ///< ||u* u - 1||_inf
  double recomposition = 0.0;  ///< ||f - u h||_2
};

/// f = u h with u unitary and h outer (QR with positive diagonal R in the
/// Triangular model).
inline RieszSzego riesz_szego(const SubdiagonalModel& m, const ModelElement& f, double tol = 1e-9,
                              const FactorOptions& opt = {}) {
  require_member(m, f, "riesz_szego");
  RieszSzego out;
  out.h = outer_factor_psd(m, f.adjoint() * f, opt);
  out.u = detail::right_divide(m, f, out.h.h);
  out.unitarity = detail::unitarity_defect(m, out.u);
  out.recomposition = l2_norm(m, f - out.u * out.h.h);
  if (out.unitarity > tol)
    fail(ErrorKind::UnitarityFailure, "riesz_szego: ||u*u - 1|| = " + std::to_string(out.unitarity));
  return out;
}

// ---------------------------------------------------------------------------

/// Realizes g / tau(g) = f_R u f_L with strongly outer f_L, f_R and a partial
/// isometry u with initial and final projection s_phi = s(Phi(g)).
struct FactorizationBundle {
  ModelElement f_L;
  ModelElement f_R;
  ModelElement u;
  CMat s_phi;             ///< support projection of Phi(g), as a block in D
  Eigen::Index s_rank = 0;
  double scale = 1.0;     ///< tau(g); factors realize g / scale
  double delta_phi = 0.0; ///< Delta_Phi(g / scale)

  double recomposition = 0.0;  ///< ||g - f_R u f_L||_2
  double left_modulus = 0.0;   ///< || |f_L|^2 - (g + s^perp) ||_2
  double right_modulus = 0.0;  ///< || |f_R^*|^2 - (g + s^perp) ||_2
  double initial_proj = 0.0;   ///< ||u* u - s||_2
  double final_proj = 0.0;     ///< ||u u* - s||_2
  double outer_gap_L = 0.0;    ///< |Delta(f_L) - Delta(Phi(f_L))|
  double outer_gap_R = 0.0;
  double det_f_L = 0.0;
  double det_f_R = 0.0;

  double max_residual() const {
    return std::max({recomposition, left_modulus, right_modulus, initial_proj, final_proj});
  }
};

inline FactorizationBundle hs1_factorize(const SubdiagonalModel& m, const ModelElement& g_in, double tol = 1e-9,
                                         const FactorOptions& opt_in = {}) {
  ModelElement g = detail::hermitian_element(m, g_in, "hs1_factorize");
  if (m.triangular_kind()) psd_spectrum(g.matrix(), "hs1_factorize");
  FactorizationBundle b;
  b.scale = trace(m, g).real();
  if (!(b.scale > 0.0)) fail(ErrorKind::DeltaPhiZero, "hs1_factorize: tau(g) = 0");
  g = Complex(1.0 / b.scale) * g;

  FactorOptions opt = opt_in;
  opt.tol = std::min(opt.tol, 1e-12);

  const CMat phig = phi_block(m, g);
  b.s_phi = support_proj(phig, opt.zero_tol);
  b.s_rank = projection_rank(b.s_phi);
  if (b.s_rank == 0) fail(ErrorKind::DeltaPhiZero, "hs1_factorize: Phi(g) = 0");
  const Compression comp = compress(m, b.s_phi);
  const SubdiagonalModel& cm = comp.model;
  const ModelElement gc = comp.restrict_to(g);
  b.delta_phi = det(cm, gc, opt.zero_tol);
  if (!(b.delta_phi > opt.zero_tol))
    fail(ErrorKind::DeltaPhiZero, "hs1_factorize: Delta_Phi(g) = " + std::to_string(b.delta_phi));

  const ModelElement hL = outer_factor_psd(cm, gc, opt).h;
  const ModelElement hR = flip(cm, outer_factor_psd(cm, flip(cm, gc), opt).h);

  // u = v_R v_L = h_R^{-1} g h_L^{-1}
  ModelElement uc;
  if (cm.triangular_kind()) {
    const CMat left = hR.matrix().triangularView<Eigen::Upper>().solve(gc.matrix());
    uc = CMat(hL.matrix().triangularView<Eigen::Upper>().solve<Eigen::OnTheRight>(left));
  } else {
    uc = detail::synthesize(cm, {&hR.laurent(), &gc.laurent(), &hL.laurent()}, [](const std::vector<CMat>& v) {
      const CMat left = v[0].partialPivLu().solve(v[1]);
      return CMat(v[2].transpose().partialPivLu().solve(left.transpose()).transpose());
    });
  }

  const CMat s_perp = CMat::Identity(m.block(), m.block()) - b.s_phi;
  const ModelElement sp = constant(m, s_perp);
  const ModelElement s = constant(m, b.s_phi);
  b.u = comp.embed(uc);
  b.f_L = comp.embed(hL) + sp;
  b.f_R = comp.embed(hR) + sp;

  const ModelElement target = g + sp;
  b.recomposition = l2_norm(m, g - b.f_R * b.u * b.f_L);
  b.left_modulus = l2_norm(m, b.f_L.adjoint() * b.f_L - target);
  b.right_modulus = l2_norm(m, b.f_R * b.f_R.adjoint() - target);
  b.initial_proj = l2_norm(m, b.u.adjoint() * b.u - s);
  b.final_proj = l2_norm(m, b.u * b.u.adjoint() - s);
  b.det_f_L = det(m, b.f_L, opt.zero_tol);
  b.det_f_R = det(m, b.f_R, opt.zero_tol);
  b.outer_gap_L = std::abs(b.det_f_L - det(m, phi(m, b.f_L), opt.zero_tol));
  b.outer_gap_R = std::abs(b.det_f_R - det(m, phi(m, b.f_R), opt.zero_tol));

  if (b.recomposition > tol) fail(ErrorKind::ResidualExceeded, "hs1_factorize: g = f_R u f_L residual " + std::to_string(b.recomposition));
  if (b.left_modulus > tol) fail(ErrorKind::ResidualExceeded, "hs1_factorize: |f_L|^2 residual " + std::to_string(b.left_modulus));
  if (b.right_modulus > tol) fail(ErrorKind::ResidualExceeded, "hs1_factorize: |f_R*|^2 residual " + std::to_string(b.right_modulus));
  if (b.initial_proj > tol || b.final_proj > tol)
    fail(ErrorKind::ResidualExceeded, "hs1_factorize: u is not a partial isometry onto s_phi");
  if (!(b.det_f_L > 0.0) || !(b.det_f_R > 0.0) || b.outer_gap_L > 1e-6 * std::max(1.0, b.det_f_L) ||
      b.outer_gap_R > 1e-6 * std::max(1.0, b.det_f_R))
    fail(ErrorKind::ResidualExceeded, "hs1_factorize: factors fail the strong outerness test");
  return b;
}

// ---------------------------------------------------------------------------

struct Toep1Factorization {
  ModelElement u;      ///< unitary
  ModelElement k;      ///< invertible in A with |k| = |a|
  ModelElement k_inv;  ///< inverse of k, in A
  double unitarity = 0.0;
  double recomposition = 0.0;      ///< ||a - u k||_2
  double inverse_residual = 0.0;   ///< ||k k^{-1} - 1||_2
  double inverse_coanalytic = 0.0; ///< energy of k^{-1} at negative degrees (Fourier)
  double k_lower_bound = 0.0;      ///< min |R_ii| (Triangular) / min sigma_min(k(theta)) (Fourier)
};

/// a = u k with k in A^{-1} and u unitary; requires |a| strictly positive.
inline Toep1Factorization toep1_factorize(const SubdiagonalModel& m, const ModelElement& a, double tol = 1e-9,
                                          const FactorOptions& opt = {}) {
  require_member(m, a, "toep1_factorize");
  Toep1Factorization out;
  const double top = sup_norm(m, a);
  double low;
  if (m.triangular_kind()) {
    low = sigma_min(a.matrix());
  } else {
    low = std::numeric_limits<double>::infinity();
    for (const CMat& v : sample(a.laurent(), 4 * eval_grid(m, a.laurent()))) low = std::min(low, sigma_min(v));
  }
  if (!(top > 0.0) || low < opt.eps_pos_rel * top)
    fail(ErrorKind::NotStrictlyPositive, "toep1_factorize: |a| is not strictly positive (min singular value " +
                                             std::to_string(low) + ")");
  FactorOptions inner_opt = opt;
  inner_opt.tol = std::min(opt.tol, 1e-12);
  out.k = outer_factor_psd(m, a.adjoint() * a, inner_opt).h;
  if (m.triangular_kind()) {
    const CMat& R = out.k.matrix();
    out.k_lower_bound = R.diagonal().cwiseAbs().minCoeff();
    if (out.k_lower_bound < opt.eps_pos_rel * top)
      fail(ErrorKind::NotStrictlyPositive, "toep1_factorize: k is not invertible in A");
    out.k_inv = CMat(R.triangularView<Eigen::Upper>().solve(CMat::Identity(m.n, m.n)));
  } else {
    out.k_lower_bound = std::numeric_limits<double>::infinity();
    for (const CMat& v : sample(out.k.laurent(), 4 * eval_grid(m, out.k.laurent())))
      out.k_lower_bound = std::min(out.k_lower_bound, sigma_min(v));
    if (out.k_lower_bound < opt.eps_pos_rel * top)
      fail(ErrorKind::NotStrictlyPositive, "toep1_factorize: k is not bounded below on the grid");
    const Laurent inv = detail::synthesize(m, {&out.k.laurent()}, [](const std::vector<CMat>& v) {
      return CMat(v[0].inverse());
    });
    double neg = 0.0;
    for (const auto& [kk, c] : inv.coeffs())
      if (kk < 0) neg += c.squaredNorm();
    out.inverse_coanalytic = std::sqrt(neg / m.d);
    if (out.inverse_coanalytic > tol)
      fail(ErrorKind::NotStrictlyPositive, "toep1_factorize: k^{-1} is not analytic (truncation residual " +
                                               std::to_string(out.inverse_coanalytic) + ")");
    out.k_inv = inv.band(0, inv.max_degree());
  }
  out.u = detail::right_divide(m, a, out.k);
  out.unitarity = detail::unitarity_defect(m, out.u);
  out.recomposition = l2_norm(m, a - out.u * out.k);
  out.inverse_residual = l2_norm(m, out.k * out.k_inv - identity(m));
  if (out.unitarity > tol)
    fail(ErrorKind::UnitarityFailure, "toep1_factorize: ||u*u - 1|| = " + std::to_string(out.unitarity));
  return out;
}

}  // namespace nchs
