#pragma once
// Batch verification suites. Each suite generates its instances from the run
// seed, checks them on a worker pool, and merges the results in input order.

#include <atomic>
#include <chrono>
#include <filesystem>
#include <thread>

#include "nchs/generators.hpp"

namespace nchs {

struct VerifyConfig {
  std::uint64_t seed = 42;
  double tol = 1e-6;
  int jobs = 1;
  std::vector<std::string> suites;  ///< empty selects all

  Json to_json() const {
    return Json{{"seed", seed}, {"tol", tol}, {"jobs", jobs}, {"suites", suites}};
  }
};

struct SuiteResult {
  std::string name;
  std::string title;
  bool passed = false;
  int instances = 0;
  int failures = 0;
  Json metrics = Json::object();
  std::vector<std::string> notes;  ///< first few failure descriptions
  std::vector<double> margins;     ///< per-instance minimum margin (equivalence)
  double seconds = 0.0;            ///< wall time; kept out of the summary
  double budget_seconds = 0.0;

  SuiteResult() = default;
  SuiteResult(std::string n, std::string t) : name(std::move(n)), title(std::move(t)) {}

  Json to_json() const {
    Json j{{"name", name}, {"title", title}, {"passed", passed}, {"instances", instances}, {"failures", failures},
           {"metrics", metrics}};
    if (!notes.empty()) j["notes"] = notes;
    return j;
  }
};

/// Runs fn(0..n-1) on `jobs` threads; results come back in index order.
template <class T, class F>
std::vector<T> parallel_map(int n, int jobs, F fn) {
  std::vector<T> out(static_cast<std::size_t>(n));
  std::atomic<int> next{0};
  auto worker = [&] {
    for (int i = next++; i < n; i = next++) out[static_cast<std::size_t>(i)] = fn(i);
  };
  const int k = std::max(1, std::min(jobs, n));
  std::vector<std::thread> pool;
  for (int t = 1; t < k; ++t) pool.emplace_back(worker);
  worker();
  for (auto& th : pool) th.join();
  return out;
}

namespace detail {

/// Outcome of one instance: ok flag, a failure note, and named values.
struct Check {
  bool ok = true;
  std::string note;
  std::map<std::string, double> values;

  void require(bool cond, const std::string& what) {
    if (!cond && ok) ok = false, note = what;
    else if (!cond) ok = false;
  }
};

inline void collect(SuiteResult& r, const std::vector<Check>& checks) {
  r.instances = static_cast<int>(checks.size());
  std::map<std::string, double> worst;
  for (std::size_t i = 0; i < checks.size(); ++i) {
    const Check& c = checks[i];
    if (!c.ok) {
      ++r.failures;
      if (r.notes.size() < 5) r.notes.push_back("instance " + std::to_string(i) + ": " + c.note);
    }
    for (const auto& [k, v] : c.values) {
      auto it = worst.find(k);
      if (it == worst.end() || v > it->second) worst[k] = v;
    }
  }
  for (const auto& [k, v] : worst) r.metrics["max_" + k] = v;
  r.passed = r.failures == 0;
}

inline std::string fmt(double x) {
  std::ostringstream os;
  os << std::setprecision(3) << x;
  return os.str();
}

inline CMat lower_shift(Eigen::Index n) {
  CMat s = CMat::Zero(n, n);
  for (Eigen::Index i = 0; i + 1 < n; ++i) s(i + 1, i) = 1.0;
  return s;
}

/// The 200 unitaries of the equivalence suite: a unitary_scaled sweep and
/// planted invertible instances, Triangular n in 2..6.
struct EquivalenceInstance {
  SubdiagonalModel m;
  CMat u;
  bool planted = false;
  PlantedInvToep truth;
};

inline EquivalenceInstance equivalence_instance(std::uint64_t seed, int i) {
  EquivalenceInstance e;
  const int n = 2 + i % 5;
  e.m = SubdiagonalModel::triangular(n);
  if (i < 100) {
    Rng rng = stream(seed, 601, static_cast<std::uint64_t>(i));
    const double s = 3.0 * i / 99.0;
    e.u = unitary_scaled(rng, e.m, s).matrix();
  } else {
    Rng rng = stream(seed, 602, static_cast<std::uint64_t>(i));
    e.truth = invtoep_planted(rng, e.m, 1.0);
    e.u = e.truth.u;
    e.planted = true;
  }
  return e;
}

}  // namespace detail

// ---------------------------------------------------------------------------

inline SuiteResult suite_determinant(const VerifyConfig& cfg) {
  SuiteResult r{"determinant", "determinant laws"};
  r.budget_seconds = 5;
  const auto checks = parallel_map<detail::Check>(500, cfg.jobs, [&](int i) {
    Rng rng = stream(cfg.seed, 101, static_cast<std::uint64_t>(i));
    const int n = 1 + i % 6;
    const CMat a = gaussian(rng, n, n), b = gaussian(rng, n, n);
    detail::Check c;
    const double da = fk_det(a), db = fk_det(b), dab = fk_det(a * b);
    const double rel = std::abs(dab - da * db) / (da * db);
    const double du = std::abs(fk_det(random_unitary(rng, n)) - 1.0);
    c.values["multiplicativity_rel"] = rel;
    c.values["unitary_defect"] = du;
    c.require(rel <= 1e-8, "|D(ab) - D(a)D(b)| relative " + detail::fmt(rel));
    c.require(du <= 1e-10, "|D(unitary) - 1| = " + detail::fmt(du));
    return c;
  });
  detail::collect(r, checks);
  return r;
}

inline SuiteResult suite_jensen(const VerifyConfig& cfg) {
  SuiteResult r{"jensen", "Jensen inequality"};
  r.budget_seconds = 10;
  const auto checks = parallel_map<detail::Check>(500, cfg.jobs, [&](int i) {
    Rng rng = stream(cfg.seed, 201, static_cast<std::uint64_t>(i));
    const SubdiagonalModel m = i % 2 ? SubdiagonalModel::fourier(1 + (i / 2) % 2, 1 + (i / 4) % 6)
                                     : SubdiagonalModel::triangular(1 + (i / 2) % 6);
    const ModelElement h = random_analytic(rng, m);
    detail::Check c;
    const double dh = det(m, h), dphi = det(m, phi(m, h));
    c.values["excess"] = dphi - dh;
    c.require(dphi <= dh + 1e-8, "D(Phi(h)) = " + detail::fmt(dphi) + " > D(h) = " + detail::fmt(dh));
    return c;
  });
  detail::collect(r, checks);
  return r;
}

/// Minimizer of tau(g x x*) over x in A with Delta(Phi(x)) >= 1 (see the
/// convention note in the README): x = R^{-1} T with g = R* R.
inline SuiteResult suite_szego(const VerifyConfig& cfg) {
  SuiteResult r{"szego", "Szego formula"};
  r.budget_seconds = 30;
  const auto checks = parallel_map<detail::Check>(100, cfg.jobs, [&](int i) {
    Rng rng = stream(cfg.seed, 301, static_cast<std::uint64_t>(i));
    const int n = 1 + i % 5;
    const CMat g = random_pd(rng, n, 0.05);
    const CMat R = CMat(Eigen::LLT<CMat>(g).matrixU());
    const double dg = fk_det(g);
    CVec t(n);
    for (int k = 0; k < n; ++k) t(k) = std::polar(std::sqrt(dg), rng.uniform(0.0, 2.0 * std::numbers::pi));
    const CMat x = R.triangularView<Eigen::Upper>().solve(CMat(t.asDiagonal()));
    auto value = [&g](const CMat& y) { return trace_state(g * y * y.adjoint()).real(); };
    detail::Check c;
    const double opt = value(x);
    const double rel = std::abs(opt - dg) / dg;
    const double dd = std::abs(fk_det(CMat(x.diagonal().asDiagonal())) - 1.0);
    c.values["construction_rel"] = rel;
    c.values["delta_d_defect"] = dd;
    c.require(rel <= 1e-8, "tau(g|x|^2) differs from Delta(g) by " + detail::fmt(rel));
    c.require(dd <= 1e-10, "Delta(d) = 1 fails by " + detail::fmt(dd));
    double beat = 0.0;
    for (int s = 0; s < 1000; ++s) {
      CMat y;
      if (s % 2) {
        y = gaussian(rng, n, n);
        y.triangularView<Eigen::StrictlyLower>().setZero();
      } else {
        CMat p = gaussian(rng, n, n) * std::pow(10.0, -rng.uniform(1.0, 6.0));
        p.triangularView<Eigen::StrictlyLower>().setZero();
        y = x + p;
      }
      const double dy = fk_det(CMat(y.diagonal().asDiagonal()));
      if (!(dy > 0.0)) continue;
      y /= dy;  // Delta(Phi(y)) = 1
      beat = std::max(beat, (opt - value(y)) / opt);
    }
    c.values["sample_beats_rel"] = beat;
    c.require(beat <= 1e-8, "a feasible sample beats the construction by " + detail::fmt(beat));
    return c;
  });
  detail::collect(r, checks);
  return r;
}

inline SuiteResult suite_hs1(const VerifyConfig& cfg) {
  SuiteResult r{"hs1", "HS1 round trip"};
  r.budget_seconds = 60;
  const auto checks = parallel_map<detail::Check>(100, cfg.jobs, [&](int i) {
    Rng rng = stream(cfg.seed, 401, static_cast<std::uint64_t>(i));
    const bool tri = i % 2 == 0;
    const SubdiagonalModel m = tri ? SubdiagonalModel::triangular(1 + (i / 2) % 6)
                                   : SubdiagonalModel::fourier(1 + (i / 2) % 2, 1 + (i / 4) % 8);
    const double tol = tri ? 1e-9 : 1e-6;
    detail::Check c;
    try {
      const FactorizationBundle b = hs1_factorize(m, random_pd_element(rng, m, 0.1), tol);
      const std::string tag = tri ? "tri_" : "fourier_";
      c.values[tag + "recomposition"] = b.recomposition;
      c.values[tag + "left_modulus"] = b.left_modulus;
      c.values["initial_projection"] = b.initial_proj;
      c.require(b.recomposition <= tol, "||g - f_R u f_L|| = " + detail::fmt(b.recomposition));
      c.require(b.left_modulus <= tol, "|| |f_L|^2 - (g + s_perp) || = " + detail::fmt(b.left_modulus));
      c.require(b.initial_proj <= 1e-9, "||u*u - s_phi|| = " + detail::fmt(b.initial_proj));
    } catch (const Error& e) {
      c.require(false, e.what());
    }
    return c;
  });
  detail::collect(r, checks);
  return r;
}

inline SuiteResult suite_distance(const VerifyConfig& cfg) {
  SuiteResult r{"distance", "three-way distance agreement"};
  r.budget_seconds = 20;
  const auto checks = parallel_map<detail::Check>(100, cfg.jobs, [&](int i) {
    Rng rng = stream(cfg.seed, 501, static_cast<std::uint64_t>(i));
    const int n = 1 + i % 8;
    const auto m = SubdiagonalModel::triangular(n);
    const CMat x = gaussian(rng, n, n);
    const double arv = arveson_distance(x), hank = hankel_restricted_norm(m, x);
    const double best = best_analytic_approx(m, x).achieved;
    const double spread = std::max({std::abs(arv - hank), std::abs(arv - best), std::abs(hank - best)});
    detail::Check c;
    c.values["pairwise_gap"] = spread;
    c.require(spread <= 1e-5, "Arveson " + detail::fmt(arv) + ", Hankel " + detail::fmt(hank) + ", best " + detail::fmt(best));
    return c;
  });
  detail::collect(r, checks);
  return r;
}

inline SuiteResult suite_equivalence(const VerifyConfig& cfg) {
  SuiteResult r{"equivalence", "invertibility / Hankel / certificate equivalence"};
  r.budget_seconds = 120;
  struct Out {
    detail::Check c;
    bool flagged = false;
    bool agree = false;
    double margin = 0.0;
  };
  const auto outs = parallel_map<Out>(200, cfg.jobs, [&](int i) {
    const auto e = detail::equivalence_instance(cfg.seed, i);
    Out o;
    try {
      const EquivalenceReport rep = equivalence_check(e.m, e.u, {}, cfg.tol);
      o.flagged = rep.flagged_ambiguous;
      o.agree = rep.agree;
      o.margin = std::min({rep.margin_invertible, rep.margin_hankel, rep.margin_certificate});
      if (!rep.flagged_ambiguous)
        o.c.require(rep.agree, "verdicts disagree (sigma_min " + detail::fmt(rep.sigma_min.back()) + ", Hankel " +
                                   detail::fmt(rep.hankel_restricted) + ", alpha " + detail::fmt(rep.best_lambda) + ")");
    } catch (const Error& err) {
      o.c.require(false, err.what());
    }
    return o;
  });
  std::vector<detail::Check> checks;
  int flagged = 0, positive = 0;
  for (const Out& o : outs) {
    checks.push_back(o.c);
    flagged += o.flagged;
    positive += o.agree && !o.flagged;
    r.margins.push_back(o.margin);
  }
  detail::collect(r, checks);
  const double rate = flagged / 200.0;
  r.metrics["flagged_ambiguous"] = flagged;
  r.metrics["flagged_rate"] = rate;
  r.metrics["agreeing_unflagged"] = positive;
  if (rate > 0.05) {
    r.passed = false;
    r.notes.push_back("flagged-ambiguous rate " + detail::fmt(rate) + " exceeds 5%");
  }
  return r;
}

inline SuiteResult suite_invtoep(const VerifyConfig& cfg) {
  SuiteResult r{"invtoep", "invtoep structure"};
  r.budget_seconds = 30;
  const auto checks = parallel_map<detail::Check>(100, cfg.jobs, [&](int i) {
    const auto e = detail::equivalence_instance(cfg.seed, 100 + i);
    detail::Check c;
    try {
      const InvToepStructure s = extract_invtoep(e.m, e.u, 1e-8, {}, cfg.tol);
      c.values["identity_residual"] = s.max_identity_residual();
      c.values["outer_gap"] = std::max(s.outer_gap_0, s.outer_gap_1);
      c.values["planted_g0_error"] = (s.g0.matrix() - e.truth.g0).norm();
      c.require(s.max_identity_residual() <= 1e-8, "identity residual " + detail::fmt(s.max_identity_residual()));
      c.require(std::max(s.outer_gap_0, s.outer_gap_1) <= 1e-6, "outerness gap above 1e-6");
      c.require((s.g0.matrix() - e.truth.g0).norm() <= 1e-7, "planted g0 not recovered");
    } catch (const Error& err) {
      c.require(false, err.what());
    }
    return c;
  });
  detail::collect(r, checks);
  return r;
}

inline SuiteResult suite_hankel_norm(const VerifyConfig& cfg) {
  SuiteResult r{"hankel_norm", "full Hankel norm one"};
  r.budget_seconds = 10;
  const auto checks = parallel_map<detail::Check>(100, cfg.jobs, [&](int i) {
    const auto e = detail::equivalence_instance(cfg.seed, 100 + i);
    detail::Check c;
    const bool inv = invertibility_test(e.m, e.u, {}, cfg.tol).verdict == InvertibilityVerdict::Invertible;
    const double full = hankel_norm(e.m, e.u), restricted = hankel_norm(e.m, e.u, 0, true);
    c.values["full_norm_defect"] = std::abs(full - 1.0);
    c.values["restricted_norm"] = restricted;
    c.require(inv, "planted T_u reported not invertible");
    c.require(std::abs(full - 1.0) <= 1e-6, "||H_u|| = " + detail::fmt(full));
    c.require(!inv || restricted < 1.0 - cfg.tol, "restricted norm " + detail::fmt(restricted) + " not below 1 - tol");
    return c;
  });
  detail::collect(r, checks);
  return r;
}

inline SuiteResult suite_certificate(const VerifyConfig& cfg) {
  SuiteResult r{"certificate", "certificate round trips"};
  r.budget_seconds = 20;
  const auto checks = parallel_map<detail::Check>(100, cfg.jobs, [&](int i) {
    Rng rng = stream(cfg.seed, 901, static_cast<std::uint64_t>(i));
    const auto m = SubdiagonalModel::triangular(2 + i % 5);
    double s = 0.1 + 1.9 * rng.uniform();
    CMat u = unitary_scaled(rng, m, s).matrix();
    while (arveson_distance(u) > 0.9) u = unitary_scaled(rng, m, s *= 0.7).matrix();
    detail::Check c;
    try {
      const double dist = arveson_distance(u);
      const Certificate cert = approximant_to_certificate(m, u, best_analytic_approx(m, u).f);
      const ApproximantFromCertificate back = certificate_to_approximant(m, u, cert);
      c.values["dist"] = dist;
      c.values["alpha_shortfall"] = (1.0 - dist) - cert.alpha;
      c.values["approx_over_bound"] = back.achieved - back.bound;
      c.require(cert.alpha >= (1.0 - dist) - 1e-6, "alpha " + detail::fmt(cert.alpha) + " below 1 - dist");
      c.require(back.achieved <= back.bound + 1e-9, "||u - f|| above sqrt(1 - delta)");
      c.require(back.achieved < 1.0, "||u - f|| not below 1");
    } catch (const Error& err) {
      c.require(false, err.what());
    }
    return c;
  });
  detail::collect(r, checks);
  return r;
}

inline SuiteResult suite_circle(const VerifyConfig& cfg) {
  SuiteResult r{"circle", "scalar circle suite"};
  r.budget_seconds = 60;
  const std::vector<double>& alphas = default_alphas();
  CircleThresholds th;
  th.tol = cfg.tol;
  const auto verdicts = parallel_map<CircleVerdicts>(static_cast<int>(alphas.size()), cfg.jobs, [&](int i) {
    const double a = alphas[static_cast<std::size_t>(i)];
    return circle_verdicts([a](double t) { return w_alpha_value(a, t); }, 512, {16, 32, 64}, th);
  });
  std::vector<detail::Check> checks;
  Json rows = Json::array();
  int last_pos = -1, first_neg = static_cast<int>(alphas.size());
  bool monotone = true;
  for (std::size_t i = 0; i < verdicts.size(); ++i) {
    const CircleVerdicts& v = verdicts[i];
    detail::Check c;
    c.require(v.a2_stable == v.rho_positive, "A2 and rho verdicts disagree at alpha " + detail::fmt(alphas[i]));
    c.require(v.hs_positive == v.rho_positive, "HS and rho verdicts disagree at alpha " + detail::fmt(alphas[i]));
    checks.push_back(c);
    if (v.hs_positive) {
      if (first_neg < static_cast<int>(i)) monotone = false;
      last_pos = static_cast<int>(i);
    } else {
      first_neg = std::min(first_neg, static_cast<int>(i));
    }
    rows.push_back(Json{{"alpha", alphas[i]},
                        {"rho", v.rho},
                        {"rho_shrink", v.rho_shrink},
                        {"rho_hat", v.hs.rho_hat},
                        {"rho_hat_fine", v.rho_hat_fine},
                        {"hs_shrink", v.hs_shrink},
                        {"a2", v.a2.coarse},
                        {"a2_fine", v.a2.fine},
                        {"verdicts", {{"hs", v.hs_positive}, {"rho", v.rho_positive}, {"a2", v.a2_stable}}}});
  }
  detail::collect(r, checks);
  r.metrics["alphas"] = rows;
  r.metrics["alpha_star"] = last_pos >= 0 ? alphas[static_cast<std::size_t>(last_pos)] : 0.0;
  r.metrics["alpha_star_star"] = first_neg < static_cast<int>(alphas.size()) ? alphas[static_cast<std::size_t>(first_neg)] : 1.0;
  const bool gap_ok = first_neg - last_pos <= 2;
  if (!monotone || !gap_ok) {
    r.passed = false;
    r.notes.push_back("HS verdict boundary is not monotone with at most one grid value between");
  }
  return r;
}

inline SuiteResult suite_crosscheck(const VerifyConfig&) {
  SuiteResult r{"crosscheck", "Fourier / Triangular cross-checks"};
  r.budget_seconds = 1;
  std::vector<detail::Check> checks;
  {
    detail::Check c;
    const auto m = SubdiagonalModel::fourier(1, 4);
    Laurent zbar(1);
    zbar.set(-1, CMat::Identity(1, 1));
    const InvertibilityResult inv = invertibility_test(m, zbar, {4, 8, 16});
    const CMat T = toeplitz_matrix(m, zbar, 16).matrix;
    const double kernel = (T * h2_coordinates(m, identity(m), 16)).norm();
    const CMat H = hankel_matrix(m, zbar, 16, true).matrix;
    c.values["fourier_kernel_residual"] = kernel;
    c.require(inv.verdict == InvertibilityVerdict::NotInvertible, "T_zbar reported " + std::string(to_string(inv.verdict)));
    c.require(kernel == 0.0, "T_zbar 1 != 0");
    c.require((H.array().abs() > 0).count() == 1 && op_norm(H) == 1.0, "restricted Hankel of zbar is not a single unit entry");
    checks.push_back(c);
  }
  for (int n = 2; n <= 6; ++n) {
    detail::Check c;
    const auto m = SubdiagonalModel::triangular(n);
    const CMat S = detail::lower_shift(n);
    const double kernel = (toeplitz_matrix(m, S).matrix * h2_coordinates(m, identity(m))).norm();
    c.require(invertibility_test(m, S).verdict == InvertibilityVerdict::NotInvertible, "T_S reported invertible");
    c.require(kernel == 0.0, "T_S 1 != 0");
    const CMat H = hankel_matrix(m, S, 0, true).matrix;
    c.require(op_norm(H) == 1.0, "restricted Hankel norm of S is not 1");
    if (n == 2) c.require((H.array().abs() > 0).count() == 1, "restricted Hankel of S is not a single entry");
    checks.push_back(c);
  }
  detail::collect(r, checks);
  return r;
}

// ---------------------------------------------------------------------------

using SuiteFn = SuiteResult (*)(const VerifyConfig&);

inline const std::vector<std::pair<std::string, SuiteFn>>& suite_registry() {
  static const std::vector<std::pair<std::string, SuiteFn>> reg{
      {"determinant", suite_determinant}, {"jensen", suite_jensen},           {"szego", suite_szego},
      {"hs1", suite_hs1},                 {"distance", suite_distance},       {"equivalence", suite_equivalence},
      {"invtoep", suite_invtoep},         {"hankel_norm", suite_hankel_norm},           {"certificate", suite_certificate},
      {"circle", suite_circle},           {"crosscheck", suite_crosscheck}};
  return reg;
}

inline SuiteResult run_suite(const std::string& name, const VerifyConfig& cfg) {
  for (const auto& [n, fn] : suite_registry()) {
    if (n != name) continue;
    const auto t0 = std::chrono::steady_clock::now();
    SuiteResult r = fn(cfg);
    r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return r;
  }
  fail(ErrorKind::InvalidArgument, "unknown suite '" + name + "'");
}

struct VerifyRun {
  std::vector<SuiteResult> suites;
  bool passed = true;
};

/// Margins histogram: counts per decade of the smallest margin.
inline std::string margins_histogram_csv(const std::vector<double>& margins) {
  std::map<int, int> bins;
  for (double m : margins) bins[m > 0.0 ? static_cast<int>(std::floor(std::log10(m))) : -17]++;
  std::ostringstream os;
  os << "log10_lo,log10_hi,count\n";
  for (int b = -17; b <= 0; ++b) os << b << ',' << b + 1 << ',' << (bins.count(b) ? bins[b] : 0) << '\n';
  return os.str();
}

/// Runs the selected suites and, when out_dir is non-empty, writes
/// summary.json, margins_histogram.csv and timings.json there.
inline VerifyRun run_verify(const VerifyConfig& cfg, const std::string& out_dir = {}) {
  VerifyRun run;
  std::vector<std::string> names = cfg.suites;
  if (names.empty())
    for (const auto& [n, fn] : suite_registry()) names.push_back(n);
  std::vector<double> margins;
  for (const std::string& n : names) {
    run.suites.push_back(run_suite(n, cfg));
    run.passed = run.passed && run.suites.back().passed;
    margins.insert(margins.end(), run.suites.back().margins.begin(), run.suites.back().margins.end());
  }
  if (!out_dir.empty()) {
    std::error_code ec;
    std::filesystem::create_directories(out_dir, ec);
    if (ec || !std::filesystem::is_directory(out_dir)) fail(ErrorKind::InvalidArgument, "cannot create output directory " + out_dir);
    Json config = cfg.to_json();
    Json summary{{"config", config}, {"input_hash", git_blob_hash(config.dump())}, {"passed", run.passed}};
    Json suites = Json::array();
    Json timings = Json::object();
    for (const SuiteResult& s : run.suites) {
      suites.push_back(s.to_json());
      timings[s.name] = Json{{"seconds", s.seconds}, {"budget_seconds", s.budget_seconds}};
    }
    summary["suites"] = suites;
    const std::filesystem::path dir(out_dir);
    write_file((dir / "summary.json").string(), dump(summary));
    write_file((dir / "margins_histogram.csv").string(), margins_histogram_csv(margins));
    write_file((dir / "timings.json").string(), dump(timings));
  }
  return run;
}

}  // namespace nchs
