#pragma once
// JSON encoding of complex matrices, model elements, grid weights and reports,
// plus the git-style content hash echoed by every report.

#include <openssl/evp.h>

#include <fstream>
#include <iomanip>
#include <sstream>

#include "json.hpp"
#include "nchs/classical.hpp"
#include "nchs/toeplitz.hpp"

namespace nchs {

using Json = nlohmann::ordered_json;

// Complex numbers are [re, im]; matrices are arrays of rows. Real scalars and
// real rows are accepted on input.

inline Json to_json(Complex z) { return Json::array({z.real(), z.imag()}); }

inline Complex complex_from_json(const Json& j) {
  if (j.is_number()) return {j.get<double>(), 0.0};
  if (j.is_array() && j.size() == 2 && j[0].is_number() && j[1].is_number())
    return {j[0].get<double>(), j[1].get<double>()};
  fail(ErrorKind::ParseError, "expected a number or [re, im], got " + j.dump());
}

inline Json to_json(const CMat& a) {
  Json rows = Json::array();
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    Json row = Json::array();
    for (Eigen::Index j = 0; j < a.cols(); ++j) row.push_back(to_json(a(i, j)));
    rows.push_back(std::move(row));
  }
  return rows;
}

inline CMat matrix_from_json(const Json& j) {
  if (!j.is_array() || j.empty() || !j[0].is_array()) fail(ErrorKind::ParseError, "expected a matrix (array of rows)");
  const Eigen::Index r = static_cast<Eigen::Index>(j.size()), c = static_cast<Eigen::Index>(j[0].size());
  CMat a(r, c);
  for (Eigen::Index i = 0; i < r; ++i) {
    if (!j[i].is_array() || static_cast<Eigen::Index>(j[i].size()) != c) fail(ErrorKind::ParseError, "ragged matrix rows");
    for (Eigen::Index k = 0; k < c; ++k) a(i, k) = complex_from_json(j[i][k]);
  }
  return a;
}

inline Json to_json(const Laurent& x) {
  Json coeffs = Json::object();
  for (const auto& [k, c] : x.coeffs()) coeffs[std::to_string(k)] = to_json(c);
  return Json{{"d", x.dim()}, {"coeffs", std::move(coeffs)}};
}

/// {"d": int, "coeffs": {"k": matrix}}; keys are signed integers.
inline Laurent laurent_from_json(const Json& j) {
  if (!j.is_object() || !j.contains("d") || !j.contains("coeffs") || !j.at("coeffs").is_object())
    fail(ErrorKind::ParseError, "Fourier element needs \"d\" and a \"coeffs\" object");
  if (!j.at("d").is_number_integer() || j.at("d").get<long long>() < 1) fail(ErrorKind::ParseError, "\"d\" must be a positive integer");
  Laurent x(j.at("d").get<Eigen::Index>());
  for (const auto& [key, val] : j.at("coeffs").items()) {
    int k = 0;
    std::size_t used = 0;
    try {
      k = std::stoi(key, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != key.size()) fail(ErrorKind::ParseError, "coefficient key '" + key + "' is not an integer");
    const CMat c = matrix_from_json(val);
    if (c.rows() != x.dim() || c.cols() != x.dim()) fail(ErrorKind::ParseError, "coefficient block " + key + " has the wrong size");
    x.set(k, c);
  }
  return x;
}

inline Json to_json(const ModelElement& x) { return x.is_matrix() ? to_json(x.matrix()) : to_json(x.laurent()); }

inline ModelElement element_from_json(const SubdiagonalModel& m, const Json& j) {
  ModelElement x;
  if (m.triangular_kind()) {
    if (j.is_object() && !j.contains("matrix")) fail(ErrorKind::ParseError, "Triangular element must be a nested array");
    x = matrix_from_json(j.is_object() ? j.at("matrix") : j);
  } else {
    x = laurent_from_json(j);
  }
  require_member(m, x, "input element");
  return x;
}

inline Json to_json(const GridWeight& w) {
  Json s = Json::array();
  for (const CMat& v : w.samples) {
    if (w.scalar()) s.push_back(v(0, 0).real());
    else s.push_back(to_json(v));
  }
  return Json{{"M", w.M}, {"offset", w.offset}, {"samples", std::move(s)}};
}

inline GridWeight grid_weight_from_json(const Json& j) {
  GridWeight w;
  w.M = j.at("M").get<int>();
  w.offset = j.value("offset", 0.0);
  for (const Json& s : j.at("samples")) {
    if (s.is_number()) w.samples.push_back(CMat::Constant(1, 1, s.get<double>()));
    else w.samples.push_back(matrix_from_json(s));
  }
  w.validate();
  return w;
}

inline Json to_json(const std::vector<double>& v) { return Json(v); }

// ---------------------------------------------------------------------------

/// Hash of "blob <size>\0<content>", as git computes it.
inline std::string git_blob_hash(const std::string& content) {
  const std::string head = "blob " + std::to_string(content.size()) + std::string(1, '\0');
  const std::string blob = head + content;
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_Digest(blob.data(), blob.size(), md, &len, EVP_sha1(), nullptr);
  std::ostringstream os;
  for (unsigned int i = 0; i < len; ++i) os << std::hex << std::setw(2) << std::setfill('0') << static_cast<int>(md[i]);
  return os.str();
}

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorKind::ParseError, "cannot open " + path);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

inline Json parse_json(const std::string& text, const std::string& origin) {
  try {
    return Json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    fail(ErrorKind::ParseError, origin + ": " + e.what());
  }
}

inline void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorKind::InvalidArgument, "cannot write " + path);
  out << content;
}

/// Stable text form: two-space indentation and a trailing newline.
inline std::string dump(const Json& j) { return j.dump(2) + "\n"; }

// ---------------------------------------------------------------------------
// Reports

inline Json to_json(const OuterFactor& f) {
  return Json{{"method", f.method},       {"residual", f.residual},       {"delta_gap", f.delta_gap},
              {"tail_energy", f.tail_energy}, {"iterations", f.iterations}, {"h", to_json(f.h)}};
}

inline Json to_json(const FactorizationBundle& b) {
  return Json{{"scale", b.scale},
              {"delta_phi", b.delta_phi},
              {"s_rank", b.s_rank},
              {"s_phi", to_json(b.s_phi)},
              {"residuals",
               {{"recomposition", b.recomposition},
                {"left_modulus", b.left_modulus},
                {"right_modulus", b.right_modulus},
                {"initial_projection", b.initial_proj},
                {"final_projection", b.final_proj},
                {"outer_gap_L", b.outer_gap_L},
                {"outer_gap_R", b.outer_gap_R}}},
              {"det_f_L", b.det_f_L},
              {"det_f_R", b.det_f_R},
              {"f_L", to_json(b.f_L)},
              {"f_R", to_json(b.f_R)},
              {"u", to_json(b.u)}};
}

inline Json to_json(const AngleReport& r) {
  return Json{{"method", to_string(r.method)}, {"cutoff", r.cutoff}, {"rho", r.rho},
              {"margin", r.margin},            {"gram_rank", r.gram_rank}, {"gram_rank_star", r.gram_rank_star}};
}

inline Json to_json(const InvertibilityResult& r) {
  return Json{{"verdict", to_string(r.verdict)}, {"cutoffs", r.cutoffs}, {"sigma_min", r.sigma_min}};
}

inline Json to_json(const InvToepStructure& s) {
  return Json{{"cutoff", s.cutoff},
              {"residuals",
               {{"solve_g0", s.solve_residual_0},
                {"solve_g1", s.solve_residual_1},
                {"phi", s.phi_residual},
                {"unitary", s.unitary_residual},
                {"modulus", s.modulus_residual},
                {"outer_gap_g0", s.outer_gap_0},
                {"outer_gap_g1", s.outer_gap_1}}},
              {"det_g0", s.det_g0},
              {"det_g1", s.det_g1},
              {"g0", to_json(s.g0)},
              {"g1", to_json(s.g1)},
              {"d", to_json(s.d)}};
}

inline Json to_json(const Certificate& c) {
  return Json{{"alpha", c.alpha}, {"k_norm", c.k_norm}, {"lambda_min", c.lambda_min},
              {"source", to_string(c.source)}, {"k", to_json(c.k)}};
}

inline Json to_json(const EquivalenceReport& r) {
  Json j{{"cutoffs", r.cutoffs},
         {"sigma_min", r.sigma_min},
         {"invertibility", to_string(r.invertibility)},
         {"dist", r.dist},
         {"hankel_restricted", r.hankel_restricted},
         {"hankel_full", r.full_hankel_norm},
         {"best_lambda", r.best_lambda},
         {"verdicts", {{"invertible", r.verdict_invertible}, {"hankel", r.verdict_hankel}, {"certificate", r.verdict_certificate}}},
         {"margins", {{"invertible", r.margin_invertible}, {"hankel", r.margin_hankel}, {"certificate", r.margin_certificate}}},
         {"agree", r.agree},
         {"flagged_ambiguous", r.flagged_ambiguous},
         {"norm_one_checked", r.norm_one_checked},
         {"norm_one_ok", r.norm_one_ok}};
  if (r.certificate) j["certificate"] = to_json(*r.certificate);
  else j["infeasible_gap"] = r.infeasible_gap;
  if (!r.invtoep_error.empty()) j["invtoep_error"] = r.invtoep_error;
  return j;
}

inline Json to_json(const ArcConstant& a) {
  return Json{{"value", a.value}, {"arc_start", a.start}, {"arc_length", a.length}, {"diagnostic", "dyadic-length windows"}};
}

inline Json to_json(const HsCertificate& c) {
  return Json{{"rho_hat", c.rho_hat},   {"cutoff", c.cutoff},         {"eps", c.eps},
              {"angle_excess", c.angle_excess}, {"positive", c.positive}, {"approx_achieved", c.approx_achieved},
              {"k0", to_json(c.k0)}};
}

inline Json to_json(const PhiSuppResult& r) {
  return Json{{"holds", r.holds}, {"rank_phi", r.rank_phi}, {"rank_g", r.rank_g}, {"defect", r.defect}};
}

}  // namespace nchs
