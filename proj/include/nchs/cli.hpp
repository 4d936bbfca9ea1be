#pragma once
// The nchs command-line front end. run() parses argv, processes each --in file
// (on a --jobs worker pool, merged in input order) and returns the exit code.

#include <cstdlib>
#include <iostream>

#include "CLI11.hpp"
#include "nchs/verify.hpp"

namespace nchs::cli {

enum Exit { kOk = 0, kVerifyFailed = 1, kBadInput = 2, kNoConvergence = 3 };

inline int exit_code(ErrorKind k) {
  switch (k) {
    case ErrorKind::NoConvergence:
    case ErrorKind::ResidualExceeded:
    case ErrorKind::UnitarityFailure: return kNoConvergence;
    default: return kBadInput;
  }
}

struct Config {
  std::string command;
  std::string model;
  std::vector<std::string> inputs;
  double tol = 1e-6;
  std::vector<int> cutoffs;
  std::uint64_t seed = 42;
  bool seed_from_env = false;
  int jobs = 1;
  std::string out;
  std::string format = "json";
  // command options
  bool outer = false;       // factor
  bool distance = false;    // angle
  std::string kind;         // gen
  std::string params;       // gen
  std::vector<std::string> suites;  // verify
  double alpha = -1.0;      // classical
  int grid = 512;           // classical

  Json to_json() const {
    Json j{{"command", command}, {"model", model}, {"tol", tol}, {"cutoffs", cutoffs}, {"seed", seed}, {"seed_source", seed_from_env ? "NCHS_SEED" : "--seed"}, {"jobs", jobs}};
    if (command == "factor") j["method"] = outer ? "outer_factor_psd" : "hs1_factorize";
    if (command == "angle") j["mode"] = distance ? "distance" : "angle";
    if (command == "gen") j["kind"] = kind, j["params"] = params;
    if (command == "verify") j["suites"] = suites;
    if (command == "classical") {
      j["format"] = format;
      if (alpha >= 0.0) j["alpha"] = alpha, j["grid"] = grid;
    }
    return j;
  }
};

/// One input file after loading: the JSON payload and, for instance records
/// written by `nchs gen`, the record's model and id.
struct Input {
  std::string stem;
  std::string hash;
  Json doc;
  std::string id;
};

inline Input load_input(const std::string& path) {
  Input in;
  const std::string text = read_file(path);
  in.hash = git_blob_hash(text);
  in.stem = std::filesystem::path(path).stem().string();
  in.doc = parse_json(text, path);
  if (in.doc.is_object() && in.doc.contains("id") && in.doc.at("id").is_string()) in.id = in.doc.at("id").get<std::string>();
  return in;
}

inline SubdiagonalModel resolve_model(const Config& cfg, const Input& in) {
  if (!cfg.model.empty()) return SubdiagonalModel::parse(cfg.model);
  if (in.doc.is_object() && in.doc.contains("model") && in.doc.at("model").is_string())
    return SubdiagonalModel::parse(in.doc.at("model").get<std::string>());
  fail(ErrorKind::InvalidArgument, "no --model given and the input does not name one");
}

/// The element stored under `key` in an instance record, or the whole document
/// when it is a bare element.
inline const Json& element_json(const Input& in, const char* key) {
  if (in.doc.is_object() && in.doc.contains(key)) return in.doc.at(key);
  if (in.doc.is_object() && in.doc.contains("id"))
    fail(ErrorKind::ParseError, "instance record has no \"" + std::string(key) + "\" field");
  return in.doc;
}

inline int cutoff_or_default(const Config& cfg) { return cfg.cutoffs.empty() ? 0 : cfg.cutoffs.front(); }

// ---------------------------------------------------------------------------
// Commands. Each returns the "result" object and sets the exit code.

inline Json cmd_factor(const Config& cfg, const Input& in, int& code) {
  const SubdiagonalModel m = resolve_model(cfg, in);
  const ModelElement g = element_from_json(m, element_json(in, "g"));
  code = kOk;
  if (cfg.outer) {
    FactorOptions opt;
    opt.tol = std::min(opt.tol, cfg.tol);
    return to_json(outer_factor_psd(m, g, opt));
  }
  return to_json(hs1_factorize(m, g, cfg.tol));
}

inline Json cmd_angle(const Config& cfg, const Input& in, int& code) {
  const SubdiagonalModel m = resolve_model(cfg, in);
  code = kOk;
  const bool distance = cfg.distance || (in.doc.is_object() && in.doc.contains("u") && !in.doc.contains("g"));
  const std::vector<int> cutoffs = m.triangular_kind() || cfg.cutoffs.empty() ? std::vector<int>{0} : cfg.cutoffs;
  Json rows = Json::array();
  if (distance) {
    const ModelElement x = element_from_json(m, element_json(in, "u"));
    for (int c : cutoffs) {
      const DistanceReport d = dist_to_algebra_report(m, x, c);
      rows.push_back(Json{{"method", m.triangular_kind() ? "arveson" : "nehari"},
                          {"cutoff", d.cutoff},
                          {"dist", d.dist},
                          {"hankel_restricted", hankel_restricted_norm(m, x, c)},
                          {"doubling_increase", d.doubling_increase},
                          {"exact", d.exact},
                          {"margin", std::abs(1.0 - cfg.tol - d.dist)}});
    }
    return Json{{"mode", "distance"}, {"reports", rows}};
  }
  const ModelElement g = element_from_json(m, element_json(in, "g"));
  for (int c : cutoffs) rows.push_back(to_json(rho_gram(m, g, c)));
  return Json{{"mode", "angle"}, {"reports", rows}};
}

inline Json cmd_toeplitz(const Config& cfg, const Input& in, int& code) {
  const SubdiagonalModel m = resolve_model(cfg, in);
  const ModelElement u = element_from_json(m, element_json(in, "u"));
  code = kOk;
  Json j{{"invertibility", to_json(invertibility_test(m, u, cfg.cutoffs, cfg.tol))}};
  const double defect = detail::unitarity_defect(m, u);
  j["unitarity_defect"] = defect;
  if (defect > 1e-8) return j;  // the equivalence statements concern unitary symbols
  j["equivalence"] = to_json(equivalence_check(m, u, cfg.cutoffs, cfg.tol));
  if (m.triangular_kind() && j["invertibility"]["verdict"] == "Invertible") {
    try {
      j["invtoep"] = to_json(extract_invtoep(m, u, 1e-8, cfg.cutoffs, cfg.tol));
    } catch (const Error& e) {
      j["invtoep_error"] = e.what();
    }
  }
  return j;
}

inline Json cmd_certify(const Config& cfg, const Input& in, int& code) {
  const SubdiagonalModel m = resolve_model(cfg, in);
  const ModelElement u = element_from_json(m, element_json(in, "u"));
  const CertifyResult r = certify_positive_real(m, u, cutoff_or_default(cfg), cfg.tol);
  if (const auto* inf = std::get_if<Infeasible>(&r)) {
    code = kBadInput;
    return Json{{"feasible", false}, {"gap", inf->gap}, {"dist", inf->dist}, {"best_lambda", inf->best_lambda},
                {"margin", std::abs(inf->best_lambda - cfg.tol)}};
  }
  code = kOk;
  const Certificate& cert = std::get<Certificate>(r);
  const ApproximantFromCertificate back = certificate_to_approximant(m, u, cert);
  return Json{{"feasible", true},
              {"certificate", to_json(cert)},
              {"margin", std::abs(cert.alpha - cfg.tol)},
              {"approximant", {{"eps", back.eps}, {"delta", back.delta}, {"bound", back.bound}, {"achieved", back.achieved}}}};
}

inline GridWeight classical_weight(const Config& cfg, const Input* in) {
  if (!in) return w_alpha(cfg.alpha, cfg.grid);
  const Json& j = in->doc.is_object() && in->doc.contains("w") ? in->doc.at("w") : in->doc;
  if (!j.is_object() || !j.contains("samples")) fail(ErrorKind::ParseError, "expected a grid weight {\"M\", \"offset\", \"samples\"}");
  return grid_weight_from_json(j);
}

inline Json cmd_classical(const Config& cfg, const Input* in, int& code, std::string* csv) {
  code = kOk;
  if (in && in->doc.is_object() && in->doc.contains("g") && !in->doc.contains("w")) {
    const SubdiagonalModel m = resolve_model(cfg, *in);
    return Json{{"phisupp", to_json(phisupp_check(m, element_from_json(m, in->doc.at("g"))))}};
  }
  const GridWeight w = classical_weight(cfg, in);
  if (cfg.format == "csv") {
    std::ostringstream os;
    write_weight_csv(os, w);
    *csv = os.str();
  }
  Json j{{"M", w.M}, {"offset", w.offset}, {"dim", w.dim()}};
  if (!w.scalar()) {
    j["treil_volberg"] = to_json(treil_volberg_constant(w));
    return j;
  }
  j["geometric_mean"] = geometric_mean(w);
  j["a2"] = to_json(a2_constant(w));
  j["hs"] = to_json(hs_certificate(w, cfg.tol));
  if (!in) {
    CircleThresholds th;
    th.tol = cfg.tol;
    const std::vector<int> cutoffs = cfg.cutoffs.empty() ? std::vector<int>{16, 32, 64} : cfg.cutoffs;
    const double a = cfg.alpha;
    const CircleVerdicts v = circle_verdicts([a](double t) { return w_alpha_value(a, t); }, cfg.grid, cutoffs, th);
    j["circle"] = Json{{"cutoffs", v.cutoffs},         {"rho", v.rho},           {"rho_shrink", v.rho_shrink},
                       {"rho_hat_fine", v.rho_hat_fine}, {"hs_shrink", v.hs_shrink}, {"a2_fine", v.a2.fine},
                       {"a2_ratio", v.a2.ratio},
                       {"verdicts", {{"rho", v.rho_positive}, {"hs", v.hs_positive}, {"a2", v.a2_stable}}}};
  }
  return j;
}

// ---------------------------------------------------------------------------

struct Outcome {
  std::string stem;
  Json report;
  int code = kOk;
  double seconds = 0.0;
  std::string csv;  ///< classical --format csv export
};

template <class F>
Outcome guarded(const Config& cfg, const std::string& stem, const std::string& hash, const std::string& id, F body) {
  Outcome o;
  o.stem = stem;
  o.report = Json{{"command", cfg.command}, {"config", cfg.to_json()}, {"input", {{"name", stem}, {"hash", hash}}}};
  if (!id.empty()) o.report["input"]["id"] = id;
  const auto t0 = std::chrono::steady_clock::now();
  try {
    int code = kOk;
    Json result = body(code);
    o.code = code;
    o.report["status"] = code == kOk ? "ok" : "infeasible";
    o.report["result"] = std::move(result);
  } catch (const Error& e) {
    o.code = exit_code(e.kind());
    o.report["status"] = "error";
    o.report["error"] = Json{{"kind", to_string(e.kind())}, {"message", e.what()}};
  } catch (const nlohmann::json::exception& e) {
    o.code = kBadInput;
    o.report["status"] = "error";
    o.report["error"] = Json{{"kind", "ParseError"}, {"message", e.what()}};
  }
  o.report["exit_code"] = o.code;
  o.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return o;
}

inline void ensure_dir(const std::string& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec || !std::filesystem::is_directory(dir)) fail(ErrorKind::InvalidArgument, "cannot create output directory " + dir);
}

/// Writes reports to --out (one file per input plus timings.json) or stdout.
inline int emit(const Config& cfg, std::vector<Outcome>& outs, std::ostream& os, std::ostream& err) {
  std::map<std::string, int> seen;
  for (Outcome& o : outs)
    if (seen[o.stem]++) o.stem += "-" + std::to_string(seen[o.stem] - 1);
  int code = kOk;
  for (const Outcome& o : outs) {
    if (o.code != kOk && code == kOk) code = o.code;
    if (o.report.contains("error")) err << "nchs: " << o.stem << ": " << o.report["error"]["message"].get<std::string>() << "\n";
  }
  if (cfg.out.empty()) {
    if (cfg.format == "csv") {
      for (const Outcome& o : outs) os << o.csv;
      return code;
    }
    if (outs.size() == 1) {
      os << dump(outs[0].report);
    } else {
      Json all = Json::array();
      for (const Outcome& o : outs) all.push_back(o.report);
      os << dump(all);
    }
    return code;
  }
  ensure_dir(cfg.out);
  const std::filesystem::path dir(cfg.out);
  Json timings = Json::object();
  for (const Outcome& o : outs) {
    write_file((dir / (o.stem + "." + cfg.command + ".json")).string(), dump(o.report));
    if (!o.csv.empty()) write_file((dir / (o.stem + ".weight.csv")).string(), o.csv);
    timings[o.stem] = o.seconds;
  }
  write_file((dir / (cfg.command + ".timings.json")).string(), dump(timings));
  return code;
}

inline int run_batch(const Config& cfg, std::ostream& os, std::ostream& err) {
  using Body = Json (*)(const Config&, const Input&, int&);
  Body body = nullptr;
  if (cfg.command == "factor") body = cmd_factor;
  else if (cfg.command == "angle") body = cmd_angle;
  else if (cfg.command == "toeplitz") body = cmd_toeplitz;
  else if (cfg.command == "certify") body = cmd_certify;

  std::vector<Outcome> outs;
  if (cfg.command == "classical" && cfg.inputs.empty()) {
    if (cfg.alpha < 0.0) fail(ErrorKind::InvalidArgument, "classical needs --in or --alpha");
    std::ostringstream name;
    name << "w_alpha_" << cfg.alpha;
    const std::string hash = git_blob_hash(cfg.to_json().dump());
    std::string csv;
    outs.push_back(guarded(cfg, name.str(), hash, "", [&](int& code) { return cmd_classical(cfg, nullptr, code, &csv); }));
    outs.back().csv = csv;
  } else {
    if (cfg.inputs.empty()) fail(ErrorKind::InvalidArgument, cfg.command + " needs at least one --in file");
    outs = parallel_map<Outcome>(static_cast<int>(cfg.inputs.size()), cfg.jobs, [&](int i) {
      const std::string& path = cfg.inputs[static_cast<std::size_t>(i)];
      Input in;
      try {
        in = load_input(path);
      } catch (const Error& e) {
        return guarded(cfg, std::filesystem::path(path).stem().string(), "", "", [&](int&) -> Json { throw e; });
      }
      if (cfg.command == "classical") {
        std::string csv;
        Outcome o = guarded(cfg, in.stem, in.hash, in.id, [&](int& code) { return cmd_classical(cfg, &in, code, &csv); });
        o.csv = std::move(csv);
        return o;
      }
      return guarded(cfg, in.stem, in.hash, in.id, [&](int& code) { return body(cfg, in, code); });
    });
  }
  return emit(cfg, outs, os, err);
}

inline int cmd_gen(const Config& cfg, std::ostream& os) {
  if (cfg.kind.empty()) fail(ErrorKind::InvalidArgument, "gen needs --kind");
  const GenKind kind = parse_gen_kind(cfg.kind);
  const SubdiagonalModel m = !cfg.model.empty()               ? SubdiagonalModel::parse(cfg.model)
                             : kind == GenKind::HsWeightFamily ? SubdiagonalModel::fourier(1, 1, 512)
                                                               : (fail(ErrorKind::InvalidArgument, "gen needs --model"), SubdiagonalModel{});
  const std::vector<Json> recs = gen_instances(kind, m, GenParams::parse(cfg.params), cfg.seed);
  if (cfg.out.empty()) {
    os << dump(Json(recs));
    return kOk;
  }
  ensure_dir(cfg.out);
  Json index = Json::array();
  for (const Json& r : recs) {
    const std::string name = r.at("id").get<std::string>() + ".json";
    const std::string text = dump(r);
    write_file((std::filesystem::path(cfg.out) / name).string(), text);
    index.push_back(Json{{"file", name}, {"hash", git_blob_hash(text)}});
  }
  write_file((std::filesystem::path(cfg.out) / "index.json").string(), dump(Json{{"config", cfg.to_json()}, {"files", index}}));
  return kOk;
}

inline int cmd_verify(const Config& cfg, std::ostream& os) {
  VerifyConfig vc;
  vc.seed = cfg.seed;
  vc.tol = cfg.tol;
  vc.jobs = cfg.jobs;
  vc.suites = cfg.suites;
  const VerifyRun run = run_verify(vc, cfg.out);
  for (const SuiteResult& s : run.suites) {
    os << (s.passed ? "PASS " : "FAIL ") << std::left << std::setw(12) << s.name << " instances " << std::setw(4) << s.instances
       << " failures " << s.failures << "\n";
    for (const std::string& n : s.notes) os << "     " << n << "\n";
  }
  os << (run.passed ? "all suites passed" : "verification failed") << "\n";
  return run.passed ? kOk : kVerifyFailed;
}

inline std::uint64_t parse_seed(const std::string& s) {
  std::uint64_t v = 0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || res.ec != std::errc{} || res.ptr != s.data() + s.size())
    fail(ErrorKind::InvalidArgument, "seed is not an unsigned 64-bit integer: '" + s + "'");
  return v;
}

inline int run(int argc, const char* const* argv, std::ostream& os = std::cout, std::ostream& err = std::cerr) {
  CLI::App app{"Helson-Szego and Toeplitz invertibility computations on subdiagonal algebra models", "nchs"};
  app.require_subcommand(1);
  app.fallthrough();
  Config cfg;
  std::string seed_text = "42";
  app.add_option("--model", cfg.model, "triangular:n=6 or fourier:d=2,deg=16[,grid=256]");
  app.add_option("--in", cfg.inputs, "input JSON file (repeatable)");
  app.add_option("--tol", cfg.tol, "verdict tolerance")->check(CLI::PositiveNumber);
  app.add_option("--cutoffs", cfg.cutoffs, "comma-separated cutoffs")->delimiter(',');
  app.add_option("--seed", seed_text, "64-bit seed (NCHS_SEED overrides)");
  app.add_option("--jobs", cfg.jobs, "worker threads")->check(CLI::PositiveNumber);
  app.add_option("--out", cfg.out, "output directory");

  auto* factor = app.add_subcommand("factor", "HS1 factorization (or --outer for the outer factor) of a PD weight g");
  factor->add_flag("--outer", cfg.outer, "run outer_factor_psd instead of hs1_factorize");
  auto* angle = app.add_subcommand("angle", "angle rho between A0 and A* in L2(g), or distance to A with --dist");
  angle->add_flag("--dist", cfg.distance, "treat the input as a symbol u and report dist(u, A)");
  app.add_subcommand("toeplitz", "invertibility of T_u and the equivalence report for unitary u");
  app.add_subcommand("certify", "positive-real certificate for a unitary u");
  auto* classical = app.add_subcommand("classical", "scalar circle diagnostics of a grid weight");
  classical->add_option("--alpha", cfg.alpha, "use w_alpha instead of --in")->check(CLI::Range(0.0, 1.0));
  classical->add_option("--grid", cfg.grid, "grid size for --alpha");
  classical->add_option("--format", cfg.format, "json or csv (csv writes the weight samples)")->check(CLI::IsMember({"json", "csv"}));
  auto* gen = app.add_subcommand("gen", "write seeded instance files");
  gen->add_option("--kind", cfg.kind, "pd_weight | unitary_scaled | invtoep_planted | hs_weight_family");
  gen->add_option("--params", cfg.params, "generator parameters, e.g. count=20,s_max=3");
  auto* verify = app.add_subcommand("verify", "run the acceptance suites");
  verify->add_option("--suite", cfg.suites, "suite name (repeatable)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e, os, err);
    return rc == 0 ? kOk : kBadInput;
  }
  cfg.command = app.get_subcommands().front()->get_name();
  try {
    cfg.seed = parse_seed(seed_text);
    if (const char* env = std::getenv("NCHS_SEED")) cfg.seed = parse_seed(env), cfg.seed_from_env = true;
    if (cfg.command == "gen") return cmd_gen(cfg, os);
    if (cfg.command == "verify") return cmd_verify(cfg, os);
    return run_batch(cfg, os, err);
  } catch (const Error& e) {
    err << "nchs: " << e.what() << "\n";
    return exit_code(e.kind());
  } catch (const nlohmann::json::exception& e) {
    err << "nchs: ParseError: " << e.what() << "\n";
    return kBadInput;
  }
}

}  // namespace nchs::cli
