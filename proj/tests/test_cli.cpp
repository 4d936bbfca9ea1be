#include <gtest/gtest.h>

#include <cstdlib>

#include "nchs/cli.hpp"

using namespace nchs;

namespace {

const std::string kSamples = NCHS_SAMPLES_DIR;

std::string sample(const std::string& name) { return kSamples + "/" + name; }

struct CliRun {
  int code;
  std::string out;
  std::string err;
};

CliRun nchs_run(std::vector<std::string> args) {
  args.insert(args.begin(), "nchs");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

std::filesystem::path scratch(const std::string& name) {
  const auto p = std::filesystem::temp_directory_path() / ("nchs_test_cli_" + name);
  std::filesystem::remove_all(p);
  return p;
}

std::string slurp(const std::filesystem::path& p) { return read_file(p.string()); }

}  // namespace

TEST(Json, MatrixRoundTripIsExact) {
  Rng rng(3);
  const CMat a = gaussian(rng, 4, 3) * 1e-3 + gaussian(rng, 4, 3) * 1e5;
  const Json j = to_json(a);
  const CMat b = matrix_from_json(Json::parse(j.dump()));
  EXPECT_EQ((a - b).cwiseAbs().maxCoeff(), 0.0);
}

TEST(Json, FourierElementUsesKeyedCoefficients) {
  Rng rng(4);
  const auto m = SubdiagonalModel::fourier(2, 3);
  const ModelElement x = random_element(rng, m);
  const Json j = to_json(x);
  ASSERT_TRUE(j.at("coeffs").is_object());
  EXPECT_EQ(j.at("d").get<int>(), 2);
  const ModelElement y = element_from_json(m, Json::parse(j.dump()));
  EXPECT_EQ(dump(to_json(y)), dump(j));
}

TEST(Json, TriangularElementIsNestedArray) {
  const auto m = SubdiagonalModel::triangular(2);
  const Json j = to_json(ModelElement(CMat::Identity(2, 2)));
  EXPECT_TRUE(j.is_array());
  EXPECT_EQ(element_from_json(m, Json::parse("[[1, 0], [0, [2, -1]]]")).matrix()(1, 1), Complex(2, -1));
}

TEST(Json, MalformedElementsAreParseErrors) {
  const auto f = SubdiagonalModel::fourier(1, 2);
  const auto t = SubdiagonalModel::triangular(2);
  auto kind = [](auto fn) {
    try {
      fn();
    } catch (const Error& e) {
      return e.kind();
    }
    return ErrorKind::InvalidArgument;
  };
  EXPECT_EQ(kind([&] { element_from_json(f, Json::parse(R"({"d": 1, "coeffs": {"x": [[1]]}})")); }), ErrorKind::ParseError);
  EXPECT_EQ(kind([&] { element_from_json(f, Json::parse(R"({"d": 1, "coeffs": {"0": [[1, 2]]}})")); }), ErrorKind::ParseError);
  EXPECT_EQ(kind([&] { element_from_json(t, Json::parse("[[1, 0], [0]]")); }), ErrorKind::ParseError);
  EXPECT_EQ(kind([&] { element_from_json(t, Json::parse(R"([[1, "a"], [0, 1]])")); }), ErrorKind::ParseError);
  EXPECT_EQ(kind([&] { parse_json("{", "inline"); }), ErrorKind::ParseError);
  EXPECT_EQ(kind([&] { element_from_json(t, Json::parse("[[1, 0, 0], [0, 1, 0], [0, 0, 1]]")); }), ErrorKind::ModelMismatch);
}

TEST(Json, GridWeightRoundTrip) {
  const GridWeight w = w_alpha(0.3, 64);
  const GridWeight v = grid_weight_from_json(Json::parse(to_json(w).dump()));
  EXPECT_EQ(v.M, 64);
  EXPECT_EQ(v.offset, 0.5);
  for (int j = 0; j < 64; ++j) EXPECT_EQ(v.samples[j](0, 0), w.samples[j](0, 0));
}

TEST(Hash, MatchesGitBlobHash) {
  EXPECT_EQ(git_blob_hash(""), "e69de29bb2d1d6434b8b29ae775ad8c2e48c5391");
  EXPECT_EQ(git_blob_hash("hello\n"), "ce013625030ba8dba906f756967f9e9ca394464a");
}

TEST(Generators, FixedSeedIsByteIdentical) {
  const auto m = SubdiagonalModel::triangular(4);
  for (const char* k : {"pd_weight", "unitary_scaled", "invtoep_planted"}) {
    const auto a = gen_instances(parse_gen_kind(k), m, GenParams::parse("count=5"), 9);
    const auto b = gen_instances(parse_gen_kind(k), m, GenParams::parse("count=5"), 9);
    const auto c = gen_instances(parse_gen_kind(k), m, GenParams::parse("count=5"), 10);
    ASSERT_EQ(a.size(), 5u);
    EXPECT_EQ(dump(Json(a)), dump(Json(b))) << k;
    EXPECT_NE(dump(a[3]["g"].is_null() ? a[3]["u"] : a[3]["g"]), dump(c[3]["g"].is_null() ? c[3]["u"] : c[3]["g"])) << k;
  }
}

TEST(Generators, UnitaryScaledStartsAtIdentity) {
  for (const auto& m : {SubdiagonalModel::triangular(5), SubdiagonalModel::fourier(2, 4)}) {
    const Json rec = gen_instance(GenKind::UnitaryScaled, m, GenParams::parse("count=4"), 1, 0);
    EXPECT_EQ(rec["s"].get<double>(), 0.0);
    const ModelElement u = element_from_json(m, rec["u"]);
    EXPECT_LT(l2_norm(m, u - identity(m)), 1e-15);
  }
}

TEST(Generators, PlantedTruthSurvivesJsonAndIsRecovered) {
  const auto m = SubdiagonalModel::triangular(5);
  for (const Json& rec : gen_instances(GenKind::InvToepPlanted, m, GenParams::parse("count=6"), 11)) {
    const Json back = Json::parse(dump(rec));
    const ModelElement u = element_from_json(m, back["u"]);
    const CMat g0 = matrix_from_json(back["truth"]["g0"]);
    const InvToepStructure s = extract_invtoep(m, u);
    EXPECT_LT((s.g0.matrix() - g0).norm(), 1e-7);
  }
}

TEST(Generators, BadParametersAreRejected) {
  const auto m = SubdiagonalModel::triangular(3);
  EXPECT_THROW(GenParams::parse("count"), Error);
  EXPECT_THROW(GenParams::parse("count=abc"), Error);
  EXPECT_THROW(gen_instances(GenKind::PdWeight, m, GenParams::parse("count=0"), 1), Error);
  EXPECT_THROW(parse_gen_kind("nope"), Error);
  EXPECT_THROW(gen_instance(GenKind::InvToepPlanted, SubdiagonalModel::fourier(1, 2), {}, 1, 0), Error);
}

TEST(ParallelMap, ResultsKeepInputOrder) {
  const auto v = parallel_map<int>(257, 4, [](int i) { return i * i; });
  for (int i = 0; i < 257; ++i) EXPECT_EQ(v[i], i * i);
}

TEST(Cli, FactorIdentityGivesUnitU) {
  const CliRun r = nchs_run({"factor", "--model", "triangular:n=3", "--in", sample("identity_tri3.json")});
  ASSERT_EQ(r.code, 0) << r.err;
  const Json rep = Json::parse(r.out);
  EXPECT_EQ(rep["status"], "ok");
  EXPECT_EQ(rep["config"]["model"], "triangular:n=3");
  EXPECT_EQ(rep["input"]["hash"], git_blob_hash(slurp(sample("identity_tri3.json"))));
  EXPECT_LT((matrix_from_json(rep["result"]["u"]) - CMat::Identity(3, 3)).norm(), 1e-12);
  EXPECT_LT(rep["result"]["residuals"]["recomposition"].get<double>(), 1e-12);
}

TEST(Cli, RankOneWeightReportsRankOneSupport) {
  const CliRun r = nchs_run({"factor", "--in", sample("rank_one_weight.json")});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(Json::parse(r.out)["result"]["s_rank"].get<int>(), 1);
}

TEST(Cli, CorruptJsonExitsTwo) {
  const CliRun r = nchs_run({"factor", "--model", "fourier:d=1,deg=1", "--in", sample("corrupt.json")});
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("parse error"), std::string::npos);
  EXPECT_EQ(Json::parse(r.out)["error"]["kind"], "ParseError");
}

TEST(Cli, ToeplitzOfZbarIsNotInvertible) {
  const CliRun r = nchs_run({"toeplitz", "--model", "fourier:d=1,deg=1", "--in", sample("zbar.json")});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(Json::parse(r.out)["result"]["invertibility"]["verdict"], "NotInvertible");
}

TEST(Cli, CertifyIdentityAndCyclicShift) {
  const CliRun one = nchs_run({"certify", "--model", "triangular:n=3", "--in", sample("identity_tri3.json")});
  ASSERT_EQ(one.code, 0) << one.err;
  EXPECT_NEAR(Json::parse(one.out)["result"]["certificate"]["alpha"].get<double>(), 1.0, 1e-12);
  const CliRun cyc = nchs_run({"certify", "--model", "triangular:n=3", "--in", sample("cyclic3.json")});
  EXPECT_EQ(cyc.code, 2);
  EXPECT_EQ(Json::parse(cyc.out)["result"]["feasible"], false);
}

TEST(Cli, ClassicalFlatWeight) {
  const CliRun r = nchs_run({"classical", "--in", sample("flat_weight.json")});
  ASSERT_EQ(r.code, 0) << r.err;
  const Json rep = Json::parse(r.out)["result"];
  EXPECT_NEAR(rep["a2"]["value"].get<double>(), 1.0, 1e-14);
  EXPECT_NEAR(rep["geometric_mean"].get<double>(), 1.0, 1e-14);
  EXPECT_TRUE(rep["hs"]["positive"].get<bool>());
}

TEST(Cli, BadArgumentsExitTwo) {
  EXPECT_EQ(nchs_run({}).code, 2);
  EXPECT_EQ(nchs_run({"frobnicate"}).code, 2);
  EXPECT_EQ(nchs_run({"factor", "--model", "triangular:n=3"}).code, 2);
  EXPECT_EQ(nchs_run({"factor", "--model", "square:n=3", "--in", sample("identity_tri3.json")}).code, 2);
  EXPECT_EQ(nchs_run({"factor", "--model", "triangular:n=3", "--in", sample("missing.json")}).code, 2);
  EXPECT_EQ(nchs_run({"gen", "--kind", "pd_weight"}).code, 2);
  EXPECT_EQ(nchs_run({"verify", "--suite", "nope"}).code, 2);
  EXPECT_EQ(nchs_run({"gen", "--kind", "pd_weight", "--model", "triangular:n=2", "--seed", "-3"}).code, 2);
}

TEST(Cli, SeedEnvironmentOverridesFlag) {
  const std::vector<std::string> args{"gen", "--kind", "pd_weight", "--model", "triangular:n=3", "--params", "count=2", "--seed", "5"};
  ::unsetenv("NCHS_SEED");
  const CliRun flag5 = nchs_run(args);
  ::setenv("NCHS_SEED", "6", 1);
  const CliRun env6 = nchs_run(args);
  ::unsetenv("NCHS_SEED");
  std::vector<std::string> six = args;
  six.back() = "6";
  const CliRun flag6 = nchs_run(six);
  ASSERT_EQ(env6.code, 0);
  EXPECT_NE(flag5.out, env6.out);
  EXPECT_EQ(flag6.out, env6.out);
}

TEST(Cli, BatchReportsDoNotDependOnJobs) {
  const auto gen = scratch("gen");
  ASSERT_EQ(nchs_run({"gen", "--kind", "unitary_scaled", "--model", "triangular:n=4", "--params", "count=5", "--out", gen.string()}).code, 0);
  std::vector<std::string> base{"toeplitz"};
  for (int i = 0; i < 5; ++i) base.insert(base.end(), {"--in", (gen / ("unitary_scaled-" + std::to_string(i) + ".json")).string()});
  auto with = [&](const std::string& jobs, const std::filesystem::path& out) {
    auto a = base;
    a.insert(a.end(), {"--jobs", jobs, "--out", out.string()});
    return nchs_run(a).code;
  };
  const auto o1 = scratch("jobs1"), o3 = scratch("jobs3");
  ASSERT_EQ(with("1", o1), 0);
  ASSERT_EQ(with("3", o3), 0);
  for (int i = 0; i < 5; ++i) {
    const std::string f = "unitary_scaled-" + std::to_string(i) + ".toeplitz.json";
    Json a = Json::parse(slurp(o1 / f)), b = Json::parse(slurp(o3 / f));
    a["config"].erase("jobs");
    b["config"].erase("jobs");
    EXPECT_EQ(dump(a), dump(b)) << f;
  }
}

TEST(Cli, VerifySuiteSelection) {
  const auto out = scratch("verify");
  const CliRun r = nchs_run({"verify", "--suite", "crosscheck", "--out", out.string()});
  ASSERT_EQ(r.code, 0) << r.out;
  const Json s = Json::parse(slurp(out / "summary.json"));
  ASSERT_EQ(s["suites"].size(), 1u);
  EXPECT_EQ(s["suites"][0]["name"], "crosscheck");
  EXPECT_TRUE(std::filesystem::exists(out / "margins_histogram.csv"));
  EXPECT_TRUE(std::filesystem::exists(out / "timings.json"));
}

// The ambiguity band is 10 tol wide, so a tighter tol can only shrink the
// flagged set; agreement must still hold on everything left unflagged.
TEST(Verify, TighterToleranceStillPassesOnUnflagged) {
  VerifyConfig base;
  VerifyConfig tight = base;
  tight.tol = base.tol / 100.0;
  const SuiteResult a = suite_equivalence(base), b = suite_equivalence(tight);
  EXPECT_TRUE(a.passed);
  EXPECT_TRUE(b.passed);
  EXPECT_EQ(b.failures, 0);
  EXPECT_LE(b.metrics["flagged_ambiguous"].get<int>(), a.metrics["flagged_ambiguous"].get<int>());
  for (std::size_t i = 0; i < a.margins.size(); ++i)
    if (b.margins[i] < 10 * tight.tol) {
      EXPECT_LT(a.margins[i], 10 * base.tol) << i;
    }
}
