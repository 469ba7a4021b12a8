#include <gtest/gtest.h>

#include <cstdio>
#include <filesystem>
#include <sys/wait.h>

#include "herzkit/io.hpp"
#include "herzkit/report.hpp"
#include "herzkit/suites.hpp"

using namespace herzkit;
namespace fs = std::filesystem;

namespace {

struct CliRun {
  int code = -1;
  std::string out;
};

CliRun run_cli(const std::string& args) {
  const std::string cmd = std::string(HERZKIT_CLI_PATH) + " " + args + " 2>/dev/null";
  CliRun r;
  FILE* pipe = popen(cmd.c_str(), "r");
  if (pipe == nullptr) return r;
  char buf[4096];
  std::size_t got;
  while ((got = fread(buf, 1, sizeof buf, pipe)) > 0) r.out.append(buf, got);
  const int status = pclose(pipe);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

std::string data(const std::string& name) { return std::string(HERZKIT_TEST_DATA) + "/" + name; }

fs::path scratch_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("herzkit_test_" + name + "_" + std::to_string(::getpid()));
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

RunConfig small_config() {
  RunConfig c;
  c.n = 2;
  c.trials = 3;
  c.p_grid = {SchattenIndex(1.0), SchattenIndex(1.5), SchattenIndex(2.0), SchattenIndex::infinity()};
  return c;
}

}  // namespace

TEST(MatrixJson, RoundTrip) {
  const CMatrix a = random_matrix(3, Ensemble::kGaussian, 1);
  EXPECT_EQ(matrix_from_json(matrix_to_json(a)), a);
  EXPECT_EQ(matrix_from_json(Json::parse(matrix_to_json(a).dump())), a);
}

TEST(MatrixJson, Rejections) {
  EXPECT_THROW(matrix_from_json(Json::parse(R"({"rows":2,"cols":2,"entries":[[1,0]]})")), InputError);
  EXPECT_THROW(matrix_from_json(Json::parse(R"({"rows":1,"cols":1,"entries":[1]})")), InputError);
  EXPECT_THROW(matrix_from_json(Json::parse(R"({"rows":1.5,"cols":1,"entries":[[1,0]]})")), InputError);
  EXPECT_THROW(matrix_from_json(Json::parse(R"({"rows":0,"cols":0,"entries":[]})")), InputError);
  EXPECT_THROW(matrix_from_json(Json::parse(R"({"rows":65,"cols":65,"entries":[]})")), ResourceError);
  EXPECT_THROW(matrix_from_json(Json::parse(R"({"cols":1,"entries":[[1,0]]})")), InputError);
  EXPECT_THROW(matrix_from_json(Json::parse(R"([[1,0]])")), InputError);
  EXPECT_THROW(parse_json_text("{\"rows\": ", "x"), InputError);
  EXPECT_THROW(read_text_file(data("missing.json")), InputError);
  EXPECT_EQ(read_matrix_file(data("a.json"))(1, 1), Complex(-4.0));
}

TEST(IndexJson, InfAndNumbers) {
  EXPECT_EQ(index_to_json(SchattenIndex::infinity()), Json("inf"));
  EXPECT_TRUE(index_from_json(Json("inf")).is_infinite());
  EXPECT_EQ(index_from_json(Json(1.5)).value(), 1.5);
  EXPECT_THROW(index_from_json(Json(0.5)), InputError);
  EXPECT_THROW(index_from_json(Json::array()), InputError);
}

TEST(CertificateJson, RoundTripStillChecks) {
  const auto r = gamma2(hadamard2());
  const auto back = certificate_from_json(Json::parse(certificate_to_json(r.certificate).dump()));
  EXPECT_TRUE(check_certificate(hadamard2(), back).ok);
  Json missing = certificate_to_json(r.certificate);
  missing.erase("Q");
  EXPECT_THROW(certificate_from_json(missing), InputError);
}

TEST(Config, DefaultsAndOverrides) {
  const RunConfig d;
  EXPECT_EQ(d.tol_exact, 1e-10);
  EXPECT_EQ(d.tol_iter, 1e-6);
  EXPECT_EQ(d.restarts, 16);
  EXPECT_EQ(d.max_terms, 8);
  EXPECT_EQ(d.seed, 0u);
  ASSERT_EQ(d.p_grid.size(), 5u);
  EXPECT_TRUE(d.p_grid.back().is_infinite());
  const RunConfig c = config_from_json(Json::parse(R"({"restarts": 4, "p_grid": [1, "inf"], "seed": 9})"));
  EXPECT_EQ(c.restarts, 4);
  EXPECT_EQ(c.seed, 9u);
  EXPECT_EQ(c.max_terms, 8);
  ASSERT_EQ(c.p_grid.size(), 2u);
  const RunConfig back = config_from_json(config_to_json(c));
  EXPECT_EQ(config_to_json(back), config_to_json(c));
}

TEST(Config, Rejections) {
  EXPECT_THROW(config_from_json(Json::parse(R"({"restarts": "many"})")), InputError);
  EXPECT_THROW(config_from_json(Json::parse(R"({"restarts": 0})")), InputError);
  EXPECT_THROW(config_from_json(Json::parse(R"({"tol_iter": -1})")), InputError);
  EXPECT_THROW(config_from_json(Json::parse(R"({"p_grid": []})")), InputError);
  EXPECT_THROW(config_from_json(Json::parse(R"({"p_grid": [0.3]})")), InputError);
  EXPECT_THROW(config_from_json(Json::parse("[1]")), InputError);
}

TEST(Sha256, KnownVectors) {
  EXPECT_EQ(sha256_hex(""), "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
  EXPECT_EQ(sha256_hex("abc"), "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST(ReportRecord, KeyIgnoresTiming) {
  ReportRecord a{"norm.gamma2", sha256_hex("x"), {{"p", 1.0}}, {{"value", 2.0}}, 1.0};
  ReportRecord b = a;
  b.elapsed_ms = 99.0;
  EXPECT_EQ(a.key(), b.key());
  b.result["value"] = 2.5;
  EXPECT_NE(a.key(), b.key());
  const Json j = a.to_json();
  EXPECT_EQ(j.at("value"), 2.0);
  EXPECT_EQ(j.at("operation"), "norm.gamma2");
  EXPECT_EQ(j.at("version"), kToolkitVersion);
  EXPECT_EQ(j.at("key"), a.key());
}

TEST(ReportStore, AppendOnly) {
  const fs::path dir = scratch_dir("store");
  ReportStore store(dir);
  ReportRecord r{"op", "d", Json::object(), {{"v", 1}}, 1.0};
  const fs::path first = store.append(r);
  const std::string before = read_text_file(first.string());
  r.elapsed_ms = 2.0;  // same key, file must stay untouched
  EXPECT_EQ(store.append(r), first);
  EXPECT_EQ(read_text_file(first.string()), before);
  r.result["v"] = 2;
  store.append(r);
  EXPECT_EQ(store.list().size(), 2u);
  fs::remove_all(dir);
}

TEST(Csv, HeaderAndRows) {
  const std::string csv = to_csv({{"a", 1.0, 2.0, 0.5}, {"b", 0.0, 0.0, 0.0}});
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "label,lower,upper,slack");
  EXPECT_NE(csv.find("a,1,2,0.5\n"), std::string::npos);
  EXPECT_NE(csv.find("b,0,0,0\n"), std::string::npos);
}

TEST(Suites, EachPassesAtSmallSize) {
  const RunConfig cfg = small_config();
  for (const auto& name : suite_names()) {
    if (name == "all") continue;
    const SuiteReport r = run_suite(name, cfg);
    EXPECT_FALSE(r.checks.empty()) << name;
    for (const auto& c : r.checks) EXPECT_TRUE(c.pass) << name << "/" << c.name << " slack " << c.slack;
    EXPECT_TRUE(r.pass());
    EXPECT_EQ(r.to_json().at("pass"), true);
  }
  EXPECT_THROW(run_suite("nope", cfg), InputError);
}

TEST(Suites, FailingCheckCarriesWitness) {
  CheckResult c{"demo"};
  c.observe(0.1, [] { return Json("unused"); });
  EXPECT_TRUE(c.pass);
  c.observe(-0.2, [] { return Json("bad sample"); });
  EXPECT_FALSE(c.pass);
  EXPECT_EQ(c.samples, 2);
  EXPECT_EQ(c.slack, -0.2);
  EXPECT_EQ(c.to_json().at("witness"), "bad sample");
}

TEST(Cli, MultiplierAtTwo) {
  const CliRun r = run_cli("norm multiplier --input " + data("a.json") + " --p 2");
  ASSERT_EQ(r.code, 0) << r.out;
  const Json j = Json::parse(r.out);
  EXPECT_EQ(j.at("bracket").at("lower"), 4.0);
  EXPECT_EQ(j.at("bracket").at("upper"), 4.0);
  EXPECT_EQ(j.at("operation"), "norm.multiplier");
  EXPECT_EQ(j.at("version"), kToolkitVersion);
  EXPECT_EQ(j.at("input_digest"), sha256_hex(read_text_file(data("a.json"))));
}

TEST(Cli, HerzAllOnes) {
  const CliRun r = run_cli("norm herz --input " + data("j.json") + " --p 1");
  ASSERT_EQ(r.code, 0) << r.out;
  const Json j = Json::parse(r.out);
  EXPECT_NEAR(j.at("bracket").at("lower").get<double>(), 4.0, 1e-6);
  EXPECT_NEAR(j.at("bracket").at("upper").get<double>(), 4.0, 1e-6);
  EXPECT_NO_THROW(decomposition_from_json(j.at("decomposition")));
}

TEST(Cli, ExitCodeTwoOnBadInput) {
  for (const std::string& args :
       {"norm multiplier --input " + data("bad.json"), "norm multiplier --input " + data("truncated.json"),
        "norm multiplier --input " + data("missing.json"), "norm multiplier --input " + data("a.json") + " --p 0.5",
        std::string("norm nonsense"), std::string("frobnicate")}) {
    const CliRun r = run_cli(args);
    EXPECT_EQ(r.code, 2) << args;
    const Json j = Json::parse(r.out);
    EXPECT_EQ(j.at("exit_code"), 2);
    EXPECT_TRUE(j.at("error").is_string());
  }
}

TEST(Cli, SingleDocumentOnStdout) {
  const CliRun r = run_cli("norm gamma2 --input " + data("h2.json"));
  ASSERT_EQ(r.code, 0);
  std::size_t docs = 0;
  Json::parser_callback_t cb = [&](int depth, Json::parse_event_t ev, Json&) {
    if (depth == 0 && ev == Json::parse_event_t::object_end) ++docs;
    return true;
  };
  EXPECT_NO_THROW(Json::parse(r.out, cb));
  EXPECT_EQ(docs, 1u);
}

TEST(Cli, DeterministicApartFromTiming) {
  const std::string args = "norm multiplier --input " + data("h2.json") + " --p 3 --seed 5 --restarts 4";
  Json a = Json::parse(run_cli(args).out), b = Json::parse(run_cli(args).out);
  a.erase("elapsed_ms");
  b.erase("elapsed_ms");
  EXPECT_EQ(a, b);
  const Json c = Json::parse(run_cli("norm multiplier --input " + data("h2.json") + " --p 3 --seed 6 --restarts 4").out);
  EXPECT_NE(a.at("key"), c.at("key"));
}

TEST(Cli, CheckCertRoundTrip) {
  const fs::path dir = scratch_dir("cert");
  const std::string report = (dir / "g.json").string();
  ASSERT_EQ(run_cli("norm gamma2 --input " + data("h2.json") + " --out " + report).code, 0);
  const CliRun ok = run_cli("check-cert --input " + data("h2.json") + " " + report);
  EXPECT_EQ(ok.code, 0) << ok.out;
  EXPECT_EQ(Json::parse(ok.out).at("ok"), true);

  Json tampered = Json::parse(read_text_file(report)).at("certificate");
  tampered["t"] = 0.5;
  const std::string bad = (dir / "bad.json").string();
  write_text_file(bad, tampered.dump());
  const CliRun no = run_cli("check-cert --input " + data("h2.json") + " " + bad);
  EXPECT_EQ(no.code, 1) << no.out;
  EXPECT_EQ(Json::parse(no.out).at("ok"), false);
  fs::remove_all(dir);
}

TEST(Cli, StoreAndCsv) {
  const fs::path dir = scratch_dir("cli_store");
  const std::string args = "norm multiplier --input " + data("a.json") + " --p 2 --store " + dir.string();
  ASSERT_EQ(run_cli(args).code, 0);
  ASSERT_EQ(run_cli(args).code, 0);
  EXPECT_EQ(ReportStore(dir).list().size(), 1u);
  const CliRun csv = run_cli("norm multiplier --input " + data("a.json") + " --p 2 --format csv");
  EXPECT_EQ(csv.code, 0);
  EXPECT_EQ(csv.out.substr(0, csv.out.find('\n')), "label,lower,upper,slack");
  fs::remove_all(dir);
}

TEST(Cli, IsometricAndDecompose) {
  const CliRun yes = run_cli("isometric --input " + data("j.json"));
  ASSERT_EQ(yes.code, 0) << yes.out;
  EXPECT_EQ(Json::parse(yes.out).at("isometric"), true);
  const CliRun no = run_cli("isometric --input " + data("h2.json") + " --p 4");
  ASSERT_EQ(no.code, 0) << no.out;
  const Json j = Json::parse(no.out);
  EXPECT_EQ(j.at("isometric"), false);
  EXPECT_GE(j.at("witness").at("deviation").get<double>(), 1e-3);
  const CliRun dft = run_cli("decompose isometric --input " + data("c.json"));
  ASSERT_EQ(dft.code, 0) << dft.out;
  EXPECT_EQ(Json::parse(dft.out).at("terms").size(), 4u);
}

TEST(Cli, VerifySuite) {
  const CliRun r = run_cli("verify diagrams --n 2 --trials 2");
  EXPECT_EQ(r.code, 0) << r.out;
  EXPECT_EQ(Json::parse(r.out).at("pass"), true);
}
