// herzkit command line: norms, decompositions, isometry verdicts, certificate
// checks and verification suites. stdout gets exactly one JSON document (or
// CSV with --format csv); diagnostics go to stderr.
//
// exit codes: 0 ok, 1 verification failed, 2 bad input.
#include <chrono>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "herzkit/herzkit.hpp"
#include "herzkit/io.hpp"
#include "herzkit/report.hpp"
#include "herzkit/suites.hpp"

namespace {

using namespace herzkit;

constexpr int kExitOk = 0;
constexpr int kExitVerification = 1;
constexpr int kExitBadInput = 2;

struct Flags {
  std::string config_path;
  std::vector<std::string> inputs;
  std::string p_text;
  std::optional<std::uint64_t> seed;
  std::optional<double> tol;
  std::optional<int> restarts;
  std::optional<int> terms;
  std::optional<int> n;
  std::optional<int> trials;
  int m_max = 3;
  std::string out;
  std::string store;
  std::string format = "json";
  std::string kind;
};

RunConfig resolve_config(const Flags& f) {
  RunConfig cfg;
  if (!f.config_path.empty()) {
    cfg = config_from_json(parse_json_text(read_text_file(f.config_path), f.config_path));
  }
  if (f.seed) cfg.seed = *f.seed;
  if (f.tol) cfg.tol_iter = *f.tol;
  if (f.restarts) cfg.restarts = *f.restarts;
  if (f.terms) cfg.max_terms = *f.terms;
  if (f.n) cfg.n = *f.n;
  if (f.trials) cfg.trials = *f.trials;
  if (!f.p_text.empty()) cfg.p_grid = {SchattenIndex::parse(f.p_text)};
  cfg.apply_environment();
  cfg.validate();
  return cfg;
}

SchattenIndex required_p(const Flags& f) {
  if (f.p_text.empty()) throw InputError("--p is required");
  return SchattenIndex::parse(f.p_text);
}

const std::string& required_input(const Flags& f, std::size_t k = 0) {
  if (f.inputs.size() <= k) throw InputError("--input is missing");
  return f.inputs[k];
}

std::string input_digest(const Flags& f) {
  std::string bytes;
  for (const auto& path : f.inputs) bytes += read_text_file(path);
  return sha256_hex(bytes);
}

Json parameters_json(const Flags& f, const RunConfig& cfg) {
  Json j = config_to_json(cfg);
  j.erase("thread_budget");  // output must not depend on it
  if (!f.kind.empty()) j["kind"] = f.kind;
  if (!f.p_text.empty()) j["p"] = index_to_json(SchattenIndex::parse(f.p_text));
  return j;
}

void emit(const Flags& f, const ReportRecord& record, const std::vector<CsvRow>& rows) {
  const Json doc = record.to_json();
  const std::string text = f.format == "csv" ? to_csv(rows) : doc.dump(2) + "\n";
  if (!f.out.empty()) write_text_file(f.out, text);
  if (!f.store.empty()) ReportStore(f.store).append(record);
  std::cout << text;
}

template <typename Fn>
ReportRecord timed(const std::string& operation, const Flags& f, const RunConfig& cfg, Fn&& fn) {
  ReportRecord r;
  r.operation = operation;
  r.input_digest = f.inputs.empty() ? sha256_hex("") : input_digest(f);
  r.parameters = parameters_json(f, cfg);
  const auto t0 = std::chrono::steady_clock::now();
  r.result = fn();
  r.elapsed_ms =
      std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
  return r;
}

CsvRow bracket_row(const std::string& label, const NormBracket& b) {
  return {label, b.lower, b.upper, b.width()};
}

int cmd_norm(const Flags& f) {
  const RunConfig cfg = resolve_config(f);
  const CMatrix a = read_matrix_file(required_input(f));
  std::vector<CsvRow> rows;
  ReportRecord rec;
  if (f.kind == "schatten") {
    const SchattenIndex p = required_p(f);
    rec = timed("norm.schatten", f, cfg, [&] {
      const double v = schatten_norm(a, p);
      rows.push_back({"schatten", v, v, 0.0});
      return Json{{"bracket", bracket_to_json(NormBracket::exact(v, "singular values"))}};
    });
  } else if (f.kind == "multiplier") {
    const SchattenIndex p = required_p(f);
    rec = timed("norm.multiplier", f, cfg, [&] {
      require_square(a, "multiplier");
      const NormBracket b = multiplier_norm(a, p, multiplier_options(cfg));
      rows.push_back(bracket_row("multiplier", b));
      return Json{{"bracket", bracket_to_json(b)}};
    });
  } else if (f.kind == "cb-ladder") {
    const SchattenIndex p = required_p(f);
    rec = timed("norm.cb-ladder", f, cfg, [&] {
      const auto ladder = cb_norm_ladder(a, p, f.m_max, multiplier_options(cfg));
      Json levels = Json::array();
      for (std::size_t m = 0; m < ladder.size(); ++m) {
        levels.push_back(bracket_to_json(ladder[m]));
        rows.push_back(bracket_row("m=" + std::to_string(m + 1), ladder[m]));
      }
      return Json{{"ladder", levels}, {"bracket", levels.back()}};
    });
  } else if (f.kind == "gamma2") {
    rec = timed("norm.gamma2", f, cfg, [&] {
      Gamma2Options o = gamma2_options(cfg);
      if (f.tol) o.tol = *f.tol;
      const Gamma2Result g = gamma2(a, o);
      rows.push_back(bracket_row("gamma2", g.bracket));
      return Json{{"bracket", bracket_to_json(g.bracket)},
                  {"certificate", certificate_to_json(g.certificate)}};
    });
  } else if (f.kind == "herz") {
    const SchattenIndex p = required_p(f);
    rec = timed("norm.herz", f, cfg, [&] {
      const HerzNormResult h = herz_norm(a, p, herz_options(cfg));
      rows.push_back(bracket_row("herz", h.bracket));
      return Json{{"bracket", bracket_to_json(h.bracket)},
                  {"decomposition", decomposition_to_json(h.best_decomposition)},
                  {"dual_functional", dual_functional_to_json(h.dual_functional)}};
    });
  } else {
    throw InputError("unknown norm '" + f.kind + "'");
  }
  emit(f, rec, rows);
  return kExitOk;
}

int cmd_verify(const Flags& f) {
  const RunConfig cfg = resolve_config(f);
  bool pass = true;
  std::vector<CsvRow> rows;
  const ReportRecord rec = timed("verify." + f.kind, f, cfg, [&] {
    const SuiteReport s = run_suite(f.kind, cfg);
    pass = s.pass();
    for (const auto& c : s.checks) {
      rows.push_back({c.name, 0.0, std::isfinite(c.slack) ? c.slack : 0.0, c.slack});
    }
    if (!pass) {
      for (const auto& c : s.checks) {
        if (!c.pass) std::cerr << "FAILED " << c.name << " (slack " << c.slack << ")\n";
      }
    }
    return s.to_json();
  });
  emit(f, rec, rows);
  return pass ? kExitOk : kExitVerification;
}

int cmd_decompose(const Flags& f) {
  const RunConfig cfg = resolve_config(f);
  const CMatrix c = read_matrix_file(required_input(f));
  std::vector<CsvRow> rows;
  ReportRecord rec;
  if (f.kind == "herz") {
    const SchattenIndex p = required_p(f);
    rec = timed("decompose.herz", f, cfg, [&] {
      const HerzNormResult h = herz_norm(c, p, herz_options(cfg));
      rows.push_back(bracket_row("herz", h.bracket));
      return Json{{"decomposition", decomposition_to_json(h.best_decomposition)},
                  {"bracket", bracket_to_json(h.bracket)}};
    });
  } else if (f.kind == "isometric") {
    rec = timed("decompose.isometric", f, cfg, [&] {
      const auto terms = dft_decompose(c);
      const double err = (dft_reconstruct(terms, c.rows()) - c).cwiseAbs().maxCoeff();
      rows.push_back({"reconstruction_error", err, err, 0.0});
      return Json{{"terms", dft_terms_to_json(terms)},
                  {"count", terms.size()},
                  {"reconstruction_error", err}};
    });
  } else {
    throw InputError("unknown decomposition '" + f.kind + "'");
  }
  emit(f, rec, rows);
  return kExitOk;
}

int cmd_isometric(const Flags& f) {
  const RunConfig cfg = resolve_config(f);
  const CMatrix c = read_matrix_file(required_input(f));
  std::vector<CsvRow> rows;
  const ReportRecord rec = timed("isometric", f, cfg, [&] {
    const IsometryVerdict v = classify_isometric(c, 1e-8, !f.p_text.empty() && required_p(f).is_two());
    Json j = {{"isometric", v.isometric}, {"failure_reason", to_string(v.failure_reason)}};
    if (v.a) j["a"] = vector_to_json(*v.a);
    if (v.b) j["b"] = vector_to_json(*v.b);
    if (!v.isometric && !f.p_text.empty() && !required_p(f).is_two()) {
      const WitnessResult w =
          isometry_witness_search(c, required_p(f), cfg.seed, multiplier_options(cfg));
      j["witness"] = {{"B", matrix_to_json(w.b)},
                      {"deviation", w.deviation},
                      {"best_ratio_up", w.best_ratio_up},
                      {"best_ratio_down", w.best_ratio_down}};
      rows.push_back({"witness_deviation", w.deviation, w.deviation, 0.0});
    }
    return j;
  });
  emit(f, rec, rows);
  return kExitOk;
}

int cmd_check_cert(const Flags& f) {
  const RunConfig cfg = resolve_config(f);
  const CMatrix a = read_matrix_file(required_input(f, 0));
  const Json doc = parse_json_text(read_text_file(required_input(f, 1)), f.inputs[1]);
  // Accept a bare certificate or a norm gamma2 report holding one.
  const Gamma2Certificate cert = certificate_from_json(doc.contains("certificate") ? doc.at("certificate") : doc);
  bool ok = false;
  std::vector<CsvRow> rows;
  const ReportRecord rec = timed("check-cert", f, cfg, [&] {
    const CertificateCheck check = check_certificate(a, cert);
    ok = check.ok;
    rows.push_back({"gamma2_upper", cert.t, cert.t, 0.0});
    return Json{{"ok", check.ok}, {"reasons", check.reasons}, {"t", cert.t}};
  });
  emit(f, rec, rows);
  return ok ? kExitOk : kExitVerification;
}

void add_common(CLI::App* cmd, Flags& f) {
  cmd->add_option("--config", f.config_path, "JSON config file (flags override it)");
  cmd->add_option("--p", f.p_text, "Schatten exponent, number >= 1 or inf");
  cmd->add_option("--seed", f.seed, "random seed");
  cmd->add_option("--tol", f.tol, "tolerance for iterative results");
  cmd->add_option("--restarts", f.restarts, "restart budget");
  cmd->add_option("--out", f.out, "also write the document here");
  cmd->add_option("--store", f.store, "append the record to this report directory");
  cmd->add_option("--format", f.format, "json or csv")->check(CLI::IsMember({"json", "csv"}));
}

void print_error(const std::string& what, int code) {
  std::cerr << "herzkit: " << what << "\n";
  std::cout << Json{{"error", what}, {"exit_code", code}}.dump(2) << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Schur multiplier and predual norm toolkit"};
  app.require_subcommand(1);
  Flags f;

  auto* norm = app.add_subcommand("norm", "bracket a norm of the input matrix");
  norm->add_option("kind", f.kind, "schatten | multiplier | cb-ladder | gamma2 | herz")
      ->required()
      ->check(CLI::IsMember({"schatten", "multiplier", "cb-ladder", "gamma2", "herz"}));
  norm->add_option("--input", f.inputs, "matrix JSON file")->expected(1);
  norm->add_option("--terms", f.terms, "term budget for herz");
  norm->add_option("--m", f.m_max, "ladder depth for cb-ladder");
  add_common(norm, f);

  auto* verify = app.add_subcommand("verify", "run a verification suite");
  verify->add_option("suite", f.kind, "diagrams | contractivity | algebra | duality | isometry | all")
      ->required()
      ->check(CLI::IsMember(suite_names()));
  verify->add_option("--n", f.n, "base dimension");
  verify->add_option("--trials", f.trials, "random samples per check");
  verify->add_option("--terms", f.terms, "term budget for herz");
  add_common(verify, f);

  auto* decompose = app.add_subcommand("decompose", "emit a decomposition of the input");
  decompose->add_option("kind", f.kind, "herz | isometric")
      ->required()
      ->check(CLI::IsMember({"herz", "isometric"}));
  decompose->add_option("--input", f.inputs, "matrix JSON file")->expected(1);
  decompose->add_option("--terms", f.terms, "term budget for herz");
  add_common(decompose, f);

  auto* isometric = app.add_subcommand("isometric", "classify an isometric multiplier");
  isometric->add_option("--input", f.inputs, "matrix JSON file")->expected(1);
  add_common(isometric, f);

  auto* check = app.add_subcommand("check-cert", "re-validate a gamma2 certificate");
  check->add_option("--input", f.inputs, "symbol JSON then certificate JSON")->expected(2);
  add_common(check, f);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    print_error(e.what(), kExitBadInput);
    return kExitBadInput;
  }

  try {
    if (norm->parsed()) return cmd_norm(f);
    if (verify->parsed()) return cmd_verify(f);
    if (decompose->parsed()) return cmd_decompose(f);
    if (isometric->parsed()) return cmd_isometric(f);
    if (check->parsed()) return cmd_check_cert(f);
  } catch (const std::invalid_argument& e) {
    print_error(e.what(), kExitBadInput);
    return kExitBadInput;
  } catch (const ResourceError& e) {
    print_error(e.what(), kExitBadInput);
    return kExitBadInput;
  } catch (const Json::exception& e) {
    print_error(e.what(), kExitBadInput);
    return kExitBadInput;
  }
  return kExitBadInput;
}
