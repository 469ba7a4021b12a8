// Verification suites behind `verify`: each check reports pass/fail, the
// smallest slack seen (negative means violated) and, on failure, the input
// that broke it.
#pragma once

#include <limits>
#include <string>
#include <vector>

#include "herzkit/gamma2.hpp"
#include "herzkit/herz.hpp"
#include "herzkit/io.hpp"
#include "herzkit/isometry.hpp"
#include "herzkit/multiplier.hpp"
#include "herzkit/report.hpp"
#include "herzkit/structure_maps.hpp"

namespace herzkit {

struct CheckResult {
  std::string name;
  bool pass = true;
  double slack = std::numeric_limits<double>::infinity();
  int samples = 0;
  Json witness;  // null unless failed

  /// Folds one sample in; `witness` is only evaluated on the first failure.
  template <typename WitnessFn>
  void observe(double sample_slack, WitnessFn&& witness_fn) {
    ++samples;
    slack = std::min(slack, sample_slack);
    if (sample_slack < 0.0 || std::isnan(sample_slack)) {
      if (pass) witness = witness_fn();
      pass = false;
    }
  }

  Json to_json() const {
    Json j = {{"name", name}, {"pass", pass}, {"samples", samples}};
    j["slack"] = std::isfinite(slack) ? Json(slack) : Json(nullptr);
    if (!witness.is_null()) j["witness"] = witness;
    return j;
  }
};

struct SuiteReport {
  std::string suite;
  std::vector<CheckResult> checks;

  bool pass() const {
    return std::all_of(checks.begin(), checks.end(), [](const CheckResult& c) { return c.pass; });
  }

  Json to_json() const {
    Json list = Json::array();
    for (const auto& c : checks) list.push_back(c.to_json());
    return {{"suite", suite}, {"pass", pass()}, {"checks", std::move(list)}};
  }

  void append(SuiteReport other) {
    for (auto& c : other.checks) {
      c.name = other.suite + "/" + c.name;
      checks.push_back(std::move(c));
    }
  }
};

inline MultiplierOptions multiplier_options(const RunConfig& c) {
  MultiplierOptions o;
  o.restarts = c.restarts;
  o.seed = c.seed;
  o.threads = c.thread_budget;
  o.gamma2.restarts = c.restarts;
  o.gamma2.seed = c.seed;
  o.gamma2.threads = c.thread_budget;
  return o;
}

inline Gamma2Options gamma2_options(const RunConfig& c) { return multiplier_options(c).gamma2; }

inline HerzOptions herz_options(const RunConfig& c) {
  HerzOptions o;
  o.terms = c.max_terms;
  o.phase_restarts = c.restarts;
  o.seed = c.seed;
  o.threads = c.thread_budget;
  o.gamma2 = gamma2_options(c);
  return o;
}

/// Budget for sweeps that only need valid brackets, not tight ones.
inline HerzOptions sweep_herz_options(const RunConfig& c) {
  HerzOptions o = herz_options(c);
  o.random_seeds = 0;
  o.rounds = 2;
  o.inner_iterations = 15;
  o.scaling_iterations = 100;
  o.phase_restarts = 4;
  o.gamma2_lower = false;
  return o;
}

inline MultiplierOptions sweep_multiplier_options(const RunConfig& c) {
  MultiplierOptions o = multiplier_options(c);
  o.restarts = 6;
  o.max_iter = 60;
  o.gamma2.restarts = 6;
  return o;
}

namespace detail {

inline Eigen::Index structure_n(const RunConfig& c) {
  return std::min<Eigen::Index>(c.n, kMaxStructureDimension);
}

inline std::uint64_t sample_seed(const RunConfig& c, std::uint64_t salt, int t) {
  return c.seed * 1000003ULL + salt * 7919ULL + static_cast<std::uint64_t>(t);
}

inline Json index_list(const std::vector<SchattenIndex>& ps) {
  Json out = Json::array();
  for (const auto& p : ps) out.push_back(index_to_json(p));
  return out;
}

}  // namespace detail

inline SuiteReport suite_diagrams(const RunConfig& cfg) {
  const Eigen::Index n = detail::structure_n(cfg);
  SuiteReport s{"diagrams"};
  CheckResult delta{"delta_diagram"}, eta{"eta_diagram"}, negative{"negative_controls"};
  std::vector<CMatrix> symbols{unit_matrix(n, 0, 0), all_ones(n)};
  for (int t = 0; t < std::max(1, cfg.trials / 5); ++t) {
    symbols.push_back(random_matrix(n, Ensemble::kGaussian, detail::sample_seed(cfg, 1, t)));
  }
  for (const auto& a : symbols) {
    const auto rd = verify_delta_diagram(a, SchattenIndex(2.0), 16, cfg.seed);
    const auto re = verify_eta_diagram(a, SchattenIndex(2.0), 16, cfg.seed);
    delta.observe(kDiagramTolerance - rd.max_deviation, [&] { return matrix_to_json(a); });
    eta.observe(kDiagramTolerance - re.max_deviation, [&] { return matrix_to_json(a); });
    negative.observe(re.negative_control_deviation - kDiagramTolerance,
                     [&] { return matrix_to_json(a); });
    negative.observe(rd.negative_control_deviation - kDiagramTolerance,
                     [&] { return matrix_to_json(a); });
  }
  s.checks.push_back(delta);
  s.checks.push_back(eta);
  s.checks.push_back(negative);

  CheckResult iso{"partial_isometry"};
  const auto pr = partial_isometry_check(n);
  iso.observe(pr.pass ? 1e-12 - std::max(pr.rrr_deviation, pr.projection_deviation) : -1.0,
              [&] { return Json{{"n", n}, {"rank", pr.projection_rank}}; });
  s.checks.push_back(iso);

  CheckResult adj{"adjointness"};
  auto rng = make_rng(cfg.seed, 0xad1ULL);
  for (int t = 0; t < cfg.trials; ++t) {
    const BigMatrix x = random_big_matrix(n, rng), y = random_big_matrix(n, rng);
    const Complex l = trace_pairing(map_V(x).data, y.data);
    const Complex r = trace_pairing(x.data, map_W(y).data);
    adj.observe(1e-13 * (1.0 + std::abs(l)) - std::abs(l - r),
                [&] { return Json{{"X", matrix_to_json(x.data)}, {"Y", matrix_to_json(y.data)}}; });
  }
  s.checks.push_back(adj);

  // Schur multiplication by kron(J_m, A) is M_A on every n x n block.
  CheckResult amp{"amplification"};
  for (int t = 0; t < std::max(1, cfg.trials / 5); ++t) {
    const CMatrix a = random_matrix(n, Ensemble::kGaussian, detail::sample_seed(cfg, 2, t));
    const Eigen::Index m = 2;
    auto local = make_rng(cfg.seed, 0xa3bULL + static_cast<std::uint64_t>(t));
    const CMatrix x = gaussian_matrix(m * n, m * n, local);
    const CMatrix whole = amplified_symbol(a, m).cwiseProduct(x);
    double dev = 0.0;
    for (Eigen::Index bi = 0; bi < m; ++bi)
      for (Eigen::Index bj = 0; bj < m; ++bj)
        dev = std::max(dev, (whole.block(bi * n, bj * n, n, n) -
                             a.cwiseProduct(x.block(bi * n, bj * n, n, n)))
                                .cwiseAbs()
                                .maxCoeff());
    amp.observe(-dev, [&] { return matrix_to_json(a); });
  }
  s.checks.push_back(amp);
  return s;
}

inline SuiteReport suite_contractivity(const RunConfig& cfg) {
  const Eigen::Index n = detail::structure_n(cfg);
  SuiteReport s{"contractivity"};
  for (const auto& p : cfg.p_grid) {
    CheckResult c{"V_W_E_p=" + p.to_string()};
    const auto r = contractivity_check(n, p, cfg.trials, cfg.seed);
    c.samples = r.samples;
    c.slack = 1e-9 - std::max({r.worst_v, r.worst_w, r.worst_e});
    c.pass = r.pass;
    if (!c.pass) c.witness = Json{{"n", n}, {"p", index_to_json(p)}, {"seed", cfg.seed}};
    s.checks.push_back(c);

    CheckResult e{"eta_isometry_p=" + p.to_string()};
    CheckResult schur{"schur_submultiplicative_p=" + p.to_string()};
    for (int t = 0; t < cfg.trials; ++t) {
      const CMatrix a = random_matrix(n, Ensemble::kGaussian, detail::sample_seed(cfg, 3, t));
      const CMatrix b = random_matrix(n, Ensemble::kGaussian, detail::sample_seed(cfg, 4, t));
      const double na = schatten_norm(a, p);
      e.observe(1e-10 * (1.0 + na) - std::abs(schatten_norm(map_eta(a).data, p) - na),
                [&] { return matrix_to_json(a); });
      schur.observe(na * schatten_norm(b, p) + 1e-9 - schatten_norm(schur_product(a, b), p),
                    [&] { return Json{{"A", matrix_to_json(a)}, {"B", matrix_to_json(b)}}; });
    }
    s.checks.push_back(e);
    s.checks.push_back(schur);
  }
  return s;
}

inline SuiteReport suite_algebra(const RunConfig& cfg) {
  SuiteReport s{"algebra"};
  const HerzOptions opts = sweep_herz_options(cfg);
  const Eigen::Index n = std::min<Eigen::Index>(cfg.n, 6);
  for (const auto& p : cfg.p_grid) {
    const std::string tag = "_p=" + p.to_string();
    CheckResult mat{"matrix_product" + tag}, sch{"schur_product" + tag};
    CheckResult cons{"schur_constructive" + tag}, ten{"tensor" + tag}, trunc{"truncation" + tag};
    for (int t = 0; t < cfg.trials; ++t) {
      const CMatrix c = random_matrix(n, Ensemble::kGaussian, detail::sample_seed(cfg, 5, t));
      const CMatrix d = random_matrix(n, Ensemble::kGaussian, detail::sample_seed(cfg, 6, t));
      auto pair_json = [&] {
        return Json{{"C", matrix_to_json(c)}, {"D", matrix_to_json(d)}, {"p", index_to_json(p)}};
      };
      if (p.is_two()) {
        const double bound = entrywise_l1(c) * entrywise_l1(d);
        mat.observe(bound * (1.0 + 1e-12) - entrywise_l1(c * d), pair_json);
        sch.observe(bound * (1.0 + 1e-12) - entrywise_l1(c.cwiseProduct(d)), pair_json);
        continue;
      }
      const auto hc = herz_norm(c, p, opts);
      const auto hd = herz_norm(d, p, opts);
      const CMatrix cd = c * d, cs = c.cwiseProduct(d);
      const auto rm = submultiplicativity_check(hc, hd, cd, herz_norm(cd, p, opts), p,
                                                ProductKind::kMatrix, cfg.tol_iter);
      const auto rs = submultiplicativity_check(hc, hd, cs, herz_norm(cs, p, opts), p,
                                                ProductKind::kSchur, cfg.tol_iter);
      mat.observe(rm.slack + cfg.tol_iter, pair_json);
      sch.observe(rs.slack + cfg.tol_iter, pair_json);
      cons.observe(std::min(*rs.constructive_bound + 1e-9 - *rs.constructive_cost,
                            1e-12 - *rs.representation_error),
                   pair_json);
      const HerzDecomposition tensor = herz_tensor(hc.best_decomposition, hd.best_decomposition);
      ten.observe(std::min(1e-9 * (1.0 + tensor.cost) -
                               std::abs(tensor.cost - hc.best_decomposition.cost *
                                                          hd.best_decomposition.cost),
                           1e-12 - (tensor.represented - kron(c, d)).cwiseAbs().maxCoeff()),
                  pair_json);
      IndexSet keep;
      for (Eigen::Index i = 0; i < n; i += 2) keep.push_back(i);
      const HerzDecomposition cut = herz_truncate(hc.best_decomposition, keep);
      trunc.observe(std::min(hc.best_decomposition.cost + 1e-9 - cut.cost,
                             1e-12 - (cut.represented - truncate(c, keep)).cwiseAbs().maxCoeff()),
                    pair_json);
    }
    for (auto* c : {&mat, &sch, &cons, &ten, &trunc}) {
      if (c->samples > 0) s.checks.push_back(*c);
    }
  }
  return s;
}

inline SuiteReport suite_duality(const RunConfig& cfg) {
  SuiteReport s{"duality"};
  const Eigen::Index n = std::min<Eigen::Index>(cfg.n, 6);
  const HerzOptions hopts = sweep_herz_options(cfg);
  const MultiplierOptions mopts = sweep_multiplier_options(cfg);

  CheckResult sandwich{"pairing_sandwich"};
  for (int t = 0; t < cfg.trials; ++t) {
    const SchattenIndex& p = cfg.p_grid[static_cast<std::size_t>(t) % cfg.p_grid.size()];
    const CMatrix a = random_matrix(n, Ensemble::kGaussian, detail::sample_seed(cfg, 7, t));
    const CMatrix c = random_matrix(n, Ensemble::kGaussian, detail::sample_seed(cfg, 8, t));
    const double bound =
        multiplier_norm(a, p, mopts).upper * herz_norm(c, p, hopts).bracket.upper;
    sandwich.observe(bound + cfg.tol_iter - std::abs(pair_with_multiplier(a, c)), [&] {
      return Json{{"A", matrix_to_json(a)}, {"C", matrix_to_json(c)}, {"p", index_to_json(p)}};
    });
  }
  s.checks.push_back(sandwich);

  CheckResult idem{"averaging_idempotent"}, fixes{"averaging_fixes_multipliers"};
  CheckResult grid{"averaging_grid"}, contract{"averaging_p2_contractive"};
  for (int t = 0; t < cfg.trials; ++t) {
    const auto op = LinearOperatorOnSp::random(n, detail::sample_seed(cfg, 9, t));
    const CMatrix d = averaging_projection(op).symbol;
    const CMatrix dd = averaging_projection(LinearOperatorOnSp::from_multiplier(d)).symbol;
    auto op_json = [&] { return matrix_to_json(op.rep); };
    idem.observe(-(dd - d).cwiseAbs().maxCoeff(), op_json);
    const CMatrix a = random_matrix(n, Ensemble::kGaussian, detail::sample_seed(cfg, 10, t));
    fixes.observe(-(averaging_projection(LinearOperatorOnSp::from_multiplier(a)).symbol - a)
                       .cwiseAbs()
                       .maxCoeff(),
                  [&] { return matrix_to_json(a); });
    for (Eigen::Index g : {n, 2 * n}) {
      grid.observe(1e-10 - (averaging_projection_grid(op, g).symbol - d).cwiseAbs().maxCoeff(),
                   op_json);
    }
    contract.observe(singular_values(op.rep)[0] * (1.0 + 1e-12) - max_abs_entry(d), op_json);
  }
  for (auto* c : {&idem, &fixes, &grid, &contract}) s.checks.push_back(*c);

  std::vector<SchattenIndex> low;
  for (const auto& p : cfg.p_grid) {
    if (p.value() <= 2.0) low.push_back(p);
  }
  CheckResult incl{"inclusion_monotone"};
  if (low.size() >= 2) {
    for (int t = 0; t < cfg.trials; ++t) {
      const CMatrix a = random_matrix(n, Ensemble::kGaussian, detail::sample_seed(cfg, 11, t));
      const auto rep = inclusion_monotonicity_report(a, low, mopts, cfg.tol_iter);
      double worst = std::numeric_limits<double>::infinity();
      for (const auto& pr : rep.pairs) worst = std::min(worst, pr.slack + rel_tol(cfg.tol_iter, pr.upper_p));
      incl.observe(worst, [&] { return Json{{"A", matrix_to_json(a)}, {"ps", detail::index_list(low)}}; });
    }
    s.checks.push_back(incl);
  }

  CheckResult ladder{"cb_ladder"};
  const Eigen::Index ln = std::min<Eigen::Index>(n, 3);
  for (int t = 0; t < std::max(1, cfg.trials / 10); ++t) {
    const CMatrix a = random_matrix(ln, Ensemble::kGaussian, detail::sample_seed(cfg, 12, t));
    const double g2 = gamma2(a, mopts.gamma2).bracket.upper;
    for (const auto& p : {SchattenIndex(1.5), SchattenIndex(2.0)}) {
      const auto values = cb_norm_ladder(a, p, 3, mopts);
      double worst = std::numeric_limits<double>::infinity();
      for (std::size_t m = 0; m < values.size(); ++m) {
        worst = std::min(worst, g2 + cfg.tol_iter - values[m].lower);
        if (m > 0) worst = std::min(worst, values[m].upper + cfg.tol_iter - values[m - 1].lower);
        if (p.is_two()) {
          worst = std::min(worst, 1e-12 - std::abs(values[m].lower - values[0].lower));
        }
      }
      ladder.observe(worst, [&] { return Json{{"A", matrix_to_json(a)}, {"p", index_to_json(p)}}; });
    }
  }
  s.checks.push_back(ladder);
  return s;
}

/// Curated symbols: rank-one unimodular, a zero entry, Hadamard, all-ones.
inline std::vector<std::pair<std::string, CMatrix>> curated_isometry_symbols(Eigen::Index n,
                                                                               std::uint64_t seed) {
  auto rng = make_rng(seed, 0x150ULL);
  const CVector a = unimodular_vector(n, rng), b = unimodular_vector(n, rng);
  CMatrix zero = all_ones(n);
  zero(0, n > 1 ? 1 : 0) = 0.0;
  return {{"rank_one_unimodular", a * b.transpose()},
          {"all_ones", all_ones(n)},
          {"zero_entry", zero},
          {"hadamard2", hadamard2()}};
}

inline SuiteReport suite_isometry(const RunConfig& cfg) {
  SuiteReport s{"isometry"};
  const Eigen::Index n = std::clamp<Eigen::Index>(cfg.n, 2, 6);
  const std::vector<SchattenIndex> ps{SchattenIndex(1.0), SchattenIndex(1.7), SchattenIndex(3.0),
                                      SchattenIndex(4.0), SchattenIndex::infinity()};
  MultiplierOptions wopts = sweep_multiplier_options(cfg);
  wopts.restarts = 12;
  wopts.max_iter = 150;
  CheckResult consistency{"classify_forward_witness"};
  for (const auto& [name, c] : curated_isometry_symbols(n, cfg.seed)) {
    const IsometryVerdict v = classify_isometric(c);
    for (const auto& p : ps) {
      auto replay = [&, &name = name, &c = c] {
        return Json{{"symbol", name}, {"C", matrix_to_json(c)}, {"p", index_to_json(p)}};
      };
      if (v.isometric) {
        const auto fwd = isometry_forward_check(c, p, 10, cfg.seed);
        consistency.observe(fwd.pass ? 1e-10 - fwd.max_deviation : -1.0, replay);
      } else {
        const auto w = isometry_witness_search(c, p, cfg.seed, wopts);
        consistency.observe(w.deviation - 1e-6, replay);
      }
    }
  }
  s.checks.push_back(consistency);

  CheckResult h2{"hadamard_witness_p=4"};
  const auto w = isometry_witness_search(hadamard2(), SchattenIndex(4.0), cfg.seed, wopts);
  h2.observe(w.deviation - 1e-3, [&] { return matrix_to_json(w.b); });
  s.checks.push_back(h2);

  CheckResult dft{"dft_reconstruct"};
  for (int t = 0; t < cfg.trials; ++t) {
    const Eigen::Index m = 1 + t % 5;
    const CMatrix c = random_matrix(m, Ensemble::kGaussian, detail::sample_seed(cfg, 13, t));
    const auto terms = dft_decompose(c);
    double isometric = 0.0;
    for (const auto& term : terms) {
      if (!classify_isometric(term.symbol()).isometric) isometric = -1.0;
    }
    const double count_ok = terms.size() == static_cast<std::size_t>(m * m) ? 0.0 : -1.0;
    dft.observe(std::min({1e-10 - (dft_reconstruct(terms, m) - c).cwiseAbs().maxCoeff(),
                          isometric, count_ok}),
                [&] { return matrix_to_json(c); });
  }
  s.checks.push_back(dft);

  CheckResult four{"four_point_extraction"};
  for (int t = 0; t < cfg.trials; ++t) {
    const CMatrix c = random_matrix(n, Ensemble::kGaussian, detail::sample_seed(cfg, 14, t));
    double dev = 0.0;
    for (Eigen::Index i = 0; i < n; ++i)
      for (Eigen::Index j = 0; j < n; ++j)
        dev = std::max(dev, std::abs(four_point_extraction(c, i, j) - c(i, j)));
    four.observe(1e-13 - dev, [&] { return matrix_to_json(c); });
  }
  s.checks.push_back(four);
  return s;
}

inline const std::vector<std::string>& suite_names() {
  static const std::vector<std::string> names{"diagrams", "contractivity", "algebra",
                                              "duality", "isometry", "all"};
  return names;
}

inline SuiteReport run_suite(const std::string& name, const RunConfig& cfg) {
  cfg.validate();
  if (name == "diagrams") return suite_diagrams(cfg);
  if (name == "contractivity") return suite_contractivity(cfg);
  if (name == "algebra") return suite_algebra(cfg);
  if (name == "duality") return suite_duality(cfg);
  if (name == "isometry") return suite_isometry(cfg);
  if (name == "all") {
    SuiteReport all{"all"};
    for (const auto& s : suite_names()) {
      if (s != "all") all.append(run_suite(s, cfg));
    }
    return all;
  }
  throw InputError("unknown suite '" + name + "'");
}

}  // namespace herzkit
