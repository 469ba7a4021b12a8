#include <gtest/gtest.h>

#include "herzkit/herz.hpp"
#include "herzkit/io.hpp"

using namespace herzkit;

namespace {

const Complex I(0.0, 1.0);

HerzOptions quick() {
  HerzOptions o;
  o.random_seeds = 0;
  o.rounds = 3;
  o.inner_iterations = 20;
  o.phase_restarts = 8;
  o.gamma2.restarts = 8;
  return o;
}

const std::vector<SchattenIndex>& grid() {
  static const std::vector<SchattenIndex> ps = {SchattenIndex(1.0), SchattenIndex(1.5), SchattenIndex(2.0),
                                                SchattenIndex(3.0), SchattenIndex::infinity()};
  return ps;
}

void expect_sound(const CMatrix& c, const HerzNormResult& r) {
  const auto& d = r.best_decomposition;
  EXPECT_TRUE(r.bracket.is_consistent()) << r.bracket.lower << " " << r.bracket.upper;
  EXPECT_TRUE(d.validate());
  if (!d.terms.empty()) { EXPECT_LE((represent(d) - c).cwiseAbs().maxCoeff(), 1e-12 * (1.0 + max_abs_entry(c))); }
  EXPECT_LE(r.bracket.upper, d.cost + 1e-12 * (1.0 + d.cost));
  EXPECT_LE(r.bracket.lower, d.cost + 1e-9);
}

}  // namespace

TEST(Represent, Examples) {
  const CMatrix a = random_matrix(3, Ensemble::kGaussian, 1);
  const auto d = HerzDecomposition::make(SchattenIndex(2.0), 3, {{a, all_ones(3)}});
  EXPECT_EQ(represent(d), a);
  const auto e = HerzDecomposition::make(SchattenIndex(2.0), 2, {{unit_matrix(2, 0, 0), unit_matrix(2, 0, 0)},
                                                                 {unit_matrix(2, 1, 1), unit_matrix(2, 1, 1)}});
  EXPECT_EQ(represent(e), CMatrix::Identity(2, 2));
  EXPECT_THROW(represent(HerzDecomposition::make(SchattenIndex(2.0), 2, {})), InputError);
  EXPECT_THROW(HerzDecomposition::make(SchattenIndex(2.0), 2, {{all_ones(2), all_ones(3)}}), InputError);
}

TEST(Represent, CostAndValidate) {
  auto d = HerzDecomposition::make(SchattenIndex(3.0), 2, {{hadamard2(), all_ones(2)}});
  EXPECT_NEAR(d.cost, schatten_norm(hadamard2(), SchattenIndex(3.0)) * 2.0, 1e-12);
  EXPECT_TRUE(d.validate());
  d.cost += 1.0;
  EXPECT_FALSE(d.validate());
}

TEST(Pairing, Examples) {
  EXPECT_EQ(pair_with_multiplier(all_ones(3), all_ones(3)), Complex(9.0));
  CMatrix c(2, 2);
  c << 1, -2, I, 0;
  EXPECT_EQ(pair_with_multiplier(CMatrix::Identity(2, 2), c), Complex(1.0));
  EXPECT_THROW(pair_with_multiplier(all_ones(2), all_ones(3)), InputError);
}

TEST(HerzNorm, ExactAtTwo) {
  CMatrix c(2, 2);
  c << 1, -2, I, 0;
  const auto r = herz_norm(c, SchattenIndex(2.0), quick());
  EXPECT_EQ(r.bracket.lower, 4.0);
  EXPECT_EQ(r.bracket.upper, 4.0);
  expect_sound(c, r);
}

TEST(HerzNorm, ExactAtTwoRandom) {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const CMatrix c = random_matrix(3, Ensemble::kGaussian, seed);
    const auto r = herz_norm(c, SchattenIndex(2.0), quick());
    EXPECT_NEAR(r.bracket.lower, entrywise_l1(c), 1e-12 * entrywise_l1(c));
    EXPECT_NEAR(r.bracket.upper, entrywise_l1(c), 1e-12 * entrywise_l1(c));
  }
}

TEST(HerzNorm, UnitMatrixIsOneEverywhere) {
  for (const auto& p : grid()) {
    const auto r = herz_norm(unit_matrix(3, 0, 0), p, quick());
    EXPECT_TRUE(r.bracket.contains(1.0, 1e-9)) << p.to_string();
    EXPECT_LE(r.best_decomposition.terms.size(), 1u);
    expect_sound(unit_matrix(3, 0, 0), r);
  }
}

TEST(HerzNorm, AllOnesAtOne) {
  const auto r = herz_norm(all_ones(2), SchattenIndex(1.0), quick());
  EXPECT_TRUE(r.bracket.contains(4.0, 1e-6)) << r.bracket.lower << " " << r.bracket.upper;
  expect_sound(all_ones(2), r);
}

TEST(HerzNorm, ZeroMatrix) {
  const auto r = herz_norm(CMatrix::Zero(3, 3), SchattenIndex(1.5), quick());
  EXPECT_EQ(r.bracket.lower, 0.0);
  EXPECT_EQ(r.bracket.upper, 0.0);
}

TEST(HerzNorm, Errors) {
  EXPECT_THROW(herz_norm(CMatrix::Ones(2, 3), SchattenIndex(1.0)), InputError);
  CMatrix c = all_ones(2);
  c(0, 1) = std::numeric_limits<double>::infinity();
  EXPECT_THROW(herz_norm(c, SchattenIndex(1.0)), InputError);
}

TEST(HerzNorm, SoundOnRandomInputs) {
  for (std::uint64_t seed = 0; seed < 4; ++seed) {
    const CMatrix c = random_matrix(3, Ensemble::kGaussian, seed + 30);
    for (const auto& p : grid()) {
      const auto r = herz_norm(c, p, quick());
      expect_sound(c, r);
      // max entry below, l1 above, for every p
      EXPECT_LE(max_abs_entry(c), r.bracket.upper + 1e-9);
      EXPECT_LE(r.bracket.upper, entrywise_l1(c) + 1e-9);
    }
  }
}

TEST(HerzNorm, DualFunctionalCertifiesLower) {
  const CMatrix c = random_matrix(3, Ensemble::kGaussian, 12);
  for (const auto& p : grid()) {
    const auto r = herz_norm(c, p, quick());
    const auto& f = r.dual_functional;
    if (f.kind == "phases") {
      const double v = std::abs((f.a.transpose() * c * f.b)(0, 0));
      EXPECT_GE(v, r.bracket.lower - 1e-9 * (1.0 + v));
      EXPECT_NEAR(f.a.cwiseAbs().maxCoeff(), 1.0, 1e-12);
      EXPECT_NEAR(f.b.cwiseAbs().maxCoeff(), 1.0, 1e-12);
    } else {
      ASSERT_TRUE(f.symbol.has_value());
      const double v = std::abs(pair_with_multiplier(*f.symbol, c)) / f.symbol_norm_upper;
      EXPECT_GE(v, r.bracket.lower - 1e-9 * (1.0 + v));
    }
  }
}

TEST(HerzNorm, ConjugateExponentSymmetry) {
  const CMatrix c = random_matrix(3, Ensemble::kGaussian, 5);
  const auto x = herz_norm(c, SchattenIndex(1.5), quick());
  const auto y = herz_norm(c, SchattenIndex(3.0), quick());
  EXPECT_NEAR(x.bracket.lower, y.bracket.lower, 1e-12 * (1.0 + x.bracket.lower));
  EXPECT_NEAR(x.bracket.upper, y.bracket.upper, 1e-12 * (1.0 + x.bracket.upper));
}

TEST(HerzNorm, OpenGapIsReported) {
  // this input keeps a visible gap at p = 1 under both budgets
  const CMatrix c = random_matrix(3, Ensemble::kGaussian, 51);
  const auto r = herz_norm(c, SchattenIndex(1.0), quick());
  EXPECT_GT(r.bracket.width(), 1e-6 * (1.0 + r.bracket.upper));
  EXPECT_FALSE(r.bracket.converged);
  EXPECT_TRUE(r.bracket.is_consistent());
  const auto closed = herz_norm(random_matrix(3, Ensemble::kGaussian, 50), SchattenIndex(1.0), quick());
  EXPECT_TRUE(closed.bracket.converged);
}

TEST(HerzNorm, SeedNeverWorse) {
  const CMatrix c = random_matrix(3, Ensemble::kGaussian, 8);
  const SchattenIndex p(1.5);
  const auto entry = detail::entrywise_decomposition(p, c);
  HerzOptions o = quick();
  o.rounds = 0;
  o.seeds = {entry};
  const auto r = herz_norm(c, p, o);
  EXPECT_LE(r.bracket.upper, entry.cost + 1e-12);
}

TEST(HerzNorm, SeedWithWrongShapeRejected) {
  HerzOptions o = quick();
  o.seeds = {detail::entrywise_decomposition(SchattenIndex(1.5), all_ones(2))};
  EXPECT_THROW(herz_norm(all_ones(3), SchattenIndex(1.5), o), InputError);
}

TEST(HerzNorm, DeterministicAcrossThreads) {
  const CMatrix c = random_matrix(3, Ensemble::kGaussian, 81);
  HerzOptions a = quick(), b = quick();
  a.random_seeds = b.random_seeds = 2;
  b.threads = 3;
  const auto x = herz_norm(c, SchattenIndex(1.5), a);
  const auto y = herz_norm(c, SchattenIndex(1.5), b);
  EXPECT_EQ(x.bracket.lower, y.bracket.lower);
  EXPECT_EQ(x.bracket.upper, y.bracket.upper);
}

TEST(HerzNorm, ScalesLinearly) {
  const CMatrix c = random_matrix(3, Ensemble::kGaussian, 17);
  const auto x = herz_norm(c, SchattenIndex(1.0), quick());
  const auto y = herz_norm(Complex(0.0, 2.0) * c, SchattenIndex(1.0), quick());
  EXPECT_LE(y.bracket.lower, 2.0 * x.bracket.upper + 1e-8);
  EXPECT_LE(2.0 * x.bracket.lower, y.bracket.upper + 1e-8);
}

TEST(Truncate, Examples) {
  const CMatrix a = random_matrix(3, Ensemble::kGaussian, 2);
  const CMatrix b = random_matrix(3, Ensemble::kGaussian, 3);
  const auto d = HerzDecomposition::make(SchattenIndex(1.5), 3, {{a, b}});
  const auto t = herz_truncate(d, {0, 2});
  EXPECT_EQ(t.represented, truncate(a.cwiseProduct(b), {0, 2}));
  EXPECT_LE(t.cost, d.cost + 1e-12);
  const auto all = herz_truncate(d, {0, 1, 2});
  EXPECT_EQ(all.represented, d.represented);
  EXPECT_TRUE(herz_truncate(d, {}).terms.empty());
}

TEST(Tensor, Examples) {
  const SchattenIndex p(3.0);
  const CMatrix c = random_matrix(2, Ensemble::kGaussian, 4);
  const CMatrix d = random_matrix(3, Ensemble::kGaussian, 5);
  const auto x = herz_norm(c, p, quick()).best_decomposition;
  const auto y = herz_norm(d, p, quick()).best_decomposition;
  const auto t = herz_tensor(x, y);
  EXPECT_EQ(t.dim, 6);
  EXPECT_EQ(t.terms.size(), x.terms.size() * y.terms.size());
  EXPECT_LE((t.represented - kron(c, d)).cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_NEAR(t.cost, x.cost * y.cost, 1e-10 * (1.0 + t.cost));
  EXPECT_THROW(herz_tensor(x, HerzDecomposition::make(SchattenIndex(1.5), 3, {})), InputError);
}

TEST(SchurProduct, Examples) {
  const SchattenIndex p(1.5);
  const CMatrix c = random_matrix(3, Ensemble::kGaussian, 6);
  const CMatrix d = random_matrix(3, Ensemble::kGaussian, 7);
  const auto x = herz_norm(c, p, quick()).best_decomposition;
  const auto y = herz_norm(d, p, quick()).best_decomposition;
  const auto s = herz_schur_product(x, y);
  EXPECT_LE((s.represented - c.cwiseProduct(d)).cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_LE(s.cost, x.cost * y.cost + 1e-9);
  EXPECT_THROW(herz_schur_product(x, HerzDecomposition::make(p, 2, {})), InputError);
}

TEST(DeltaStar, Examples) {
  const Eigen::Index n = 2;
  const BigIndex idx{n};
  CMatrix e = CMatrix::Zero(4, 4), f = CMatrix::Zero(4, 4);
  e(idx.pos(0, 1), idx.pos(1, 1)) = 3.0;
  f(idx.pos(0, 1), idx.pos(1, 1)) = I;
  e(idx.pos(1, 0), idx.pos(0, 0)) = 2.0;
  f(idx.pos(1, 0), idx.pos(0, 0)) = 5.0;
  e(idx.pos(0, 0), idx.pos(1, 1)) = 7.0;  // not on the (r,r) pattern
  f(idx.pos(0, 0), idx.pos(1, 1)) = 7.0;
  const CMatrix g = delta_star(e, f);
  EXPECT_EQ(g(0, 1), 3.0 * I);
  EXPECT_EQ(g(1, 0), Complex(10.0));
  EXPECT_EQ(g(0, 0), Complex(0.0));
  EXPECT_EQ(delta_star(all_ones(9), all_ones(9)), CMatrix::Constant(3, 3, 3.0));
  EXPECT_THROW(delta_star(all_ones(3), all_ones(3)), InputError);
}

TEST(EtaStar, Examples) {
  const BigIndex idx{2};
  const CMatrix e = random_matrix(4, Ensemble::kGaussian, 1);
  const CMatrix f = random_matrix(4, Ensemble::kGaussian, 2);
  const CMatrix g = eta_star(e, f);
  for (Eigen::Index i = 0; i < 2; ++i)
    for (Eigen::Index j = 0; j < 2; ++j)
      EXPECT_EQ(g(i, j), e(idx.pos(i, i), idx.pos(j, j)) * f(idx.pos(i, i), idx.pos(j, j)));
  EXPECT_EQ(eta_star(all_ones(4), all_ones(4)), all_ones(2));
  EXPECT_THROW(eta_star(all_ones(4), all_ones(9)), InputError);
}

TEST(Submultiplicativity, SchurAndMatrix) {
  for (std::uint64_t seed = 0; seed < 2; ++seed) {
    const CMatrix c = random_matrix(3, Ensemble::kGaussian, seed + 60);
    const CMatrix d = random_matrix(3, Ensemble::kGaussian, seed + 70);
    for (const auto& p : {SchattenIndex(1.0), SchattenIndex(1.5), SchattenIndex(2.0)}) {
      const auto s = submultiplicativity_check(c, d, p, ProductKind::kSchur, quick());
      EXPECT_TRUE(s.pass) << p.to_string() << " slack " << s.slack;
      ASSERT_TRUE(s.constructive_cost.has_value());
      EXPECT_LE(*s.representation_error, 1e-12);
      const auto m = submultiplicativity_check(c, d, p, ProductKind::kMatrix, quick());
      EXPECT_TRUE(m.pass) << p.to_string() << " slack " << m.slack;
      EXPECT_FALSE(m.constructive_cost.has_value());
    }
  }
}

TEST(Submultiplicativity, ParseProduct) {
  EXPECT_EQ(parse_product("schur"), ProductKind::kSchur);
  EXPECT_EQ(parse_product("matrix"), ProductKind::kMatrix);
  EXPECT_THROW(parse_product("kron"), InputError);
  EXPECT_THROW(matrix_product(all_ones(2), all_ones(3)), InputError);
}

TEST(HerzNorm, MonotoneInTermsBetweenOneAndTwo) {
  // p -> ||C||_{R_p} is not claimed monotone; both endpoints must still
  // bracket the values in between by max|c_ij| and sum|c_ij|.
  const CMatrix c = random_matrix(3, Ensemble::kGaussian, 90);
  for (double pv : {1.0, 1.25, 1.5, 1.75}) {
    const auto r = herz_norm(c, SchattenIndex(pv), quick());
    EXPECT_GE(r.bracket.upper, max_abs_entry(c) - 1e-12);
    EXPECT_LE(r.bracket.lower, entrywise_l1(c) + 1e-12);
  }
}

TEST(DecompositionJson, RoundTrip) {
  const CMatrix c = random_matrix(2, Ensemble::kGaussian, 3);
  const auto d = herz_norm(c, SchattenIndex(1.5), quick()).best_decomposition;
  const auto back = decomposition_from_json(decomposition_to_json(d));
  EXPECT_EQ(back.p, d.p);
  EXPECT_EQ(back.terms.size(), d.terms.size());
  EXPECT_LE((back.represented - d.represented).cwiseAbs().maxCoeff(), 1e-15);
  EXPECT_NEAR(back.cost, d.cost, 1e-12);
  Json bad = decomposition_to_json(d);
  bad["cost"] = d.cost + 1.0;
  EXPECT_THROW(decomposition_from_json(bad), InputError);
}
