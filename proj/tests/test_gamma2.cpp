#include <gtest/gtest.h>

#include "herzkit/gamma2.hpp"

using namespace herzkit;

namespace {

Gamma2Options quick() {
  Gamma2Options o;
  o.restarts = 12;
  return o;
}

// max over unit x, y of ||diag(x) A diag(y)||_1 on an angle grid, 2x2 only.
double trace_grid_oracle(const CMatrix& a, int steps) {
  double best = 0.0;
  for (int s = 0; s <= steps; ++s) {
    const double u = 0.5 * M_PI * s / steps;
    for (int t = 0; t <= steps; ++t) {
      const double v = 0.5 * M_PI * t / steps;
      CMatrix d = a;
      const double x[2] = {std::cos(u), std::sin(u)};
      const double y[2] = {std::cos(v), std::sin(v)};
      for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) d(i, j) *= x[i] * y[j];
      best = std::max(best, schatten_norm(d, SchattenIndex(1.0)));
    }
  }
  return best;
}

void expect_sound(const CMatrix& a, const Gamma2Result& r) {
  EXPECT_TRUE(r.bracket.is_consistent());
  const auto check = check_certificate(a, r.certificate);
  EXPECT_TRUE(check.ok) << (check.reasons.empty() ? "" : check.reasons.front());
  EXPECT_LE(r.bracket.upper, r.certificate.t + 1e-12);
  EXPECT_GE(r.bracket.lower, a.cwiseAbs().maxCoeff() - 1e-12);
  EXPECT_LE(r.bracket.width(), 1e-6 * (1.0 + r.bracket.upper) + 1e-9);
}

}  // namespace

TEST(Gamma2, RankOneUnimodular) {
  for (std::uint64_t seed = 0; seed < 4; ++seed) {
    auto rng = make_rng(seed, 3);
    const CVector x = unimodular_vector(4, rng), y = unimodular_vector(4, rng);
    const CMatrix a = x * y.transpose();
    const auto r = gamma2(a, quick());
    EXPECT_TRUE(r.bracket.contains(1.0, 1e-9));
    expect_sound(a, r);
  }
}

TEST(Gamma2, Identity) {
  for (Eigen::Index n : {1, 3, 6}) {
    const CMatrix a = CMatrix::Identity(n, n);
    const auto r = gamma2(a, quick());
    EXPECT_TRUE(r.bracket.contains(1.0, 1e-9));
    expect_sound(a, r);
  }
}

TEST(Gamma2, HadamardIsSqrtTwo) {
  const auto r = gamma2(hadamard2(), quick());
  EXPECT_TRUE(r.bracket.contains(std::sqrt(2.0), 1e-6));
  EXPECT_NEAR(trace_grid_oracle(hadamard2(), 400), std::sqrt(2.0), 1e-6);
  EXPECT_TRUE(r.bracket.contains(trace_grid_oracle(hadamard2(), 400), 1e-6));
  expect_sound(hadamard2(), r);
}

TEST(Gamma2, AgreesWithGridOracleOn2x2) {
  for (std::uint64_t seed = 0; seed < 6; ++seed) {
    CMatrix a = random_matrix(2, Ensemble::kGaussian, seed).real().cast<Complex>();
    const auto r = gamma2(a, quick());
    const double oracle = trace_grid_oracle(a, 600);
    // The grid only visits nonnegative real scalings, so it is a lower estimate.
    EXPECT_LE(oracle, r.bracket.upper + 1e-9);
    expect_sound(a, r);
  }
}

TEST(Gamma2, ZeroAndScalar) {
  const auto z = gamma2(CMatrix::Zero(3, 3), quick());
  EXPECT_EQ(z.bracket.lower, 0.0);
  EXPECT_LE(z.bracket.upper, 1e-12);
  const auto one = gamma2(CMatrix::Constant(1, 1, Complex(0.0, -3.0)), quick());
  EXPECT_TRUE(one.bracket.contains(3.0, 1e-9));
}

TEST(Gamma2, DiagonalSymbolIsMaxEntry) {
  CMatrix a = CMatrix::Zero(4, 4);
  a.diagonal() << 1.0, Complex(0.0, -2.5), 0.5, -1.0;
  const auto r = gamma2(a, quick());
  EXPECT_TRUE(r.bracket.contains(2.5, 1e-6));
  expect_sound(a, r);
}

TEST(Gamma2, UnitMatrix) {
  const auto r = gamma2(unit_matrix(3, 1, 2), quick());
  EXPECT_TRUE(r.bracket.contains(1.0, 1e-9));
}

TEST(Gamma2, RandomCertificatesRecheck) {
  for (std::uint64_t seed = 0; seed < 6; ++seed) {
    const CMatrix a = random_matrix(2 + seed % 4, Ensemble::kGaussian, seed);
    const auto r = gamma2(a, quick());
    expect_sound(a, r);
    EXPECT_LE(r.bracket.lower, schatten_norm(a, SchattenIndex::infinity()) + 1e-9);
    ASSERT_GT(r.trace_witness.norm(), 0.0);
    const double ratio = schatten_norm(a.cwiseProduct(r.trace_witness), SchattenIndex(1.0)) /
                         schatten_norm(r.trace_witness, SchattenIndex(1.0));
    EXPECT_GE(ratio, r.trace_lower - 1e-9);
  }
}

TEST(Gamma2, NormProperties) {
  const CMatrix a = random_matrix(3, Ensemble::kGaussian, 40);
  const CMatrix b = random_matrix(3, Ensemble::kGaussian, 41);
  const auto ga = gamma2(a, quick()).bracket;
  const auto gb = gamma2(b, quick()).bracket;
  const auto gs = gamma2(a + b, quick()).bracket;
  EXPECT_LE(gs.lower, ga.upper + gb.upper + 1e-9);
  const auto g3 = gamma2(Complex(0.0, 3.0) * a, quick()).bracket;
  EXPECT_LE(g3.lower, 3.0 * ga.upper + 1e-8);
  EXPECT_GE(g3.upper, 3.0 * ga.lower - 1e-8);
  const auto gt = gamma2(a.transpose(), quick()).bracket;
  EXPECT_LE(gt.lower, ga.upper + 1e-8);
  EXPECT_LE(ga.lower, gt.upper + 1e-8);
}

TEST(Gamma2, SchurSubmultiplicative) {
  for (std::uint64_t seed = 0; seed < 4; ++seed) {
    const CMatrix a = random_matrix(3, Ensemble::kGaussian, seed);
    const CMatrix b = random_matrix(3, Ensemble::kSign, seed + 100);
    const auto gab = gamma2(a.cwiseProduct(b), quick()).bracket;
    EXPECT_LE(gab.lower, gamma2(a, quick()).bracket.upper * gamma2(b, quick()).bracket.upper + 1e-8);
  }
}

TEST(Gamma2, TruncationMonotone) {
  const CMatrix a = random_matrix(5, Ensemble::kGaussian, 9);
  EXPECT_LE(gamma2(truncate(a, {1, 3, 4}), quick()).bracket.lower, gamma2(a, quick()).bracket.upper + 1e-8);
}

TEST(CheckCertificate, ValidForAllOnes) {
  const auto r = gamma2(all_ones(3), quick());
  EXPECT_TRUE(check_certificate(all_ones(3), r.certificate).ok);
  EXPECT_TRUE(r.bracket.contains(1.0, 1e-9));
}

TEST(CheckCertificate, InflatedDiagonalRejected) {
  auto cert = gamma2(all_ones(3), quick()).certificate;
  cert.P(0, 0) += 1.0;
  const auto check = check_certificate(all_ones(3), cert);
  EXPECT_FALSE(check.ok);
  EXPECT_FALSE(check.reasons.empty());
}

TEST(CheckCertificate, NegativeMinEigRejected) {
  auto cert = gamma2(all_ones(3), quick()).certificate;
  cert.min_eig = -1.0;
  EXPECT_FALSE(check_certificate(all_ones(3), cert).ok);
}

TEST(CheckCertificate, WrongShapeAndNonFinite) {
  auto cert = gamma2(all_ones(3), quick()).certificate;
  EXPECT_FALSE(check_certificate(all_ones(2), cert).ok);
  cert.Q(1, 1) = std::nan("");
  EXPECT_FALSE(check_certificate(all_ones(3), cert).ok);
}

TEST(CheckCertificate, CertificateForOtherSymbolRejected) {
  const auto cert = gamma2(all_ones(2), quick()).certificate;
  EXPECT_FALSE(check_certificate(3.0 * hadamard2(), cert).ok);
}

TEST(Gamma2, Errors) {
  EXPECT_THROW(gamma2(all_ones(33), quick()), ResourceError);
  EXPECT_THROW(gamma2(CMatrix::Ones(2, 3), quick()), InputError);
}

TEST(Gamma2, DeterministicForSeed) {
  const CMatrix a = random_matrix(4, Ensemble::kGaussian, 77);
  Gamma2Options x = quick(), y = quick();
  y.threads = 3;
  EXPECT_EQ(gamma2(a, x).bracket.lower, gamma2(a, y).bracket.lower);
  EXPECT_EQ(gamma2(a, x).bracket.upper, gamma2(a, y).bracket.upper);
}
