// Isometric Schur multipliers: classification as rank-one unimodular
// symbols a b^T, forward checks, witnesses for non-isometry, and the exact
// finite decomposition of any symbol into isometric ones over (Z_n)^2.
#pragma once

#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "herzkit/core_linalg.hpp"
#include "herzkit/multiplier.hpp"

namespace herzkit {

enum class IsometryFailure { kNone, kZeroEntry, kNotRankOneUnimodular };

inline std::string to_string(IsometryFailure f) {
  switch (f) {
    case IsometryFailure::kNone: return "none";
    case IsometryFailure::kZeroEntry: return "zero_entry";
    case IsometryFailure::kNotRankOneUnimodular: return "not_rank_one_unimodular";
  }
  return "unknown";
}

struct IsometryVerdict {
  bool isometric = false;
  /// Present when the symbol factors as a b^T with unimodular a, b.
  std::optional<CVector> a;
  std::optional<CVector> b;
  IsometryFailure failure_reason = IsometryFailure::kNone;
};

namespace detail {

inline Complex unit_phase(Complex z) {
  const double r = std::abs(z);
  return r == 0.0 ? Complex(1.0, 0.0) : z / r;
}

}  // namespace detail

/// Isometric on S_p for p != 2 iff every |c_ij| = 1 and C has numerical
/// rank one (sigma_2 / sigma_1 <= tol). With `p2_regime` only the
/// unimodularity of the entries is required.
inline IsometryVerdict classify_isometric(const CMatrix& c, double tol = 1e-8,
                                          bool p2_regime = false) {
  require_square(c, "classify_isometric");
  require_finite(c, "classify_isometric");
  const Eigen::Index n = c.rows();
  IsometryVerdict v;
  if (n == 0) {
    v.failure_reason = IsometryFailure::kZeroEntry;
    return v;
  }
  const Eigen::ArrayXXd mod = c.cwiseAbs().array();
  if (mod.minCoeff() <= tol) {
    v.failure_reason = IsometryFailure::kZeroEntry;
    return v;
  }
  if ((mod - 1.0).abs().maxCoeff() > tol) {
    v.failure_reason = IsometryFailure::kNotRankOneUnimodular;
    return v;
  }
  const RVector sv = singular_values(c);
  const bool rank_one = n == 1 || sv[1] <= tol * sv[0];
  if (!rank_one && !p2_regime) {
    v.failure_reason = IsometryFailure::kNotRankOneUnimodular;
    return v;
  }
  if (rank_one) {
    // Anchor on (0, 0); fall back to the largest entry if it is tiny.
    Eigen::Index ai = 0, aj = 0;
    if (std::abs(c(0, 0)) <= tol) c.cwiseAbs().maxCoeff(&ai, &aj);
    const Complex anchor = c(ai, aj);
    CVector a(n), b(n);
    for (Eigen::Index j = 0; j < n; ++j) b[j] = detail::unit_phase(c(ai, j));
    for (Eigen::Index i = 0; i < n; ++i) {
      a[i] = detail::unit_phase(c(i, aj) / anchor);
    }
    if ((a * b.transpose() - c).cwiseAbs().maxCoeff() > std::max(1e-10, 10.0 * tol)) {
      if (!p2_regime) {
        v.failure_reason = IsometryFailure::kNotRankOneUnimodular;
        return v;
      }
    } else {
      v.a = a;
      v.b = b;
    }
  }
  v.isometric = true;
  return v;
}

struct ForwardCheckReport {
  SchattenIndex p{1.0};
  int trials = 0;
  double max_deviation = 0.0;
  bool pass = true;
};

/// |‖C*B‖_p - ‖B‖_p| <= 1e-10 (1 + ‖B‖_p) on random B; C*B equals
/// diag(a) B diag(b), a unitary conjugation.
inline ForwardCheckReport isometry_forward_check(const CMatrix& c,
                                                 const SchattenIndex& p, int trials,
                                                 std::uint64_t seed) {
  const IsometryVerdict v = classify_isometric(c);
  if (!v.isometric) {
    throw InputError("isometry_forward_check: symbol is not isometric (" +
                     to_string(v.failure_reason) + ")");
  }
  ForwardCheckReport r;
  r.p = p;
  r.trials = trials;
  auto rng = make_rng(seed, 0xf0dULL);
  for (int k = 0; k < trials; ++k) {
    const CMatrix b = gaussian_matrix(c.rows(), c.cols(), rng);
    const double nb = schatten_norm(b, p);
    const double dev = std::abs(schatten_norm(c.cwiseProduct(b), p) - nb);
    r.max_deviation = std::max(r.max_deviation, dev / (1.0 + nb));
    if (dev > rel_tol(1e-10, nb)) r.pass = false;
  }
  return r;
}

struct WitnessResult {
  /// Unit test matrix in S_p.
  CMatrix b;
  /// |‖C*B‖_p - 1| at the returned witness.
  double deviation = 0.0;
  /// Best ‖C*B‖_p / ‖B‖_p found from above and below.
  double best_ratio_up = 0.0;
  double best_ratio_down = 0.0;
  double p_distance_from_2 = 0.0;
};

/// Maximizes |‖C*B‖_p - ‖B‖_p| over ‖B‖_p = 1. Candidates: coordinate
/// matrices (a zero entry gives deviation 1), ascent on M_C from above, and,
/// when C has no zero entry, ascent on M_{1/C} whose witness B' yields
/// B = B' / C with ‖C*B‖ / ‖B‖ = 1 / ratio.
inline WitnessResult isometry_witness_search(const CMatrix& c, const SchattenIndex& p,
                                             std::uint64_t seed,
                                             const MultiplierOptions& base = {}) {
  require_square(c, "isometry_witness_search");
  require_finite(c, "isometry_witness_search");
  if (p.is_two()) {
    throw PreconditionError("isometry_witness_search: p = 2 is excluded");
  }
  const Eigen::Index n = c.rows();
  MultiplierOptions opts = base;
  opts.seed = seed;
  WitnessResult out;
  out.p_distance_from_2 = std::abs(p.value() - 2.0);
  out.b = unit_matrix(n, 0, 0);
  out.best_ratio_up = out.best_ratio_down = std::abs(c(0, 0));
  out.deviation = std::abs(std::abs(c(0, 0)) - 1.0);
  auto consider = [&](const CMatrix& b) {
    const double nb = schatten_norm(b, p);
    if (nb == 0.0) return;
    const CMatrix unit = b / nb;
    const double ratio = schatten_norm(c.cwiseProduct(unit), p);
    out.best_ratio_up = std::max(out.best_ratio_up, ratio);
    out.best_ratio_down = std::min(out.best_ratio_down, ratio);
    const double dev = std::abs(ratio - 1.0);
    if (dev > out.deviation) {
      out.deviation = dev;
      out.b = unit;
    }
  };
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) consider(unit_matrix(n, i, j));
  }
  consider(detail::restarted_ascent(c, p, opts).witness);
  if (c.cwiseAbs().minCoeff() > 0.0) {
    const CMatrix inverse = c.cwiseInverse();
    const AscentResult up = detail::restarted_ascent(inverse, p, opts);
    if (up.witness.size() > 0) consider(inverse.cwiseProduct(up.witness));
  }
  return out;
}

struct DftTerm {
  Complex coefficient;
  Eigen::Index k = 0;
  Eigen::Index l = 0;
  CVector a;
  CVector b;

  CMatrix symbol() const { return a * b.transpose(); }
};

namespace detail {

/// omega^m with omega = e^{2 pi i / n}, reduced mod n so the value is
/// computed from an angle in [0, 2 pi).
inline Complex root_of_unity(Eigen::Index n, Eigen::Index m) {
  const Eigen::Index r = ((m % n) + n) % n;
  return std::polar(1.0, 2.0 * M_PI * static_cast<double>(r) / static_cast<double>(n));
}

}  // namespace detail

/// C = sum_{k,l} chat_kl a^(k) (b^(l))^T with a^(k)_i = omega^{ik},
/// b^(l)_j = omega^{jl} and chat_kl = n^{-2} sum_ij c_ij omega^{-ik} omega^{-jl}.
inline std::vector<DftTerm> dft_decompose(const CMatrix& c) {
  require_square(c, "dft_decompose");
  require_finite(c, "dft_decompose");
  const Eigen::Index n = c.rows();
  if (n < 1) throw InputError("dft_decompose: empty matrix");
  CMatrix f(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index k = 0; k < n; ++k) f(i, k) = detail::root_of_unity(n, i * k);
  }
  // chat = n^{-2} F^* C conj(F), with F symmetric.
  const CMatrix chat = f.adjoint() * c * f.conjugate() / static_cast<double>(n * n);
  std::vector<DftTerm> terms;
  terms.reserve(static_cast<std::size_t>(n * n));
  for (Eigen::Index k = 0; k < n; ++k) {
    for (Eigen::Index l = 0; l < n; ++l) {
      terms.push_back({chat(k, l), k, l, f.col(k), f.col(l)});
    }
  }
  return terms;
}

inline CMatrix dft_reconstruct(const std::vector<DftTerm>& terms, Eigen::Index n) {
  CMatrix out = CMatrix::Zero(n, n);
  for (const auto& t : terms) out += t.coefficient * t.symbol();
  return out;
}

/// Averages S(a,b) = sum a_i b_j c_ij over the four sign patterns
/// (1,1), (1,b'), (a',1), (a',b'), where a' = -1 off i0 and +1 at i0
/// (likewise b'). The result is c_{i0 j0}.
inline Complex four_point_extraction(const CMatrix& c, Eigen::Index i0, Eigen::Index j0) {
  require_square(c, "four_point_extraction");
  const Eigen::Index n = c.rows();
  if (i0 < 0 || j0 < 0 || i0 >= n || j0 >= n) {
    throw InputError("four_point_extraction: index out of range");
  }
  const CVector ones = CVector::Ones(n);
  CVector ap = -ones, bp = -ones;
  ap[i0] = 1.0;
  bp[j0] = 1.0;
  auto s = [&](const CVector& a, const CVector& b) -> Complex {
    return (a.transpose() * c * b)(0, 0);
  };
  return 0.25 * (s(ones, ones) + s(ones, bp) + s(ap, ones) + s(ap, bp));
}

}  // namespace herzkit
