// Schur multipliers M_A(B) = A * B on S_p: certified norm brackets, the
// amplification ladder, the averaging projection onto multipliers and the
// inclusion-monotonicity report.
#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "herzkit/core_linalg.hpp"
#include "herzkit/gamma2.hpp"
#include "herzkit/norm_bracket.hpp"
#include "herzkit/parallel.hpp"

namespace herzkit {

struct MultiplierSymbol {
  CMatrix symbol;
};

inline CMatrix apply(const MultiplierSymbol& m, const CMatrix& b) {
  require_same_shape(m.symbol, b, "apply");
  return m.symbol.cwiseProduct(b);
}

struct MultiplierOptions {
  int restarts = 64;
  int max_iter = 200;
  /// Stop an ascent once the relative gain drops below this.
  double tol = 1e-9;
  std::uint64_t seed = 0;
  int threads = 0;
  Gamma2Options gamma2;
  /// Extra starting points for the ascent (used by the cb ladder).
  std::vector<CMatrix> warm_starts;
};

/// Norming functional of X in the dual class: G with ||G||_{p*} = 1 and
/// Re Tr(G^* X) = ||X||_p. Returns zero for X = 0.
inline CMatrix duality_map(const CMatrix& x, const SchattenIndex& p) {
  const Eigen::Index rows = x.rows(), cols = x.cols();
  Eigen::JacobiSVD<CMatrix> svd(x, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const RVector s = svd.singularValues();
  if (s.size() == 0 || s[0] == 0.0) return CMatrix::Zero(rows, cols);
  RVector w(s.size());
  if (p.is_infinite()) {
    // Top singular pair; ties split evenly keep the result in the unit ball.
    w.setZero();
    w[0] = 1.0;
  } else if (p.is_one()) {
    for (Eigen::Index i = 0; i < s.size(); ++i) w[i] = s[i] > 1e-14 * s[0] ? 1.0 : 0.0;
  } else {
    const double q = p.value();
    const double norm = schatten_norm_from_singular_values(s, p);
    for (Eigen::Index i = 0; i < s.size(); ++i) {
      w[i] = std::pow(s[i] / norm, q - 1.0);
    }
  }
  return svd.matrixU() * w.asDiagonal() * svd.matrixV().adjoint();
}

struct AscentResult {
  double ratio = 0.0;
  CMatrix witness;
  int iterations = 0;
};

namespace detail {

/// Power-type ascent for sup ||A * B||_p / ||B||_p. Each step maps B to the
/// norming functional G of A * B, pulls it back through the adjoint
/// multiplier conj(A) * G, and returns to S_p by the dual norming map. The
/// ratio never decreases.
inline AscentResult multiplier_ascent(const CMatrix& a, const SchattenIndex& p,
                                      CMatrix b, int max_iter, double tol) {
  const SchattenIndex pstar = p.conjugate();
  AscentResult out;
  double nb = schatten_norm(b, p);
  if (nb == 0.0) return out;
  b /= nb;
  double value = schatten_norm(a.cwiseProduct(b), p);
  out.ratio = value;
  out.witness = b;
  for (int it = 0; it < max_iter; ++it) {
    out.iterations = it + 1;
    const CMatrix g = duality_map(a.cwiseProduct(b), p);
    const CMatrix z = a.conjugate().cwiseProduct(g);
    if (max_abs_entry(z) == 0.0) break;
    CMatrix next = duality_map(z, pstar);
    nb = schatten_norm(next, p);
    if (nb == 0.0) break;
    next /= nb;
    const double next_value = schatten_norm(a.cwiseProduct(next), p);
    if (next_value > out.ratio) {
      out.ratio = next_value;
      out.witness = next;
    }
    const bool stalled = next_value <= value * (1.0 + tol);
    b = std::move(next);
    value = next_value;
    if (stalled) break;
  }
  return out;
}

inline double ratio_at(const CMatrix& a, const CMatrix& b, const SchattenIndex& p) {
  const double nb = schatten_norm(b, p);
  return nb == 0.0 ? 0.0 : schatten_norm(a.cwiseProduct(b), p) / nb;
}

/// Restarted ascent: warm starts first, then the largest coordinate matrix,
/// then Gaussian starts. Reduction keeps the first maximum.
inline AscentResult restarted_ascent(const CMatrix& a, const SchattenIndex& p,
                                     const MultiplierOptions& opts,
                                     int* total_iterations = nullptr) {
  const Eigen::Index n = a.rows();
  const int warm = static_cast<int>(opts.warm_starts.size());
  const int count = warm + std::max(1, opts.restarts);
  Eigen::Index bi = 0, bj = 0;
  a.cwiseAbs().maxCoeff(&bi, &bj);
  const auto runs = parallel_map(count, opts.threads, [&](int r) {
    CMatrix start;
    if (r < warm) {
      start = opts.warm_starts[static_cast<std::size_t>(r)];
    } else if (r == warm) {
      start = unit_matrix(n, bi, bj);
    } else {
      auto rng = make_rng(opts.seed, 0x5eedULL + static_cast<std::uint64_t>(r));
      start = gaussian_matrix(n, n, rng);
    }
    return multiplier_ascent(a, p, start, opts.max_iter, opts.tol);
  });
  AscentResult best = runs.front();
  int iterations = 0;
  for (const auto& r : runs) {
    iterations += r.iterations;
    if (r.ratio > best.ratio) best = r;
  }
  if (total_iterations) *total_iterations = iterations;
  return best;
}

}  // namespace detail

/// Certified bracket for ||M_A||_{S_p -> S_p}.
///   p = 2:      max |a_ij|, exact.
///   p = 1, inf: gamma_2(A) with its PSD certificate.
///   otherwise:  restarted ascent below; interpolation between the p = 2 and
///               endpoint values above, theta = |1 - 2/p|.
inline NormBracket multiplier_norm(const CMatrix& a, const SchattenIndex& p,
                                   const MultiplierOptions& opts = {}) {
  require_square(a, "multiplier_norm");
  require_finite(a, "multiplier_norm");
  const Eigen::Index n = a.rows();
  Eigen::Index bi = 0, bj = 0;
  const double sup = n == 0 ? 0.0 : a.cwiseAbs().maxCoeff(&bi, &bj);
  if (sup == 0.0) {
    NormBracket b = NormBracket::exact(0.0, "zero symbol");
    return b;
  }
  if (p.is_two()) {
    NormBracket b = NormBracket::exact(sup, "max |a_ij| (S_2 multipliers are l_inf)");
    b.lower_certificate = "coordinate test matrix e_ij";
    b.witness = unit_matrix(n, bi, bj);
    return b;
  }
  if (p.is_one() || p.is_infinite()) {
    const Gamma2Result g = gamma2(a, opts.gamma2);
    NormBracket b = g.bracket;
    if (p.is_infinite()) {
      b.lower = g.operator_lower;
      b.witness = g.certificate.dual_witness;
      b.lower_certificate = "test matrix B, ||B||_inf <= 1";
    } else {
      b.lower = g.trace_lower;
      b.witness = g.trace_witness;
      b.lower_certificate = "rank-one test matrix in S_1";
    }
    for (const auto& w : opts.warm_starts) {
      const double r = detail::ratio_at(a, w, p);
      if (r > b.lower) {
        b.lower = r;
        b.witness = w;
      }
    }
    b.lower = std::min(b.lower, b.upper);
    b.converged = b.width() <= opts.gamma2.tol * (1.0 + b.upper);
    return b;
  }

  int iterations = 0;
  const AscentResult best = detail::restarted_ascent(a, p, opts, &iterations);
  const Gamma2Result g = gamma2(a, opts.gamma2);
  const double theta = std::abs(1.0 - 2.0 / p.value());
  NormBracket b;
  b.lower = best.ratio;
  b.witness = best.witness;
  b.lower_certificate = "test matrix B maximizing ||A*B||_p / ||B||_p";
  b.upper = std::pow(g.bracket.upper, theta) * std::pow(sup, 1.0 - theta);
  b.upper_certificate = "interpolation gamma2_upper^theta * max|a_ij|^(1-theta), theta = " +
                        std::to_string(theta);
  b.iterations = iterations + g.bracket.iterations;
  b.converged = b.width() <= 1e-6 * (1.0 + b.upper);
  return b;
}

/// Symbol of Id_{S_p^m} (x) M_A under the BigIndex convention: J_m (x) A.
inline CMatrix amplified_symbol(const CMatrix& a, Eigen::Index m) {
  return kron(all_ones(m), a);
}

/// Pads an (m-1)n test matrix into the top-left corner at level m; the
/// ratio at level m equals the ratio at level m-1.
inline CMatrix embed_witness(const CMatrix& b, Eigen::Index size) {
  CMatrix out = CMatrix::Zero(size, size);
  out.topLeftCorner(b.rows(), b.cols()) = b;
  return out;
}

/// Brackets for ||Id_{S_p^m} (x) M_A||, m = 1..m_max. Each level is seeded
/// with the previous witness, so the lower values never decrease.
inline std::vector<NormBracket> cb_norm_ladder(const CMatrix& a,
                                               const SchattenIndex& p,
                                               Eigen::Index m_max,
                                               const MultiplierOptions& opts = {}) {
  require_square(a, "cb_norm_ladder");
  if (m_max < 1) throw PreconditionError("cb_norm_ladder: m_max must be >= 1");
  const Eigen::Index n = a.rows();
  if (m_max * n > static_cast<Eigen::Index>(kMaxDimension)) {
    throw ResourceError("cb_norm_ladder: m_max * n = " + std::to_string(m_max * n) +
                        " exceeds 64");
  }
  if ((p.is_one() || p.is_infinite()) && m_max * n > kMaxGamma2Dimension) {
    throw ResourceError("cb_norm_ladder: gamma2 levels are limited to m_max * n <= 32");
  }
  std::vector<NormBracket> ladder;
  std::optional<CMatrix> previous;
  for (Eigen::Index m = 1; m <= m_max; ++m) {
    const CMatrix symbol = amplified_symbol(a, m);
    MultiplierOptions level = opts;
    level.warm_starts.clear();
    if (previous) level.warm_starts.push_back(embed_witness(*previous, m * n));
    NormBracket b = multiplier_norm(symbol, p, level);
    if (!ladder.empty() && b.lower < ladder.back().lower && previous) {
      // Floating-point ties: the embedded witness certifies the old value.
      const CMatrix w = embed_witness(*previous, m * n);
      b.lower = std::max(b.lower, detail::ratio_at(symbol, w, p));
      b.witness = w;
    }
    if (b.witness) previous = b.witness;
    ladder.push_back(std::move(b));
  }
  return ladder;
}

/// A linear map on S_p^n represented on column-major vectorizations:
/// vec(X)[r + s n] = x_rs.
struct LinearOperatorOnSp {
  Eigen::Index n = 0;
  CMatrix rep;

  static Eigen::Index vec_index(Eigen::Index n, Eigen::Index r, Eigen::Index s) {
    return r + s * n;
  }

  static LinearOperatorOnSp from_multiplier(const CMatrix& symbol) {
    require_square(symbol, "from_multiplier");
    const Eigen::Index n = symbol.rows();
    LinearOperatorOnSp t{n, CMatrix::Zero(n * n, n * n)};
    for (Eigen::Index s = 0; s < n; ++s) {
      for (Eigen::Index r = 0; r < n; ++r) {
        const Eigen::Index k = vec_index(n, r, s);
        t.rep(k, k) = symbol(r, s);
      }
    }
    return t;
  }

  static LinearOperatorOnSp transpose_map(Eigen::Index n) {
    LinearOperatorOnSp t{n, CMatrix::Zero(n * n, n * n)};
    for (Eigen::Index s = 0; s < n; ++s) {
      for (Eigen::Index r = 0; r < n; ++r) {
        t.rep(vec_index(n, s, r), vec_index(n, r, s)) = 1.0;
      }
    }
    return t;
  }

  static LinearOperatorOnSp random(Eigen::Index n, std::uint64_t seed) {
    auto rng = make_rng(seed, 0x0b5eULL);
    return {n, gaussian_matrix(n * n, n * n, rng)};
  }

  CMatrix apply(const CMatrix& x) const {
    if (x.rows() != n || x.cols() != n) throw InputError("operator: dimension mismatch");
    const CVector v = Eigen::Map<const CVector>(x.data(), n * n);
    const CVector out = rep * v;
    return Eigen::Map<const CMatrix>(out.data(), n, n);
  }

  void validate() const {
    if (rep.rows() != n * n || rep.cols() != n * n) {
      throw InputError("operator: representation must be n^2 x n^2");
    }
    require_finite(rep, "operator");
  }
};

/// Closed form of the averaging projection: d_rs = <T(e_rs), e_rs>.
inline MultiplierSymbol averaging_projection(const LinearOperatorOnSp& t) {
  t.validate();
  const Eigen::Index n = t.n;
  CMatrix d(n, n);
  for (Eigen::Index s = 0; s < n; ++s) {
    for (Eigen::Index r = 0; r < n; ++r) {
      const Eigen::Index k = LinearOperatorOnSp::vec_index(n, r, s);
      d(r, s) = t.rep(k, k);
    }
  }
  return {d};
}

/// (1/N^2) sum_{m,m'} M_{x,y} T conj(M_{x,y}) over the grid x = 2 pi m / N,
/// y = 2 pi m' / N, where M_{x,y} has symbol [e^{i x r} e^{i y s}].
inline LinearOperatorOnSp averaged_operator_grid(const LinearOperatorOnSp& t,
                                                 Eigen::Index grid) {
  t.validate();
  const Eigen::Index n = t.n;
  if (grid < n) {
    throw PreconditionError("averaging_projection_grid: N = " + std::to_string(grid) +
                            " is smaller than the dimension " + std::to_string(n));
  }
  const Eigen::Index dim = n * n;
  LinearOperatorOnSp out{n, CMatrix::Zero(dim, dim)};
  CVector phase(dim);
  for (Eigen::Index m = 0; m < grid; ++m) {
    for (Eigen::Index mp = 0; mp < grid; ++mp) {
      const double x = 2.0 * M_PI * static_cast<double>(m) / static_cast<double>(grid);
      const double y = 2.0 * M_PI * static_cast<double>(mp) / static_cast<double>(grid);
      for (Eigen::Index s = 0; s < n; ++s) {
        for (Eigen::Index r = 0; r < n; ++r) {
          phase[LinearOperatorOnSp::vec_index(n, r, s)] =
              std::polar(1.0, x * static_cast<double>(r) + y * static_cast<double>(s));
        }
      }
      out.rep.noalias() += phase.asDiagonal() * t.rep * phase.conjugate().asDiagonal();
    }
  }
  out.rep /= static_cast<double>(grid * grid);
  return out;
}

inline MultiplierSymbol averaging_projection_grid(const LinearOperatorOnSp& t,
                                                  Eigen::Index grid) {
  return averaging_projection(averaged_operator_grid(t, grid));
}

struct InclusionPair {
  SchattenIndex p{1.0};
  SchattenIndex q{1.0};
  double lower_q = 0.0;
  double upper_p = 0.0;
  double slack = 0.0;
};

struct InclusionReport {
  std::vector<InclusionPair> pairs;
  std::vector<NormBracket> brackets;
  std::vector<SchattenIndex> ps;
  bool pass = true;
};

/// For p <= q in [1, 2]: lower(q) <= upper(p) + tol (1 + upper(p)).
inline InclusionReport inclusion_monotonicity_report(const CMatrix& a,
                                                     std::vector<SchattenIndex> ps,
                                                     const MultiplierOptions& opts = {},
                                                     double tol = 1e-6) {
  for (const auto& p : ps) {
    if (p.value() > 2.0) {
      throw PreconditionError("inclusion_monotonicity_report: p = " + p.to_string() +
                              " exceeds 2; pass its conjugate instead");
    }
  }
  std::sort(ps.begin(), ps.end());
  ps.erase(std::unique(ps.begin(), ps.end()), ps.end());
  InclusionReport report;
  report.ps = ps;
  for (const auto& p : ps) report.brackets.push_back(multiplier_norm(a, p, opts));
  for (std::size_t i = 0; i < ps.size(); ++i) {
    for (std::size_t j = i + 1; j < ps.size(); ++j) {
      InclusionPair pair{ps[i], ps[j], report.brackets[j].lower,
                         report.brackets[i].upper, 0.0};
      pair.slack = pair.upper_p - pair.lower_q;
      if (pair.slack < -rel_tol(tol, pair.upper_p)) report.pass = false;
      report.pairs.push_back(pair);
    }
  }
  return report;
}

}  // namespace herzkit
