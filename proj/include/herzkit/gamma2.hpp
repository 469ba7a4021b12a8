// Certified gamma_2 (Haagerup) norm: the Schur multiplier norm on S_inf,
// equal to the one on S_1.
//
// Upper side: a feasible point of
//     [[P, A], [A^*, Q]] >= 0,  diag(P) <= t,  diag(Q) <= t.
// Candidates are closed forms (identity, polar), the factorization read off
// the best dual point, and a log-barrier Newton solve; each is repaired by a
// diagonal shift until an exact eigenvalue check certifies it.
//
// Lower side: unimodular-phase alternating ascent. For unit vectors x, y
// and M = diag(conj x) A diag(y) = U S V^*, the matrix B = conj(U V^*) has
// ||B||_inf <= 1 and ||A * B||_inf >= ||M||_1, while the rank-one matrix
// conj(x) y^T witnesses ||A * (conj(x) y^T)||_1 = ||M||_1 on S_1.
#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "herzkit/core_linalg.hpp"
#include "herzkit/norm_bracket.hpp"
#include "herzkit/parallel.hpp"

namespace herzkit {

inline constexpr Eigen::Index kMaxGamma2Dimension = 32;

struct Gamma2Options {
  double tol = 1e-6;
  int restarts = 32;
  int ascent_iterations = 200;
  std::uint64_t seed = 0;
  int threads = 0;
};

struct Gamma2Certificate {
  double t = 0.0;
  CMatrix P;
  CMatrix Q;
  double min_eig = 0.0;
  CMatrix dual_witness;
};

struct Gamma2Result {
  NormBracket bracket;
  Gamma2Certificate certificate;
  /// Rank-one S_1 test matrix conj(x) y^T and its certified ratio.
  CMatrix trace_witness;
  double trace_lower = 0.0;
  /// ||A * dual_witness||_inf / ||dual_witness||_inf.
  double operator_lower = 0.0;
};

struct CertificateCheck {
  bool ok = true;
  std::vector<std::string> reasons;
};

namespace detail {

inline CMatrix psd_block(const CMatrix& p, const CMatrix& a, const CMatrix& q) {
  const Eigen::Index n = a.rows();
  CMatrix z(2 * n, 2 * n);
  z.topLeftCorner(n, n) = p;
  z.topRightCorner(n, n) = a;
  z.bottomLeftCorner(n, n) = a.adjoint();
  z.bottomRightCorner(n, n) = q;
  return z;
}

inline CMatrix hermitian_part(const CMatrix& h) { return 0.5 * (h + h.adjoint()); }

inline double max_diag(const CMatrix& h) {
  return h.size() == 0 ? 0.0 : h.diagonal().real().maxCoeff();
}

struct DualAscentResult {
  double operator_value = 0.0;
  CMatrix operator_witness;
  double trace_value = 0.0;
  CMatrix trace_witness;
  CVector trace_x;
  CVector trace_y;
  int iterations = 0;
};

inline DualAscentResult gamma2_dual_restart(const CMatrix& a, int restart,
                                            const Gamma2Options& opts) {
  const Eigen::Index n = a.rows();
  auto rng = make_rng(opts.seed, 0x6a32ULL + static_cast<std::uint64_t>(restart));
  CVector x, y;
  if (restart == 0) {
    x = CVector::Constant(n, 1.0 / std::sqrt(static_cast<double>(n)));
    y = x;
  } else {
    x = gaussian_matrix(n, 1, rng).col(0).normalized();
    y = gaussian_matrix(n, 1, rng).col(0).normalized();
  }
  DualAscentResult best;
  best.operator_witness = CMatrix::Identity(n, n);
  best.trace_witness = CMatrix::Zero(n, n);
  double previous = -1.0;
  for (int it = 0; it < opts.ascent_iterations; ++it) {
    const CMatrix m = x.conjugate().asDiagonal() * a * y.asDiagonal();
    Eigen::JacobiSVD<CMatrix> svd_m(m, Eigen::ComputeFullU | Eigen::ComputeFullV);
    const double trace_value = svd_m.singularValues().sum();
    if (trace_value > best.trace_value) {
      best.trace_value = trace_value;
      best.trace_witness = x.conjugate() * y.transpose();
      best.trace_x = x;
      best.trace_y = y;
    }
    const CMatrix b = (svd_m.matrixU() * svd_m.matrixV().adjoint()).conjugate();
    Eigen::JacobiSVD<CMatrix> svd_y(a.cwiseProduct(b),
                                    Eigen::ComputeFullU | Eigen::ComputeFullV);
    const double b_norm = singular_values(b)[0];
    const double value = svd_y.singularValues()[0] / b_norm;
    if (value > best.operator_value) {
      best.operator_value = value;
      best.operator_witness = b / b_norm;
    }
    best.iterations = it + 1;
    x = svd_y.matrixU().col(0);
    y = svd_y.matrixV().col(0);
    if (value <= previous * (1.0 + 1e-13)) break;
    previous = value;
  }
  return best;
}

struct PrimalPoint {
  double t = 0.0;
  CMatrix P;
  CMatrix Q;
  double min_eig = 0.0;
};

/// Shifts P and Q by the PSD deficit and recomputes the exact minimum
/// eigenvalue of the repaired block.
inline PrimalPoint repair(const CMatrix& a, CMatrix p, CMatrix q) {
  const Eigen::Index n = a.rows();
  p = hermitian_part(p);
  q = hermitian_part(q);
  double lambda = min_hermitian_eigenvalue(psd_block(p, a, q));
  PrimalPoint out;
  for (int attempt = 0; attempt < 4 && lambda < 0.0; ++attempt) {
    const double shift = -lambda * (1.0 + 1e-12) + 1e-15;
    p += shift * CMatrix::Identity(n, n);
    q += shift * CMatrix::Identity(n, n);
    lambda = min_hermitian_eigenvalue(psd_block(p, a, q));
  }
  out.P = std::move(p);
  out.Q = std::move(q);
  out.min_eig = lambda;
  out.t = std::max(max_diag(out.P), max_diag(out.Q));
  return out;
}

/// Rescales (P, Q) -> (cP, Q/c) to equalize the largest diagonals; the
/// block stays PSD because it is congruent to the original.
inline PrimalPoint balance(const CMatrix& a, const PrimalPoint& pt) {
  const double dp = max_diag(pt.P);
  const double dq = max_diag(pt.Q);
  if (dp <= 0.0 || dq <= 0.0) return pt;
  const double c = std::sqrt(dq / dp);
  return repair(a, c * pt.P, pt.Q / c);
}

/// Polar-type certificate P = (A A^*)^{1/2}, Q = (A^* A)^{1/2}; exact for
/// rank-one unimodular symbols.
inline PrimalPoint polar_certificate(const CMatrix& a) {
  Eigen::JacobiSVD<CMatrix> svd(a, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const RVector s = svd.singularValues();
  const CMatrix p = svd.matrixU() * s.asDiagonal() * svd.matrixU().adjoint();
  const CMatrix q = svd.matrixV() * s.asDiagonal() * svd.matrixV().adjoint();
  return balance(a, repair(a, p, q));
}

inline PrimalPoint identity_certificate(const CMatrix& a) {
  const Eigen::Index n = a.rows();
  const double s = singular_values(a)[0];
  return repair(a, s * CMatrix::Identity(n, n), s * CMatrix::Identity(n, n));
}

/// Factorization certificate read off a dual point. With
/// M = diag(conj x) A diag(y) = U S V^*, the factors
///   X = diag(conj x)^{-1} U S^{1/2},  Y = diag(conj y)^{-1} V S^{1/2}
/// satisfy X Y^* = A, so P = X X^*, Q = Y Y^* make the block PSD. At a
/// stationary dual point every diagonal entry equals ||M||_1.
inline PrimalPoint factorization_certificate(const CMatrix& a, const CVector& x,
                                             const CVector& y) {
  const Eigen::Index n = a.rows();
  const double floor = 1e-150;
  if (x.size() != n || y.size() != n || x.cwiseAbs().minCoeff() < floor ||
      y.cwiseAbs().minCoeff() < floor) {
    return identity_certificate(a);
  }
  const CMatrix m = x.conjugate().asDiagonal() * a * y.asDiagonal();
  Eigen::JacobiSVD<CMatrix> svd(m, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const RVector root = svd.singularValues().cwiseSqrt();
  const CMatrix xf =
      x.conjugate().cwiseInverse().asDiagonal() * svd.matrixU() * root.asDiagonal();
  const CMatrix yf =
      y.conjugate().cwiseInverse().asDiagonal() * svd.matrixV() * root.asDiagonal();
  return balance(a, repair(a, xf * xf.adjoint(), yf * yf.adjoint()));
}



/// Log-barrier Newton method for
///   min t  s.t.  Z = [[P, A], [A^*, Q]] > 0,  t - P_aa > 0,  t - Q_bb > 0.
/// P and Q are parameterized by the real coordinates of a Hermitian basis.
/// Every iterate is strictly feasible, so the returned point is a valid
/// certificate whatever the stopping state; the barrier parameter bounds the
/// remaining gap by 4 n mu.
class BarrierSolver {
 public:
  BarrierSolver(const CMatrix& a, const Gamma2Options& opts) : a_(a), opts_(opts) {
    n_ = a.rows();
    const Eigen::Index dim = 2 * n_;
    for (int block = 0; block < 2; ++block) {
      const Eigen::Index off = block * n_;
      for (Eigen::Index r = 0; r < n_; ++r) {
        basis_.push_back({{off + r, off + r, Complex(1.0, 0.0)}});
        for (Eigen::Index c = r + 1; c < n_; ++c) {
          basis_.push_back({{off + r, off + c, Complex(1.0, 0.0)},
                            {off + c, off + r, Complex(1.0, 0.0)}});
          basis_.push_back({{off + r, off + c, Complex(0.0, 1.0)},
                            {off + c, off + r, Complex(0.0, -1.0)}});
        }
      }
    }
    (void)dim;
  }

  PrimalPoint solve(int* newton_steps) {
    const double sigma = singular_values(a_)[0];
    const double s0 = 1.1 * sigma + 1e-300;
    coords_ = RVector::Zero(static_cast<Eigen::Index>(basis_.size()));
    for (std::size_t k = 0; k < basis_.size(); ++k) {
      const auto& g = basis_[k];
      if (g.size() == 1) coords_[static_cast<Eigen::Index>(k)] = s0;
    }
    t_ = 1.2 * s0;
    double mu = t_ / static_cast<double>(4 * n_);
    const double target = 0.05 * opts_.tol;
    int steps = 0;
    for (int outer = 0; outer < 40; ++outer) {
      for (int inner = 0; inner < 60; ++inner) {
        ++steps;
        if (!newton_step(mu)) break;
      }
      if (4.0 * static_cast<double>(n_) * mu <= target * (1.0 + t_)) break;
      mu *= 0.2;
    }
    if (newton_steps) *newton_steps = steps;
    const CMatrix z = assemble(coords_);
    return repair(a_, z.topLeftCorner(n_, n_), z.bottomRightCorner(n_, n_));
  }

 private:
  struct Entry {
    Eigen::Index row;
    Eigen::Index col;
    Complex coef;
  };
  using Direction = std::vector<Entry>;

  CMatrix assemble(const RVector& coords) const {
    CMatrix z = CMatrix::Zero(2 * n_, 2 * n_);
    z.topRightCorner(n_, n_) = a_;
    z.bottomLeftCorner(n_, n_) = a_.adjoint();
    for (std::size_t k = 0; k < basis_.size(); ++k) {
      for (const auto& e : basis_[k]) {
        z(e.row, e.col) += coords[static_cast<Eigen::Index>(k)] * e.coef;
      }
    }
    return z;
  }

  // Barrier objective; +inf outside the strict feasible region.
  double objective(const RVector& coords, double t, double mu) const {
    const CMatrix z = assemble(coords);
    double caps = 0.0;
    for (Eigen::Index i = 0; i < 2 * n_; ++i) {
      const double slack = t - z(i, i).real();
      if (slack <= 0.0) return std::numeric_limits<double>::infinity();
      caps -= std::log(slack);
    }
    Eigen::LLT<CMatrix> llt(0.5 * (z + z.adjoint()));
    if (llt.info() != Eigen::Success) return std::numeric_limits<double>::infinity();
    const CMatrix& l = llt.matrixLLT();
    double logdet = 0.0;
    for (Eigen::Index i = 0; i < 2 * n_; ++i) {
      const double d = l(i, i).real();
      if (!(d > 0.0)) return std::numeric_limits<double>::infinity();
      logdet += 2.0 * std::log(d);
    }
    return t / mu - logdet + caps;
  }

  bool newton_step(double mu) {
    const Eigen::Index m = static_cast<Eigen::Index>(basis_.size());
    const Eigen::Index dim = m + 1;  // last coordinate is t
    const CMatrix z = assemble(coords_);
    Eigen::LLT<CMatrix> llt(0.5 * (z + z.adjoint()));
    if (llt.info() != Eigen::Success) return false;
    const CMatrix w = llt.solve(CMatrix::Identity(2 * n_, 2 * n_));

    RVector grad = RVector::Zero(dim);
    Eigen::MatrixXd hess = Eigen::MatrixXd::Zero(dim, dim);
    grad[m] = 1.0 / mu;
    // -log det Z: gradient -Tr(W G_k), Hessian Tr(W G_k W G_l).
    for (Eigen::Index k = 0; k < m; ++k) {
      Complex tr = 0.0;
      for (const auto& e : basis_[static_cast<std::size_t>(k)]) {
        tr += e.coef * w(e.col, e.row);
      }
      grad[k] -= tr.real();
    }
    for (Eigen::Index k = 0; k < m; ++k) {
      for (Eigen::Index l = k; l < m; ++l) {
        Complex h = 0.0;
        for (const auto& ek : basis_[static_cast<std::size_t>(k)]) {
          for (const auto& el : basis_[static_cast<std::size_t>(l)]) {
            // Tr(W e_a e_b^T W e_c e_d^T) = W_bc W_da
            h += ek.coef * el.coef * w(ek.col, el.row) * w(el.col, ek.row);
          }
        }
        hess(k, l) = hess(l, k) = h.real();
      }
    }
    // -log(t - Z_ii) for every diagonal entry.
    for (Eigen::Index i = 0; i < 2 * n_; ++i) {
      const double slack = t_ - z(i, i).real();
      RVector ds = RVector::Zero(dim);
      ds[m] = 1.0;
      for (Eigen::Index k = 0; k < m; ++k) {
        for (const auto& e : basis_[static_cast<std::size_t>(k)]) {
          if (e.row == i && e.col == i) ds[k] -= e.coef.real();
        }
      }
      grad -= ds / slack;
      hess += ds * ds.transpose() / (slack * slack);
    }

    Eigen::LDLT<Eigen::MatrixXd> ldlt(hess);
    const RVector step = -ldlt.solve(grad);
    const double decrement = -grad.dot(step);
    if (!std::isfinite(decrement) || decrement < 1e-12) return false;

    const double f0 = objective(coords_, t_, mu);
    double alpha = 1.0;
    for (int ls = 0; ls < 60; ++ls) {
      const RVector trial = coords_ + alpha * step.head(m);
      const double t_trial = t_ + alpha * step[m];
      const double f = objective(trial, t_trial, mu);
      if (f <= f0 - 0.25 * alpha * decrement) {
        coords_ = trial;
        t_ = t_trial;
        return true;
      }
      alpha *= 0.5;
    }
    return false;
  }

  const CMatrix& a_;
  const Gamma2Options& opts_;
  Eigen::Index n_ = 0;
  std::vector<Direction> basis_;
  RVector coords_;
  double t_ = 0.0;
};

}  // namespace detail

inline Gamma2Result gamma2(const CMatrix& a, const Gamma2Options& opts = {}) {
  require_square(a, "gamma2");
  require_finite(a, "gamma2");
  const Eigen::Index n = a.rows();
  if (n > kMaxGamma2Dimension) {
    throw ResourceError("gamma2: dimension " + std::to_string(n) +
                        " exceeds the supported maximum of 32");
  }
  Gamma2Result result;
  if (n == 0 || max_abs_entry(a) == 0.0) {
    result.bracket = NormBracket::exact(0.0, "zero symbol");
    result.certificate = {0.0, CMatrix::Zero(n, n), CMatrix::Zero(n, n), 0.0,
                          CMatrix::Identity(n, n)};
    result.trace_witness = CMatrix::Zero(n, n);
    return result;
  }

  // Lower side.
  const auto restarts = parallel_map(
      std::max(1, opts.restarts), opts.threads,
      [&](int r) { return detail::gamma2_dual_restart(a, r, opts); });
  const detail::DualAscentResult* best_op = &restarts.front();
  const detail::DualAscentResult* best_tr = &restarts.front();
  int ascent_iterations = 0;
  for (const auto& r : restarts) {
    if (r.operator_value > best_op->operator_value) best_op = &r;
    if (r.trace_value > best_tr->trace_value) best_tr = &r;
    ascent_iterations += r.iterations;
  }
  result.certificate.dual_witness = best_op->operator_witness;
  result.operator_lower = schatten_norm(a.cwiseProduct(best_op->operator_witness),
                                        SchattenIndex::infinity()) /
                          schatten_norm(best_op->operator_witness,
                                        SchattenIndex::infinity());
  result.trace_witness = best_tr->trace_witness;
  result.trace_lower =
      schatten_norm(a.cwiseProduct(best_tr->trace_witness), SchattenIndex(1.0)) /
      schatten_norm(best_tr->trace_witness, SchattenIndex(1.0));
  // Coordinate test matrices e_ij give |a_ij| on both S_1 and S_inf.
  Eigen::Index bi = 0, bj = 0;
  const double entry_bound = a.cwiseAbs().maxCoeff(&bi, &bj);
  if (entry_bound > result.operator_lower) {
    result.operator_lower = entry_bound;
    result.certificate.dual_witness = unit_matrix(n, bi, bj);
  }
  const double lower = std::max({result.operator_lower, result.trace_lower});

  // Upper side.
  const double target = opts.tol;
  const double psd_threshold = 1e-9;
  detail::PrimalPoint best = detail::identity_certificate(a);
  auto consider = [&](const detail::PrimalPoint& pt) {
    if (pt.min_eig >= -psd_threshold * (1.0 + pt.t) && pt.t < best.t) best = pt;
  };
  consider(detail::polar_certificate(a));
  for (const auto& r : restarts) {
    if (r.trace_value >= best_tr->trace_value * (1.0 - 1e-6)) {
      consider(detail::factorization_certificate(a, r.trace_x, r.trace_y));
    }
  }

  int steps = 0;
  if (best.t - lower > 0.5 * target * (1.0 + best.t)) {
    detail::BarrierSolver solver(a, opts);
    consider(detail::balance(a, solver.solve(&steps)));
  }

  result.certificate.t = best.t;
  result.certificate.P = best.P;
  result.certificate.Q = best.Q;
  result.certificate.min_eig = best.min_eig;

  NormBracket& br = result.bracket;
  br.lower = std::min(lower, best.t);
  br.upper = best.t;
  br.lower_certificate =
      "dual witness: ||A*B||_inf/||B||_inf and rank-one S_1 test matrix";
  br.upper_certificate = "PSD block [[P,A],[A^*,Q]] with diagonal caps t";
  br.witness = result.certificate.dual_witness;
  br.iterations = ascent_iterations + steps;
  br.converged = br.width() <= opts.tol * (1.0 + br.upper);
  return result;
}

/// Independent re-verification of a stored certificate.
inline CertificateCheck check_certificate(const CMatrix& a,
                                          const Gamma2Certificate& cert,
                                          double tol = 1e-9) {
  CertificateCheck out;
  auto fail = [&](std::string why) {
    out.ok = false;
    out.reasons.push_back(std::move(why));
  };
  const Eigen::Index n = a.rows();
  if (a.rows() != a.cols()) fail("symbol is not square");
  if (cert.P.rows() != n || cert.P.cols() != n || cert.Q.rows() != n ||
      cert.Q.cols() != n || cert.dual_witness.rows() != n ||
      cert.dual_witness.cols() != n) {
    fail("certificate dimensions do not match the symbol");
    return out;
  }
  if (!is_finite(cert.P) || !is_finite(cert.Q) || !is_finite(cert.dual_witness) ||
      !std::isfinite(cert.t) || !std::isfinite(cert.min_eig)) {
    fail("certificate has non-finite entries");
    return out;
  }
  const double scale = 1.0 + std::abs(cert.t);
  if ((cert.P - cert.P.adjoint()).norm() > tol * scale ||
      (cert.Q - cert.Q.adjoint()).norm() > tol * scale) {
    fail("P or Q is not Hermitian");
  }
  if (n == 0) return out;
  const double recomputed =
      min_hermitian_eigenvalue(detail::psd_block(cert.P, a, cert.Q));
  if (cert.min_eig < -tol * scale) fail("stated min_eig violates PSD");
  if (recomputed < -tol * scale) fail("PSD block has a negative eigenvalue");
  if (std::abs(recomputed - cert.min_eig) > 1e-8 * scale) {
    fail("stated min_eig disagrees with recomputation");
  }
  if (std::max(detail::max_diag(cert.P), detail::max_diag(cert.Q)) >
      cert.t + tol * scale) {
    fail("diagonal cap exceeded");
  }
  const double witness_norm =
      schatten_norm(cert.dual_witness, SchattenIndex::infinity());
  if (witness_norm > 1.0 + tol) fail("dual witness has operator norm above 1");
  if (witness_norm > 0.0) {
    const double ratio =
        schatten_norm(a.cwiseProduct(cert.dual_witness), SchattenIndex::infinity()) /
        witness_norm;
    if (ratio > cert.t + tol * scale) {
      fail("dual witness ratio exceeds the certified upper value");
    }
  }
  return out;
}

}  // namespace herzkit
