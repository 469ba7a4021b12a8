// Maps on S_p(S_p) = S_p over I x I, materialized densely. An element X is an
// (n^2)x(n^2) matrix whose entry at row (i,k), column (j,l) is the
// coefficient of e_ij (x) e_kl; pos(outer, inner) = outer * n + inner.
#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "herzkit/core_linalg.hpp"

namespace herzkit {

inline constexpr Eigen::Index kMaxStructureDimension = 6;

struct BigMatrix {
  Eigen::Index n = 0;
  CMatrix data;

  static BigMatrix zero(Eigen::Index n) { return {n, CMatrix::Zero(n * n, n * n)}; }

  static BigMatrix from(Eigen::Index n, CMatrix data) {
    if (n < 1) throw InputError("BigMatrix: base dimension must be positive");
    if (data.rows() != n * n || data.cols() != n * n) {
      throw InputError("BigMatrix: expected " + std::to_string(n * n) + "x" +
                       std::to_string(n * n) + " data");
    }
    require_finite(data, "BigMatrix");
    return {n, std::move(data)};
  }

  /// Infers the base from a square matrix of perfect-square size.
  static BigMatrix from(CMatrix data) {
    require_square(data, "BigMatrix");
    const auto n = static_cast<Eigen::Index>(std::llround(std::sqrt(static_cast<double>(data.rows()))));
    if (n * n != data.rows()) throw InputError("BigMatrix: size is not a perfect square");
    return from(n, std::move(data));
  }

  /// The basis element e_ij (x) e_kl.
  static BigMatrix basis(Eigen::Index n, Eigen::Index i, Eigen::Index j, Eigen::Index k,
                         Eigen::Index l) {
    BigMatrix x = zero(n);
    x.at(i, j, k, l) = 1.0;
    return x;
  }

  Complex& at(Eigen::Index i, Eigen::Index j, Eigen::Index k, Eigen::Index l) {
    const BigIndex idx{n};
    return data(idx.pos(i, k), idx.pos(j, l));
  }
  Complex at(Eigen::Index i, Eigen::Index j, Eigen::Index k, Eigen::Index l) const {
    const BigIndex idx{n};
    return data(idx.pos(i, k), idx.pos(j, l));
  }
};

inline BigMatrix random_big_matrix(Eigen::Index n, std::mt19937_64& rng) {
  return {n, gaussian_matrix(n * n, n * n, rng)};
}

/// e_ij (x) e_kl -> delta_kl e_ik (x) e_kj.
inline BigMatrix map_V(const BigMatrix& x) {
  const Eigen::Index n = x.n;
  BigMatrix out = BigMatrix::zero(n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j)
      for (Eigen::Index k = 0; k < n; ++k) out.at(i, k, k, j) += x.at(i, j, k, k);
  return out;
}

/// e_ij (x) e_kl -> delta_jk e_il (x) e_jj.
inline BigMatrix map_W(const BigMatrix& x) {
  const Eigen::Index n = x.n;
  BigMatrix out = BigMatrix::zero(n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j)
      for (Eigen::Index l = 0; l < n; ++l) out.at(i, l, j, j) += x.at(i, j, j, l);
  return out;
}

/// Entry ((t,r),(u,s)) = a_ts delta_ur.
inline BigMatrix map_Delta(const CMatrix& a) {
  require_square(a, "map_Delta");
  const Eigen::Index n = a.rows();
  const BigIndex idx{n};
  BigMatrix out = BigMatrix::zero(n);
  for (Eigen::Index t = 0; t < n; ++t)
    for (Eigen::Index r = 0; r < n; ++r)
      for (Eigen::Index s = 0; s < n; ++s) out.data(idx.pos(t, r), idx.pos(r, s)) = a(t, s);
  return out;
}

/// Entry ((t,r),(u,s)) = a_rs delta_rt delta_su.
inline BigMatrix map_eta(const CMatrix& a) {
  require_square(a, "map_eta");
  const Eigen::Index n = a.rows();
  const BigIndex idx{n};
  BigMatrix out = BigMatrix::zero(n);
  for (Eigen::Index r = 0; r < n; ++r)
    for (Eigen::Index s = 0; s < n; ++s) out.data(idx.pos(r, r), idx.pos(s, s)) = a(r, s);
  return out;
}

/// [b_{(r,r),(s,s)}]
inline CMatrix eta_inverse(const BigMatrix& b) {
  const BigIndex idx{b.n};
  CMatrix out(b.n, b.n);
  for (Eigen::Index r = 0; r < b.n; ++r)
    for (Eigen::Index s = 0; s < b.n; ++s) out(r, s) = b.data(idx.pos(r, r), idx.pos(s, s));
  return out;
}

/// E = [delta_rt delta_su]; the 0/1 symbol keeping e_ij (x) e_ij.
inline BigMatrix matrix_E(Eigen::Index n) {
  if (n < 1) throw InputError("matrix_E: n must be positive");
  return map_eta(all_ones(n));
}

/// Schur multiplication on BigMatrix by a symbol of the same shape.
inline BigMatrix apply_multiplier(const BigMatrix& symbol, const BigMatrix& x) {
  if (symbol.n != x.n) throw InputError("apply_multiplier: base dimension mismatch");
  return {x.n, symbol.data.cwiseProduct(x.data)};
}

/// M_A (x) Id: acts on the outer index, symbol kron(A, J).
inline BigMatrix multiplier_tensor_id(const CMatrix& a) {
  require_square(a, "multiplier_tensor_id");
  return {a.rows(), kron(a, all_ones(a.rows()))};
}

/// Id (x) M_A: acts on the inner index, symbol kron(J, A).
inline BigMatrix id_tensor_multiplier(const CMatrix& a) {
  require_square(a, "id_tensor_multiplier");
  return {a.rows(), kron(all_ones(a.rows()), a)};
}

struct DiagramReport {
  std::string diagram;
  Eigen::Index n = 0;
  SchattenIndex p{2.0};
  double max_deviation = 0.0;
  bool pass = false;
  bool negative_control_failed_as_expected = false;
  /// Largest deviation produced by the negative control.
  double negative_control_deviation = 0.0;
  int inputs_checked = 0;
};

namespace detail {

inline double deviation(const BigMatrix& a, const BigMatrix& b) {
  return (a.data - b.data).cwiseAbs().maxCoeff();
}

inline void require_structure_dim(const CMatrix& a, std::string_view what) {
  require_square(a, what);
  require_finite(a, what);
  if (a.rows() < 1 || a.rows() > kMaxStructureDimension) {
    throw PreconditionError(std::string(what) + ": n must be in [1, " +
                            std::to_string(kMaxStructureDimension) + "]");
  }
}

/// Full basis plus `random` Gaussian inputs normalized to ‖X‖_p = 1.
template <typename Fn>
void for_each_input(Eigen::Index n, const SchattenIndex& p, int random, std::uint64_t seed,
                    Fn&& fn) {
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j)
      for (Eigen::Index k = 0; k < n; ++k)
        for (Eigen::Index l = 0; l < n; ++l) fn(BigMatrix::basis(n, i, j, k, l));
  auto rng = make_rng(seed, 0xd1aULL);
  for (int t = 0; t < random; ++t) {
    BigMatrix x = random_big_matrix(n, rng);
    x.data /= schatten_norm(x.data, p);
    fn(x);
  }
}

}  // namespace detail

inline constexpr double kDiagramTolerance = 1e-12;

/// M_{Delta(A)} = V o (M_A (x) Id) o W. Negative control: W replaced by the
/// identity.
inline DiagramReport verify_delta_diagram(const CMatrix& a, const SchattenIndex& p,
                                          int random_inputs = 16, std::uint64_t seed = 0) {
  detail::require_structure_dim(a, "verify_delta_diagram");
  const Eigen::Index n = a.rows();
  const BigMatrix delta = map_Delta(a);
  const BigMatrix outer = multiplier_tensor_id(a);
  DiagramReport r{"delta", n, p};
  detail::for_each_input(n, p, random_inputs, seed, [&](const BigMatrix& x) {
    const BigMatrix lhs = apply_multiplier(delta, x);
    r.max_deviation = std::max(
        r.max_deviation, detail::deviation(lhs, map_V(apply_multiplier(outer, map_W(x)))));
    r.negative_control_deviation = std::max(
        r.negative_control_deviation, detail::deviation(lhs, map_V(apply_multiplier(outer, x))));
    ++r.inputs_checked;
  });
  r.pass = r.max_deviation <= kDiagramTolerance;
  r.negative_control_failed_as_expected = r.negative_control_deviation > kDiagramTolerance;
  return r;
}

/// M_{eta(A)} = M_E o (M_A (x) Id) o M_E and M_{eta(A)} = eta o M_A o eta^-1 o M_E.
/// Negative control: M_A (x) Id with both M_E removed.
inline DiagramReport verify_eta_diagram(const CMatrix& a, const SchattenIndex& p,
                                        int random_inputs = 16, std::uint64_t seed = 0) {
  detail::require_structure_dim(a, "verify_eta_diagram");
  const Eigen::Index n = a.rows();
  const BigMatrix eta = map_eta(a);
  const BigMatrix e = matrix_E(n);
  const BigMatrix outer = multiplier_tensor_id(a);
  DiagramReport r{"eta", n, p};
  detail::for_each_input(n, p, random_inputs, seed, [&](const BigMatrix& x) {
    const BigMatrix lhs = apply_multiplier(eta, x);
    const BigMatrix first = apply_multiplier(e, apply_multiplier(outer, apply_multiplier(e, x)));
    const BigMatrix second =
        map_eta(a.cwiseProduct(eta_inverse(apply_multiplier(e, x))));
    r.max_deviation = std::max({r.max_deviation, detail::deviation(lhs, first),
                                detail::deviation(lhs, second)});
    r.negative_control_deviation = std::max(
        r.negative_control_deviation, detail::deviation(lhs, apply_multiplier(outer, x)));
    ++r.inputs_checked;
  });
  r.pass = r.max_deviation <= kDiagramTolerance;
  r.negative_control_failed_as_expected = r.negative_control_deviation > kDiagramTolerance;
  return r;
}

struct PartialIsometryReport {
  Eigen::Index n = 0;
  double rrr_deviation = 0.0;
  double projection_deviation = 0.0;
  Eigen::Index projection_rank = 0;
  Eigen::Index expected_rank = 0;
  bool pass = false;
};

/// Matrix R of V on l_2(n^4) (real 0/1): R R^* R = R, R^*R an orthogonal
/// projection of rank n^3 (the orthonormal images e_ik (x) e_kj).
inline PartialIsometryReport partial_isometry_check(Eigen::Index n) {
  if (n < 1 || n > kMaxStructureDimension) {
    throw PreconditionError("partial_isometry_check: n must be in [1, " +
                            std::to_string(kMaxStructureDimension) + "]");
  }
  const Eigen::Index n2 = n * n, dim = n2 * n2;
  // Vectorize X column-major: index row + col * n^2.
  auto vec = [n2](Eigen::Index row, Eigen::Index col) { return row + col * n2; };
  const BigIndex idx{n};
  Eigen::MatrixXd r = Eigen::MatrixXd::Zero(dim, dim);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j)
      for (Eigen::Index k = 0; k < n; ++k) {
        // e_ij (x) e_kk -> e_ik (x) e_kj
        r(vec(idx.pos(i, k), idx.pos(k, j)), vec(idx.pos(i, k), idx.pos(j, k))) = 1.0;
      }
  PartialIsometryReport out;
  out.n = n;
  const Eigen::MatrixXd q = r.transpose() * r;
  out.rrr_deviation = (r * q - r).cwiseAbs().maxCoeff();
  out.projection_deviation =
      std::max((q * q - q).cwiseAbs().maxCoeff(), (q - q.transpose()).cwiseAbs().maxCoeff());
  out.projection_rank = static_cast<Eigen::Index>(std::llround(q.trace()));
  out.expected_rank = n2 * n;
  out.pass = out.rrr_deviation <= 1e-12 && out.projection_deviation <= 1e-12 &&
             out.projection_rank == out.expected_rank;
  return out;
}

/// max_{X} ‖V(X)‖_p - ‖X‖_p and the same for W over random X.
struct ContractivityReport {
  SchattenIndex p{2.0};
  int samples = 0;
  double worst_v = -std::numeric_limits<double>::infinity();
  double worst_w = -std::numeric_limits<double>::infinity();
  double worst_e = -std::numeric_limits<double>::infinity();
  bool pass = true;
};

inline ContractivityReport contractivity_check(Eigen::Index n, const SchattenIndex& p,
                                               int samples, std::uint64_t seed) {
  if (n < 1 || n > kMaxStructureDimension) {
    throw PreconditionError("contractivity_check: n out of range");
  }
  ContractivityReport r;
  r.p = p;
  r.samples = samples;
  auto rng = make_rng(seed, 0xc0ULL);
  const BigMatrix e = matrix_E(n);
  for (int t = 0; t < samples; ++t) {
    const BigMatrix x = random_big_matrix(n, rng);
    const double nx = schatten_norm(x.data, p);
    r.worst_v = std::max(r.worst_v, schatten_norm(map_V(x).data, p) - nx);
    r.worst_w = std::max(r.worst_w, schatten_norm(map_W(x).data, p) - nx);
    r.worst_e = std::max(r.worst_e, schatten_norm(apply_multiplier(e, x).data, p) - nx);
  }
  r.pass = r.worst_v <= 1e-9 && r.worst_w <= 1e-9 && r.worst_e <= 1e-9;
  return r;
}

}  // namespace herzkit
