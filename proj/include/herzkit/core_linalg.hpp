// Dense complex matrix substrate: Schatten norms, Schur and Kronecker
// products, truncation, the bilinear trace pairing and seeded ensembles.
#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <limits>
#include <random>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace herzkit {

using Complex = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;
using RVector = Eigen::VectorXd;

/// Malformed argument: wrong dimensions, non-finite entries, bad index.
class InputError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A documented precondition of an operation does not hold.
class PreconditionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// The requested problem exceeds the supported desk-scale size.
class ResourceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline constexpr std::size_t kMaxDimension = 64;

inline bool is_finite(const CMatrix& a) {
  for (Eigen::Index k = 0; k < a.size(); ++k) {
    const Complex z = a.data()[k];
    if (!std::isfinite(z.real()) || !std::isfinite(z.imag())) return false;
  }
  return true;
}

inline void require_finite(const CMatrix& a, std::string_view what) {
  if (!is_finite(a)) {
    throw InputError(std::string(what) + ": matrix has non-finite entries");
  }
}

inline void require_square(const CMatrix& a, std::string_view what) {
  if (a.rows() != a.cols()) {
    throw InputError(std::string(what) + ": matrix must be square, got " +
                     std::to_string(a.rows()) + "x" + std::to_string(a.cols()));
  }
}

inline void require_same_shape(const CMatrix& a, const CMatrix& b,
                               std::string_view what) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw InputError(std::string(what) + ": dimension mismatch " +
                     std::to_string(a.rows()) + "x" + std::to_string(a.cols()) +
                     " vs " + std::to_string(b.rows()) + "x" +
                     std::to_string(b.cols()));
  }
}

/// Schatten exponent p in [1, inf]. The conjugate is fixed at construction,
/// so conjugating twice returns the original value bit for bit.
class SchattenIndex {
 public:
  explicit SchattenIndex(double p) {
    if (std::isnan(p) || p < 1.0) {
      throw InputError("Schatten index must satisfy p >= 1, got " +
                       std::to_string(p));
    }
    if (std::isinf(p)) {
      *this = infinity();
      return;
    }
    kind_ = Kind::kFinite;
    value_ = p;
    if (p == 1.0) {
      conj_kind_ = Kind::kInfinite;
      conj_value_ = 0.0;
    } else {
      conj_kind_ = Kind::kFinite;
      conj_value_ = p / (p - 1.0);
    }
  }

  static SchattenIndex infinity() {
    SchattenIndex s;
    s.kind_ = Kind::kInfinite;
    s.value_ = 0.0;
    s.conj_kind_ = Kind::kFinite;
    s.conj_value_ = 1.0;
    return s;
  }

  /// Accepts a decimal number or one of "inf", "infinity", "∞".
  static SchattenIndex parse(std::string_view text) {
    if (text == "inf" || text == "infinity" || text == "Inf" || text == "∞") {
      return infinity();
    }
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(std::string(text), &used);
    } catch (const std::exception&) {
      throw InputError("cannot parse Schatten index '" + std::string(text) + "'");
    }
    if (used != text.size()) {
      throw InputError("cannot parse Schatten index '" + std::string(text) + "'");
    }
    return SchattenIndex(v);
  }

  bool is_infinite() const { return kind_ == Kind::kInfinite; }
  bool is_one() const { return kind_ == Kind::kFinite && value_ == 1.0; }
  bool is_two() const { return kind_ == Kind::kFinite && value_ == 2.0; }

  /// Finite value, or +inf for the distinguished infinite index.
  double value() const {
    return is_infinite() ? std::numeric_limits<double>::infinity() : value_;
  }

  SchattenIndex conjugate() const {
    SchattenIndex s;
    s.kind_ = conj_kind_;
    s.value_ = conj_value_;
    s.conj_kind_ = kind_;
    s.conj_value_ = value_;
    return s;
  }

  std::string to_string() const {
    if (is_infinite()) return "inf";
    std::string s = std::to_string(value_);
    s.erase(s.find_last_not_of('0') + 1);
    if (!s.empty() && s.back() == '.') s.pop_back();
    return s;
  }

  friend bool operator==(const SchattenIndex& a, const SchattenIndex& b) {
    return a.kind_ == b.kind_ && a.value_ == b.value_;
  }
  friend bool operator<(const SchattenIndex& a, const SchattenIndex& b) {
    return a.value() < b.value();
  }
  friend bool operator<=(const SchattenIndex& a, const SchattenIndex& b) {
    return a.value() <= b.value();
  }

 private:
  enum class Kind { kFinite, kInfinite };
  SchattenIndex() = default;

  Kind kind_ = Kind::kFinite;
  double value_ = 2.0;
  Kind conj_kind_ = Kind::kFinite;
  double conj_value_ = 2.0;
};

inline SchattenIndex conjugate_index(const SchattenIndex& p) {
  return p.conjugate();
}

/// Flattening of the pair (outer, inner) in I x I with |I| = n:
/// pos(t, r) = t * n + r. The left tensor slot is the outer index, so
/// [A (x) B]_{(t,r),(u,s)} = a_tu * b_rs. Every I x I matrix in the
/// library goes through this struct.
struct BigIndex {
  Eigen::Index n = 0;

  Eigen::Index pos(Eigen::Index outer, Eigen::Index inner) const {
    return outer * n + inner;
  }
  std::pair<Eigen::Index, Eigen::Index> split(Eigen::Index position) const {
    return {position / n, position % n};
  }
};

/// Singular values in descending order.
inline RVector singular_values(const CMatrix& a) {
  if (a.size() == 0) return RVector();
  Eigen::JacobiSVD<CMatrix> svd(a);
  return svd.singularValues();
}

/// (sum sigma_i^p)^(1/p); the largest singular value for p = inf.
inline double schatten_norm_from_singular_values(const RVector& sv,
                                                 const SchattenIndex& p) {
  if (sv.size() == 0) return 0.0;
  const double top = sv.maxCoeff();
  if (top == 0.0) return 0.0;
  if (p.is_infinite()) return top;
  if (p.is_one()) return sv.sum();
  const double q = p.value();
  double acc = 0.0;
  for (Eigen::Index i = 0; i < sv.size(); ++i) acc += std::pow(sv[i] / top, q);
  return top * std::pow(acc, 1.0 / q);
}

inline double schatten_norm(const CMatrix& a, const SchattenIndex& p) {
  if (a.size() == 0) return 0.0;
  require_finite(a, "schatten_norm");
  if (p.is_two()) return a.norm();
  return schatten_norm_from_singular_values(singular_values(a), p);
}

inline double max_abs_entry(const CMatrix& a) {
  return a.size() == 0 ? 0.0 : a.cwiseAbs().maxCoeff();
}

inline double entrywise_l1(const CMatrix& a) { return a.cwiseAbs().sum(); }

inline CMatrix schur_product(const CMatrix& a, const CMatrix& b) {
  require_same_shape(a, b, "schur_product");
  return a.cwiseProduct(b);
}

/// Kronecker product under the BigIndex convention.
inline CMatrix kron(const CMatrix& a, const CMatrix& b) {
  CMatrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index t = 0; t < a.rows(); ++t) {
    for (Eigen::Index u = 0; u < a.cols(); ++u) {
      out.block(t * b.rows(), u * b.cols(), b.rows(), b.cols()) = a(t, u) * b;
    }
  }
  return out;
}

using IndexSet = std::vector<Eigen::Index>;

/// T_J: zero every entry whose row or column index lies outside J.
inline CMatrix truncate(const CMatrix& a, const IndexSet& keep) {
  require_square(a, "truncate");
  std::vector<bool> in(static_cast<std::size_t>(a.rows()), false);
  for (Eigen::Index j : keep) {
    if (j < 0 || j >= a.rows()) {
      throw InputError("truncate: index " + std::to_string(j) +
                       " out of range for dimension " + std::to_string(a.rows()));
    }
    in[static_cast<std::size_t>(j)] = true;
  }
  CMatrix out = CMatrix::Zero(a.rows(), a.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    if (!in[static_cast<std::size_t>(i)]) continue;
    for (Eigen::Index j = 0; j < a.cols(); ++j) {
      if (in[static_cast<std::size_t>(j)]) out(i, j) = a(i, j);
    }
  }
  return out;
}

/// Bilinear pairing <A, B> = Tr(A B^T) = sum_ij a_ij b_ij.
inline Complex trace_pairing(const CMatrix& a, const CMatrix& b) {
  require_same_shape(a, b, "trace_pairing");
  return a.cwiseProduct(b).sum();
}

inline CMatrix unit_matrix(Eigen::Index n, Eigen::Index i, Eigen::Index j) {
  CMatrix e = CMatrix::Zero(n, n);
  e(i, j) = 1.0;
  return e;
}

inline CMatrix all_ones(Eigen::Index n) { return CMatrix::Ones(n, n); }

/// Hadamard matrix [[1, 1], [1, -1]].
inline CMatrix hadamard2() {
  CMatrix h(2, 2);
  h << 1.0, 1.0, 1.0, -1.0;
  return h;
}

enum class Ensemble { kGaussian, kUnitary, kSign, kSparse };

inline Ensemble parse_ensemble(std::string_view name) {
  if (name == "gaussian") return Ensemble::kGaussian;
  if (name == "unitary") return Ensemble::kUnitary;
  if (name == "sign") return Ensemble::kSign;
  if (name == "sparse") return Ensemble::kSparse;
  throw InputError("unknown ensemble '" + std::string(name) + "'");
}

/// Seeded generator shared by every randomized routine. Streams are
/// decorrelated by hashing (seed, stream) through splitmix64.
inline std::mt19937_64 make_rng(std::uint64_t seed, std::uint64_t stream = 0) {
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  z ^= z >> 31;
  return std::mt19937_64(z);
}

inline CMatrix gaussian_matrix(Eigen::Index rows, Eigen::Index cols,
                               std::mt19937_64& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  CMatrix out(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    for (Eigen::Index j = 0; j < cols; ++j) {
      const double re = normal(rng);
      const double im = normal(rng);
      out(i, j) = Complex(re, im);
    }
  }
  return out;
}

inline CVector unimodular_vector(Eigen::Index n, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> angle(0.0, 2.0 * M_PI);
  CVector v(n);
  for (Eigen::Index i = 0; i < n; ++i) v[i] = std::polar(1.0, angle(rng));
  return v;
}

inline CMatrix random_matrix(Eigen::Index n, Ensemble ensemble,
                             std::uint64_t seed) {
  if (n < 1) throw InputError("random_matrix: n must be >= 1");
  auto rng = make_rng(seed, static_cast<std::uint64_t>(ensemble));
  switch (ensemble) {
    case Ensemble::kGaussian:
      return gaussian_matrix(n, n, rng);
    case Ensemble::kUnitary: {
      const CMatrix g = gaussian_matrix(n, n, rng);
      Eigen::HouseholderQR<CMatrix> qr(g);
      CMatrix q = qr.householderQ() * CMatrix::Identity(n, n);
      const CMatrix r = qr.matrixQR().triangularView<Eigen::Upper>();
      // Fix column phases so the distribution is Haar.
      for (Eigen::Index k = 0; k < n; ++k) {
        const double mag = std::abs(r(k, k));
        if (mag > 0.0) q.col(k) *= r(k, k) / mag;
      }
      return q;
    }
    case Ensemble::kSign: {
      std::bernoulli_distribution coin(0.5);
      CMatrix out(n, n);
      for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j < n; ++j) out(i, j) = coin(rng) ? 1.0 : -1.0;
      }
      return out;
    }
    case Ensemble::kSparse: {
      std::bernoulli_distribution keep(0.3);
      CMatrix out = gaussian_matrix(n, n, rng);
      for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j < n; ++j) {
          if (!keep(rng)) out(i, j) = 0.0;
        }
      }
      return out;
    }
  }
  throw InputError("random_matrix: unknown ensemble");
}

inline CMatrix random_matrix(Eigen::Index n, std::string_view ensemble,
                             std::uint64_t seed) {
  return random_matrix(n, parse_ensemble(ensemble), seed);
}

/// Smallest eigenvalue of a Hermitian matrix (the input is symmetrized).
inline double min_hermitian_eigenvalue(const CMatrix& h) {
  const CMatrix sym = 0.5 * (h + h.adjoint());
  Eigen::SelfAdjointEigenSolver<CMatrix> es(sym, Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

/// Relative tolerance tol * (1 + scale).
inline double rel_tol(double tol, double scale) { return tol * (1.0 + scale); }

}  // namespace herzkit
