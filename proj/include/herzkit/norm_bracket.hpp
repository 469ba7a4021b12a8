#pragma once

#include <algorithm>
#include <optional>
#include <string>

#include "herzkit/core_linalg.hpp"

namespace herzkit {

/// Certified interval [lower, upper] around a norm value. `witness` holds
/// the lower-bound test matrix when the lower side is certified by one.
struct NormBracket {
  double lower = 0.0;
  double upper = 0.0;
  std::string lower_certificate;
  std::string upper_certificate;
  std::optional<CMatrix> witness;
  int iterations = 0;
  bool converged = true;

  double width() const { return std::max(0.0, upper - lower); }

  bool contains(double value, double tol) const {
    return value >= lower - rel_tol(tol, std::abs(value)) &&
           value <= upper + rel_tol(tol, std::abs(value));
  }

  /// lower <= upper + 1e-9 (1 + upper)
  bool is_consistent() const { return lower <= upper + rel_tol(1e-9, upper); }

  static NormBracket exact(double value, std::string certificate) {
    NormBracket b;
    b.lower = b.upper = value;
    b.lower_certificate = certificate;
    b.upper_certificate = std::move(certificate);
    return b;
  }
};

}  // namespace herzkit
