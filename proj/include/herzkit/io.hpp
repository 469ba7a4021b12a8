// JSON forms of matrices, brackets, certificates and decompositions.
// Matrix schema: {"rows": n, "cols": m, "entries": [[re, im], ...]} row-major.
#pragma once

#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "herzkit/gamma2.hpp"
#include "herzkit/herz.hpp"
#include "herzkit/isometry.hpp"
#include "herzkit/norm_bracket.hpp"

namespace herzkit {

using Json = nlohmann::json;

inline Json matrix_to_json(const CMatrix& a) {
  Json entries = Json::array();
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    for (Eigen::Index j = 0; j < a.cols(); ++j) {
      entries.push_back({a(i, j).real(), a(i, j).imag()});
    }
  }
  return {{"rows", a.rows()}, {"cols", a.cols()}, {"entries", std::move(entries)}};
}

inline CMatrix matrix_from_json(const Json& j) {
  if (!j.is_object() || !j.contains("rows") || !j.contains("cols") || !j.contains("entries")) {
    throw InputError("matrix: expected an object with rows, cols, entries");
  }
  const Json& rj = j.at("rows");
  const Json& cj = j.at("cols");
  if (!rj.is_number_integer() || !cj.is_number_integer()) {
    throw InputError("matrix: rows and cols must be integers");
  }
  const auto rows = rj.get<long long>(), cols = cj.get<long long>();
  if (rows < 1 || cols < 1) throw InputError("matrix: rows and cols must be positive");
  if (rows > static_cast<long long>(kMaxDimension) || cols > static_cast<long long>(kMaxDimension)) {
    throw ResourceError("matrix: dimension exceeds " + std::to_string(kMaxDimension));
  }
  const Json& e = j.at("entries");
  if (!e.is_array() || e.size() != static_cast<std::size_t>(rows * cols)) {
    throw InputError("matrix: expected " + std::to_string(rows * cols) + " entries");
  }
  CMatrix a(rows, cols);
  for (long long k = 0; k < rows * cols; ++k) {
    const Json& z = e[static_cast<std::size_t>(k)];
    if (!z.is_array() || z.size() != 2 || !z[0].is_number() || !z[1].is_number()) {
      throw InputError("matrix: entry " + std::to_string(k) + " is not [re, im]");
    }
    a(k / cols, k % cols) = Complex(z[0].get<double>(), z[1].get<double>());
  }
  require_finite(a, "matrix");
  return a;
}

inline std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

inline Json parse_json_text(const std::string& text, std::string_view what) {
  try {
    return Json::parse(text);
  } catch (const Json::parse_error& e) {
    throw InputError(std::string(what) + ": " + e.what());
  }
}

inline CMatrix read_matrix_file(const std::string& path) {
  return matrix_from_json(parse_json_text(read_text_file(path), path));
}

inline void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ResourceError("cannot write '" + path + "'");
  out << text;
}

inline Json index_to_json(const SchattenIndex& p) {
  if (p.is_infinite()) return "inf";
  return p.value();
}

inline SchattenIndex index_from_json(const Json& j) {
  if (j.is_string()) return SchattenIndex::parse(j.get<std::string>());
  if (j.is_number()) return SchattenIndex(j.get<double>());
  throw InputError("p: expected a number or \"inf\"");
}

inline Json vector_to_json(const CVector& v) {
  Json out = Json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back({v[i].real(), v[i].imag()});
  return out;
}

inline Json bracket_to_json(const NormBracket& b) {
  Json j = {{"lower", b.lower},
            {"upper", b.upper},
            {"width", b.width()},
            {"lower_certificate", b.lower_certificate},
            {"upper_certificate", b.upper_certificate},
            {"iterations", b.iterations},
            {"converged", b.converged}};
  if (b.witness) j["witness"] = matrix_to_json(*b.witness);
  return j;
}

inline Json certificate_to_json(const Gamma2Certificate& c) {
  return {{"t", c.t},
          {"P", matrix_to_json(c.P)},
          {"Q", matrix_to_json(c.Q)},
          {"min_eig", c.min_eig},
          {"dual_witness", matrix_to_json(c.dual_witness)}};
}

inline Gamma2Certificate certificate_from_json(const Json& j) {
  for (const char* key : {"t", "P", "Q", "min_eig", "dual_witness"}) {
    if (!j.contains(key)) throw InputError(std::string("certificate: missing '") + key + "'");
  }
  if (!j.at("t").is_number() || !j.at("min_eig").is_number()) {
    throw InputError("certificate: t and min_eig must be numbers");
  }
  Gamma2Certificate c;
  c.t = j.at("t").get<double>();
  c.min_eig = j.at("min_eig").get<double>();
  c.P = matrix_from_json(j.at("P"));
  c.Q = matrix_from_json(j.at("Q"));
  c.dual_witness = matrix_from_json(j.at("dual_witness"));
  return c;
}

inline Json decomposition_to_json(const HerzDecomposition& d) {
  Json terms = Json::array();
  for (const auto& t : d.terms) terms.push_back({{"A", matrix_to_json(t.a)}, {"B", matrix_to_json(t.b)}});
  return {{"p", index_to_json(d.p)}, {"dim", d.dim}, {"terms", std::move(terms)}, {"cost", d.cost}};
}

/// Rebuilds the cached sum and cost from the terms; a stated cost that does
/// not match is rejected.
inline HerzDecomposition decomposition_from_json(const Json& j) {
  if (!j.contains("p") || !j.contains("terms") || !j.at("terms").is_array()) {
    throw InputError("decomposition: expected p and a terms array");
  }
  const SchattenIndex p = index_from_json(j.at("p"));
  std::vector<HerzTerm> terms;
  Eigen::Index dim = j.contains("dim") ? j.at("dim").get<Eigen::Index>() : -1;
  for (const auto& t : j.at("terms")) {
    if (!t.contains("A") || !t.contains("B")) throw InputError("decomposition: term needs A and B");
    HerzTerm term{matrix_from_json(t.at("A")), matrix_from_json(t.at("B"))};
    if (dim < 0) dim = term.a.rows();
    terms.push_back(std::move(term));
  }
  if (dim < 0) throw InputError("decomposition: cannot infer dimension");
  HerzDecomposition d = HerzDecomposition::make(p, dim, std::move(terms));
  if (j.contains("cost")) {
    const double stated = j.at("cost").get<double>();
    if (std::abs(stated - d.cost) > 1e-9 * (1.0 + d.cost)) {
      throw InputError("decomposition: stated cost does not match the terms");
    }
  }
  return d;
}

inline Json dual_functional_to_json(const DualFunctional& f) {
  Json j = {{"kind", f.kind}, {"value", f.value}, {"symbol_norm_upper", f.symbol_norm_upper}};
  if (f.a.size() > 0) j["a"] = vector_to_json(f.a);
  if (f.b.size() > 0) j["b"] = vector_to_json(f.b);
  if (f.symbol) j["symbol"] = matrix_to_json(*f.symbol);
  return j;
}

inline Json dft_terms_to_json(const std::vector<DftTerm>& terms) {
  Json out = Json::array();
  for (const auto& t : terms) {
    out.push_back({{"coefficient", {t.coefficient.real(), t.coefficient.imag()}},
                   {"k", t.k},
                   {"l", t.l},
                   {"a", vector_to_json(t.a)},
                   {"b", vector_to_json(t.b)}});
  }
  return out;
}

}  // namespace herzkit
