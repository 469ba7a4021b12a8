// Run configuration, report records, the append-only report store and CSV
// export. Digests need libcrypto (OpenSSL::Crypto).
#pragma once

#include <filesystem>
#include <iomanip>
#include <sstream>
#include <string>
#include <vector>

#include <openssl/evp.h>

#include "herzkit/io.hpp"

namespace herzkit {

inline constexpr const char* kToolkitVersion = "0.3.0";

struct RunConfig {
  double tol_exact = 1e-10;
  double tol_iter = 1e-6;
  int restarts = 16;
  int max_terms = 8;
  std::uint64_t seed = 0;
  std::vector<SchattenIndex> p_grid{SchattenIndex(1.0), SchattenIndex(1.5), SchattenIndex(2.0),
                                    SchattenIndex(3.0), SchattenIndex::infinity()};
  int thread_budget = 0;
  /// Sizes used by the verification suites.
  int n = 3;
  int trials = 20;

  void validate() const {
    if (!(tol_exact > 0.0) || !(tol_iter > 0.0)) throw InputError("config: tolerances must be positive");
    if (restarts < 1) throw InputError("config: restarts must be >= 1");
    if (max_terms < 1) throw InputError("config: max_terms must be >= 1");
    if (n < 1 || n > static_cast<int>(kMaxDimension)) throw InputError("config: n out of range");
    if (trials < 0) throw InputError("config: trials must be >= 0");
    if (p_grid.empty()) throw InputError("config: p_grid is empty");
  }

  /// Applies HERZKIT_THREADS over whatever the file and flags said.
  void apply_environment() {
    if (std::getenv("HERZKIT_THREADS") != nullptr) thread_budget = default_thread_budget();
  }
};

inline RunConfig config_from_json(const Json& j, RunConfig base = {}) {
  if (!j.is_object()) throw InputError("config: expected a JSON object");
  auto number = [&](const char* key, auto& field) {
    if (!j.contains(key)) return;
    if (!j.at(key).is_number()) throw InputError(std::string("config: '") + key + "' must be a number");
    field = j.at(key).get<std::remove_reference_t<decltype(field)>>();
  };
  number("tol_exact", base.tol_exact);
  number("tol_iter", base.tol_iter);
  number("restarts", base.restarts);
  number("max_terms", base.max_terms);
  number("seed", base.seed);
  number("thread_budget", base.thread_budget);
  number("n", base.n);
  number("trials", base.trials);
  if (j.contains("p_grid")) {
    if (!j.at("p_grid").is_array()) throw InputError("config: p_grid must be an array");
    base.p_grid.clear();
    for (const auto& p : j.at("p_grid")) base.p_grid.push_back(index_from_json(p));
  }
  base.validate();
  return base;
}

inline Json config_to_json(const RunConfig& c) {
  Json grid = Json::array();
  for (const auto& p : c.p_grid) grid.push_back(index_to_json(p));
  return {{"tol_exact", c.tol_exact}, {"tol_iter", c.tol_iter}, {"restarts", c.restarts},
          {"max_terms", c.max_terms}, {"seed", c.seed},         {"p_grid", grid},
          {"thread_budget", c.thread_budget}, {"n", c.n},       {"trials", c.trials}};
}

inline std::string sha256_hex(const std::string& bytes) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int length = 0;
  EVP_MD_CTX* ctx = EVP_MD_CTX_new();
  if (ctx == nullptr) throw ResourceError("sha256: cannot allocate digest context");
  const bool ok = EVP_DigestInit_ex(ctx, EVP_sha256(), nullptr) == 1 &&
                  EVP_DigestUpdate(ctx, bytes.data(), bytes.size()) == 1 &&
                  EVP_DigestFinal_ex(ctx, digest, &length) == 1;
  EVP_MD_CTX_free(ctx);
  if (!ok) throw ResourceError("sha256: digest failed");
  std::ostringstream out;
  for (unsigned int i = 0; i < length; ++i) {
    out << std::hex << std::setw(2) << std::setfill('0') << static_cast<int>(digest[i]);
  }
  return out.str();
}

struct ReportRecord {
  std::string operation;
  /// SHA-256 over the raw bytes of the input files, in argument order.
  std::string input_digest;
  Json parameters = Json::object();
  /// Bracket or verdict and certificates; merged into the top level.
  Json result = Json::object();
  double elapsed_ms = 0.0;
  std::string version = kToolkitVersion;

  /// Content key: everything except the timing.
  std::string key() const {
    return sha256_hex(operation + '\n' + input_digest + '\n' + parameters.dump() + '\n' +
                      result.dump() + '\n' + version);
  }

  Json to_json() const {
    Json j = result;
    j["operation"] = operation;
    j["input_digest"] = input_digest;
    j["parameters"] = parameters;
    j["elapsed_ms"] = elapsed_ms;
    j["version"] = version;
    j["key"] = key();
    return j;
  }
};

/// Directory of <key>.json files. A key that already exists is left alone:
/// identical content hashes to the same key, so nothing is lost.
class ReportStore {
 public:
  explicit ReportStore(std::filesystem::path dir) : dir_(std::move(dir)) {
    std::error_code ec;
    std::filesystem::create_directories(dir_, ec);
    if (ec) throw ResourceError("report store: cannot create '" + dir_.string() + "'");
  }

  /// Returns the path holding the record.
  std::filesystem::path append(const ReportRecord& r) const {
    const auto path = dir_ / (r.key() + ".json");
    if (!std::filesystem::exists(path)) write_text_file(path.string(), r.to_json().dump(2) + "\n");
    return path;
  }

  std::vector<std::filesystem::path> list() const {
    std::vector<std::filesystem::path> out;
    for (const auto& e : std::filesystem::directory_iterator(dir_)) {
      if (e.path().extension() == ".json") out.push_back(e.path());
    }
    std::sort(out.begin(), out.end());
    return out;
  }

 private:
  std::filesystem::path dir_;
};

struct CsvRow {
  std::string label;
  double lower = 0.0;
  double upper = 0.0;
  double slack = 0.0;
};

inline std::string to_csv(const std::vector<CsvRow>& rows) {
  std::ostringstream out;
  out << std::setprecision(17) << "label,lower,upper,slack\n";
  for (const auto& r : rows) out << r.label << ',' << r.lower << ',' << r.upper << ',' << r.slack << '\n';
  return out.str();
}

}  // namespace herzkit
