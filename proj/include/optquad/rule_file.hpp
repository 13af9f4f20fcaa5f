#pragma once

// Rule files ("optquad/1" JSON) and convergence CSV.
//
// Coefficients are stored as decimal strings carrying enough digits to read
// back to the identical binary value at the stated precision. A parallel
// block of doubles is written for convenience and ignored on input.

#include <json.hpp>

#include <chrono>
#include <ctime>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "optquad/bigreal.hpp"
#include "optquad/errors.hpp"
#include "optquad/quad_engine.hpp"
#include "optquad/rule_builder.hpp"

#ifndef OPTQUAD_VERSION
#define OPTQUAD_VERSION "1.0.0"
#endif

namespace optquad {

inline constexpr const char* kRuleSchema = "optquad/1";

/// Malformed or unreadable rule file. The CLI maps this to exit code 2.
class RuleFileError : public ParameterError {
 public:
  using ParameterError::ParameterError;
};

struct RuleFile {
  std::string schema_version = kRuleSchema;
  int m = 0;
  int N = 0;
  int precision_bits = 0;
  BigReal h;
  std::vector<BigReal> C;
  BigReal A;
  BigReal B;
  std::vector<BigReal> d;
  std::vector<BigReal> roots;
  std::vector<int> row_labels;
  BigReal norm_sq;
  BigReal system_residual;
  double condition_estimate = 0.0;
  double correct_bits = 0.0;
  std::string generator_tool = "optquad";
  std::string generator_version = OPTQUAD_VERSION;
  std::string timestamp;
};

inline std::string utc_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  std::ostringstream os;
  os << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
  return os.str();
}

inline RuleFile to_rule_file(const QuadRule& rule) {
  RuleFile f;
  f.m = rule.m;
  f.N = rule.N;
  f.precision_bits = rule.precision_bits;
  f.h = rule.h;
  f.C = rule.C;
  f.A = rule.A;
  f.B = rule.B;
  f.d = rule.d;
  f.roots = rule.roots.roots;
  f.row_labels = rule.row_labels;
  f.norm_sq = rule.norm_sq;
  f.system_residual = rule.system_residual;
  f.condition_estimate = rule.condition_estimate;
  f.correct_bits = rule.correct_bits;
  f.timestamp = utc_timestamp();
  return f;
}

namespace detail {

using ojson = nlohmann::ordered_json;

inline ojson decimal_array(const std::vector<BigReal>& v) {
  ojson a = ojson::array();
  for (const auto& x : v) a.push_back(x.to_string());
  return a;
}

inline ojson double_array(const std::vector<BigReal>& v) {
  ojson a = ojson::array();
  for (const auto& x : v) a.push_back(x.to_double());
  return a;
}

inline const ojson& field(const ojson& j, const char* key) {
  if (!j.is_object() || !j.contains(key))
    throw RuleFileError(std::string("rule file: missing field '") + key + "'");
  return j.at(key);
}

inline int int_field(const ojson& j, const char* key) {
  const ojson& v = field(j, key);
  if (!v.is_number_integer()) throw RuleFileError(std::string("rule file: '") + key + "' must be an integer");
  return v.get<int>();
}

inline BigReal decimal_field(const ojson& v, const std::string& name, int bits) {
  if (!v.is_string()) throw RuleFileError("rule file: '" + name + "' must be a decimal string");
  try {
    return BigReal::parse(v.get<std::string>(), bits);
  } catch (const Error&) {
    throw RuleFileError("rule file: '" + name + "' is not a decimal number");
  }
}

inline std::vector<BigReal> decimal_list(const ojson& j, const char* key, int bits) {
  const ojson& v = field(j, key);
  if (!v.is_array()) throw RuleFileError(std::string("rule file: '") + key + "' must be an array");
  std::vector<BigReal> out;
  for (std::size_t i = 0; i < v.size(); ++i)
    out.push_back(decimal_field(v[i], std::string(key) + "[" + std::to_string(i) + "]", bits));
  return out;
}

}  // namespace detail

/// Coefficient block only: identical for identical inputs.
inline nlohmann::ordered_json coefficient_block(const RuleFile& f) {
  detail::ojson c;
  c["C"] = detail::decimal_array(f.C);
  c["A"] = f.A.to_string();
  c["B"] = f.B.to_string();
  c["d"] = detail::decimal_array(f.d);
  return c;
}

inline nlohmann::ordered_json to_json(const RuleFile& f) {
  detail::ojson j;
  j["schema_version"] = f.schema_version;
  j["m"] = f.m;
  j["N"] = f.N;
  j["precision_bits"] = f.precision_bits;
  j["h"] = f.h.to_string();
  j["coefficients"] = coefficient_block(f);
  j["norm_sq"] = f.norm_sq.to_string();
  j["roots"] = detail::decimal_array(f.roots);
  j["row_labels"] = f.row_labels;
  j["system_residual"] = f.system_residual.to_string();
  j["condition_estimate"] = f.condition_estimate;
  j["correct_bits"] = f.correct_bits;
  j["double"] = {{"C", detail::double_array(f.C)},
                 {"A", f.A.to_double()},
                 {"B", f.B.to_double()},
                 {"d", detail::double_array(f.d)},
                 {"norm_sq", f.norm_sq.to_double()}};
  j["generator"] = {{"tool", f.generator_tool},
                    {"version", f.generator_version},
                    {"timestamp", f.timestamp}};
  return j;
}

inline std::string serialize(const RuleFile& f) { return to_json(f).dump(2) + "\n"; }

inline RuleFile parse_rule_file(const std::string& text) {
  detail::ojson j;
  try {
    j = detail::ojson::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw RuleFileError(std::string("rule file is not valid JSON: ") + e.what());
  }
  if (!j.is_object()) throw RuleFileError("rule file: top level must be an object");

  RuleFile f;
  const auto& schema = detail::field(j, "schema_version");
  if (!schema.is_string() || schema.get<std::string>() != kRuleSchema)
    throw RuleFileError(std::string("rule file: unsupported schema_version (expected ") +
                        kRuleSchema + ")");
  f.m = detail::int_field(j, "m");
  f.N = detail::int_field(j, "N");
  f.precision_bits = detail::int_field(j, "precision_bits");
  if (f.m < 4 || f.N < 1 || f.precision_bits < 64 || f.precision_bits > (1 << 20))
    throw RuleFileError("rule file: m, N or precision_bits out of range");
  const int bits = f.precision_bits;

  f.h = detail::decimal_field(detail::field(j, "h"), "h", bits);
  const auto& coeffs = detail::field(j, "coefficients");
  f.C = detail::decimal_list(coeffs, "C", bits);
  f.A = detail::decimal_field(detail::field(coeffs, "A"), "A", bits);
  f.B = detail::decimal_field(detail::field(coeffs, "B"), "B", bits);
  f.d = detail::decimal_list(coeffs, "d", bits);
  if (f.C.size() != static_cast<std::size_t>(f.N) + 1)
    throw RuleFileError("rule file: C must have N + 1 entries");
  if (f.d.size() != static_cast<std::size_t>(f.m) - 1)
    throw RuleFileError("rule file: d must have m - 1 entries");
  f.norm_sq = detail::decimal_field(detail::field(j, "norm_sq"), "norm_sq", bits);

  if (j.contains("roots")) f.roots = detail::decimal_list(j, "roots", bits);
  if (j.contains("row_labels")) {
    try {
      f.row_labels = j.at("row_labels").get<std::vector<int>>();
    } catch (const nlohmann::json::exception&) {
      throw RuleFileError("rule file: 'row_labels' must be an array of integers");
    }
  }
  if (j.contains("system_residual"))
    f.system_residual = detail::decimal_field(j.at("system_residual"), "system_residual", bits);
  if (j.contains("condition_estimate") && j.at("condition_estimate").is_number())
    f.condition_estimate = j.at("condition_estimate").get<double>();
  if (j.contains("correct_bits") && j.at("correct_bits").is_number())
    f.correct_bits = j.at("correct_bits").get<double>();
  if (j.contains("generator") && j.at("generator").is_object()) {
    const auto& g = j.at("generator");
    f.generator_tool = g.value("tool", std::string());
    f.generator_version = g.value("version", std::string());
    f.timestamp = g.value("timestamp", std::string());
  }
  return f;
}

inline RuleFile read_rule_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw RuleFileError("cannot open rule file '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_rule_file(buf.str());
}

inline void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ParameterError("cannot write '" + path + "'");
  out << text;
  if (!out) throw ParameterError("write to '" + path + "' failed");
}

// -- CSV ---------------------------------------------------------------------

/// Convergence report as CSV. Numbers are full-precision decimals produced
/// by MPFR, so output does not depend on the C++ locale; lines end in LF.
inline void write_convergence_csv(std::ostream& os, const ConvergenceReport& rep) {
  os << "N,approx,abs_error,norm_bound,observed_order,trapezoid_error,euler_maclaurin_error\n";
  for (const auto& r : rep.rows) {
    os << std::to_string(r.N);
    for (const BigReal* v : {&r.approx, &r.abs_error, &r.norm_bound, &r.observed_order,
                             &r.trapezoid_error, &r.euler_maclaurin_error})
      os << ',' << v->to_string();
    os << '\n';
  }
}

}  // namespace optquad
