#pragma once

// Subcommands of the optquad tool: generate | validate | converge | check-operator.
//
// Exit codes: 0 success, 1 validation failure, 2 usage or parameter error
// (including malformed rule files), 3 insufficient numerical precision.

#include <CLI11.hpp>

#include <cerrno>
#include <cstdlib>
#include <iostream>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "optquad/bigreal.hpp"
#include "optquad/discrete_operator.hpp"
#include "optquad/errors.hpp"
#include "optquad/quad_engine.hpp"
#include "optquad/rootfinder.hpp"
#include "optquad/rule_builder.hpp"
#include "optquad/rule_file.hpp"

namespace optquad::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailed = 1;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitPrecision = 3;

struct ValidationCheck {
  std::string name;
  bool pass = false;
  BigReal residual;
  BigReal threshold;
};

/// Post-hoc checks on a rule read from disk: the exactness conditions for
/// x^0..x^{m-1}, palindromic C, h = 1/N, norm_sq > 0, and (when roots are
/// present) agreement of norm_sq with the stored d_k.
inline std::vector<ValidationCheck> validate_rule(const RuleFile& f) {
  const int bits = f.precision_bits;
  PrecisionScope scope(bits);
  const BigReal thr = BigReal::pow2(-(bits / 4), bits);
  const BigReal zero(0L, bits);
  std::vector<ValidationCheck> out;

  const auto res = moment_residuals(f.m, f.N, f.C, f.A, f.B);
  for (std::size_t a = 0; a < res.size(); ++a) {
    const BigReal r = abs(res[a]);
    out.push_back({"moment x^" + std::to_string(a), r <= thr, r, thr});
  }

  const BigReal sym = symmetry_defect(f.C);
  out.push_back({"symmetry C[b] = C[N-b]", sym <= thr, sym, thr});

  const BigReal dh = abs(f.h - BigReal(1L, bits) / f.N);
  out.push_back({"h = 1/N", dh <= thr, dh, thr});

  out.push_back({"norm_sq > 0", f.norm_sq.sign() > 0, f.norm_sq, zero});

  if (f.roots.size() == static_cast<std::size_t>(f.m) - 1) {
    ValidationCheck c{"norm_sq matches d_k", false, BigReal::nan(bits), thr};
    try {
      QuadRule r;
      r.m = f.m;
      r.N = f.N;
      r.precision_bits = bits;
      r.h = f.h;
      r.d = f.d;
      r.roots.m = f.m;
      r.roots.precision_bits = bits;
      r.roots.roots = f.roots;
      const BigReal recomputed = error_norm_sq(r);
      c.residual = abs(recomputed - f.norm_sq) / abs(f.norm_sq);
      c.pass = c.residual <= thr;
    } catch (const Error&) {
      c.pass = false;
    }
    out.push_back(std::move(c));
  }
  return out;
}

namespace detail {

inline std::string sci(const BigReal& x) { return x.format(6); }

inline void print_rule_summary(std::ostream& os, const QuadRule& rule) {
  os << "m = " << rule.m << ", N = " << rule.N << ", precision_bits = " << rule.precision_bits
     << "\n";
  os << "norm_sq = " << sci(rule.norm_sq) << "  (norm = " << sci(sqrt(rule.norm_sq)) << ")\n";
  os << "A = " << sci(rule.A) << ", B = " << sci(rule.B) << "\n";
  std::ostringstream cond;
  cond << rule.condition_estimate;
  os << "condition_estimate = " << cond.str() << ", correct_bits ~ "
     << static_cast<long>(rule.correct_bits) << ", system_residual = "
     << sci(rule.system_residual) << "\n";
  for (const auto& w : rule.warnings) os << "warning: " << w << "\n";
}

inline int cmd_generate(int m, int N, int bits, const std::string& out_path, std::ostream& out,
                        std::ostream& err) {
  const QuadRule rule = build_rule(m, N, bits);
  const std::string text = serialize(to_rule_file(rule));
  if (out_path.empty() || out_path == "-") {
    out << text;
    print_rule_summary(err, rule);
  } else {
    write_text_file(out_path, text);
    print_rule_summary(out, rule);
    out << "wrote " << out_path << "\n";
  }
  return kExitOk;
}

inline int cmd_validate(const std::string& path, std::ostream& out) {
  const RuleFile f = read_rule_file(path);
  const auto checks = validate_rule(f);
  int failed = 0;
  for (const auto& c : checks) {
    out << (c.pass ? "PASS " : "FAIL ") << c.name << "  residual=" << sci(c.residual)
        << "  threshold=" << sci(c.threshold) << "\n";
    if (!c.pass) ++failed;
  }
  if (failed == 0) {
    out << "all " << checks.size() << " checks passed\n";
    return kExitOk;
  }
  out << failed << " of " << checks.size() << " checks failed\n";
  return kExitFailed;
}

inline int cmd_converge(int m, const std::string& id, const std::vector<int>& n_list, int bits,
                        const std::string& out_path, std::ostream& out, std::ostream& err) {
  if (n_list.empty()) throw ParameterError("--n-list must name at least one N");
  for (int N : n_list) check_rule_parameters(m, N);
  const Integrand g = corpus_integrand(id, m, bits);
  const ConvergenceReport rep = converge(m, g, n_list, bits);

  std::ostringstream csv;
  write_convergence_csv(csv, rep);
  if (out_path.empty() || out_path == "-") {
    out << csv.str();
  } else {
    write_text_file(out_path, csv.str());
    out << "N  abs_error  norm_bound  observed_order  trapezoid_error  euler_maclaurin_error\n";
    for (const auto& r : rep.rows)
      out << r.N << "  " << sci(r.abs_error) << "  " << sci(r.norm_bound) << "  "
          << r.observed_order.format(4) << "  " << sci(r.trapezoid_error) << "  "
          << sci(r.euler_maclaurin_error) << "\n";
    out << "wrote " << out_path << "\n";
  }
  int failed = 0;
  for (const auto& r : rep.rows)
    if (!r.ok) {
      err << "N = " << r.N << " failed: " << r.error << "\n";
      ++failed;
    }
  return failed == 0 ? kExitOk : kExitPrecision;
}

inline int cmd_check_operator(int m, int N, int beta_max, int bits, const std::string& tol_text,
                              bool deep, std::ostream& out, std::ostream& err) {
  if (N < 1) throw ParameterError("N must be >= 1");
  BigReal tol;
  try {
    tol = BigReal::parse(tol_text, bits);
  } catch (const Error&) {
    throw ParameterError("--tolerance: not a number: '" + tol_text + "'");
  }
  if (!(tol > 0)) throw ParameterError("--tolerance must be positive");

  if (m < 2) throw ParameterError("m must be >= 2");
  if (beta_max < 1) throw ParameterError("--beta-max must be positive");

  PrecisionScope scope(bits);
  const RootSet roots = unit_disk_roots(m, bits);
  const BigReal h = BigReal(1L, bits) / N;
  if (beta_max < 2 * m + 2) {
    // Too short to hold the operator's support near the origin; treated as
    // a truncation failure like any other oversized tail.
    const DiscreteOperator probe = build_operator(m, h, 2 * m + 2, roots);
    err << "beta_max " << beta_max << " is below the minimum truncation 2m + 2 = " << 2 * m + 2
        << "; tail bound too large; required beta_max >= " << required_beta_max(probe, tol) << "\n";
    return kExitPrecision;
  }
  const DiscreteOperator op = build_operator(m, h, beta_max, roots);

  out << "discrete operator m = " << m << ", h = 1/" << N << ", beta_max = " << beta_max
      << ", precision_bits = " << bits << "\n";
  BigReal worst_tail(0L, bits);
  for (const auto& mc : moment_identities(op, deep)) {
    out << "moment k=" << mc.k << "  value=" << sci(mc.value) << "  expected=" << sci(mc.expected)
        << "  residual=" << sci(mc.residual) << "  tail_bound=" << sci(mc.tail_bound) << "\n";
    if (mc.tail_bound > worst_tail) worst_tail = mc.tail_bound;
  }
  const ConvolutionReport conv = convolution_residuals(op);
  out << "convolution  max_residual=" << sci(conv.max_residual) << " (beta=" << conv.worst_beta
      << ")  tail_bound=" << sci(conv.tail_bound) << "\n";
  if (conv.tail_bound > worst_tail) worst_tail = conv.tail_bound;

  if (!(worst_tail < tol)) {
    err << "tail bound " << sci(worst_tail) << " exceeds tolerance " << sci(tol) << "; ";
    try {
      err << "required beta_max >= " << required_beta_max(op, tol) << "\n";
    } catch (const PrecisionError& e) {
      err << e.what() << "\n";
    }
    return kExitPrecision;
  }
  out << "all tail bounds below tolerance " << sci(tol) << "\n";
  return kExitOk;
}

}  // namespace detail

/// Runs the tool with the given arguments; returns the process exit code.
inline int run(int argc, const char* const* argv, std::ostream& out = std::cout,
               std::ostream& err = std::cerr) {
  CLI::App app{"Optimal quadrature rules with endpoint derivative corrections"};
  app.set_version_flag("--version", std::string(OPTQUAD_VERSION));
  app.require_subcommand(1);

  int m = 0, N = 0, bits = kDefaultPrecisionBits, beta_max = 160;
  std::string out_path, integrand, rule_path, tolerance = "1e-20";
  std::vector<int> n_list;
  bool deep = false;

  auto add_bits = [&](CLI::App* sub) {
    sub->add_option("--bits", bits, "working precision in bits (env OPTQUAD_BITS)")
        ->envname("OPTQUAD_BITS")
        ->check(CLI::Range(64, 1 << 20));
  };

  auto* gen = app.add_subcommand("generate", "build an optimal rule and write it as JSON");
  gen->add_option("--m", m, "smoothness order, m >= 4")->required();
  gen->add_option("--n", N, "number of intervals, N >= m - 3")->required();
  add_bits(gen);
  gen->add_option("--out", out_path, "output path (default: stdout)");

  auto* val = app.add_subcommand("validate", "check a rule file");
  val->add_option("rule", rule_path, "rule file")->required();

  auto* conv = app.add_subcommand("converge", "convergence study on a built-in integrand");
  conv->add_option("--m", m, "smoothness order, m >= 4")->required();
  conv->add_option("--integrand", integrand, "one of: exp, sinpi, inv1px, xm")->required();
  conv->add_option("--n-list", n_list, "values of N")->required()->delimiter(',');
  add_bits(conv);
  conv->add_option("--out", out_path, "CSV output path (default: stdout)");

  auto* chk = app.add_subcommand("check-operator", "check the discrete operator identities");
  chk->add_option("--m", m, "smoothness order")->required();
  chk->add_option("--n", N, "h = 1/N")->required();
  chk->add_option("--beta-max", beta_max, "truncation of the infinite sums")->capture_default_str();
  chk->add_option("--tolerance", tolerance, "largest acceptable tail bound")->capture_default_str();
  chk->add_flag("--deep", deep, "also check the k = 2m+1..4m identities");
  add_bits(chk);

  if (const char* env = std::getenv("OPTQUAD_BITS"); env != nullptr) {
    const std::string text(env);
    char* end = nullptr;
    errno = 0;
    const long v = std::strtol(text.c_str(), &end, 10);
    if (text.empty() || *end != '\0' || errno != 0 || v < 64 || v > (1 << 20)) {
      err << "error: OPTQUAD_BITS must be an integer in [64, 1048576], got '" << text << "'\n";
      return kExitUsage;
    }
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return kExitUsage;
  }

  try {
    if (*gen) return detail::cmd_generate(m, N, bits, out_path, out, err);
    if (*val) return detail::cmd_validate(rule_path, out);
    if (*conv) return detail::cmd_converge(m, integrand, n_list, bits, out_path, out, err);
    if (*chk) return detail::cmd_check_operator(m, N, beta_max, bits, tolerance, deep, out, err);
  } catch (const ParameterError& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const PrecisionError& e) {
    err << "precision error: " << e.what() << "\n";
    if (e.suggested_bits() > 0) err << "retry with --bits " << e.suggested_bits() << "\n";
    return kExitPrecision;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kExitFailed;
  }
  return kExitUsage;
}

}  // namespace optquad::cli
