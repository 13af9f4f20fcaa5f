#pragma once

// Applying rules to integrands, error bounds, and convergence studies.

#include <cmath>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "optquad/bigreal.hpp"
#include "optquad/errors.hpp"
#include "optquad/exact_core.hpp"
#include "optquad/rule_builder.hpp"

namespace optquad {

using RealFunction = std::function<BigReal(const BigReal&)>;

struct Integrand {
  std::string id;
  RealFunction f;
  /// Analytic derivatives. When absent the engine differentiates numerically
  /// and flags the result.
  std::optional<RealFunction> f1;
  std::optional<RealFunction> f3;
  /// ||f^(m)||_{L2(0,1)} for the m the integrand was built for.
  std::optional<BigReal> fm_l2;
  std::optional<BigReal> exact_integral;
};

struct ApplyResult {
  BigReal value;
  bool fd_fallback = false;
  /// Estimated truncation error of the numerical derivatives, already
  /// multiplied by |A| and |B|. Zero when analytic derivatives were used.
  BigReal fd_truncation;
};

namespace detail {

inline BigReal checked_eval(const RealFunction& f, const BigReal& x, const std::string& what) {
  BigReal v = f(x);
  if (!v.is_finite())
    throw EvaluationError(what + " is not finite at x = " + x.format(20));
  return v;
}

/// Central difference for f' (order 1) or f''' (order 3) with step s.
inline BigReal central_difference(const RealFunction& f, const BigReal& x, const BigReal& s,
                                  int order) {
  const std::string what = "integrand (finite-difference stencil)";
  if (order == 1)
    return (checked_eval(f, x + s, what) - checked_eval(f, x - s, what)) / (2 * s);
  const BigReal f2p = checked_eval(f, x + 2 * s, what);
  const BigReal f1p = checked_eval(f, x + s, what);
  const BigReal f1m = checked_eval(f, x - s, what);
  const BigReal f2m = checked_eval(f, x - 2 * s, what);
  return (f2p - 2 * f1p + 2 * f1m - f2m) / (2 * s * s * s);
}

struct Derivative {
  BigReal value;
  BigReal truncation;
};

/// Richardson extrapolation of central differences over `levels` halvings of
/// `step`. Both stencils have error expansions in even powers of the step.
/// The stencils reach 2 * step beyond x, so f is sampled slightly outside
/// [0, 1] at the endpoints.
inline Derivative richardson_derivative(const RealFunction& f, const BigReal& x,
                                        const BigReal& step, int order, int levels = 4) {
  std::vector<std::vector<BigReal>> table;
  BigReal s = step;
  for (int i = 0; i < levels; ++i) {
    std::vector<BigReal> row{central_difference(f, x, s, order)};
    BigReal factor(4L, step.precision());
    for (int j = 1; j <= i; ++j) {
      row.push_back(row[j - 1] + (row[j - 1] - table[i - 1][j - 1]) / (factor - 1));
      factor *= 4;
    }
    table.push_back(std::move(row));
    s /= 2;
  }
  const auto& last = table.back();
  const auto& prev = table[table.size() - 2];
  return {last.back(), abs(last.back() - prev.back())};
}

}  // namespace detail

/// Evaluates sum C[b] f(h b) + A (f'(0) - f'(1)) + B (f'''(0) - f'''(1)).
/// The same formula with the rule's own coefficients drives every method
/// below, so a rule read back from disk can be applied without rebuilding.
inline ApplyResult apply_weights(const std::vector<BigReal>& C, const BigReal& A, const BigReal& B,
                                 const Integrand& g) {
  if (C.size() < 2) throw ParameterError("apply: a rule needs at least two nodes");
  if (!g.f) throw ParameterError("apply: integrand '" + g.id + "' has no function");
  const int bits = A.precision();
  const long N = static_cast<long>(C.size()) - 1;
  const BigReal zero(0L, bits), one(1L, bits);

  ApplyResult out;
  out.value = zero;
  out.fd_truncation = zero;
  for (long b = 0; b <= N; ++b) {
    const BigReal x = BigReal(b, bits) / N;
    out.value += C[static_cast<std::size_t>(b)] *
                 detail::checked_eval(g.f, x, "integrand at node " + std::to_string(b));
  }

  const BigReal h = one / N;
  auto endpoint_difference = [&](const std::optional<RealFunction>& analytic, int order,
                                 const BigReal& weight) {
    if (weight.is_zero()) return;
    if (analytic) {
      const std::string name = order == 1 ? "first derivative" : "third derivative";
      out.value += weight * (detail::checked_eval(*analytic, zero, name) -
                             detail::checked_eval(*analytic, one, name));
      return;
    }
    out.fd_fallback = true;
    const BigReal step = h * h;
    const auto d0 = detail::richardson_derivative(g.f, zero, step, order);
    const auto d1 = detail::richardson_derivative(g.f, one, step, order);
    out.value += weight * (d0.value - d1.value);
    out.fd_truncation += abs(weight) * (d0.truncation + d1.truncation);
  };
  endpoint_difference(g.f1, 1, A);
  endpoint_difference(g.f3, 3, B);
  return out;
}

inline ApplyResult apply_detailed(const QuadRule& rule, const Integrand& g) {
  PrecisionScope scope(rule.precision_bits);
  return apply_weights(rule.C, rule.A, rule.B, g);
}

inline BigReal apply(const QuadRule& rule, const Integrand& g) {
  return apply_detailed(rule, g).value;
}

/// Guaranteed |exact - apply| bound for f with ||f^(m)||_{L2} = fm_l2.
inline BigReal error_bound(const QuadRule& rule, const BigReal& fm_l2) {
  if (fm_l2.sign() < 0) throw ParameterError("error_bound: fm_l2 must be >= 0");
  return sqrt(rule.norm_sq) * fm_l2;
}

// -- Comparators -------------------------------------------------------------

inline BigReal trapezoid(const Integrand& g, int N, int bits = working_precision()) {
  if (N < 1) throw ParameterError("trapezoid: N must be >= 1");
  BigReal s(0L, bits);
  for (int b = 0; b <= N; ++b) {
    BigReal v = detail::checked_eval(g.f, BigReal(b, bits) / N,
                                     "integrand at node " + std::to_string(b));
    if (b == 0 || b == N) v /= 2;
    s += v;
  }
  return s / N;
}

/// Trapezoid plus the h^2/12 and -h^4/720 endpoint corrections, with the
/// weights written out here rather than taken from the rule builder.
inline BigReal euler_maclaurin(const Integrand& g, int N, int bits = working_precision()) {
  PrecisionScope scope(bits);
  const BigReal h = BigReal(1L, bits) / N;
  const BigReal h2 = h * h;
  std::vector<BigReal> C(static_cast<std::size_t>(N) + 1, h);
  C.front() = h / 2;
  C.back() = h / 2;
  return apply_weights(C, h2 / 12, -(h2 * h2) / 720, g).value;
}

// -- Built-in integrands -----------------------------------------------------

inline const std::vector<std::string>& corpus_ids() {
  static const std::vector<std::string> ids{"exp", "sinpi", "inv1px", "xm"};
  return ids;
}

/// One of the built-in integrands, with fm_l2 for the given m.
inline Integrand corpus_integrand(const std::string& id, int m, int bits = working_precision()) {
  if (m < 1) throw ParameterError("corpus_integrand: m must be >= 1");
  PrecisionScope scope(bits);
  const BigReal one(1L, bits);
  Integrand g;
  g.id = id;
  if (id == "exp") {
    g.f = [](const BigReal& x) { return exp(x); };
    g.f1 = g.f;
    g.f3 = g.f;
    const BigReal e = exp(one);
    g.exact_integral = e - 1;
    g.fm_l2 = sqrt((e * e - 1) / 2);
  } else if (id == "sinpi") {
    const BigReal pi = BigReal::pi(bits);
    g.f = [pi](const BigReal& x) { return sin(pi * x); };
    g.f1 = [pi](const BigReal& x) { return pi * cos(pi * x); };
    g.f3 = [pi](const BigReal& x) { return -(pi * pi * pi) * cos(pi * x); };
    g.exact_integral = 2 / pi;
    g.fm_l2 = pow(pi, static_cast<unsigned long>(m)) / sqrt(BigReal(2L, bits));
  } else if (id == "inv1px") {
    g.f = [](const BigReal& x) { return 1 / (x + 1); };
    g.f1 = [](const BigReal& x) {
      const BigReal u = x + 1;
      return -1 / (u * u);
    };
    g.f3 = [](const BigReal& x) {
      const BigReal u = x + 1;
      const BigReal u2 = u * u;
      return -6 / (u2 * u2);
    };
    g.exact_integral = log(BigReal(2L, bits));
    // f^(m) = (-1)^m m! (1+x)^(-m-1)
    const BigReal integral = (one - BigReal::pow2(-(2 * m + 1), bits)) / (2 * m + 1);
    g.fm_l2 = BigReal(factorial(m), bits) * sqrt(integral);
  } else if (id == "xm") {
    const unsigned long p = static_cast<unsigned long>(m);
    g.f = [p](const BigReal& x) { return pow(x, p); };
    g.f1 = [p](const BigReal& x) { return p * pow(x, p - 1); };
    g.f3 = [p](const BigReal& x) {
      if (p < 3) return BigReal(0L, x.precision());
      return (p * (p - 1) * (p - 2)) * pow(x, p - 3);
    };
    g.exact_integral = one / (m + 1);
    g.fm_l2 = BigReal(factorial(m), bits);
  } else {
    std::string list;
    for (const auto& known : corpus_ids()) list += (list.empty() ? "" : ", ") + known;
    throw ParameterError("unknown integrand '" + id + "'; available: " + list);
  }
  return g;
}

/// x^alpha with analytic derivatives and exact integral 1/(alpha+1).
inline Integrand monomial(unsigned alpha, int bits = working_precision()) {
  Integrand g;
  g.id = "x^" + std::to_string(alpha);
  const unsigned long a = alpha;
  auto power = [](unsigned long k, unsigned long p) {
    return [k, p](const BigReal& x) {
      if (k == 0) return BigReal(0L, x.precision());
      return k * pow(x, p);
    };
  };
  g.f = [a](const BigReal& x) { return pow(x, a); };
  g.f1 = power(a, a >= 1 ? a - 1 : 0);
  g.f3 = power(a >= 3 ? a * (a - 1) * (a - 2) : 0, a >= 3 ? a - 3 : 0);
  g.exact_integral = BigReal(1L, bits) / static_cast<long>(a + 1);
  return g;
}

// -- Convergence studies -----------------------------------------------------

struct ConvergenceRow {
  int N = 0;
  bool ok = false;
  std::string error;
  BigReal approx;
  BigReal abs_error;
  /// sqrt(norm_sq) * fm_l2, NaN when fm_l2 is unknown.
  BigReal norm_bound;
  /// Orders against the previous successful row, normalised by log2 of the
  /// N ratio; NaN on the first row.
  BigReal observed_order;
  BigReal bound_order;
  BigReal trapezoid_error;
  BigReal euler_maclaurin_error;
  bool fd_fallback = false;
  BigReal fd_truncation;
};

struct ConvergenceReport {
  int m = 0;
  std::string integrand_id;
  int precision_bits = 0;
  std::vector<ConvergenceRow> rows;
};

namespace detail {
inline BigReal order_between(const BigReal& e_prev, const BigReal& e_cur, int n_prev, int n_cur) {
  const int bits = e_cur.precision();
  if (!(e_prev.sign() > 0) || !(e_cur.sign() > 0) || !e_prev.is_finite() || !e_cur.is_finite())
    return BigReal::nan(bits);
  return log2(e_prev / e_cur) / log2(BigReal(n_cur, bits) / n_prev);
}
}  // namespace detail

inline ConvergenceReport converge(int m, const Integrand& g, const std::vector<int>& N_list,
                                  int precision_bits = kDefaultPrecisionBits) {
  if (!g.exact_integral)
    throw ParameterError("converge: integrand '" + g.id + "' has no exact integral");
  PrecisionScope scope(precision_bits);
  ConvergenceReport rep;
  rep.m = m;
  rep.integrand_id = g.id;
  rep.precision_bits = precision_bits;
  const BigReal nan = BigReal::nan(precision_bits);
  const BigReal exact = g.exact_integral->with_precision(precision_bits);

  rep.rows.reserve(N_list.size());  // keeps `prev` valid
  const ConvergenceRow* prev = nullptr;
  for (int N : N_list) {
    ConvergenceRow row;
    row.N = N;
    row.approx = row.abs_error = row.norm_bound = row.observed_order = row.bound_order = nan;
    row.trapezoid_error = row.euler_maclaurin_error = row.fd_truncation = nan;
    try {
      const QuadRule rule = build_rule(m, N, precision_bits);
      const ApplyResult r = apply_detailed(rule, g);
      row.approx = r.value;
      row.abs_error = abs(r.value - exact);
      row.fd_fallback = r.fd_fallback;
      row.fd_truncation = r.fd_truncation;
      if (g.fm_l2) row.norm_bound = error_bound(rule, *g.fm_l2);
      row.trapezoid_error = abs(trapezoid(g, N, precision_bits) - exact);
      row.euler_maclaurin_error = abs(euler_maclaurin(g, N, precision_bits) - exact);
      if (prev != nullptr) {
        row.observed_order = detail::order_between(prev->abs_error, row.abs_error, prev->N, N);
        row.bound_order = detail::order_between(prev->norm_bound, row.norm_bound, prev->N, N);
      }
      row.ok = true;
    } catch (const Error& e) {
      row.error = e.what();
    }
    rep.rows.push_back(std::move(row));
    if (rep.rows.back().ok) prev = &rep.rows.back();
  }
  return rep;
}

}  // namespace optquad
