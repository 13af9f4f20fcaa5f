#pragma once

// Sobolev's discrete analogue D_m(h*beta) of d^{2m}/dx^{2m}: the grid function
// whose convolution with G(h*beta) = |h*beta|^{2m-1} / (2 (2m-1)!) is the
// discrete delta. It is used here only as an independent check of the roots
// and polynomials that the rule builder relies on.
//
// Every identity below is an infinite sum over the integers. Sums are
// truncated at |beta| <= beta_max and each reported residual carries an
// analytic bound on the discarded tail.

#include <cstddef>
#include <string>
#include <vector>

#include "optquad/bigreal.hpp"
#include "optquad/errors.hpp"
#include "optquad/exact_core.hpp"
#include "optquad/rootfinder.hpp"
#include "optquad/rule_builder.hpp"

namespace optquad {

struct DiscreteOperator {
  int m = 0;
  BigReal h;
  int beta_max = 0;
  RootSet roots;
  /// (1 - q_k)^{2m+1} / (q_k E_{2m-1}(q_k)), one per root.
  std::vector<BigReal> weights;
  /// (2m-1)! / h^{2m}
  BigReal scale;
  /// D_m(h*beta) for beta = 0..beta_max; the function is even.
  std::vector<BigReal> values;

  const BigReal& at(int beta) const {
    const int b = beta < 0 ? -beta : beta;
    if (b > beta_max) throw ParameterError("D_m evaluated beyond beta_max");
    return values[static_cast<std::size_t>(b)];
  }
};

namespace detail {

/// Upper bound on sum_{g > B} rho^g (g + shift)^n for 0 <= rho < 1, using the
/// term ratio rho ((B+2+shift)/(B+1+shift))^n, which dominates every later
/// ratio. Returns +inf when that ratio is not below 1.
inline BigReal geometric_tail(const BigReal& rho, int B, int shift, int n) {
  const int bits = rho.precision();
  const BigReal first = pow(rho, static_cast<unsigned long>(B + 1)) *
                        ipow(BigReal(B + 1 + shift, bits), static_cast<unsigned>(n));
  const BigReal ratio =
      rho * ipow(BigReal(B + 2 + shift, bits) / (B + 1 + shift), static_cast<unsigned>(n));
  if (!(ratio < 1)) return BigReal(1L, bits) / BigReal(0L, bits);
  return first / (BigReal(1L, bits) - ratio);
}

inline std::vector<BigReal> operator_weights(int m, const RootSet& roots) {
  const EFPolynomial e = euler_frobenius(2 * m - 1);
  std::vector<BigReal> w;
  for (const auto& q : roots.roots) {
    const BigReal one_minus = BigReal(1L, q.precision()) - q;
    w.push_back(pow(one_minus, static_cast<unsigned long>(2 * m + 1)) / (q * e.evaluate(q)));
  }
  return w;
}

}  // namespace detail

inline DiscreteOperator build_operator(int m, const BigReal& h, int beta_max,
                                       const RootSet& roots) {
  if (m < 2) throw ParameterError("build_operator: m must be >= 2");
  if (beta_max < 2 * m + 2)
    throw ParameterError("build_operator: beta_max must be >= 2m + 2 = " +
                         std::to_string(2 * m + 2));
  if (roots.m != m) throw ParameterError("build_operator: root set is for a different m");
  if (!(h > 0)) throw ParameterError("build_operator: h must be positive");

  const int bits = roots.precision_bits;
  DiscreteOperator op;
  op.m = m;
  op.h = h.with_precision(bits);
  op.beta_max = beta_max;
  op.roots = roots;
  op.weights = detail::operator_weights(m, roots);
  op.scale = BigReal(factorial(2 * m - 1), bits) / ipow(op.h, static_cast<unsigned>(2 * m));

  const auto& q = roots.roots;
  const auto& c = op.weights;
  op.values.reserve(static_cast<std::size_t>(beta_max) + 1);

  BigReal v0 = -BigReal::pow2(2 * m - 1, bits);
  BigReal v1(1L, bits);
  for (std::size_t k = 0; k < q.size(); ++k) {
    v0 += c[k];
    v1 += c[k] * q[k];
  }
  op.values.push_back(op.scale * v0);
  op.values.push_back(op.scale * v1);

  std::vector<BigReal> q_pow;  // q_k^beta, advanced in place
  for (const auto& qk : q) q_pow.push_back(qk * qk);
  for (int beta = 2; beta <= beta_max; ++beta) {
    BigReal s(0L, bits);
    for (std::size_t k = 0; k < q.size(); ++k) {
      s += c[k] * q_pow[k];
      q_pow[k] *= q[k];
    }
    op.values.push_back(op.scale * s);
  }
  return op;
}

/// Bound on sum_{|beta| > beta_max} |D_m(h beta)| |h beta|^k.
inline BigReal moment_tail_bound(const DiscreteOperator& op, int k, int beta_max) {
  const int bits = op.scale.precision();
  if (k % 2 == 1) return BigReal(0L, bits);  // odd terms cancel in pairs
  BigReal total(0L, bits);
  for (std::size_t i = 0; i < op.weights.size(); ++i)
    total += abs(op.weights[i]) * detail::geometric_tail(abs(op.roots.roots[i]), beta_max, 0, k);
  return 2 * op.scale * ipow(op.h, static_cast<unsigned>(k)) * total;
}

/// Bound on h * sum_{|gamma| > beta_max} |D_m(h gamma)| G(h (beta - gamma)).
inline BigReal convolution_tail_bound(const DiscreteOperator& op, int beta, int beta_max) {
  const int bits = op.scale.precision();
  const int n = 2 * op.m - 1;
  const int shift = beta < 0 ? -beta : beta;
  BigReal total(0L, bits);
  for (std::size_t i = 0; i < op.weights.size(); ++i)
    total += abs(op.weights[i]) * detail::geometric_tail(abs(op.roots.roots[i]), beta_max, shift, n);
  const BigReal g_scale = ipow(op.h, static_cast<unsigned>(n)) /
                          (2 * BigReal(factorial(n), bits));
  return 2 * op.h * op.scale * g_scale * total;
}

struct MomentCheck {
  int k = 0;
  BigReal value;
  BigReal expected;
  BigReal residual;
  BigReal tail_bound;
};

/// Exact value of sum_beta D_m(h beta) (h beta)^k for 0 <= k <= 4m.
inline BigReal moment_expected(const DiscreteOperator& op, int k) {
  const int m = op.m;
  const int bits = op.scale.precision();
  if (k < 0 || k > 4 * m) throw ParameterError("moment identity known only for 0 <= k <= 4m");
  if (k == 2 * m) return BigReal(factorial(2 * m), bits);
  if (k == 4 * m)
    return ipow(op.h, static_cast<unsigned>(2 * m)) *
           BigReal(Rational(bernoulli(2 * m) * factorial(4 * m) / factorial(2 * m)), bits);
  return BigReal(0L, bits);
}

inline MomentCheck moment(const DiscreteOperator& op, int k) {
  const int bits = op.scale.precision();
  MomentCheck out;
  out.k = k;
  // Pair +beta with -beta; odd k cancels exactly.
  BigReal s = k == 0 ? op.values[0] : BigReal(0L, bits);
  if (k % 2 == 0) {
    BigReal tail_sum(0L, bits);
    for (int beta = 1; beta <= op.beta_max; ++beta)
      tail_sum += op.values[static_cast<std::size_t>(beta)] *
                  ipow(op.h * beta, static_cast<unsigned>(k));
    s += 2 * tail_sum;
  }
  out.value = std::move(s);
  out.expected = moment_expected(op, k);
  out.residual = abs(out.value - out.expected);
  out.tail_bound = moment_tail_bound(op, k, op.beta_max);
  return out;
}

/// k = 0..2m, plus 2m+1..4m when `deep` is set. The deep identities need a
/// much larger beta_max for comparable accuracy.
inline std::vector<MomentCheck> moment_identities(const DiscreteOperator& op, bool deep = false) {
  std::vector<MomentCheck> out;
  const int top = deep ? 4 * op.m : 2 * op.m;
  for (int k = 0; k <= top; ++k) out.push_back(moment(op, k));
  return out;
}

struct ConvolutionReport {
  /// max over |beta| <= beta_max/2 of |h (D * G)(beta) - delta(beta)|
  BigReal max_residual;
  int worst_beta = 0;
  /// max over the same betas of the tail bound
  BigReal tail_bound;
  BigReal total() const { return max_residual + tail_bound; }
};

/// Smallest beta_max >= 2m+2 for which every moment (k <= 2m) and
/// convolution tail bound drops below `tolerance`. Throws when none up to
/// `limit` does.
inline int required_beta_max(const DiscreteOperator& op, const BigReal& tolerance,
                             int limit = 1 << 16) {
  auto ok = [&](int b) {
    for (int k = 0; k <= 2 * op.m; ++k)
      if (!(moment_tail_bound(op, k, b) < tolerance)) return false;
    return convolution_tail_bound(op, b / 2, b) < tolerance;
  };
  int lo = 2 * op.m + 2;
  if (ok(lo)) return lo;
  int hi = lo;
  while (!ok(hi)) {
    lo = hi;
    hi *= 2;
    if (hi > limit) throw PrecisionError("tolerance unreachable below beta_max " + std::to_string(limit));
  }
  while (hi - lo > 1) {
    const int mid = lo + (hi - lo) / 2;
    (ok(mid) ? hi : lo) = mid;
  }
  return hi;
}

/// Largest tail bound over the moment identities k = 0..2m and the
/// convolution check.
inline BigReal worst_tail_bound(const DiscreteOperator& op) {
  BigReal worst = convolution_tail_bound(op, op.beta_max / 2, op.beta_max);
  for (int k = 0; k <= 2 * op.m; ++k) {
    BigReal t = moment_tail_bound(op, k, op.beta_max);
    if (t > worst) worst = std::move(t);
  }
  return worst;
}

/// Truncated convolution residuals for |beta| <= beta_max/2, no tolerance gate.
inline ConvolutionReport convolution_residuals(const DiscreteOperator& op) {
  const int bits = op.scale.precision();
  const int B = op.beta_max;
  const int reach = B / 2;

  const int n = 2 * op.m - 1;
  const BigReal g_scale = BigReal(1L, bits) / (2 * BigReal(factorial(n), bits));
  // G(h j) for j = 0..B + reach
  std::vector<BigReal> g;
  for (int j = 0; j <= B + reach; ++j)
    g.push_back(g_scale * ipow(op.h * j, static_cast<unsigned>(n)));

  ConvolutionReport rep;
  rep.max_residual = BigReal(0L, bits);
  // The tail bound grows with |beta|, so the outermost beta is the worst.
  rep.tail_bound = convolution_tail_bound(op, reach, B);
  // D and G are even, so the convolution is even in beta.
  for (int beta = 0; beta <= reach; ++beta) {
    BigReal s(0L, bits);
    for (int gamma = -B; gamma <= B; ++gamma) {
      const int dist = beta - gamma < 0 ? gamma - beta : beta - gamma;
      s += op.at(gamma) * g[static_cast<std::size_t>(dist)];
    }
    s *= op.h;
    if (beta == 0) s -= BigReal(1L, bits);
    BigReal r = abs(s);
    if (r > rep.max_residual) {
      rep.max_residual = std::move(r);
      rep.worst_beta = beta;
    }
  }
  return rep;
}

/// Convolution residuals, refusing to run when the truncation tail alone
/// already exceeds `tolerance`.
inline ConvolutionReport convolution_check(const DiscreteOperator& op, const BigReal& tolerance) {
  const BigReal tail = convolution_tail_bound(op, op.beta_max / 2, op.beta_max);
  if (!(tail < tolerance))
    throw PrecisionError("convolution tail bound " + tail.format(6) + " exceeds tolerance " +
                         tolerance.format(6) + "; required beta_max >= " +
                         std::to_string(required_beta_max(op, tolerance)));
  return convolution_residuals(op);
}

}  // namespace optquad
