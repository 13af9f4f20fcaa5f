#pragma once

// Sard-optimal quadrature with endpoint first- and third-derivative terms
//
//   int_0^1 f ~ sum_b C[b] f(hb) + A (f'(0) - f'(1)) + B (f'''(0) - f'''(1))
//
// in L2^(m)(0,1), m >= 4, h = 1/N. The weights are expressed through the
// roots q_k of E_{2m-2} inside the unit disk and m - 1 multipliers d_k, which
// solve a small dense linear system whose entries are inner_sum() values.

#include <cmath>
#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "optquad/bigreal.hpp"
#include "optquad/dense_solve.hpp"
#include "optquad/errors.hpp"
#include "optquad/exact_core.hpp"
#include "optquad/rootfinder.hpp"

namespace optquad {

/// x^n by repeated squaring; works for double and BigReal alike.
template <class Real>
Real ipow(const Real& x, unsigned n) {
  Real result = x * 0 + 1;
  Real base = x;
  while (n != 0) {
    if (n & 1U) result *= base;
    n >>= 1U;
    if (n != 0) base *= base;
  }
  return result;
}

inline BigReal ipow(const BigReal& x, unsigned n) { return pow(x, static_cast<unsigned long>(n)); }

/// T_j(q, N) = sum_{i=0}^{j} [q + (-1)^{i+1} q^{N+i}] / (q-1)^{i+1} * Δ^i 0^j.
template <class Real>
Real inner_sum(const Real& q, int N, int j) {
  if (!(q > -1 && q < 0)) throw ParameterError("inner_sum: q must lie in (-1, 0)");
  if (N < 1 || j < 0) throw ParameterError("inner_sum: need N >= 1 and j >= 0");
  const Real one = q * 0 + 1;
  const Real inv = one / (q - one);
  Real inv_pow = inv;
  Real q_shift = ipow(q, static_cast<unsigned>(N));
  Real sum = q * 0;
  for (int i = 0; i <= j; ++i) {
    const BigInt d = delta_zero(i, j);
    if (d != 0) {
      Real numer = (i % 2 == 0) ? q - q_shift : q + q_shift;
      sum += numer * inv_pow * from_integer(d, q);
    }
    inv_pow *= inv;
    q_shift *= q;
  }
  return sum;
}

/// Row labels j of the d_k system in ascending order:
/// j = 2, then 4..m-1 (non-zero right-hand sides), then 2m-4 and 2m-2.
inline std::vector<int> dk_row_labels(int m) {
  std::vector<int> rows{2};
  for (int j = 4; j <= m - 1; ++j) rows.push_back(j);
  rows.push_back(2 * m - 4);
  rows.push_back(2 * m - 2);
  for (std::size_t i = 1; i < rows.size(); ++i)
    if (rows[i] <= rows[i - 1]) throw Error("d_k system rows overlap for m = " + std::to_string(m));
  if (static_cast<int>(rows.size()) != m - 1)
    throw Error("d_k system must have m - 1 rows for m = " + std::to_string(m));
  return rows;
}

struct DkSystem {
  int m = 0;
  int N = 0;
  std::vector<int> row_labels;
  DenseMatrix<BigReal> matrix;
  std::vector<BigReal> rhs;
};

struct DkSolution {
  std::vector<BigReal> d;
  /// ||matrix * d - rhs||_inf
  BigReal residual;
  /// ||M||_inf ||M^-1||_inf
  double condition_estimate = 0.0;
  /// precision_bits - log2(condition_estimate)
  double correct_bits = 0.0;
};

inline void check_rule_parameters(int m, int N) {
  if (m < 4) throw ParameterError("m must be >= 4 (got " + std::to_string(m) + ")");
  if (N < 1 || N < m - 3)
    throw ParameterError("N = " + std::to_string(N) + " is invalid for m = " + std::to_string(m) +
                         ": the condition N >= m - 3 (and N >= 1) has to be met");
}

inline DkSystem assemble_dk_system(int m, int N, const RootSet& roots) {
  check_rule_parameters(m, N);
  if (roots.m != m || static_cast<int>(roots.roots.size()) != m - 1)
    throw ParameterError("root set is for m = " + std::to_string(roots.m) + ", requested m = " +
                         std::to_string(m));
  const int bits = roots.precision_bits;
  const std::size_t n = static_cast<std::size_t>(m - 1);

  DkSystem sys;
  sys.m = m;
  sys.N = N;
  sys.row_labels = dk_row_labels(m);
  sys.matrix = DenseMatrix<BigReal>(n, BigReal(0L, bits));
  for (std::size_t r = 0; r < n; ++r) {
    const int j = sys.row_labels[r];
    for (std::size_t k = 0; k < n; ++k) sys.matrix(r, k) = inner_sum(roots.roots[k], N, j);
    if (j >= 4 && j <= m - 1)
      sys.rhs.emplace_back(Rational(bernoulli(j + 1) / (j + 1)), bits);
    else
      sys.rhs.emplace_back(0L, bits);
  }
  return sys;
}

/// max_r |sum_k M(r,k) d_k - rhs_r| for an arbitrary candidate d.
inline BigReal dk_residual(const DkSystem& sys, const std::vector<BigReal>& d) {
  BigReal worst(0L, sys.matrix(0, 0).precision());
  for (std::size_t r = 0; r < sys.matrix.size(); ++r) {
    BigReal acc = -sys.rhs[r];
    for (std::size_t k = 0; k < sys.matrix.size(); ++k) acc += sys.matrix(r, k) * d[k];
    acc = abs(acc);
    if (acc > worst) worst = std::move(acc);
  }
  return worst;
}

inline DkSolution solve_dk(const DkSystem& sys) {
  const int bits = sys.matrix(0, 0).precision();
  auto lu = lu_factor(sys.matrix);
  if (!lu)
    throw PrecisionError("d_k system is singular at " + std::to_string(bits) + " bits",
                         INFINITY, 2 * bits);

  DkSolution sol;
  sol.d = lu_solve(*lu, sys.rhs);
  const BigReal cond = condition_inf(sys.matrix, *lu);
  sol.condition_estimate = cond.to_double();
  const double log2_cond = cond.is_zero() ? 0.0 : log2(cond).to_double();
  sol.correct_bits = bits - log2_cond;

  sol.residual = dk_residual(sys, sol.d);

  const int suggested = static_cast<int>(std::ceil(log2_cond)) + 128;
  if (sol.correct_bits < 1.0)
    throw PrecisionError("d_k system condition ~2^" + std::to_string(static_cast<int>(log2_cond)) +
                             " exceeds the working precision",
                         sol.condition_estimate, suggested);
  if (sol.residual > BigReal::pow2(-(bits / 4), bits))
    throw PrecisionError("d_k system residual " + sol.residual.format(6) + " above 2^-" +
                             std::to_string(bits / 4),
                         sol.condition_estimate, suggested);
  return sol;
}

struct QuadRule {
  int m = 0;
  int N = 0;
  int precision_bits = 0;
  BigReal h;
  /// N + 1 node weights, C[b] for node h*b.
  std::vector<BigReal> C;
  /// First-derivative endpoint weight.
  BigReal A;
  /// Third-derivative endpoint weight.
  BigReal B;
  RootSet roots;
  std::vector<int> row_labels;
  std::vector<BigReal> d;
  BigReal norm_sq;
  BigReal system_residual;
  double condition_estimate = 0.0;
  double correct_bits = 0.0;
  std::vector<std::string> warnings;

  std::vector<double> C_double() const {
    std::vector<double> out;
    out.reserve(C.size());
    for (const auto& c : C) out.push_back(c.to_double());
    return out;
  }
};

/// Squared norm of the error functional of an optimal rule.
inline BigReal error_norm_sq(const QuadRule& rule) {
  const int m = rule.m;
  const int bits = rule.precision_bits;
  const BigReal inv_fact(Rational(BigInt(1), factorial(2 * m)), bits);
  const BigReal h2m = ipow(rule.h, static_cast<unsigned>(2 * m));

  BigReal correction(0L, bits);
  for (std::size_t k = 0; k < rule.d.size(); ++k)
    correction += rule.d[k] * inner_sum(rule.roots.roots[k], rule.N, 2 * m);

  BigReal bracket = BigReal(bernoulli(2 * m), bits) * h2m * inv_fact -
                    2 * (h2m * rule.h) * inv_fact * correction;
  return (m % 2 == 1) ? bracket : -bracket;
}

inline QuadRule build_rule(int m, int N, int precision_bits = kDefaultPrecisionBits) {
  check_rule_parameters(m, N);
  if (precision_bits < 64) throw ParameterError("precision_bits must be >= 64");
  PrecisionScope scope(precision_bits);
  const int bits = precision_bits;

  QuadRule rule;
  rule.m = m;
  rule.N = N;
  rule.precision_bits = bits;
  rule.h = BigReal(1L, bits) / N;
  rule.roots = unit_disk_roots(m, bits);

  const DkSystem sys = assemble_dk_system(m, N, rule.roots);
  DkSolution sol = solve_dk(sys);
  rule.row_labels = sys.row_labels;
  rule.d = std::move(sol.d);
  rule.system_residual = std::move(sol.residual);
  rule.condition_estimate = sol.condition_estimate;
  rule.correct_bits = sol.correct_bits;
  if (rule.correct_bits < 50)
    rule.warnings.push_back("estimated correct bits " + std::to_string(rule.correct_bits) +
                            " < 50; consider a larger precision");

  const auto& q = rule.roots.roots;
  const std::size_t n = q.size();
  const BigReal one(1L, bits);
  const BigReal& h = rule.h;

  std::vector<BigReal> q_pow;  // q_k^N
  for (const auto& qk : q) q_pow.push_back(ipow(qk, static_cast<unsigned>(N)));

  BigReal end_sum(0L, bits);
  for (std::size_t k = 0; k < n; ++k) end_sum += rule.d[k] * (q_pow[k] - q[k]) / (one - q[k]);
  const BigReal end_weight = h * (one / 2 + end_sum);

  rule.C.reserve(static_cast<std::size_t>(N) + 1);
  rule.C.push_back(end_weight);
  for (int beta = 1; beta <= N - 1; ++beta) {
    BigReal s(0L, bits);
    for (std::size_t k = 0; k < n; ++k)
      s += rule.d[k] * (ipow(q[k], static_cast<unsigned>(beta)) +
                        ipow(q[k], static_cast<unsigned>(N - beta)));
    rule.C.push_back(h * (one + s));
  }
  rule.C.push_back(end_weight);

  BigReal a_sum(0L, bits);
  for (std::size_t k = 0; k < n; ++k) {
    const BigReal om = one - q[k];
    a_sum += rule.d[k] * (q[k] + q_pow[k] * q[k]) / (om * om);
  }
  const BigReal b2_term(Rational(bernoulli(2) / 2), bits);
  rule.A = ipow(h, 2) * (b2_term - a_sum);

  BigReal b_sum(0L, bits);
  for (std::size_t k = 0; k < n; ++k) b_sum += rule.d[k] * inner_sum(q[k], N, 3);
  const BigReal b4_term(Rational(bernoulli(4) / 24), bits);
  rule.B = ipow(h, 4) * (b4_term - b_sum / 6);

  rule.norm_sq = error_norm_sq(rule);
  if (!(rule.norm_sq.sign() > 0))
    throw PrecisionError("error norm is not positive at " + std::to_string(bits) + " bits; " +
                             "cancellation exceeded the working precision",
                         rule.condition_estimate, 2 * bits);
  return rule;
}

// -- Post-hoc checks ---------------------------------------------------------

/// Residuals of the exactness conditions for x^alpha, alpha = 0..m-1:
///   sum_b C[b](hb)^alpha - alpha A - alpha(alpha-1)(alpha-2) B - 1/(alpha+1).
/// Works on any (m, N, C, A, B), including a rule read back from a file.
inline std::vector<BigReal> moment_residuals(int m, int N, const std::vector<BigReal>& C,
                                             const BigReal& A, const BigReal& B) {
  const int bits = A.precision();
  std::vector<BigReal> out;
  std::vector<BigReal> nodes;
  for (int b = 0; b <= N; ++b) nodes.push_back(BigReal(b, bits) / N);
  for (int alpha = 0; alpha < m; ++alpha) {
    BigReal s(0L, bits);
    for (int b = 0; b <= N; ++b)
      s += C[static_cast<std::size_t>(b)] * ipow(nodes[static_cast<std::size_t>(b)], alpha);
    if (alpha >= 2) s -= A * alpha;
    if (alpha >= 4) s -= B * (alpha * (alpha - 1) * (alpha - 2));
    s -= BigReal(1L, bits) / (alpha + 1);
    out.push_back(std::move(s));
  }
  return out;
}

inline std::vector<BigReal> moment_residuals(const QuadRule& rule) {
  return moment_residuals(rule.m, rule.N, rule.C, rule.A, rule.B);
}

/// max_b |C[b] - C[N-b]|
inline BigReal symmetry_defect(const std::vector<BigReal>& C) {
  BigReal worst(0L, C.empty() ? working_precision() : C.front().precision());
  for (std::size_t b = 0; b < C.size(); ++b) {
    BigReal diff = abs(C[b] - C[C.size() - 1 - b]);
    if (diff > worst) worst = std::move(diff);
  }
  return worst;
}

}  // namespace optquad
