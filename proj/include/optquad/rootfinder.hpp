#pragma once

// Roots of E_{2m-2} inside the unit disk.
//
// Isolation is exact: a Sturm chain over rationals drives dyadic bisection of
// (-1, 0) until every subinterval holds one root. Each root is then refined by
// safeguarded Newton in BigReal and certified by exact sign evaluation of the
// polynomial at q - eps and q + eps.

#include <algorithm>
#include <string>
#include <utility>
#include <vector>

#include "optquad/bigreal.hpp"
#include "optquad/errors.hpp"
#include "optquad/exact_core.hpp"

namespace optquad {

struct RootSet {
  int m = 0;
  int precision_bits = 0;
  /// Ascending, all in (-1, 0).
  std::vector<BigReal> roots;
  /// Absolute error bound valid for every root.
  BigReal certified_error;
};

namespace detail {

using RatPoly = std::vector<Rational>;  // ascending powers

inline void trim(RatPoly& p) {
  while (p.size() > 1 && p.back() == 0) p.pop_back();
}

inline Rational eval(const RatPoly& p, const Rational& x) {
  Rational acc = p.back();
  for (std::size_t i = p.size() - 1; i-- > 0;) acc = acc * x + p[i];
  return acc;
}

inline int sign_of(const Rational& v) { return v > 0 ? 1 : (v < 0 ? -1 : 0); }

inline RatPoly remainder(RatPoly num, const RatPoly& den) {
  while (num.size() >= den.size() && num.size() > 1) {
    const std::size_t shift = num.size() - den.size();
    const Rational factor = num.back() / den.back();
    for (std::size_t i = 0; i < den.size(); ++i) num[i + shift] -= factor * den[i];
    num.pop_back();
    trim(num);
  }
  return num;
}

/// Sturm chain with each member scaled by a positive constant to unit
/// leading coefficient (scaling by positive constants keeps sign counts).
inline std::vector<RatPoly> sturm_chain(const RatPoly& p) {
  auto monic = [](RatPoly q) {
    const Rational lead = abs(q.back());
    for (auto& c : q) c /= lead;
    return q;
  };
  std::vector<RatPoly> chain;
  chain.push_back(monic(p));
  RatPoly dp;
  for (std::size_t i = 1; i < p.size(); ++i) dp.push_back(p[i] * static_cast<long>(i));
  chain.push_back(monic(dp));
  while (chain.back().size() > 1) {
    RatPoly r = remainder(chain[chain.size() - 2], chain.back());
    if (r.size() == 1 && r[0] == 0) break;
    for (auto& c : r) c = -c;
    chain.push_back(monic(std::move(r)));
  }
  return chain;
}

inline int sign_variations(const std::vector<RatPoly>& chain, const Rational& x) {
  int changes = 0;
  int last = 0;
  for (const auto& q : chain) {
    const int s = sign_of(eval(q, x));
    if (s == 0) continue;
    if (last != 0 && s != last) ++changes;
    last = s;
  }
  return changes;
}

inline void isolate(const std::vector<RatPoly>& chain, const Rational& a, const Rational& b,
                    int va, int vb, std::vector<std::pair<Rational, Rational>>& out) {
  const int count = va - vb;
  if (count == 0) return;
  if (count == 1) {
    out.emplace_back(a, b);
    return;
  }
  const Rational mid = (a + b) / 2;
  if (eval(chain.front(), mid) == 0)
    throw RootIsolationError("polynomial vanishes at a dyadic point; roots are not irrational");
  const int vm = sign_variations(chain, mid);
  isolate(chain, a, mid, va, vm, out);
  isolate(chain, mid, b, vm, vb, out);
}

inline Rational pow2_rational(long e) {
  Rational r = 1;
  if (e >= 0)
    r = Rational(BigInt(1) << static_cast<unsigned>(e));
  else
    r = Rational(BigInt(1), BigInt(1) << static_cast<unsigned>(-e));
  return r;
}

}  // namespace detail

/// Isolating intervals (a, b] in (-1, 0), ascending, one root each.
inline std::vector<std::pair<Rational, Rational>> isolate_negative_unit_roots(
    const EFPolynomial& poly) {
  detail::RatPoly p;
  for (const auto& c : poly.coeffs) p.emplace_back(c);
  const auto chain = detail::sturm_chain(p);
  const Rational lo = -1, hi = 0;
  if (detail::eval(p, lo) == 0 || detail::eval(p, hi) == 0)
    throw RootIsolationError("polynomial vanishes at an endpoint of (-1, 0)");
  std::vector<std::pair<Rational, Rational>> out;
  detail::isolate(chain, lo, hi, detail::sign_variations(chain, lo),
                  detail::sign_variations(chain, hi), out);
  return out;
}

/// Refines a root bracketed by [a, b] (sign change, exactly one root) and
/// returns the root with its certified absolute error.
inline std::pair<BigReal, BigReal> refine_root(const EFPolynomial& poly, const Rational& a,
                                               const Rational& b, int bits) {
  detail::RatPoly p;
  for (const auto& c : poly.coeffs) p.emplace_back(c);
  const int sign_a = detail::sign_of(detail::eval(p, a));

  BigReal lo(a, bits), hi(b, bits);
  BigReal x = (lo + hi) / 2;
  for (int iter = 0; iter < 4 * bits; ++iter) {
    const BigReal fx = poly.evaluate(x);
    if (fx.is_zero()) break;
    if (fx.sign() == sign_a)
      lo = x;
    else
      hi = x;
    const BigReal step = fx / poly.derivative(x);
    BigReal next = x - step;
    if (!(next > lo && next < hi)) next = (lo + hi) / 2;
    const BigReal moved = abs(next - x);
    x = std::move(next);
    if (moved.is_zero() || (!x.is_zero() && moved.exponent2() < x.exponent2() - bits + 2)) break;
  }

  // Certify: widen eps until the exact signs at x -+ eps differ.
  const Rational center = x.to_rational();
  long e = x.exponent2() - bits + 2;
  for (; e < 8; ++e) {
    const Rational eps = detail::pow2_rational(e);
    Rational left = center - eps, right = center + eps;
    if (left < a) left = a;
    if (right > b) right = b;
    const int sl = detail::sign_of(detail::eval(p, left));
    const int sr = detail::sign_of(detail::eval(p, right));
    if (sl != 0 && sr != 0 && sl != sr) return {x, BigReal::pow2(e, bits)};
    if (left == a && right == b) break;
  }
  throw RootIsolationError("could not certify a refined root");
}

/// The m - 1 roots of E_{2m-2} with |q| < 1, ascending.
inline RootSet unit_disk_roots(int m, int precision_bits = kDefaultPrecisionBits) {
  if (m < 2) throw ParameterError("unit_disk_roots: m must be >= 2");
  if (precision_bits < 64) throw ParameterError("unit_disk_roots: precision_bits must be >= 64");

  const EFPolynomial poly = euler_frobenius(2 * m - 2);
  const auto brackets = isolate_negative_unit_roots(poly);
  if (static_cast<int>(brackets.size()) != m - 1)
    throw RootIsolationError("expected " + std::to_string(m - 1) + " roots of E_" +
                             std::to_string(2 * m - 2) + " in (-1, 0), isolated " +
                             std::to_string(brackets.size()));

  RootSet set;
  set.m = m;
  set.precision_bits = precision_bits;
  set.certified_error = BigReal(0L, precision_bits);
  for (const auto& [a, b] : brackets) {
    auto [q, err] = refine_root(poly, a, b, precision_bits);
    set.roots.push_back(std::move(q));
    if (err > set.certified_error) set.certified_error = err;
  }
  if (set.certified_error > BigReal::pow2(-(precision_bits / 2), precision_bits))
    throw PrecisionError("root certificate weaker than 2^-(bits/2)", 0.0, 2 * precision_bits);
  return set;
}

}  // namespace optquad
