#pragma once

// Exact integer/rational machinery: Bernoulli numbers, the finite
// differences of powers at zero, and Euler-Frobenius polynomials.
//
// All three are memoized per index behind a mutex; results are returned by
// value so callers never hold references into a cache.

#include <cstddef>
#include <map>
#include <mutex>
#include <utility>
#include <vector>

#include "optquad/bigreal.hpp"
#include "optquad/errors.hpp"

namespace optquad {

inline BigInt factorial(int n) {
  BigInt r = 1;
  for (int i = 2; i <= n; ++i) r *= i;
  return r;
}

inline BigInt binomial(int n, int k) {
  if (k < 0 || k > n) return 0;
  k = std::min(k, n - k);
  BigInt r = 1;
  for (int i = 1; i <= k; ++i) {
    r *= n - k + i;
    r /= i;
  }
  return r;
}

/// Converts an exact integer into the scalar type used by a templated
/// algorithm. `like` supplies the precision for BigReal.
inline double from_integer(const BigInt& v, const double& /*like*/) {
  return v.convert_to<double>();
}
inline BigReal from_integer(const BigInt& v, const BigReal& like) {
  return BigReal(v, like.precision());
}
inline Rational from_integer(const BigInt& v, const Rational& /*like*/) { return Rational(v); }

// -- Bernoulli numbers ------------------------------------------------------

namespace detail {
// Akiyama-Tanigawa table, extended incrementally.
struct BernoulliCache {
  std::mutex mu;
  std::vector<Rational> work;
  std::vector<Rational> values;
};
inline BernoulliCache& bernoulli_cache() {
  static BernoulliCache cache;
  return cache;
}
}  // namespace detail

/// B_n with the convention B_1 = -1/2.
inline Rational bernoulli(int n) {
  if (n < 0) throw ParameterError("bernoulli: negative index");
  auto& cache = detail::bernoulli_cache();
  std::lock_guard lock(cache.mu);
  while (static_cast<int>(cache.values.size()) <= n) {
    const int m = static_cast<int>(cache.values.size());
    cache.work.emplace_back(1, m + 1);
    for (int j = m; j >= 1; --j) cache.work[j - 1] = j * (cache.work[j - 1] - cache.work[j]);
    // The recurrence yields B_1 = +1/2.
    cache.values.push_back(m == 1 ? -cache.work[0] : cache.work[0]);
  }
  return cache.values[static_cast<std::size_t>(n)];
}

// -- Finite differences of powers at zero ----------------------------------

namespace detail {
struct DeltaZeroCache {
  std::mutex mu;
  std::map<std::pair<int, int>, BigInt> values;
};
inline DeltaZeroCache& delta_zero_cache() {
  static DeltaZeroCache cache;
  return cache;
}
}  // namespace detail

/// i-th forward difference of x^k at x = 0, i.e. i! * S(k, i).
/// Conventions: Δ^0 0^0 = 1, Δ^0 0^k = 0 (k >= 1), Δ^i 0^0 = 0 (i >= 1).
inline BigInt delta_zero(int i, int k) {
  if (i < 0 || k < 0) throw ParameterError("delta_zero: negative index");
  if (i == 0) return k == 0 ? 1 : 0;
  if (k == 0 || i > k) return 0;

  auto& cache = detail::delta_zero_cache();
  {
    std::lock_guard lock(cache.mu);
    if (auto it = cache.values.find({i, k}); it != cache.values.end()) return it->second;
  }
  BigInt sum = 0;
  for (int l = 1; l <= i; ++l) {
    BigInt term = binomial(i, l) * boost::multiprecision::pow(BigInt(l), static_cast<unsigned>(k));
    if ((i - l) % 2 == 0)
      sum += term;
    else
      sum -= term;
  }
  std::lock_guard lock(cache.mu);
  cache.values.emplace(std::pair{i, k}, sum);
  return sum;
}

// -- Euler-Frobenius polynomials -------------------------------------------

/// E_k(x) with exact integer coefficients in ascending powers.
struct EFPolynomial {
  int degree = 0;
  std::vector<BigInt> coeffs;

  template <class T>
  T evaluate(const T& x) const {
    T acc = from_integer(coeffs.back(), x);
    for (std::size_t i = coeffs.size() - 1; i-- > 0;) {
      acc *= x;
      acc += from_integer(coeffs[i], x);
    }
    return acc;
  }

  /// Derivative evaluated by Horner, same scalar rules as evaluate().
  template <class T>
  T derivative(const T& x) const {
    if (degree == 0) return from_integer(BigInt(0), x);
    T acc = from_integer(coeffs.back() * degree, x);
    for (int i = degree - 1; i >= 1; --i) {
      acc *= x;
      acc += from_integer(coeffs[static_cast<std::size_t>(i)] * i, x);
    }
    return acc;
  }

  bool operator==(const EFPolynomial&) const = default;
};

namespace detail {
struct EulerFrobeniusCache {
  std::mutex mu;
  std::map<int, EFPolynomial> values;
};
inline EulerFrobeniusCache& euler_frobenius_cache() {
  static EulerFrobeniusCache cache;
  return cache;
}
}  // namespace detail

/// E_k from the finite-difference representation
///   E_k(x) = sum_{i=0}^{k+1} Δ^i 0^{k+1} (x - 1)^{k+1-i},
/// expanded binomially in exact integers.
inline EFPolynomial euler_frobenius(int k) {
  if (k < 0) throw ParameterError("euler_frobenius: negative degree");
  auto& cache = detail::euler_frobenius_cache();
  {
    std::lock_guard lock(cache.mu);
    if (auto it = cache.values.find(k); it != cache.values.end()) return it->second;
  }

  std::vector<BigInt> c(static_cast<std::size_t>(k) + 2, BigInt(0));
  for (int i = 0; i <= k + 1; ++i) {
    const BigInt d = delta_zero(i, k + 1);
    if (d == 0) continue;
    const int p = k + 1 - i;
    for (int t = 0; t <= p; ++t) {
      BigInt term = d * binomial(p, t);
      if ((p - t) % 2 == 0)
        c[static_cast<std::size_t>(t)] += term;
      else
        c[static_cast<std::size_t>(t)] -= term;
    }
  }
  if (c.back() != 0) throw Error("euler_frobenius: leading term did not cancel");
  c.pop_back();

  EFPolynomial poly{k, std::move(c)};
  std::lock_guard lock(cache.mu);
  return cache.values.emplace(k, std::move(poly)).first->second;
}

}  // namespace optquad
