#pragma once

// Configurable-precision real scalar over MPFR.
//
// Every value carries its own bit precision. Binary operations round to the
// larger of the two operand precisions; values created without an explicit
// precision use the thread-local working precision (see PrecisionScope).

#include <gmp.h>
#include <mpfr.h>

#include <boost/multiprecision/gmp.hpp>

#include <cmath>
#include <compare>
#include <concepts>
#include <cstdlib>
#include <memory>
#include <ostream>
#include <string>
#include <string_view>

#include "optquad/errors.hpp"

namespace optquad {

using BigInt = boost::multiprecision::mpz_int;
using Rational = boost::multiprecision::mpq_rational;

inline constexpr int kDefaultPrecisionBits = 256;

namespace detail {
inline int& thread_precision() {
  thread_local int bits = kDefaultPrecisionBits;
  return bits;
}
}  // namespace detail

inline int working_precision() { return detail::thread_precision(); }

/// Sets the working precision of the calling thread for its lifetime.
class PrecisionScope {
 public:
  explicit PrecisionScope(int bits) : saved_(detail::thread_precision()) {
    if (bits < MPFR_PREC_MIN || bits > 1 << 20)
      throw ParameterError("precision_bits out of range: " + std::to_string(bits));
    detail::thread_precision() = bits;
  }
  ~PrecisionScope() { detail::thread_precision() = saved_; }
  PrecisionScope(const PrecisionScope&) = delete;
  PrecisionScope& operator=(const PrecisionScope&) = delete;

 private:
  int saved_;
};

class BigReal {
 public:
  BigReal() : BigReal(0L) {}

  BigReal(long v, int bits = working_precision()) {  // NOLINT(implicit)
    mpfr_init2(v_, bits);
    mpfr_set_si(v_, v, MPFR_RNDN);
  }
  BigReal(int v, int bits = working_precision()) : BigReal(static_cast<long>(v), bits) {}  // NOLINT
  BigReal(unsigned long v, int bits = working_precision()) {  // NOLINT
    mpfr_init2(v_, bits);
    mpfr_set_ui(v_, v, MPFR_RNDN);
  }

  explicit BigReal(double v, int bits = working_precision()) {
    mpfr_init2(v_, bits);
    mpfr_set_d(v_, v, MPFR_RNDN);
  }
  explicit BigReal(const BigInt& v, int bits = working_precision()) {
    mpfr_init2(v_, bits);
    mpfr_set_z(v_, v.backend().data(), MPFR_RNDN);
  }
  explicit BigReal(const Rational& v, int bits = working_precision()) {
    mpfr_init2(v_, bits);
    mpfr_set_q(v_, v.backend().data(), MPFR_RNDN);
  }

  /// Parses a decimal (positional or scientific) string. Throws on garbage.
  static BigReal parse(std::string_view text, int bits = working_precision()) {
    BigReal r(0L, bits);
    std::string s(text);
    char* end = nullptr;
    if (!s.empty()) mpfr_strtofr(r.v_, s.c_str(), &end, 10, MPFR_RNDN);
    if (end == nullptr || end == s.c_str() || *end != '\0')
      throw Error("not a decimal number: '" + s + "'");
    return r;
  }

  static BigReal pi(int bits = working_precision()) {
    BigReal r(0L, bits);
    mpfr_const_pi(r.v_, MPFR_RNDN);
    return r;
  }

  /// 2^e exactly.
  static BigReal pow2(long e, int bits = working_precision()) {
    BigReal r(1L, bits);
    mpfr_mul_2si(r.v_, r.v_, e, MPFR_RNDN);
    return r;
  }

  static BigReal nan(int bits = working_precision()) {
    BigReal r(0L, bits);
    mpfr_set_nan(r.v_);
    return r;
  }

  BigReal(const BigReal& o) {
    mpfr_init2(v_, mpfr_get_prec(o.v_));
    mpfr_set(v_, o.v_, MPFR_RNDN);
  }
  BigReal(BigReal&& o) noexcept {
    mpfr_init2(v_, mpfr_get_prec(o.v_));
    mpfr_swap(v_, o.v_);
  }
  BigReal& operator=(const BigReal& o) {
    if (this != &o) {
      mpfr_set_prec(v_, mpfr_get_prec(o.v_));
      mpfr_set(v_, o.v_, MPFR_RNDN);
    }
    return *this;
  }
  BigReal& operator=(BigReal&& o) noexcept {
    mpfr_swap(v_, o.v_);
    return *this;
  }
  ~BigReal() { mpfr_clear(v_); }

  int precision() const { return static_cast<int>(mpfr_get_prec(v_)); }

  /// Copy rounded to a different precision.
  BigReal with_precision(int bits) const {
    BigReal r(0L, bits);
    mpfr_set(r.v_, v_, MPFR_RNDN);
    return r;
  }

  double to_double() const { return mpfr_get_d(v_, MPFR_RNDN); }

  /// Exact dyadic value (every finite MPFR number is a rational).
  Rational to_rational() const {
    if (!is_finite()) throw Error("to_rational on non-finite value");
    Rational q;
    mpfr_get_q(q.backend().data(), v_);
    return q;
  }

  bool is_finite() const { return mpfr_number_p(v_) != 0; }
  bool is_zero() const { return mpfr_zero_p(v_) != 0; }
  int sign() const { return mpfr_sgn(v_); }
  /// Binary exponent e with 0.5 <= |x| / 2^e < 1; undefined for zero.
  long exponent2() const { return mpfr_get_exp(v_); }

  /// Shortest decimal that reads back to the same value at this precision,
  /// positional for moderate exponents, scientific otherwise.
  std::string to_string() const { return format(0); }

  /// `digits` significant decimal digits (0 = round-trip exact).
  std::string format(int digits) const {
    if (mpfr_nan_p(v_)) return "nan";
    if (mpfr_inf_p(v_)) return mpfr_sgn(v_) < 0 ? "-inf" : "inf";
    if (mpfr_zero_p(v_)) return mpfr_signbit(v_) ? "-0" : "0";
    mpfr_exp_t exp10 = 0;
    std::unique_ptr<char, void (*)(char*)> raw(
        mpfr_get_str(nullptr, &exp10, 10, static_cast<size_t>(digits), v_, MPFR_RNDN),
        [](char* p) { mpfr_free_str(p); });
    std::string mant(raw.get());
    std::string sign;
    if (mant[0] == '-') {
      sign = "-";
      mant.erase(0, 1);
    }
    while (mant.size() > 1 && mant.back() == '0') mant.pop_back();
    // value = 0.mant * 10^exp10
    const long e = static_cast<long>(exp10);
    std::string out;
    if (e > 21 || e < -5) {
      out = mant.substr(0, 1);
      if (mant.size() > 1) out += "." + mant.substr(1);
      out += "e" + std::to_string(e - 1);
    } else if (e <= 0) {
      out = "0." + std::string(static_cast<size_t>(-e), '0') + mant;
    } else if (static_cast<size_t>(e) >= mant.size()) {
      out = mant + std::string(static_cast<size_t>(e) - mant.size(), '0');
    } else {
      out = mant.substr(0, static_cast<size_t>(e)) + "." + mant.substr(static_cast<size_t>(e));
    }
    return sign + out;
  }

  mpfr_srcptr get() const { return v_; }
  mpfr_ptr get() { return v_; }

  BigReal operator-() const {
    BigReal r = *this;
    mpfr_neg(r.v_, r.v_, MPFR_RNDN);
    return r;
  }

  BigReal& operator+=(const BigReal& o) { return apply(o, mpfr_add); }
  BigReal& operator-=(const BigReal& o) { return apply(o, mpfr_sub); }
  BigReal& operator*=(const BigReal& o) { return apply(o, mpfr_mul); }
  BigReal& operator/=(const BigReal& o) { return apply(o, mpfr_div); }

  template <std::integral I>
  BigReal& operator*=(I k) {
    mpfr_mul_si(v_, v_, static_cast<long>(k), MPFR_RNDN);
    return *this;
  }
  template <std::integral I>
  BigReal& operator/=(I k) {
    mpfr_div_si(v_, v_, static_cast<long>(k), MPFR_RNDN);
    return *this;
  }

  friend BigReal operator+(BigReal a, const BigReal& b) {
    a += b;
    return a;
  }
  friend BigReal operator-(BigReal a, const BigReal& b) {
    a -= b;
    return a;
  }
  friend BigReal operator*(BigReal a, const BigReal& b) {
    a *= b;
    return a;
  }
  friend BigReal operator/(BigReal a, const BigReal& b) {
    a /= b;
    return a;
  }
  template <std::integral I>
  friend BigReal operator*(BigReal a, I k) {
    a *= k;
    return a;
  }
  template <std::integral I>
  friend BigReal operator*(I k, BigReal a) {
    a *= k;
    return a;
  }
  template <std::integral I>
  friend BigReal operator/(BigReal a, I k) {
    a /= k;
    return a;
  }

  friend bool operator==(const BigReal& a, const BigReal& b) {
    return mpfr_equal_p(a.v_, b.v_) != 0;
  }
  friend std::partial_ordering operator<=>(const BigReal& a, const BigReal& b) {
    if (mpfr_unordered_p(a.v_, b.v_)) return std::partial_ordering::unordered;
    const int c = mpfr_cmp(a.v_, b.v_);
    return c < 0 ? std::partial_ordering::less
                 : (c > 0 ? std::partial_ordering::greater : std::partial_ordering::equivalent);
  }

  friend std::ostream& operator<<(std::ostream& os, const BigReal& x) {
    return os << x.format(30);
  }

 private:
  using BinaryOp = int (*)(mpfr_ptr, mpfr_srcptr, mpfr_srcptr, mpfr_rnd_t);

  BigReal& apply(const BigReal& o, BinaryOp op) {
    if (mpfr_get_prec(o.v_) > mpfr_get_prec(v_)) mpfr_prec_round(v_, mpfr_get_prec(o.v_), MPFR_RNDN);
    op(v_, v_, o.v_, MPFR_RNDN);
    return *this;
  }

  mpfr_t v_;
};

namespace detail {
template <class F>
BigReal unary(const BigReal& x, F f) {
  BigReal r(0L, x.precision());
  f(r.get(), x.get(), MPFR_RNDN);
  return r;
}
}  // namespace detail

inline BigReal abs(const BigReal& x) { return detail::unary(x, mpfr_abs); }
inline BigReal sqrt(const BigReal& x) { return detail::unary(x, mpfr_sqrt); }
inline BigReal exp(const BigReal& x) { return detail::unary(x, mpfr_exp); }
inline BigReal log(const BigReal& x) { return detail::unary(x, mpfr_log); }
inline BigReal log2(const BigReal& x) { return detail::unary(x, mpfr_log2); }
inline BigReal sin(const BigReal& x) { return detail::unary(x, mpfr_sin); }
inline BigReal cos(const BigReal& x) { return detail::unary(x, mpfr_cos); }

inline BigReal pow(const BigReal& x, unsigned long n) {
  BigReal r(0L, x.precision());
  mpfr_pow_ui(r.get(), x.get(), n, MPFR_RNDN);
  return r;
}

inline BigReal pow(const BigReal& x, const BigReal& y) {
  BigReal r(0L, std::max(x.precision(), y.precision()));
  mpfr_pow(r.get(), x.get(), y.get(), MPFR_RNDN);
  return r;
}

/// x * 2^e, exact.
inline BigReal ldexp(const BigReal& x, long e) {
  BigReal r = x;
  mpfr_mul_2si(r.get(), r.get(), e, MPFR_RNDN);
  return r;
}

inline bool isfinite(const BigReal& x) { return x.is_finite(); }

inline const BigReal& max(const BigReal& a, const BigReal& b) { return a < b ? b : a; }

}  // namespace optquad
