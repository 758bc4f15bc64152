#pragma once

#include <gmpxx.h>

#include <stdexcept>
#include <string>
#include <string_view>

namespace cbs {

// Exact arbitrary-precision rational. Times are seconds, data is bits,
// rates are bits per second.
using Rational = mpq_class;

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Invalid argument to a constructor or operation.
class ParameterError : public Error {
 public:
  using Error::Error;
};

// Network or port configuration violates an invariant.
class ConfigError : public Error {
 public:
  using Error::Error;
};

// Parses "12", "-3/4", "123.36", "1e9", "2.5e-6".
Rational parse_rational(std::string_view text);

Rational floor_div(const Rational& a, const Rational& b);
mpz_class floor(const Rational& x);
mpz_class ceil(const Rational& x);

inline Rational min(const Rational& a, const Rational& b) { return a < b ? a : b; }
inline Rational max(const Rational& a, const Rational& b) { return a < b ? b : a; }

// Fixed-point decimal rendering, rounded half away from zero.
std::string to_decimal(const Rational& x, int digits);

// Seconds rendered as nanoseconds (or microseconds) with the given number
// of fractional digits.
std::string format_ns(const Rational& seconds, int digits = 3);
std::string format_us(const Rational& seconds, int digits = 3);

double to_double(const Rational& x);

// num / den in canonical form; the two-argument mpq_class constructor does
// not reduce, and GMP arithmetic assumes reduced operands.
inline Rational ratio(const mpz_class& num, const mpz_class& den) {
  Rational r(num, den);
  r.canonicalize();
  return r;
}

inline Rational micros(long us) { return ratio(us, 1'000'000L); }
inline Rational nanos(long ns) { return ratio(ns, 1'000'000'000L); }

}  // namespace cbs
