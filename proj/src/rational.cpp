#include "cbs/rational.hpp"

#include <cctype>

namespace cbs {

namespace {

Rational pow10(long exp) {
  mpz_class p;
  mpz_ui_pow_ui(p.get_mpz_t(), 10, static_cast<unsigned long>(exp < 0 ? -exp : exp));
  return exp < 0 ? Rational(mpz_class(1), p) : Rational(p);
}

}  // namespace

Rational parse_rational(std::string_view text) {
  std::string s(text);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.pop_back();
  size_t first = 0;
  while (first < s.size() && std::isspace(static_cast<unsigned char>(s[first]))) ++first;
  s = s.substr(first);
  if (s.empty()) throw ParameterError("empty number");

  if (auto slash = s.find('/'); slash != std::string::npos) {
    Rational num = parse_rational(s.substr(0, slash));
    Rational den = parse_rational(s.substr(slash + 1));
    if (den == 0) throw ParameterError("zero denominator in '" + s + "'");
    Rational r = num / den;
    r.canonicalize();
    return r;
  }

  size_t i = 0;
  bool negative = false;
  if (s[i] == '+' || s[i] == '-') negative = s[i++] == '-';
  mpz_class digits = 0;
  long scale = 0;
  bool seen_digit = false;
  bool seen_point = false;
  for (; i < s.size(); ++i) {
    char c = s[i];
    if (std::isdigit(static_cast<unsigned char>(c))) {
      digits = digits * 10 + (c - '0');
      if (seen_point) --scale;
      seen_digit = true;
    } else if (c == '.' && !seen_point) {
      seen_point = true;
    } else {
      break;
    }
  }
  if (!seen_digit) throw ParameterError("not a number: '" + s + "'");
  if (i < s.size()) {
    if (s[i] != 'e' && s[i] != 'E') throw ParameterError("not a number: '" + s + "'");
    ++i;
    bool exp_negative = false;
    if (i < s.size() && (s[i] == '+' || s[i] == '-')) exp_negative = s[i++] == '-';
    if (i == s.size()) throw ParameterError("bad exponent in '" + s + "'");
    long exp = 0;
    for (; i < s.size(); ++i) {
      if (!std::isdigit(static_cast<unsigned char>(s[i])))
        throw ParameterError("bad exponent in '" + s + "'");
      exp = exp * 10 + (s[i] - '0');
      if (exp > 4000) throw ParameterError("exponent out of range in '" + s + "'");
    }
    scale += exp_negative ? -exp : exp;
  }
  Rational r(digits);
  r *= pow10(scale);
  r.canonicalize();
  return negative ? Rational(-r) : r;
}

mpz_class floor(const Rational& x) {
  mpz_class q;
  mpz_fdiv_q(q.get_mpz_t(), x.get_num_mpz_t(), x.get_den_mpz_t());
  return q;
}

mpz_class ceil(const Rational& x) {
  mpz_class q;
  mpz_cdiv_q(q.get_mpz_t(), x.get_num_mpz_t(), x.get_den_mpz_t());
  return q;
}

Rational floor_div(const Rational& a, const Rational& b) {
  return Rational(floor(Rational(a / b)));
}

std::string to_decimal(const Rational& x, int digits) {
  Rational scaled = abs(x) * pow10(digits);
  mpz_class rounded = floor(Rational(scaled + Rational(1, 2)));
  std::string s = rounded.get_str();
  if (digits > 0) {
    if (static_cast<int>(s.size()) <= digits) s.insert(0, static_cast<size_t>(digits + 1 - s.size()), '0');
    s.insert(s.size() - static_cast<size_t>(digits), ".");
  }
  if (x < 0 && rounded != 0) s.insert(0, "-");
  return s;
}

std::string format_ns(const Rational& seconds, int digits) {
  return to_decimal(seconds * 1'000'000'000, digits);
}

std::string format_us(const Rational& seconds, int digits) {
  return to_decimal(seconds * 1'000'000, digits);
}

double to_double(const Rational& x) { return x.get_d(); }

}  // namespace cbs
