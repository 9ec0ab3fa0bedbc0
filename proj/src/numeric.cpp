#include "cpsent/numeric.hpp"

#include <cctype>
#include <cmath>
#include <iomanip>
#include <sstream>

#include "cpsent/error.hpp"

namespace cpsent {
namespace {

constexpr int kMantissaBits = 113;

// Top kMantissaBits of |z| as an exact quad value, plus the dropped bit count.
Real truncated_magnitude(const BigInt& z, long& shift) {
  BigInt m = abs(z);
  const auto bits = static_cast<long>(msb(m)) + 1;
  shift = 0;
  if (bits > kMantissaBits) {
    shift = bits - kMantissaBits;
    m >>= static_cast<unsigned>(shift);
  }
  const BigInt mask = (BigInt(1) << 64) - 1;
  const auto lo = static_cast<std::uint64_t>(m & mask);
  const auto hi = static_cast<std::uint64_t>(m >> 64);
  return ldexp(Real(hi), 64) + Real(lo);
}

}  // namespace

Real to_real(const Rational& q) {
  const BigInt num = numerator(q);
  if (num == 0) return Real(0);
  const BigInt den = denominator(q);
  long num_shift = 0;
  long den_shift = 0;
  Real n = truncated_magnitude(num, num_shift);
  Real d = truncated_magnitude(den, den_shift);
  Real r = ldexp(n / d, static_cast<int>(num_shift - den_shift));
  return num < 0 ? Real(-r) : r;
}

Rational to_rational(const Real& x) {
  if (!isfinite(x)) throw Error("NonFinite", "cannot convert a non-finite value to a rational");
  if (x == 0) return Rational(0);
  int exponent = 0;
  Real mant = frexp(abs(x), &exponent);  // in [0.5, 1)
  mant = ldexp(mant, kMantissaBits);      // integral, < 2^113
  const Real two64 = ldexp(Real(1), 64);
  const Real hi = floor(mant / two64);
  const Real lo = mant - hi * two64;
  BigInt m = (BigInt(static_cast<std::uint64_t>(hi)) << 64) + BigInt(static_cast<std::uint64_t>(lo));
  const int e = exponent - kMantissaBits;
  Rational r = e >= 0 ? Rational(m << e) : Rational(m, BigInt(1) << -e);
  return x < 0 ? Rational(-r) : r;
}

namespace {

// Decimal digits only; the string constructor would read a leading 0 as octal.
BigInt parse_decimal_int(const std::string& text) {
  std::size_t i = 0;
  bool negative = false;
  if (i < text.size() && (text[i] == '+' || text[i] == '-')) negative = text[i++] == '-';
  if (i == text.size()) throw Error("BadRational", "missing digits in '" + text + "'");
  for (std::size_t k = i; k < text.size(); ++k) {
    if (!std::isdigit(static_cast<unsigned char>(text[k]))) throw Error("BadRational", "not an integer: '" + text + "'");
  }
  while (i + 1 < text.size() && text[i] == '0') ++i;
  BigInt v(text.substr(i));
  return negative ? BigInt(-v) : v;
}

}  // namespace

Rational parse_rational(std::string_view text) {
  std::string s(text);
  auto fail = [&]() -> Rational { throw Error("BadRational", "not a rational literal: '" + s + "'"); };
  if (s.empty()) return fail();
  const auto slash = s.find('/');
  try {
    if (slash != std::string::npos) {
      BigInt p = parse_decimal_int(s.substr(0, slash));
      BigInt q = parse_decimal_int(s.substr(slash + 1));
      if (q == 0) return fail();
      return Rational(p, q);
    }
    // Decimal with optional exponent.
    std::size_t i = 0;
    bool negative = false;
    if (s[i] == '+' || s[i] == '-') negative = s[i++] == '-';
    std::string digits;
    long scale = 0;
    bool seen_point = false;
    bool any_digit = false;
    for (; i < s.size() && s[i] != 'e' && s[i] != 'E'; ++i) {
      if (s[i] == '.') {
        if (seen_point) return fail();
        seen_point = true;
      } else if (std::isdigit(static_cast<unsigned char>(s[i]))) {
        digits += s[i];
        any_digit = true;
        if (seen_point) --scale;
      } else {
        return fail();
      }
    }
    if (!any_digit) return fail();
    if (i < s.size()) {
      const std::string exp_text = s.substr(i + 1);
      if (exp_text.empty()) return fail();
      std::size_t used = 0;
      scale += std::stol(exp_text, &used);
      if (used != exp_text.size()) return fail();
    }
    BigInt mant = parse_decimal_int(digits);
    if (negative) mant = -mant;
    BigInt ten_pow = pow(BigInt(10), static_cast<unsigned>(std::labs(scale)));
    return scale >= 0 ? Rational(mant * ten_pow) : Rational(mant, ten_pow);
  } catch (const Error&) {
    throw;
  } catch (const std::exception&) {
    return fail();
  }
}

std::string format_rational(const Rational& q) {
  return numerator(q).str() + "/" + denominator(q).str();
}

Real golden_ratio() { return (Real(1) + sqrt(Real(5))) / 2; }
Real sqrt2_minus_one() { return sqrt(Real(2)) - 1; }

Real parse_real(std::string_view text) {
  std::string s(text);
  bool negative = false;
  std::string body = s;
  if (!body.empty() && (body[0] == '-' || body[0] == '+')) {
    negative = body[0] == '-';
    body = body.substr(1);
  }
  Real value;
  if (body == "tau") {
    value = golden_ratio();
  } else if (body == "sqrt2m1") {
    value = sqrt2_minus_one();
  } else if (body == "sqrt2") {
    value = sqrt(Real(2));
  } else if (body == "sqrt5") {
    value = sqrt(Real(5));
  } else {
    if (body.find('/') != std::string::npos) {
      value = to_real(parse_rational(body));
    } else {
      parse_rational(body);  // validates the literal
      value = Real(body);
    }
  }
  return negative ? Real(-value) : value;
}

std::string format_real(const Real& x, int digits) {
  std::ostringstream out;
  out << std::setprecision(digits) << std::scientific << x;
  return out.str();
}

Real dist_to_int(const Real& x) {
  Real f = x - floor(x);
  return f > Real(0.5) ? Real(1 - f) : f;
}

Real frac(const Real& x) {
  Real f = x - floor(x);
  if (f >= 1 || f == 0) f = 0;  // also normalizes -0
  return f;
}

}  // namespace cpsent
