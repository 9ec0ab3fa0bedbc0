#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include <boost/multiprecision/float128.hpp>
#include <boost/multiprecision/gmp.hpp>

namespace cpsent {

/// Quad precision (113-bit mantissa, ~34 significant digits).
using Real = boost::multiprecision::float128;
using Rational = boost::multiprecision::mpq_rational;
using BigInt = boost::multiprecision::mpz_int;

using IntVec = std::vector<std::int64_t>;
using RealVec = std::vector<Real>;

/// Nearest quad-precision value of q (correctly truncated mantissas, then one division).
Real to_real(const Rational& q);

/// Exact rational value of a finite quad-precision number (every such number is dyadic).
Rational to_rational(const Real& x);

/// Parses "p/q", an integer, or a plain decimal such as "-0.125" or "1e-3" exactly.
Rational parse_rational(std::string_view text);

/// Always "p/q" (q = 1 for integers), so the text round-trips exactly.
std::string format_rational(const Rational& q);

/// Parses a decimal literal or one of the named constants tau, sqrt2m1, sqrt2, sqrt5
/// (optionally with a leading '-') to quad precision.
Real parse_real(std::string_view text);

/// Fixed significant-digit rendering used in every CSV/JSON artifact.
std::string format_real(const Real& x, int digits = 30);

Real golden_ratio();
Real sqrt2_minus_one();

/// Distance from x to the nearest integer.
Real dist_to_int(const Real& x);

/// x - floor(x), in [0, 1).
Real frac(const Real& x);

}  // namespace cpsent
