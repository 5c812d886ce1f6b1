#pragma once
// Exact arithmetic used for every weight in the library.

#include <boost/multiprecision/cpp_int.hpp>

#include <cstdint>
#include <stdexcept>
#include <string>

namespace hintikka {

using BigInt = boost::multiprecision::cpp_int;
using Rational = boost::multiprecision::cpp_rational;

inline Rational make_rational(long long num, long long den = 1) {
  return Rational(BigInt(num), BigInt(den));
}

/// `num/den`, always with an explicit denominator.
inline std::string to_text(const Rational& q) {
  return boost::multiprecision::numerator(q).str() + "/" +
         boost::multiprecision::denominator(q).str();
}

/// Accepts `n`, `-n`, `n/d`.
inline Rational parse_rational(const std::string& text) {
  auto slash = text.find('/');
  try {
    if (slash == std::string::npos) return Rational(BigInt(text));
    BigInt num(text.substr(0, slash));
    BigInt den(text.substr(slash + 1));
    if (den == 0) throw std::invalid_argument("zero denominator");
    return Rational(num, den);
  } catch (const std::exception&) {
    throw std::invalid_argument("malformed rational '" + text + "'");
  }
}

inline double to_double(const Rational& q) { return q.convert_to<double>(); }

/// Uniform draw in [0,1) from a 64-bit generator output.
inline Rational unit_from_bits(std::uint64_t bits) {
  return Rational(BigInt(bits), BigInt(1) << 64);
}

/// Exact square root when both numerator and denominator are perfect squares.
inline bool exact_sqrt(const Rational& q, Rational& out) {
  if (q < 0) return false;
  BigInt n = boost::multiprecision::numerator(q);
  BigInt d = boost::multiprecision::denominator(q);
  BigInt rn = boost::multiprecision::sqrt(n);
  BigInt rd = boost::multiprecision::sqrt(d);
  if (rn * rn != n || rd * rd != d) return false;
  out = Rational(rn, rd);
  return true;
}

}  // namespace hintikka
