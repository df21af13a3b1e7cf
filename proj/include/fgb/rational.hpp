#pragma once

#include <boost/multiprecision/cpp_int.hpp>

#include <string>

#include "fgb/errors.hpp"

namespace fgb {

// Exact arithmetic throughout: all identities in this library are exact
// equalities, so no floating point is used on any checked path.
using BigInt = boost::multiprecision::cpp_int;
using Rational = boost::multiprecision::cpp_rational;

// base^e with e of either sign.
inline Rational pow_int(const Rational& base, long e) {
  if (e == 0) return Rational(1);
  if (base == 0 && e < 0) throw InputError("pow_int: zero base with negative exponent");
  Rational b = e > 0 ? base : Rational(1) / base;
  unsigned long m = static_cast<unsigned long>(e > 0 ? e : -e);
  Rational acc(1);
  while (m > 0) {
    if (m & 1) acc *= b;
    b *= b;
    m >>= 1;
  }
  return acc;
}

// Accepts "p" or "p/q", optionally negative.
inline Rational rational_from_string(const std::string& s) {
  if (s.empty()) throw InputError("empty rational literal");
  try {
    Rational q(s);
    return q;
  } catch (const std::exception&) {
    throw InputError("bad rational literal: '" + s + "'");
  }
}

// Canonical form: "p" when the denominator is 1, else "p/q".
inline std::string rational_to_string(const Rational& q) {
  if (denominator(q) == 1) return numerator(q).str();
  return numerator(q).str() + "/" + denominator(q).str();
}

inline double rational_to_double(const Rational& q) { return q.convert_to<double>(); }

}  // namespace fgb
