#pragma once

// Exact rational arithmetic used throughout the library. All externally
// visible rationals are canonical: lowest terms, positive denominator.
// The GMP-backed types maintain that invariant on every operation; the
// helpers here add parsing, formatting, and exact conversion from binary
// doubles. GMP matters for speed: median certification reduces fractions
// whose parts run to thousands of bits, and its subquadratic gcd keeps
// those reductions around microseconds.

#include <boost/multiprecision/gmp.hpp>

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace qs {

using BigInt = boost::multiprecision::mpz_int;
using Rational = boost::multiprecision::mpq_rational;

// "p/q" with optional sign, q > 0 after canonicalization. A bare integer
// "p" is accepted on input. Throws std::invalid_argument with the offending
// text on malformed input so callers can report file positions.
inline Rational parse_rational(const std::string& s) {
  auto is_int = [](const std::string& t) {
    size_t i = (t.size() > 1 && (t[0] == '-' || t[0] == '+')) ? 1 : 0;
    if (i >= t.size()) return false;
    for (; i < t.size(); ++i)
      if (t[i] < '0' || t[i] > '9') return false;
    return true;
  };
  auto slash = s.find('/');
  if (slash == std::string::npos) {
    if (!is_int(s)) throw std::invalid_argument("bad rational literal: \"" + s + "\"");
    return Rational(BigInt(s));
  }
  std::string num = s.substr(0, slash);
  std::string den = s.substr(slash + 1);
  if (!is_int(num) || !is_int(den))
    throw std::invalid_argument("bad rational literal: \"" + s + "\"");
  BigInt n(num), d(den);
  if (d == 0) throw std::invalid_argument("zero denominator in rational: \"" + s + "\"");
  if (d < 0) { n = -n; d = -d; }
  return Rational(n, d);
}

// Always emits the two-part "p/q" form, canonical. 0 prints as "0/1".
inline std::string format_rational(const Rational& r) {
  return numerator(r).str() + "/" + denominator(r).str();
}

// Doubles are dyadic rationals; conversion is exact. Rejects non-finite input.
inline Rational exact_rational(double x) {
  if (!std::isfinite(x)) throw std::invalid_argument("non-finite value has no rational form");
  if (x == 0.0) return Rational(0);
  int exp = 0;
  double m = std::frexp(x, &exp);  // x = m * 2^exp, 0.5 <= |m| < 1
  // 53 doublings make the mantissa integral
  long long mi = static_cast<long long>(std::ldexp(m, 53));
  exp -= 53;
  Rational r(mi);
  if (exp > 0) {
    r *= Rational(BigInt(1) << exp);
  } else if (exp < 0) {
    r /= Rational(BigInt(1) << (-exp));
  }
  return r;
}

inline double to_double(const Rational& r) {
  return static_cast<double>(r);
}

inline long long llgcd(long long a, long long b) {
  while (b) { long long t = a % b; a = b; b = t; }
  return a < 0 ? -a : a;
}

// Unnormalized fraction accumulator. Adding many rationals with unrelated
// denominators through cpp_rational runs a gcd per step; piling everything
// into one growing fraction and normalizing once at the end is far cheaper
// for the exact median comparisons.
struct FracAcc {
  BigInt num = 0;
  BigInt den = 1;

  void add(const BigInt& n, const BigInt& d) {
    num = num * d + n * den;
    den *= d;
    // denominators multiply on every step; reduce once they get large so long
    // accumulations stay cheap
    if (msb(den < 0 ? BigInt(-den) : den) > 8192) {
      BigInt g = gcd(num, den);
      if (g > 1) {
        num /= g;
        den /= g;
      }
    }
  }
  void add(const Rational& r) { add(numerator(r), denominator(r)); }
  void sub(const Rational& r) { add(-numerator(r), denominator(r)); }

  // sign of (accumulated value - r), exact
  int cmp(const Rational& r) const {
    BigInt lhs = num * denominator(r);
    BigInt rhs = numerator(r) * den;
    if (den < 0) std::swap(lhs, rhs);
    if (lhs < rhs) return -1;
    if (lhs > rhs) return 1;
    return 0;
  }

  Rational value() const { return den < 0 ? Rational(-num, -den) : Rational(num, den); }
};

}  // namespace qs
