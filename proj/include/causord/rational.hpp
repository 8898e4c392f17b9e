#pragma once

#include <gmpxx.h>

#include <string>
#include <vector>

namespace causord {

// Exact arithmetic everywhere a yes/no question sits on a polytope facet.
using Rational = mpq_class;

// mpq_class(n, d) keeps the operands as given; GMP arithmetic needs the
// canonical form. Route every runtime-valued fraction through this.
inline Rational frac(long n, long d) {
  Rational q(n, d);
  q.canonicalize();
  return q;
}

// Parses "n", "-n/d" or a plain decimal like "0.25" into an exact rational.
// Throws ParseError on malformed input or zero denominator.
Rational parse_rational(const std::string& text);

// Canonical "n" or "n/d" rendering.
std::string rational_str(const Rational& q);

// "n/d (0.dddddd)" rendering used by the reports.
std::string rational_with_float(const Rational& q);

// Fixed 6-decimal float rendering (deterministic across runs).
std::string fixed6(double v);

inline double to_double(const Rational& q) { return q.get_d(); }

// Scales a rational vector to integers with gcd 1. Returns the scaled
// vector; the common scale factor applied is written to `scale` so that
// scaled[i] == in[i] * scale. All-zero input returns all zeros, scale 1.
std::vector<Rational> integer_normalize(const std::vector<Rational>& in,
                                        Rational& scale);

}  // namespace causord
