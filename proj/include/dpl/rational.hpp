#pragma once

#include <gmpxx.h>

#include <string>
#include <string_view>

namespace dpl {

using Rational = mpq_class;

// Accepts "n", "-n", "n/d". Throws std::invalid_argument on anything else
// (including a zero denominator).
Rational parse_rational(std::string_view text);

std::string to_string(const Rational& q);

inline bool in_unit_interval(const Rational& q) { return q >= 0 && q <= 1; }

// max(a - b, 0)
inline Rational monus(const Rational& a, const Rational& b) {
  Rational d = a - b;
  return d < 0 ? Rational(0) : d;
}

}  // namespace dpl
