#pragma once

#include <cmath>
#include <string>

#include "caplab/precision.hpp"

namespace caplab::testing {

/// True when `x` rounds to the same leading `digits` significant digits as
/// the printed reference, i.e. |x - ref| <= half a unit in that place.
inline bool agrees_to(const Real& x, const std::string& printed, int digits) {
  const Real ref = parse_real(printed);
  const Real unit = pow(Real(10), floor(log10(abs(ref))) - (digits - 1));
  return abs(x - ref) <= unit / 2;
}

/// |x - ref| < one unit in the last printed place; accepts both rounded and
/// truncated tables.
inline bool within_unit(const Real& x, const std::string& printed, int digits) {
  const Real ref = parse_real(printed);
  const Real unit = pow(Real(10), floor(log10(abs(ref))) - (digits - 1));
  return abs(x - ref) < unit;
}

/// Significant digits shared by x and ref, -log10 of the relative error.
inline double shared_digits(const Real& x, const Real& ref) {
  if (x == ref) return 1e9;
  return static_cast<double>(-log10(abs(x - ref) / abs(ref)));
}

}  // namespace caplab::testing
