#include "caplab/precision.hpp"

#include <mpfr.h>

#include <stdexcept>

namespace caplab {

PrecisionScope::PrecisionScope(unsigned digits) : saved_(Real::default_precision()) {
  Real::default_precision(digits);
}

PrecisionScope::~PrecisionScope() { Real::default_precision(saved_); }

unsigned current_precision_digits() { return Real::default_precision(); }

Real parse_real(std::string_view text) {
  try {
    return Real(std::string(text));
  } catch (const std::exception&) {
    throw std::invalid_argument("not a number: '" + std::string(text) + "'");
  }
}

std::string format_real(const Real& x, int digits) {
  return x.str(digits, std::ios_base::fmtflags(0));
}

namespace outward {
namespace {

template <class Fn>
Real rounded(Fn&& fn) {
  Real r;
  fn(r.backend().data());
  return r;
}

}  // namespace

Real div_down(const Real& a, const Real& b) {
  return rounded([&](mpfr_ptr r) { mpfr_div(r, a.backend().data(), b.backend().data(), MPFR_RNDD); });
}
Real div_up(const Real& a, const Real& b) {
  return rounded([&](mpfr_ptr r) { mpfr_div(r, a.backend().data(), b.backend().data(), MPFR_RNDU); });
}
Real mul_down(const Real& a, const Real& b) {
  return rounded([&](mpfr_ptr r) { mpfr_mul(r, a.backend().data(), b.backend().data(), MPFR_RNDD); });
}
Real mul_up(const Real& a, const Real& b) {
  return rounded([&](mpfr_ptr r) { mpfr_mul(r, a.backend().data(), b.backend().data(), MPFR_RNDU); });
}
Real root_down(const Real& a, unsigned long n) {
  return rounded([&](mpfr_ptr r) { mpfr_rootn_ui(r, a.backend().data(), n, MPFR_RNDD); });
}
Real root_up(const Real& a, unsigned long n) {
  return rounded([&](mpfr_ptr r) { mpfr_rootn_ui(r, a.backend().data(), n, MPFR_RNDU); });
}

}  // namespace outward
}  // namespace caplab
