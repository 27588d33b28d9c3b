#pragma once

#include <cstdint>
#include <string>
#include <string_view>

#include <Eigen/Core>
#include <boost/multiprecision/cpp_int.hpp>
#include <boost/multiprecision/eigen.hpp>
#include <boost/multiprecision/mpfr.hpp>

namespace caplab {

/// Runtime-precision binary float backed by MPFR (correctly rounded ops).
using Real = boost::multiprecision::number<boost::multiprecision::mpfr_float_backend<0>,
                                           boost::multiprecision::et_off>;
using BigInt = boost::multiprecision::cpp_int;

template <class Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

/// Sets the default precision (decimal digits) for newly created Real values
/// and restores the previous one on scope exit.
class PrecisionScope {
 public:
  explicit PrecisionScope(unsigned digits);
  ~PrecisionScope();
  PrecisionScope(const PrecisionScope&) = delete;
  PrecisionScope& operator=(const PrecisionScope&) = delete;

 private:
  unsigned saved_;
};

unsigned current_precision_digits();

Real parse_real(std::string_view text);

/// Scientific-free decimal rendering with `digits` significant digits.
std::string format_real(const Real& x, int digits);

/// Outward-rounded primitives for bound propagation.
namespace outward {
Real div_down(const Real& a, const Real& b);
Real div_up(const Real& a, const Real& b);
Real mul_down(const Real& a, const Real& b);
Real mul_up(const Real& a, const Real& b);
Real root_down(const Real& a, unsigned long n);
Real root_up(const Real& a, unsigned long n);
}  // namespace outward

}  // namespace caplab
