#include "caplab/spectral.hpp"

#include <mpfr.h>

#include <cmath>
#include <stdexcept>

namespace caplab {

double IterationConfig::resolved_tolerance() const {
  return tolerance ? *tolerance : std::pow(10.0, -static_cast<double>(precision_digits) + 8.0);
}

double IterationConfig::resolved_shift() const { return shift ? *shift : 1.0; }

void IterationConfig::validate() const {
  if (precision_digits < 16) throw std::invalid_argument("precision must be at least 16 digits");
  if (!(resolved_tolerance() > 0)) throw std::invalid_argument("tolerance must be positive");
  if (!(resolved_shift() >= 0)) throw std::invalid_argument("shift must be non-negative");
  if (check_interval == 0) throw std::invalid_argument("check interval must be positive");
  if (!(start_scale > 0) || !std::isfinite(start_scale)) throw std::invalid_argument("start scale must be positive");
  if (resume && checkpoint_path.empty()) throw std::invalid_argument("--resume needs --checkpoint");
}

Real SpectralEstimate::relative_gap() const {
  if (value == 0) return cw_upper - cw_lower;
  return (cw_upper - cw_lower) / value;
}

SpectralEstimate SpectralEstimate::from_printed(const std::string& text) {
  const auto dot = text.find('.');
  const auto exp = text.find_first_of("eE");
  const std::size_t mant_end = exp == std::string::npos ? text.size() : exp;
  long decimals = dot == std::string::npos || dot > mant_end ? 0 : static_cast<long>(mant_end - dot - 1);
  if (exp != std::string::npos) decimals -= std::stol(text.substr(exp + 1));
  // Enough working precision to hold the printed digits exactly.
  const unsigned digits = std::max<unsigned>(current_precision_digits(), static_cast<unsigned>(text.size()) + 10);
  PrecisionScope scope(digits);
  SpectralEstimate e;
  e.value = parse_real(text);
  const Real half = Real(5) * boost::multiprecision::pow(Real(10), Real(-(decimals + 1)));
  e.cw_lower = e.value - half;
  e.cw_upper = e.value + half;
  e.precision_digits = digits;
  e.converged = e.positive = true;
  return e;
}

SpectralEstimate SpectralEstimate::exact(const Real& value) {
  SpectralEstimate e;
  e.value = e.cw_lower = e.cw_upper = value;
  e.precision_digits = current_precision_digits();
  e.converged = e.positive = true;
  return e;
}

namespace detail {

Ratios ratios(const Vector<Real>& v, const Vector<Real>& w) {
  Ratios r;
  bool first = true;
  Real num = 0, den = 0, q;
  r.max_entry = 0;
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (w[i] > r.max_entry) r.max_entry = w[i];
    if (v[i] == 0) {
      // Ratio over the support; a zero entry invalidates the lower bound.
      r.positive = false;
      continue;
    }
    q = w[i] / v[i];
    if (first) {
      r.lower = r.upper = q;
      first = false;
    } else {
      if (q < r.lower) r.lower = q;
      if (q > r.upper) r.upper = q;
    }
    num += v[i] * w[i];
    den += v[i] * v[i];
  }
  if (first) {
    r.lower = r.upper = 0;
    r.positive = false;
  }
  // Each (A'v)_i sums at most m rounded terms; widening by m + 4 units keeps
  // the enclosure valid through that roundoff and the later shift back.
  const Real slack = ldexp(Real(static_cast<double>(v.size() + 4)), -static_cast<int>(mpfr_get_prec(w[0].backend().data())));
  r.lower *= 1 - slack;
  r.upper *= 1 + slack;
  r.value = den == 0 ? Real(0) : Real(num / den);
  if (r.value < r.lower) r.value = r.lower;
  if (r.value > r.upper) r.value = r.upper;
  return r;
}

void scale_by_max(Vector<Real>& w, const Real& max_entry) {
  const Real inv = 1 / max_entry;
  for (Eigen::Index i = 0; i < w.size(); ++i) w[i] *= inv;
}

bool has_non_finite(const Real& x) { return !mpfr_number_p(x.backend().data()); }

DoubleRatios ratios(const Vector<double>& v, const Vector<double>& w) {
  DoubleRatios r{std::numeric_limits<double>::infinity(), 0.0, 0.0, true};
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    r.max_entry = std::max(r.max_entry, w[i]);
    if (v[i] == 0) {
      r.positive = false;
      continue;
    }
    const double q = w[i] / v[i];
    r.lower = std::min(r.lower, q);
    r.upper = std::max(r.upper, q);
  }
  return r;
}

}  // namespace detail

std::uint64_t descriptor_hash(const std::string& descriptor, std::size_t dimension) {
  return fnv1a64(descriptor + "#" + std::to_string(dimension));
}

}  // namespace caplab
