#pragma once

// Perron roots of non-negative operators by shifted power iteration, with
// Collatz-Wielandt enclosures as the stopping certificate.
//
// Any type with dimension() and apply<Scalar>(in, out, workers) for double
// and Real works as an operator.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <utility>

#include "caplab/errors.hpp"
#include "caplab/precision.hpp"
#include "caplab/util.hpp"

namespace caplab {

struct IterationSnapshot {
  std::uint64_t iteration = 0;
  Real lower, upper, value;  // already shifted back
  bool positive = false;     // iterate strictly positive, lower is valid
  bool extended = false;     // true once running in Real arithmetic
};

struct IterationConfig {
  unsigned precision_digits = 40;
  /// Relative Collatz-Wielandt gap; unset means 10^-(precision_digits - 8).
  std::optional<double> tolerance;
  std::uint64_t max_iterations = 5'000'000;
  /// Unset means automatic (1).
  std::optional<double> shift;
  /// Enclosures are evaluated (and the iterate normalized) every this many steps.
  unsigned check_interval = 10;
  /// Run a double-precision phase first, until its own gap stalls near 1e-12.
  bool warm_start = true;
  double start_scale = 1.0;
  int workers = 1;

  std::filesystem::path checkpoint_path;
  std::uint64_t checkpoint_interval = 0;  // 0: only at the end
  bool resume = false;

  std::function<void(const IterationSnapshot&)> observer;

  double resolved_tolerance() const;
  double resolved_shift() const;
  void validate() const;
};

struct SpectralEstimate {
  Real value, cw_lower, cw_upper;
  std::uint64_t iterations = 0;
  unsigned precision_digits = 0;
  bool converged = false;
  /// False when the last iterate had zero entries; then cw_lower is 0 and
  /// only cw_upper is meaningful.
  bool positive = false;
  double shift_applied = 0;

  Real relative_gap() const;

  /// A tabulated number, enclosed by half a unit in its last printed digit.
  static SpectralEstimate from_printed(const std::string& text);
  /// An exactly known value (zero-width enclosure).
  static SpectralEstimate exact(const Real& value);
};

struct CheckpointState {
  std::uint64_t descriptor_hash = 0;
  std::uint64_t iteration = 0;
  unsigned precision_digits = 0;
  double shift = 0;
  Vector<Real> vector;
};

std::uint64_t descriptor_hash(const std::string& descriptor, std::size_t dimension);

/// Atomic: writes `path`.tmp then renames it over `path`.
void save_checkpoint(const std::filesystem::path& path, const CheckpointState& state);
/// Throws CheckpointError on a truncated or corrupted file.
CheckpointState load_checkpoint(const std::filesystem::path& path);

/// (min_i (Av)_i / v_i, max_i (Av)_i / v_i) for strictly positive v.
template <class Op>
std::pair<Real, Real> collatz_wielandt_bounds(const Op& op, const Vector<Real>& v, int workers = 1) {
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (!(v[i] > 0)) throw std::invalid_argument("Collatz-Wielandt bounds need a strictly positive vector");
  }
  Vector<Real> w;
  op.apply(v, w, workers);
  Real lo = w[0] / v[0], hi = lo;
  for (Eigen::Index i = 1; i < v.size(); ++i) {
    Real r = w[i] / v[i];
    if (r < lo) lo = r;
    if (r > hi) hi = r;
  }
  return {lo, hi};
}

namespace detail {

struct Ratios {
  Real lower, upper, value, max_entry;
  bool positive = true;
};

/// Enclosure of rho(A') from v and w = A' v; value is sum v w / sum v^2.
Ratios ratios(const Vector<Real>& v, const Vector<Real>& w);
void scale_by_max(Vector<Real>& w, const Real& max_entry);
bool has_non_finite(const Real& x);

struct DoubleRatios {
  double lower, upper, max_entry;
  bool positive;
};
DoubleRatios ratios(const Vector<double>& v, const Vector<double>& w);

}  // namespace detail

template <class Op>
SpectralEstimate perron_radius(const Op& op, const IterationConfig& cfg = {}) {
  cfg.validate();
  PrecisionScope scope(cfg.precision_digits);
  const auto m = static_cast<Eigen::Index>(op.dimension());
  if (m == 0) throw std::invalid_argument("operator has no states");
  const double tol = cfg.resolved_tolerance();
  const double sigma = cfg.resolved_shift();
  const Real sigma_r = sigma;
  const std::uint64_t hash = descriptor_hash(op.descriptor(), op.dimension());

  std::uint64_t it = 0;
  Vector<Real> v(m), w(m);
  bool loaded = false;

  if (cfg.resume) {
    CheckpointState st = load_checkpoint(cfg.checkpoint_path);
    if (st.descriptor_hash != hash) throw CheckpointError("checkpoint was written for a different operator");
    if (st.precision_digits != cfg.precision_digits) throw CheckpointError("checkpoint precision differs from --precision");
    if (st.shift != sigma) throw CheckpointError("checkpoint shift differs from the configured shift");
    if (st.vector.size() != m) throw CheckpointError("checkpoint vector length differs from the operator dimension");
    v = std::move(st.vector);
    it = st.iteration;
    loaded = true;
  }

  if (!loaded && cfg.warm_start) {
    Vector<double> vd = Vector<double>::Constant(m, cfg.start_scale), wd(m);
    double best_gap = std::numeric_limits<double>::infinity();
    int stalled = 0;
    while (it < cfg.max_iterations) {
      op.apply(vd, wd, cfg.workers);
      wd += sigma * vd;
      ++it;
      const auto r = detail::ratios(vd, wd);
      if (!std::isfinite(r.max_entry) || !std::isfinite(r.upper)) break;
      if (r.max_entry == 0) break;
      vd = wd / r.max_entry;
      if (it % cfg.check_interval != 0) continue;
      if (!r.positive) {
        if (it > static_cast<std::uint64_t>(m) + 1) break;
        continue;
      }
      const double gap = (r.upper - r.lower) / r.upper;
      if (gap <= std::max(tol, 1e-12)) break;
      if (gap < 0.5 * best_gap) {
        best_gap = gap;
        stalled = 0;
      } else if (++stalled >= 20) {
        break;
      }
    }
    for (Eigen::Index i = 0; i < m; ++i) v[i] = vd[i];
  } else if (!loaded) {
    for (Eigen::Index i = 0; i < m; ++i) v[i] = cfg.start_scale;
  }

  SpectralEstimate est;
  est.precision_digits = cfg.precision_digits;
  est.shift_applied = sigma;
  const std::uint64_t start = it;
  std::uint64_t last_saved = it;
  detail::Ratios r;

  auto save = [&] {
    if (cfg.checkpoint_path.empty()) return;
    save_checkpoint(cfg.checkpoint_path, CheckpointState{hash, it, cfg.precision_digits, sigma, v});
    last_saved = it;
  };

  // At least one step runs in Real arithmetic, so the reported enclosure is
  // always computed at the working precision.
  for (;;) {
    op.apply(v, w, cfg.workers);
    if (sigma == 1.0) {
      w += v;
    } else if (sigma != 0.0) {
      for (Eigen::Index i = 0; i < m; ++i) w[i] += sigma_r * v[i];
    }
    ++it;
    const bool last = it >= cfg.max_iterations;
    if (it % cfg.check_interval != 0 && !last) {
      v.swap(w);
      continue;
    }
    r = detail::ratios(v, w);
    if (detail::has_non_finite(r.max_entry) || detail::has_non_finite(r.upper)) {
      throw NumericalError("non-finite iterate at step " + std::to_string(it) + " (precision exhausted?)");
    }
    if (r.max_entry == 0) {
      // A' nilpotent: only possible with an explicit zero shift.
      est.value = est.cw_lower = est.cw_upper = 0;
      est.iterations = it;
      est.converged = est.positive = true;
      return est;
    }
    if (cfg.observer) {
      IterationSnapshot snap{it, r.positive ? Real(r.lower - sigma_r) : Real(0), r.upper - sigma_r, r.value - sigma_r,
                             r.positive, true};
      cfg.observer(snap);
    }
    detail::scale_by_max(w, r.max_entry);
    v.swap(w);
    const bool done = r.positive && (r.upper - r.lower) <= tol * (r.value - sigma_r);
    const bool hopeless = !r.positive && it - start > static_cast<std::uint64_t>(m) + 1;
    if (cfg.checkpoint_interval > 0 && it - last_saved >= cfg.checkpoint_interval) save();
    if (done) {
      est.converged = true;
      break;
    }
    if (hopeless || last) break;
  }
  if (!cfg.checkpoint_path.empty() && last_saved != it) save();

  est.iterations = it;
  est.positive = r.positive;
  est.cw_upper = r.upper - sigma_r;
  est.cw_lower = r.positive ? Real(r.lower - sigma_r) : Real(0);
  if (est.cw_lower < 0) est.cw_lower = 0;
  est.value = r.value - sigma_r;
  if (est.value < est.cw_lower) est.value = est.cw_lower;
  return est;
}

}  // namespace caplab
