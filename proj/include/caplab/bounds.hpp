#pragma once

// Entropy bounds from spectral radii. Every bound is reported as e^h.
// `value` uses point estimates; `safe_value` pushes the input enclosures
// through the formula with outward rounding, so a rigorous bound stays valid
// despite iteration error.

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "caplab/constraint.hpp"
#include "caplab/one_vertex.hpp"
#include "caplab/spectral.hpp"
#include "caplab/transfer.hpp"

namespace caplab {

enum class BoundKind { lower, upper };
/// conditional: rests on a recipe or monotonicity that is not proven here.
enum class Rigor { rigorous, heuristic, conditional };

const char* to_string(BoundKind k);
const char* to_string(Rigor r);

struct BoundInput {
  std::string label;  // e.g. "rho(T_14)"
  SpectralEstimate estimate;
};

struct EntropyBound {
  std::string quantity;  // "e^h2" or "e^h3"
  BoundKind kind = BoundKind::lower;
  Rigor rigor = Rigor::rigorous;
  Real value, safe_value;
  std::string formula;
  std::vector<BoundInput> inputs;
};

/// (rho(T_{p+2q+1}) / rho(T_{2q+1}))^{1/p} <= e^h2.
EntropyBound lower_bound_open_2d(const SpectralEstimate& rho_large, const SpectralEstimate& rho_small, int p, int q);
/// e^h2 <= rho(T_n)^{1/n}.
EntropyBound upper_bound_open_2d(const SpectralEstimate& rho, int n);
/// (rho(T_{p+2q,per}) / rho(T_{2q,per}))^{1/p} <= e^h2, rho(T_{0,per}) = rho(Delta).
EntropyBound lower_bound_periodic_2d(const SpectralEstimate& rho_large, const SpectralEstimate& rho_small, int p, int q);
/// e^h2 <= rho(T_{side,per})^{1/side}; side must be even.
EntropyBound upper_bound_periodic_2d(const SpectralEstimate& rho, int side);
std::pair<EntropyBound, EntropyBound> bounds_periodic_2d(const SpectralEstimate& rho_large,
                                                        const SpectralEstimate& rho_small, int p, int q,
                                                        const SpectralEstimate& rho_even, int side);

/// e^h3 <= rho(T_{(s1,s2),3,per})^{1/(s1 s2)}; both torus sides even.
EntropyBound upper_bound_periodic_3d(const SpectralEstimate& rho, int side1, int side2);

struct SlabEstimate {
  int n1 = 0, n2 = 0;
  SpectralEstimate estimate;
};

/// rho_22 rho_11 / (rho_21 rho_12) at slab sizes (m1,m2), (m1+1,m2),
/// (m1,m2+1), (m1+1,m2+1). Always conditional. With `isotropic`, the two
/// transposed slabs must have overlapping enclosures.
EntropyBound corner_ratio_lower_bound_3d(const SlabEstimate& r11, const SlabEstimate& r21, const SlabEstimate& r12,
                                         const SlabEstimate& r22, bool isotropic);

/// log rho(T_{n-1,per}) / n <= log rho(S_n) <= min(log rho(T_n), log rho(T_{n+1,per})) / n.
struct SandwichReport {
  int n = 0;
  SpectralEstimate t_per_prev, s, t_open, t_per_next;
  Real lower_gap;  // log rho(S_n) - log rho(T_{n-1,per}) / n
  Real upper_gap;  // min(...) / n - log rho(S_n)
  bool violated = false;
};

/// Gaps below -slack count as a violation.
SandwichReport sandwich_check_one_vertex(const ConstraintSystem& sys, int n, const IterationConfig& cfg = {},
                                         double slack = 1e-20);
/// Same check over given operators (used with deliberately broken ones).
SandwichReport sandwich_check_one_vertex(const OneVertexOperator& s, const TransferOperator& t_per_prev,
                                         const TransferOperator& t_open, const TransferOperator& t_per_next, int n,
                                         const IterationConfig& cfg = {}, double slack = 1e-20);

/// log rho(R_{n,2}) / (n+1) <= log rho(P_{n+1,2}), valid with a friendly colour.
struct FriendlyReport {
  int n = 0;
  std::vector<Colour> friendly;
  Real slack;  // log rho(P_{n+1}) - log rho(R_n) / (n+1)
  bool holds = false;
};

FriendlyReport friendly_lower_bound_2d(const ConstraintSystem& sys, const SpectralEstimate& rho_r, int n,
                                       const SpectralEstimate& rho_p);

/// Even-n values increasing and odd-n values (n >= 3) decreasing; if both
/// hold, (max even, min odd) is a heuristic bracket.
struct HeuristicBracket {
  bool even_increasing = true;
  bool odd_decreasing = true;
  std::optional<std::string> violation;
  std::optional<EntropyBound> lower, upper;
};

HeuristicBracket heuristic_bracket_2d(const std::vector<std::pair<int, SpectralEstimate>>& values);

struct BoundReport {
  std::optional<EntropyBound> rigorous_lower, rigorous_upper;
  std::optional<EntropyBound> heuristic_lower, heuristic_upper;
  std::vector<EntropyBound> conditional;
  std::vector<EntropyBound> all;

  std::string to_json(int digits = 30) const;
  std::string to_text(int digits = 30) const;
};

/// Best bounds per rigor class; comparisons use safe_value.
BoundReport bound_report(const std::vector<EntropyBound>& bounds);

}  // namespace caplab
