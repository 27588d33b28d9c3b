#pragma once

// Exact counts by backtracking, independent of the transfer operators. Cells
// are visited in row-major order with axis 1 varying fastest; every pair
// check is made as soon as both cells are coloured. The work limit counts
// partial assignments.

#include <cstdint>
#include <string>
#include <vector>

#include "caplab/constraint.hpp"
#include "caplab/precision.hpp"
#include "caplab/words.hpp"

namespace caplab {

struct ExactCount {
  BigInt value;
  std::string instance;
  std::uint64_t work = 0;  // partial assignments visited
};

/// Allowable colourings of an n_1 x ... x n_d box; bc[i] closes axis i into
/// a cycle with the pair (last, first).
ExactCount brute_count_box(const ConstraintSystem& sys, const std::vector<int>& dims, const std::vector<Boundary>& bc,
                           const GuardLimits& guards = GuardLimits::from_environment());

/// As above on an open box, with cell c restricted to the colours in masks[c].
ExactCount brute_count_box_masked(const ConstraintSystem& sys, const std::vector<int>& dims,
                                  const std::vector<std::uint64_t>& masks,
                                  const GuardLimits& guards = GuardLimits::from_environment());

/// Gamma_1-chains of length n q with (t(i), t(i+n)) in E_2.
ExactCount brute_count_slanted_2d(const ConstraintSystem& sys, int n, int q,
                                  const GuardLimits& guards = GuardLimits::from_environment());

/// Gamma_1-chains of length n1 n2 m with (w(i), w(i+n1)) in E_2 and
/// (w(i), w(i+n1 n2)) in E_3.
ExactCount brute_count_slanted_3d(const ConstraintSystem& sys, int n1, int n2, int m,
                                  const GuardLimits& guards = GuardLimits::from_environment());

/// Tilings of the box by monomers and axis-parallel dimers, by direct
/// placement. At most 30 cells.
ExactCount brute_count_monomer_dimer(const std::vector<int>& dims,
                                     const GuardLimits& guards = GuardLimits::from_environment());

/// Per-cell colour masks of the monomer-dimer colouring that keep every
/// dimer inside the box: no first half on the high face of its axis, no
/// second half on the low face.
std::vector<std::uint64_t> monomer_dimer_boundary_masks(const std::vector<int>& dims);

}  // namespace caplab
