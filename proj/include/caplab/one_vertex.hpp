#pragma once

// 1-vertex transfer operators: a state is a word of L cells, a transition
// drops the first cell and appends one colour. At most k successors per row.
//
//  2D (L = n):      phi -> phi(2..n) c  with (phi(n), c) in E1, (phi(1), c) in E2.
//  3D (L = n1 n2):  additionally (phi(L - n1 + 1), c) in E2 and (phi(1), c) in E3,
//                   states are helical slab words.

#include <cstddef>
#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "caplab/constraint.hpp"
#include "caplab/precision.hpp"
#include "caplab/words.hpp"

namespace caplab {

struct OneVertexOptions {
  GuardLimits guards = GuardLimits::from_environment();
  /// Successor table is precomputed up to this many entries, else computed per apply.
  double max_table_entries = 1e8;
  int workers = 1;
};

class OneVertexOperator {
 public:
  /// Admissible appended colours as bit masks, indexed by the colour of the
  /// cell the condition looks back to. The appended colour must pass all.
  struct AppendRule {
    std::vector<std::uint64_t> after_last;   // [phi(L)]
    std::vector<std::uint64_t> after_first;  // [phi(1)]
    std::vector<std::uint64_t> after_skip;   // [phi(L - n1 + 1)], empty in 2D
    int skip_pos = -1;                       // 0-based position L - n1, or -1
  };

  OneVertexOperator(std::shared_ptr<const StateSpace> states, AppendRule rule, std::string descriptor,
                    const OneVertexOptions& options);

  std::size_t dimension() const noexcept { return states_->size(); }
  const StateSpace& states() const noexcept { return *states_; }
  std::shared_ptr<const StateSpace> shared_states() const noexcept { return states_; }
  const std::string& descriptor() const noexcept { return descriptor_; }
  bool tabulated() const noexcept { return !offsets_.empty(); }

  /// Sorted successor indices of state i.
  std::vector<std::uint32_t> successors(std::size_t i) const;
  bool entry(std::size_t i, std::size_t j) const;
  std::uint64_t nonzeros() const;

  template <class Scalar>
  void apply(const Vector<Scalar>& in, Vector<Scalar>& out, int workers = 1) const;

  /// Copy with the transition i -> j removed (fault injection for the
  /// inequality checks). The copy is always tabulated.
  OneVertexOperator without_transition(std::size_t i, std::size_t j) const;

 private:
  template <class Fn>
  void for_each_successor(std::size_t i, Fn&& fn) const;

  std::shared_ptr<const StateSpace> states_;
  AppendRule rule_;
  std::string descriptor_;
  std::vector<std::uint64_t> offsets_;
  std::vector<std::uint32_t> targets_;
};

extern template void OneVertexOperator::apply<double>(const Vector<double>&, Vector<double>&, int) const;
extern template void OneVertexOperator::apply<Real>(const Vector<Real>&, Vector<Real>&, int) const;
extern template void OneVertexOperator::apply<BigInt>(const Vector<BigInt>&, Vector<BigInt>&, int) const;

/// S_{n,2} for isotropic systems, P_{n,2} in general. n >= 2.
OneVertexOperator build_one_vertex_2d(const ConstraintSystem& sys, int n, const OneVertexOptions& options = {});

/// P_{(n1,n2),3}. n1 * n2 >= 2.
OneVertexOperator build_one_vertex_3d(const ConstraintSystem& sys, int n1, int n2, const OneVertexOptions& options = {});

}  // namespace caplab
