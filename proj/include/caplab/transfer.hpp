#pragma once

// Layer-to-layer transfer operators: rows of a 2D strip or slabs of a 3D
// prism stacked along the last axis. Entries are 0/1; entry (phi, psi) is 1
// when every cell p satisfies (phi(p), psi(p)) in E_vertical.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "caplab/constraint.hpp"
#include "caplab/precision.hpp"
#include "caplab/words.hpp"

namespace caplab {

enum class Representation { automatic, successor_lists, bitset_rows, matrix_free };

const char* to_string(Representation r);

/// Sorted successor (column) indices per row, CSR layout.
struct SuccessorLists {
  std::vector<std::uint64_t> offsets;  // size M + 1
  std::vector<std::uint32_t> targets;
};

/// Row i occupies words [i * words_per_row, (i + 1) * words_per_row).
struct BitsetRows {
  std::size_t words_per_row = 0;
  std::vector<std::uint64_t> bits;
};

/// Matrix-free layer operator. The product A v is computed by swapping the
/// cells of psi for the cells of phi one at a time; the intermediate array at
/// level t is indexed by (prefix of phi of length t, suffix of psi from cell
/// t on), both drawn from the state list.
struct LayerDp {
  int cells = 0;
  int colours = 0;
  std::vector<std::size_t> prefix_count;                 // [t], t = 0..cells
  std::vector<std::size_t> suffix_count;                 // [t]
  std::vector<std::vector<std::uint32_t>> prefix_parent;  // [t][p], t >= 1: node at level t-1
  std::vector<std::vector<std::uint8_t>> prefix_colour;   // [t][p]: colour of cell t-1
  std::vector<std::vector<std::int32_t>> suffix_child;    // [t][s * k + a]: index at level t-1 of a.s, or -1
  std::vector<std::uint64_t> vertical_masks;             // [c]: colours a with (c, a) in E_vertical
  std::size_t peak_entries = 0;
};

/// Two in-layer boundaries of a 3D slab (axis 1, axis 2).
struct BoundaryDescriptor {
  Boundary axis1 = Boundary::open;
  Boundary axis2 = Boundary::open;
};

struct BuildOptions {
  Representation representation = Representation::automatic;
  GuardLimits guards = GuardLimits::from_environment();
  /// automatic: successor lists while the mean row degree stays at or below this.
  double max_mean_degree = 64.0;
};

class TransferOperator {
 public:
  using Storage = std::variant<SuccessorLists, BitsetRows, LayerDp>;

  /// Layer operator over a state list with a per-cell vertical relation.
  TransferOperator(std::shared_ptr<const StateSpace> states, ConstraintGraph vertical, Storage storage,
                   std::string descriptor);
  /// Bare explicit operator (imports, tests, adjacency matrices).
  TransferOperator(std::size_t dimension, SuccessorLists lists, std::string descriptor);

  std::size_t dimension() const noexcept { return dimension_; }
  Representation representation() const noexcept;
  const StateSpace* states() const noexcept { return states_.get(); }
  std::shared_ptr<const StateSpace> shared_states() const noexcept { return states_; }
  const std::string& descriptor() const noexcept { return descriptor_; }
  const Storage& storage() const noexcept { return storage_; }

  bool entry(std::size_t i, std::size_t j) const;
  std::vector<std::uint32_t> successors(std::size_t i) const;
  /// Number of 1 entries.
  std::uint64_t nonzeros() const;

  /// out = A * in. Rows are split across `workers`; each row is summed in
  /// ascending column order, so the result does not depend on `workers`.
  template <class Scalar>
  void apply(const Vector<Scalar>& in, Vector<Scalar>& out, int workers = 1) const;

  TransferOperator with_representation(Representation r, const GuardLimits& guards = GuardLimits::from_environment()) const;

 private:
  std::size_t dimension_ = 0;
  std::shared_ptr<const StateSpace> states_;
  std::optional<ConstraintGraph> vertical_;
  Storage storage_;
  std::string descriptor_;
};

extern template void TransferOperator::apply<double>(const Vector<double>&, Vector<double>&, int) const;
extern template void TransferOperator::apply<Real>(const Vector<Real>&, Vector<Real>&, int) const;
extern template void TransferOperator::apply<BigInt>(const Vector<BigInt>&, Vector<BigInt>&, int) const;

template <class Scalar, class Operator>
Vector<Scalar> apply(const Operator& op, const Vector<Scalar>& v, int workers = 1) {
  Vector<Scalar> out(static_cast<Eigen::Index>(op.dimension()));
  op.apply(v, out, workers);
  return out;
}

/// 1^T A^m 1 in exact integer arithmetic.
template <class Operator>
BigInt quadratic_form_count(const Operator& op, unsigned m) {
  Vector<BigInt> v(static_cast<Eigen::Index>(op.dimension())), w(static_cast<Eigen::Index>(op.dimension()));
  for (Eigen::Index i = 0; i < v.size(); ++i) v[i] = 1;
  for (unsigned step = 0; step < m; ++step) {
    op.apply(v, w);
    v.swap(w);
  }
  BigInt total = 0;
  for (Eigen::Index i = 0; i < v.size(); ++i) total += v[i];
  return total;
}

/// Dense copy for cross-checks on small operators.
template <class Scalar = double, class Operator>
Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> to_dense(const Operator& op) {
  const auto m = static_cast<Eigen::Index>(op.dimension());
  Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> a =
      Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>::Zero(m, m);
  for (Eigen::Index i = 0; i < m; ++i)
    for (auto j : op.successors(static_cast<std::size_t>(i))) a(i, static_cast<Eigen::Index>(j)) = Scalar(1);
  return a;
}

/// Row transfer operator of a 2D system: states are Gamma_1 words of length
/// n, stacking uses Gamma_2 (T_n / T_n,per for isotropic systems, R_{n,2} in
/// general; swap the axes with permute_axes for R_{n,1}).
TransferOperator build_row_transfer_2d(const ConstraintSystem& sys, int n, Boundary boundary,
                                       const BuildOptions& options = {});

/// Slab transfer operator of a 3D system: states are n1 x n2 slabs under
/// (Gamma_1, Gamma_2), stacking uses Gamma_3.
TransferOperator build_slab_transfer_3d(const ConstraintSystem& sys, int n1, int n2, BoundaryDescriptor bc,
                                        const BuildOptions& options = {});

/// Adjacency matrix of a single graph as an operator; its Perron root is rho(Gamma).
TransferOperator adjacency_operator(const ConstraintGraph& g);

/// Text export: "M <dim>" then one line of sorted 0-based successors per row.
void export_operator(const TransferOperator& op, const std::filesystem::path& path);
TransferOperator import_operator(const std::filesystem::path& path);
std::string format_operator(const TransferOperator& op);
TransferOperator parse_operator(const std::string& text, const std::string& source = "<string>");

}  // namespace caplab
