#pragma once

// Constraint digraphs, multi-axis constraint systems and the builtin models.
// Colours are 0-based in memory; every textual surface (files, reports,
// formatted words) is 1-based.

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <Eigen/Core>

namespace caplab {

using Colour = int;

/// Digraph on k colours; edge (i, j) means colour j may follow colour i
/// along the axis the graph is attached to. Self-loops are allowed.
class ConstraintGraph {
 public:
  static constexpr int max_colours = 64;

  explicit ConstraintGraph(int k);
  /// Edges given 0-based.
  ConstraintGraph(int k, const std::vector<std::pair<Colour, Colour>>& edges);

  int colours() const noexcept { return k_; }
  bool has_edge(Colour from, Colour to) const noexcept { return (out_[from] >> to) & 1u; }
  void add_edge(Colour from, Colour to);
  void remove_edge(Colour from, Colour to);

  /// Bit j of out_mask(i) is set iff (i, j) is an edge.
  std::uint64_t out_mask(Colour from) const noexcept { return out_[from]; }

  /// Sorted 0-based edge list.
  std::vector<std::pair<Colour, Colour>> edges() const;
  ConstraintGraph transpose() const;
  bool is_symmetric() const;
  Eigen::MatrixXi adjacency() const;

  bool operator==(const ConstraintGraph&) const = default;

 private:
  int k_;
  std::vector<std::uint64_t> out_;
};

/// One graph per lattice axis over a shared colour set. The symmetric and
/// isotropic flags are always derived from the graphs.
class ConstraintSystem {
 public:
  explicit ConstraintSystem(std::vector<ConstraintGraph> axes);
  ConstraintSystem(int dimension, const ConstraintGraph& every_axis);

  int dimension() const noexcept { return static_cast<int>(axes_.size()); }
  int colours() const noexcept { return axes_.front().colours(); }
  const ConstraintGraph& axis(int i) const { return axes_.at(static_cast<std::size_t>(i)); }
  const std::vector<ConstraintGraph>& axes() const noexcept { return axes_; }

  bool symmetric() const noexcept { return symmetric_; }
  bool isotropic() const noexcept { return isotropic_; }

  bool operator==(const ConstraintSystem& o) const { return axes_ == o.axes_; }

 private:
  std::vector<ConstraintGraph> axes_;
  bool symmetric_ = false;
  bool isotropic_ = false;
};

struct AxisDiagnostics {
  std::vector<Colour> isolated;                    // 0-based
  std::vector<std::vector<Colour>> components;     // strongly connected, each sorted
  bool union_of_strong_components = false;
  bool strongly_connected = false;
  bool symmetric = false;
};

struct ValidationReport {
  std::vector<AxisDiagnostics> axes;
  /// True when every axis has no isolated colour and is a disjoint union of
  /// non-trivial strongly connected components.
  bool ok() const;
  std::string describe() const;
};

ValidationReport validate_system(const ConstraintSystem& sys);

/// Colours j with (j, i) and (i, j) in every axis graph for all i (j included).
std::vector<Colour> find_friendly_colours(const ConstraintSystem& sys);

/// System whose axis i is sys.axis(order[i]); e.g. {1, 0} swaps the roles
/// of the first two axes.
ConstraintSystem permute_axes(const ConstraintSystem& sys, const std::vector<int>& order);

// Builtin models.
ConstraintGraph hard_square_graph();
ConstraintSystem hard_square_system(int dimension);
ConstraintGraph complete_graph(int k);
/// Monomer-dimer tilings of Z^d in 2d+1 colours: colour 2d+1 is a monomer,
/// colours 2i-1 / 2i are the first / second half of a dimer along axis i.
/// `same_axis_chain` adds the edge (2i, 2i-1) so two dimers may abut along
/// their own axis; without it the encoding undercounts tilings.
ConstraintSystem monomer_dimer_system(int d, bool same_axis_chain = true);

// Text format:
//   k <int>
//   d <int>
//   axis <i>
//   <from> <to>      (1-based, one edge per line)
// '#' starts a comment.
ConstraintSystem parse_system(std::string_view text, const std::string& source = "<string>");
ConstraintSystem load_system(const std::filesystem::path& path);
std::string format_system(const ConstraintSystem& sys);
void save_system(const ConstraintSystem& sys, const std::filesystem::path& path);

/// Stable short hash of a system's canonical text form.
std::uint64_t system_fingerprint(const ConstraintSystem& sys);

}  // namespace caplab
