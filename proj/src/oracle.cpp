#include "caplab/oracle.hpp"

#include <bit>
#include <sstream>
#include <stdexcept>

#include "caplab/errors.hpp"

namespace caplab {

namespace {

/// Cell `to` may take colour b only if (colour[from], b) is an edge.
struct Link {
  int from;
  const ConstraintGraph* graph;
};

/// Counts colourings of `cells` positions in index order. back[p] holds
/// pairs (earlier, p); wrap[p] holds pairs (p, earlier), checked in reverse.
class Backtracker {
 public:
  Backtracker(int k, int cells, const GuardLimits& guards)
      : k_(k),
        back_(static_cast<std::size_t>(cells)),
        wrap_(static_cast<std::size_t>(cells)),
        masks_(static_cast<std::size_t>(cells), k == 64 ? ~std::uint64_t{0} : (std::uint64_t{1} << k) - 1),
        limit_(guards.oracle_work) {}

  /// (colour[from], colour[to]) in g with from <= to.
  void link(int from, int to, const ConstraintGraph& g) { back_[static_cast<std::size_t>(to)].push_back({from, &g}); }
  /// (colour[later], colour[earlier]) in g, with later > earlier.
  void wrap(int later, int earlier, const ConstraintGraph& g) {
    wrap_[static_cast<std::size_t>(later)].push_back({earlier, &g});
  }
  void restrict(int cell, std::uint64_t mask) { masks_[static_cast<std::size_t>(cell)] &= mask; }

  ExactCount run(std::string instance) {
    ExactCount out;
    out.instance = std::move(instance);
    colour_.assign(back_.size(), 0);
    std::uint64_t count = 0;
    if (!back_.empty()) descend(0, count, out.work);
    out.value = count;
    return out;
  }

 private:
  std::uint64_t allowed(std::size_t p) const {
    std::uint64_t m = masks_[p];
    for (const auto& l : back_[p]) {
      if (static_cast<std::size_t>(l.from) == p) {
        std::uint64_t loops = 0;
        for (Colour a = 0; a < k_; ++a)
          if (l.graph->has_edge(a, a)) loops |= std::uint64_t{1} << a;
        m &= loops;
      } else {
        m &= l.graph->out_mask(colour_[static_cast<std::size_t>(l.from)]);
      }
    }
    for (const auto& l : wrap_[p]) {
      const Colour target = colour_[static_cast<std::size_t>(l.from)];
      std::uint64_t preds = 0;
      for (Colour a = 0; a < k_; ++a)
        if (l.graph->has_edge(a, target)) preds |= std::uint64_t{1} << a;
      m &= preds;
    }
    return m;
  }

  void descend(std::size_t p, std::uint64_t& count, std::uint64_t& work) {
    for (std::uint64_t m = allowed(p); m; m &= m - 1) {
      if (++work > limit_) throw CapacityError("oracle work", static_cast<double>(work), limit_);
      colour_[p] = std::countr_zero(m);
      if (p + 1 == back_.size()) ++count;
      else descend(p + 1, count, work);
    }
  }

  int k_;
  std::vector<std::vector<Link>> back_;
  std::vector<std::vector<Link>> wrap_;
  std::vector<std::uint64_t> masks_;
  std::vector<Colour> colour_;
  double limit_;
};

std::string describe(const std::string& what, const std::vector<int>& dims) {
  std::ostringstream os;
  os << what << " (";
  for (std::size_t i = 0; i < dims.size(); ++i) os << (i ? "," : "") << dims[i];
  os << ")";
  return os.str();
}

std::vector<int> strides_of(const std::vector<int>& dims) {
  std::vector<int> s(dims.size(), 1);
  for (std::size_t a = 1; a < dims.size(); ++a) s[a] = s[a - 1] * dims[a - 1];
  return s;
}

int total_cells(const std::vector<int>& dims) {
  long long cells = 1;
  for (int d : dims) {
    if (d < 1) throw std::invalid_argument("box sides must be >= 1");
    cells *= d;
    if (cells > 4096) throw std::invalid_argument("box too large for brute-force counting");
  }
  return static_cast<int>(cells);
}

Backtracker box_backtracker(const ConstraintSystem& sys, const std::vector<int>& dims, const std::vector<Boundary>& bc,
                            const GuardLimits& guards) {
  if (dims.size() != static_cast<std::size_t>(sys.dimension())) {
    throw std::invalid_argument("box has " + std::to_string(dims.size()) + " sides but the system has " +
                                std::to_string(sys.dimension()) + " axes");
  }
  if (bc.size() != dims.size()) throw std::invalid_argument("one boundary per axis required");
  const int cells = total_cells(dims);
  const auto stride = strides_of(dims);
  Backtracker bt(sys.colours(), cells, guards);
  for (int c = 0; c < cells; ++c) {
    for (std::size_t a = 0; a < dims.size(); ++a) {
      const int coord = (c / stride[a]) % dims[a];
      if (coord > 0) bt.link(c - stride[a], c, sys.axis(static_cast<int>(a)));
      if (bc[a] == Boundary::periodic && coord == dims[a] - 1) {
        // Wrap pair (last, first); the first cell is coloured earlier.
        const int first = c - coord * stride[a];
        if (first == c) bt.link(c, c, sys.axis(static_cast<int>(a)));
        else bt.wrap(c, first, sys.axis(static_cast<int>(a)));
      }
    }
  }
  return bt;
}

}  // namespace

ExactCount brute_count_box(const ConstraintSystem& sys, const std::vector<int>& dims, const std::vector<Boundary>& bc,
                           const GuardLimits& guards) {
  auto bt = box_backtracker(sys, dims, bc, guards);
  std::string inst = describe("box", dims);
  for (auto b : bc) inst += std::string(" ") + to_string(b);
  return bt.run(inst);
}

ExactCount brute_count_box_masked(const ConstraintSystem& sys, const std::vector<int>& dims,
                                  const std::vector<std::uint64_t>& masks, const GuardLimits& guards) {
  auto bt = box_backtracker(sys, dims, std::vector<Boundary>(dims.size(), Boundary::open), guards);
  if (masks.size() != static_cast<std::size_t>(total_cells(dims))) throw std::invalid_argument("one mask per cell required");
  for (std::size_t c = 0; c < masks.size(); ++c) bt.restrict(static_cast<int>(c), masks[c]);
  return bt.run(describe("masked box", dims));
}

ExactCount brute_count_slanted_2d(const ConstraintSystem& sys, int n, int q, const GuardLimits& guards) {
  if (sys.dimension() < 2) throw std::invalid_argument("slanted counts need at least 2 axes");
  if (n < 1 || q < 1) throw std::invalid_argument("slanted counts need n, q >= 1");
  const int len = n * q;
  Backtracker bt(sys.colours(), len, guards);
  for (int i = 1; i < len; ++i) bt.link(i - 1, i, sys.axis(0));
  for (int i = n; i < len; ++i) bt.link(i - n, i, sys.axis(1));
  return bt.run(describe("slanted", {n, q}));
}

ExactCount brute_count_slanted_3d(const ConstraintSystem& sys, int n1, int n2, int m, const GuardLimits& guards) {
  if (sys.dimension() != 3) throw std::invalid_argument("3D slanted counts need a 3-axis system");
  if (n1 < 1 || n2 < 1 || m < 1) throw std::invalid_argument("slanted counts need positive sides");
  const int layer = n1 * n2;
  const int len = layer * m;
  Backtracker bt(sys.colours(), len, guards);
  for (int i = 1; i < len; ++i) bt.link(i - 1, i, sys.axis(0));
  for (int i = n1; i < len; ++i) bt.link(i - n1, i, sys.axis(1));
  for (int i = layer; i < len; ++i) bt.link(i - layer, i, sys.axis(2));
  return bt.run(describe("slanted", {n1, n2, m}));
}

ExactCount brute_count_monomer_dimer(const std::vector<int>& dims, const GuardLimits& guards) {
  if (dims.empty()) throw std::invalid_argument("box needs at least one side");
  const int cells = total_cells(dims);
  if (cells > 30) throw CapacityError("monomer-dimer cells", cells, 30);
  const auto stride = strides_of(dims);
  std::uint64_t work = 0;
  std::uint64_t count = 0;
  // Always cover the first free cell: as a monomer, or as the low end of a
  // dimer reaching +e_a.
  auto place = [&](auto&& self, std::uint64_t covered) -> void {
    if (++work > guards.oracle_work) throw CapacityError("oracle work", static_cast<double>(work), guards.oracle_work);
    if (covered == (cells == 64 ? ~std::uint64_t{0} : (std::uint64_t{1} << cells) - 1)) {
      ++count;
      return;
    }
    const int c = std::countr_one(covered);
    self(self, covered | (std::uint64_t{1} << c));
    for (std::size_t a = 0; a < dims.size(); ++a) {
      const int coord = (c / stride[a]) % dims[a];
      const int nb = c + stride[a];
      if (coord + 1 < dims[a] && !((covered >> nb) & 1u)) {
        self(self, covered | (std::uint64_t{1} << c) | (std::uint64_t{1} << nb));
      }
    }
  };
  place(place, 0);
  ExactCount out;
  out.value = count;
  out.work = work;
  out.instance = describe("monomer-dimer tilings", dims);
  return out;
}

std::vector<std::uint64_t> monomer_dimer_boundary_masks(const std::vector<int>& dims) {
  const int d = static_cast<int>(dims.size());
  const int cells = total_cells(dims);
  const auto stride = strides_of(dims);
  const std::uint64_t all = (std::uint64_t{1} << (2 * d + 1)) - 1;
  std::vector<std::uint64_t> masks(static_cast<std::size_t>(cells), all);
  for (int c = 0; c < cells; ++c) {
    for (int a = 0; a < d; ++a) {
      const int coord = (c / stride[static_cast<std::size_t>(a)]) % dims[static_cast<std::size_t>(a)];
      if (coord == dims[static_cast<std::size_t>(a)] - 1) masks[static_cast<std::size_t>(c)] &= ~(std::uint64_t{1} << (2 * a));
      if (coord == 0) masks[static_cast<std::size_t>(c)] &= ~(std::uint64_t{1} << (2 * a + 1));
    }
  }
  return masks;
}

}  // namespace caplab
