#include "caplab/one_vertex.hpp"

#include <algorithm>
#include <bit>
#include <sstream>
#include <stdexcept>

#include "caplab/errors.hpp"
#include "caplab/util.hpp"

namespace caplab {

namespace {

std::vector<std::uint64_t> masks_of(const ConstraintGraph& g) {
  std::vector<std::uint64_t> m(static_cast<std::size_t>(g.colours()));
  for (Colour c = 0; c < g.colours(); ++c) m[static_cast<std::size_t>(c)] = g.out_mask(c);
  return m;
}

std::string hex(std::uint64_t v) {
  std::ostringstream os;
  os << std::hex << v;
  return os.str();
}

}  // namespace

OneVertexOperator::OneVertexOperator(std::shared_ptr<const StateSpace> states, AppendRule rule, std::string descriptor,
                                     const OneVertexOptions& options)
    : states_(std::move(states)), rule_(std::move(rule)), descriptor_(std::move(descriptor)) {
  const std::size_t m = states_->size();
  const double bound = static_cast<double>(m) * states_->colours();
  if (bound > options.max_table_entries) return;

  // Count, then fill; both passes are split across workers by row ranges.
  std::vector<std::uint32_t> degree(m);
  parallel_for(m, options.workers, [&](std::size_t b, std::size_t e) {
    for (std::size_t i = b; i < e; ++i) for_each_successor(i, [&](std::uint32_t) { ++degree[i]; });
  });
  offsets_.resize(m + 1);
  offsets_[0] = 0;
  for (std::size_t i = 0; i < m; ++i) offsets_[i + 1] = offsets_[i] + degree[i];
  targets_.resize(offsets_[m]);
  parallel_for(m, options.workers, [&](std::size_t b, std::size_t e) {
    for (std::size_t i = b; i < e; ++i) {
      std::uint64_t o = offsets_[i];
      for_each_successor(i, [&](std::uint32_t j) { targets_[o++] = j; });
    }
  });
}

template <class Fn>
void OneVertexOperator::for_each_successor(std::size_t i, Fn&& fn) const {
  const WordCodec& codec = states_->codec();
  const std::uint64_t code = states_->code(i);
  const int len = codec.length();
  std::uint64_t allowed = rule_.after_last[static_cast<std::size_t>(codec.colour(code, len - 1))] &
                          rule_.after_first[static_cast<std::size_t>(codec.colour(code, 0))];
  if (rule_.skip_pos >= 0) allowed &= rule_.after_skip[static_cast<std::size_t>(codec.colour(code, rule_.skip_pos))];
  if (!allowed) return;

  // Candidates share everything but the last field, so they sit in one
  // contiguous run of the sorted code list.
  const std::uint64_t base = codec.shift_append(code, 0);
  const auto& codes = states_->codes();
  auto it = std::lower_bound(codes.begin(), codes.end(), base);
  for (; it != codes.end() && *it - base <= codec.colour_mask(); ++it) {
    const auto c = static_cast<int>(*it - base);
    if ((allowed >> c) & 1u) fn(static_cast<std::uint32_t>(it - codes.begin()));
  }
}

std::vector<std::uint32_t> OneVertexOperator::successors(std::size_t i) const {
  if (i >= dimension()) throw std::out_of_range("state index out of range");
  if (tabulated()) {
    return {targets_.begin() + static_cast<std::ptrdiff_t>(offsets_[i]),
            targets_.begin() + static_cast<std::ptrdiff_t>(offsets_[i + 1])};
  }
  std::vector<std::uint32_t> out;
  for_each_successor(i, [&](std::uint32_t j) { out.push_back(j); });
  return out;
}

bool OneVertexOperator::entry(std::size_t i, std::size_t j) const {
  if (j >= dimension()) throw std::out_of_range("state index out of range");
  const auto s = successors(i);
  return std::binary_search(s.begin(), s.end(), static_cast<std::uint32_t>(j));
}

std::uint64_t OneVertexOperator::nonzeros() const {
  if (tabulated()) return targets_.size();
  std::uint64_t n = 0;
  for (std::size_t i = 0; i < dimension(); ++i) for_each_successor(i, [&](std::uint32_t) { ++n; });
  return n;
}

template <class Scalar>
void OneVertexOperator::apply(const Vector<Scalar>& in, Vector<Scalar>& out, int workers) const {
  if (static_cast<std::size_t>(in.size()) != dimension()) {
    throw std::invalid_argument("dimension mismatch: operator has " + std::to_string(dimension()) +
                                " states, vector has " + std::to_string(in.size()));
  }
  if (&in == &out) throw std::invalid_argument("apply cannot run in place");
  out.resize(in.size());
  parallel_for(dimension(), workers, [&](std::size_t b, std::size_t e) {
    for (std::size_t i = b; i < e; ++i) {
      Scalar& dst = out[static_cast<Eigen::Index>(i)];
      dst = 0;
      if (tabulated()) {
        for (auto o = offsets_[i]; o < offsets_[i + 1]; ++o) dst += in[static_cast<Eigen::Index>(targets_[o])];
      } else {
        for_each_successor(i, [&](std::uint32_t j) { dst += in[static_cast<Eigen::Index>(j)]; });
      }
    }
  });
}

template void OneVertexOperator::apply<double>(const Vector<double>&, Vector<double>&, int) const;
template void OneVertexOperator::apply<Real>(const Vector<Real>&, Vector<Real>&, int) const;
template void OneVertexOperator::apply<BigInt>(const Vector<BigInt>&, Vector<BigInt>&, int) const;

OneVertexOperator OneVertexOperator::without_transition(std::size_t i, std::size_t j) const {
  if (i >= dimension() || j >= dimension()) throw std::out_of_range("state index out of range");
  OneVertexOperator copy = *this;
  if (!copy.tabulated()) {
    copy.offsets_.push_back(0);
    for (std::size_t r = 0; r < dimension(); ++r) {
      for_each_successor(r, [&](std::uint32_t t) { copy.targets_.push_back(t); });
      copy.offsets_.push_back(copy.targets_.size());
    }
  }
  const auto first = copy.targets_.begin() + static_cast<std::ptrdiff_t>(copy.offsets_[i]);
  const auto last = copy.targets_.begin() + static_cast<std::ptrdiff_t>(copy.offsets_[i + 1]);
  const auto hit = std::find(first, last, static_cast<std::uint32_t>(j));
  if (hit == last) throw std::invalid_argument("no such transition");
  copy.targets_.erase(hit);
  for (std::size_t r = i + 1; r < copy.offsets_.size(); ++r) --copy.offsets_[r];
  copy.descriptor_ += ";minus=" + std::to_string(i) + "-" + std::to_string(j);
  return copy;
}

OneVertexOperator build_one_vertex_2d(const ConstraintSystem& sys, int n, const OneVertexOptions& options) {
  if (sys.dimension() < 2) throw std::invalid_argument("1-vertex operators need at least 2 axes");
  if (n < 2) throw std::invalid_argument("1-vertex operator needs n >= 2");
  auto states = std::make_shared<const StateSpace>(enumerate_words(sys.axis(0), n, Boundary::open, options.guards));
  OneVertexOperator::AppendRule rule;
  rule.after_last = masks_of(sys.axis(0));
  rule.after_first = masks_of(sys.axis(1));
  const std::string d = "onevertex2d;sys=" + hex(system_fingerprint(sys)) + ";n=" + std::to_string(n);
  return OneVertexOperator(std::move(states), std::move(rule), d, options);
}

OneVertexOperator build_one_vertex_3d(const ConstraintSystem& sys, int n1, int n2, const OneVertexOptions& options) {
  if (sys.dimension() != 3) throw std::invalid_argument("3D 1-vertex operators need a 3-axis system");
  if (n1 < 1 || n2 < 1 || n1 * n2 < 2) throw std::invalid_argument("3D 1-vertex operator needs n1, n2 >= 1 and n1 n2 >= 2");
  auto states = std::make_shared<const StateSpace>(enumerate_helical_slab_words(sys, n1, n2, options.guards));
  OneVertexOperator::AppendRule rule;
  rule.after_last = masks_of(sys.axis(0));
  rule.after_skip = masks_of(sys.axis(1));
  rule.skip_pos = n1 * n2 - n1;
  rule.after_first = masks_of(sys.axis(2));
  const std::string d =
      "onevertex3d;sys=" + hex(system_fingerprint(sys)) + ";n1=" + std::to_string(n1) + ";n2=" + std::to_string(n2);
  return OneVertexOperator(std::move(states), std::move(rule), d, options);
}

}  // namespace caplab
