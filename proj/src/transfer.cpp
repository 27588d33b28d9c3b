#include "caplab/transfer.hpp"

#include <algorithm>
#include <bit>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "caplab/errors.hpp"
#include "caplab/util.hpp"

namespace caplab {

const char* to_string(Representation r) {
  switch (r) {
    case Representation::automatic: return "automatic";
    case Representation::successor_lists: return "successor-lists";
    case Representation::bitset_rows: return "bitset-rows";
    case Representation::matrix_free: return "matrix-free";
  }
  return "?";
}

namespace {

constexpr std::size_t max_bitset_dimension = 300000;

/// Prefix trie of a state list: level t holds the distinct length-t prefixes
/// in sorted order; level cells() coincides with the state list.
struct PrefixTrie {
  std::vector<std::size_t> count;
  std::vector<std::vector<std::uint32_t>> parent;  // [t][p], t >= 1
  std::vector<std::vector<std::uint8_t>> colour;   // [t][p], t >= 1
};

PrefixTrie build_prefix_trie(const StateSpace& states) {
  const int n = states.length();
  const int bits = states.codec().bits();
  const auto& codes = states.codes();
  PrefixTrie trie;
  trie.count.assign(static_cast<std::size_t>(n) + 1, 0);
  trie.parent.resize(static_cast<std::size_t>(n) + 1);
  trie.colour.resize(static_cast<std::size_t>(n) + 1);
  trie.count[0] = 1;

  std::vector<std::uint64_t> prev{0}, cur;
  for (int t = 1; t <= n; ++t) {
    const int shift = bits * (n - t);
    cur.clear();
    for (std::uint64_t c : codes) {
      const std::uint64_t p = shift >= 64 ? 0 : c >> shift;
      if (cur.empty() || cur.back() != p) cur.push_back(p);
    }
    auto& par = trie.parent[static_cast<std::size_t>(t)];
    auto& col = trie.colour[static_cast<std::size_t>(t)];
    par.resize(cur.size());
    col.resize(cur.size());
    std::size_t q = 0;
    for (std::size_t i = 0; i < cur.size(); ++i) {
      const std::uint64_t up = t == 1 ? 0 : cur[i] >> bits;
      while (prev[q] != up) ++q;
      par[i] = static_cast<std::uint32_t>(q);
      col[i] = static_cast<std::uint8_t>(cur[i] & states.codec().colour_mask());
    }
    trie.count[static_cast<std::size_t>(t)] = cur.size();
    prev.swap(cur);
  }
  return trie;
}

/// children[t][p * k + a]: node at level t + 1, or -1.
std::vector<std::vector<std::int32_t>> prefix_children(const PrefixTrie& trie, int k) {
  const std::size_t n = trie.count.size() - 1;
  std::vector<std::vector<std::int32_t>> ch(n);
  for (std::size_t t = 0; t < n; ++t) {
    ch[t].assign(trie.count[t] * static_cast<std::size_t>(k), -1);
    const auto& par = trie.parent[t + 1];
    const auto& col = trie.colour[t + 1];
    for (std::size_t i = 0; i < par.size(); ++i) ch[t][par[i] * static_cast<std::size_t>(k) + col[i]] = static_cast<std::int32_t>(i);
  }
  return ch;
}

LayerDp build_layer_dp(const StateSpace& states, const ConstraintGraph& vertical, const GuardLimits& guards) {
  const int n = states.length();
  const int k = states.colours();
  const int bits = states.codec().bits();
  const WordCodec& codec = states.codec();
  LayerDp dp;
  dp.cells = n;
  dp.colours = k;

  PrefixTrie trie = build_prefix_trie(states);
  dp.prefix_count = trie.count;
  dp.prefix_parent = std::move(trie.parent);
  dp.prefix_colour = std::move(trie.colour);

  // Suffix levels: level t holds the distinct suffixes (cells t..n-1).
  dp.suffix_count.assign(static_cast<std::size_t>(n) + 1, 0);
  dp.suffix_child.resize(static_cast<std::size_t>(n) + 1);
  std::vector<std::uint64_t> below{0};  // level n: the empty suffix
  dp.suffix_count[static_cast<std::size_t>(n)] = 1;
  for (int t = n - 1; t >= 0; --t) {
    std::vector<std::uint64_t> level;
    if (t == 0) {
      level = states.codes();
    } else {
      const std::uint64_t mask = codec.tail_mask(n - t);
      level.reserve(states.size());
      for (std::uint64_t c : states.codes()) level.push_back(c & mask);
      std::sort(level.begin(), level.end());
      level.erase(std::unique(level.begin(), level.end()), level.end());
    }
    auto& child = dp.suffix_child[static_cast<std::size_t>(t) + 1];
    child.assign(below.size() * static_cast<std::size_t>(k), -1);
    const std::uint64_t rest = codec.tail_mask(n - t - 1);
    const int top_shift = bits * (n - t - 1);
    for (std::size_t x = 0; x < level.size(); ++x) {
      const std::uint64_t s = level[x] & rest;
      const auto a = static_cast<std::size_t>(top_shift >= 64 ? 0 : level[x] >> top_shift);
      const auto it = std::lower_bound(below.begin(), below.end(), s);
      child[static_cast<std::size_t>(it - below.begin()) * static_cast<std::size_t>(k) + a] = static_cast<std::int32_t>(x);
    }
    dp.suffix_count[static_cast<std::size_t>(t)] = level.size();
    below.swap(level);
  }

  for (int t = 0; t <= n; ++t) {
    dp.peak_entries = std::max(dp.peak_entries, dp.prefix_count[static_cast<std::size_t>(t)] * dp.suffix_count[static_cast<std::size_t>(t)]);
  }
  if (static_cast<double>(dp.peak_entries) > guards.max_states) {
    throw CapacityError("matrix-free intermediate", static_cast<double>(dp.peak_entries), guards.max_states);
  }
  dp.vertical_masks.resize(static_cast<std::size_t>(k));
  for (Colour c = 0; c < k; ++c) dp.vertical_masks[static_cast<std::size_t>(c)] = vertical.out_mask(c);
  return dp;
}

/// Explicit successor lists by walking the prefix trie once per row. Returns
/// nullopt when the number of entries passes `abort_above`.
std::optional<SuccessorLists> build_successor_lists(const StateSpace& states, const ConstraintGraph& vertical,
                                                    double abort_above) {
  const int n = states.length();
  const int k = states.colours();
  const PrefixTrie trie = build_prefix_trie(states);
  const auto children = prefix_children(trie, k);

  SuccessorLists lists;
  lists.offsets.reserve(states.size() + 1);
  lists.offsets.push_back(0);
  std::vector<std::int32_t> node(static_cast<std::size_t>(n) + 1);
  std::vector<std::uint64_t> remaining(static_cast<std::size_t>(n) + 1);
  std::vector<Colour> phi;
  for (std::size_t i = 0; i < states.size(); ++i) {
    phi = states.word(i);
    int t = 0;
    node[0] = 0;
    remaining[0] = vertical.out_mask(phi[0]);
    while (t >= 0) {
      auto& rem = remaining[static_cast<std::size_t>(t)];
      if (rem == 0) {
        --t;
        continue;
      }
      const int a = std::countr_zero(rem);
      rem &= rem - 1;
      const std::int32_t next =
          children[static_cast<std::size_t>(t)][static_cast<std::size_t>(node[static_cast<std::size_t>(t)]) * static_cast<std::size_t>(k) + static_cast<std::size_t>(a)];
      if (next < 0) continue;
      if (t + 1 == n) {
        lists.targets.push_back(static_cast<std::uint32_t>(next));
      } else {
        ++t;
        node[static_cast<std::size_t>(t)] = next;
        remaining[static_cast<std::size_t>(t)] = vertical.out_mask(phi[static_cast<std::size_t>(t)]);
      }
    }
    if (static_cast<double>(lists.targets.size()) > abort_above) return std::nullopt;
    lists.offsets.push_back(lists.targets.size());
  }
  return lists;
}

BitsetRows bitset_from_lists(std::size_t dim, const SuccessorLists& lists) {
  if (dim > max_bitset_dimension) {
    throw CapacityError("bitset-rows dimension", static_cast<double>(dim), static_cast<double>(max_bitset_dimension));
  }
  BitsetRows b;
  b.words_per_row = (dim + 63) / 64;
  b.bits.assign(dim * b.words_per_row, 0);
  for (std::size_t i = 0; i < dim; ++i)
    for (auto o = lists.offsets[i]; o < lists.offsets[i + 1]; ++o) {
      const std::uint32_t j = lists.targets[o];
      b.bits[i * b.words_per_row + j / 64] |= std::uint64_t{1} << (j % 64);
    }
  return b;
}

std::string with_rep(const std::string& base, Representation r) { return base + ";rep=" + to_string(r); }

std::string base_descriptor(const std::string& d) {
  const auto pos = d.find(";rep=");
  return pos == std::string::npos ? d : d.substr(0, pos);
}

TransferOperator build_layer(std::shared_ptr<const StateSpace> states, const ConstraintGraph& vertical,
                             const BuildOptions& options, const std::string& base) {
  const std::size_t m = states->size();
  switch (options.representation) {
    case Representation::matrix_free: {
      auto dp = build_layer_dp(*states, vertical, options.guards);
      return TransferOperator(std::move(states), vertical, std::move(dp), with_rep(base, Representation::matrix_free));
    }
    case Representation::successor_lists: {
      auto lists = build_successor_lists(*states, vertical, options.guards.max_states);
      if (!lists) throw CapacityError("successor-lists entries", options.guards.max_states + 1, options.guards.max_states);
      return TransferOperator(std::move(states), vertical, std::move(*lists), with_rep(base, Representation::successor_lists));
    }
    case Representation::bitset_rows: {
      if (m > max_bitset_dimension) {
        throw CapacityError("bitset-rows dimension", static_cast<double>(m), static_cast<double>(max_bitset_dimension));
      }
      auto lists = build_successor_lists(*states, vertical, options.guards.max_states);
      if (!lists) throw CapacityError("successor-lists entries", options.guards.max_states + 1, options.guards.max_states);
      auto bits = bitset_from_lists(m, *lists);
      return TransferOperator(std::move(states), vertical, std::move(bits), with_rep(base, Representation::bitset_rows));
    }
    case Representation::automatic: {
      const double cap = std::min(options.max_mean_degree * static_cast<double>(m), options.guards.max_states);
      if (auto lists = build_successor_lists(*states, vertical, cap)) {
        return TransferOperator(std::move(states), vertical, std::move(*lists), with_rep(base, Representation::successor_lists));
      }
      auto dp = build_layer_dp(*states, vertical, options.guards);
      return TransferOperator(std::move(states), vertical, std::move(dp), with_rep(base, Representation::matrix_free));
    }
  }
  throw std::logic_error("unreachable");
}

std::string hex(std::uint64_t v) {
  std::ostringstream os;
  os << std::hex << v;
  return os.str();
}

// ---------------------------------------------------------------------------
// Kernels

template <class Scalar>
void apply_lists(const SuccessorLists& l, const Vector<Scalar>& in, Vector<Scalar>& out, int workers) {
  parallel_for(static_cast<std::size_t>(out.size()), workers, [&](std::size_t b, std::size_t e) {
    for (std::size_t i = b; i < e; ++i) {
      Scalar& dst = out[static_cast<Eigen::Index>(i)];
      dst = 0;
      for (auto o = l.offsets[i]; o < l.offsets[i + 1]; ++o) dst += in[static_cast<Eigen::Index>(l.targets[o])];
    }
  });
}

template <class Scalar>
void apply_bits(const BitsetRows& r, const Vector<Scalar>& in, Vector<Scalar>& out, int workers) {
  parallel_for(static_cast<std::size_t>(out.size()), workers, [&](std::size_t b, std::size_t e) {
    for (std::size_t i = b; i < e; ++i) {
      Scalar& dst = out[static_cast<Eigen::Index>(i)];
      dst = 0;
      const std::uint64_t* row = r.bits.data() + i * r.words_per_row;
      for (std::size_t w = 0; w < r.words_per_row; ++w)
        for (std::uint64_t m = row[w]; m; m &= m - 1)
          dst += in[static_cast<Eigen::Index>(w * 64 + static_cast<std::size_t>(std::countr_zero(m)))];
    }
  });
}

template <class Scalar>
void apply_dp(const LayerDp& dp, const Vector<Scalar>& in, Vector<Scalar>& out, int workers) {
  const int n = dp.cells;
  const auto k = static_cast<std::size_t>(dp.colours);
  Vector<Scalar> buf[2];
  if (n > 1) {
    buf[0].resize(static_cast<Eigen::Index>(dp.peak_entries));
    buf[1].resize(static_cast<Eigen::Index>(dp.peak_entries));
  }
  const Scalar* prev = in.data();
  for (int t = 1; t <= n; ++t) {
    const auto tt = static_cast<std::size_t>(t);
    const std::size_t np = dp.prefix_count[tt];
    const std::size_t ns = dp.suffix_count[tt];
    const std::size_t ns_prev = dp.suffix_count[tt - 1];
    Scalar* cur = t == n ? out.data() : buf[t % 2].data();
    const auto& parent = dp.prefix_parent[tt];
    const auto& colour = dp.prefix_colour[tt];
    const std::int32_t* child = dp.suffix_child[tt].data();
    parallel_for(np, workers, [&](std::size_t b, std::size_t e) {
      for (std::size_t p = b; p < e; ++p) {
        const Scalar* src = prev + static_cast<std::size_t>(parent[p]) * ns_prev;
        Scalar* dst = cur + p * ns;
        const std::uint64_t mask = dp.vertical_masks[colour[p]];
        for (std::size_t s = 0; s < ns; ++s) {
          Scalar& d = dst[s];
          d = 0;
          const std::int32_t* ch = child + s * k;
          for (std::uint64_t m = mask; m; m &= m - 1) {
            const std::int32_t x = ch[std::countr_zero(m)];
            if (x >= 0) d += src[x];
          }
        }
      }
    });
    prev = cur;
  }
}

}  // namespace

// ---------------------------------------------------------------------------

TransferOperator::TransferOperator(std::shared_ptr<const StateSpace> states, ConstraintGraph vertical, Storage storage,
                                   std::string descriptor)
    : dimension_(states->size()),
      states_(std::move(states)),
      vertical_(std::move(vertical)),
      storage_(std::move(storage)),
      descriptor_(std::move(descriptor)) {}

TransferOperator::TransferOperator(std::size_t dimension, SuccessorLists lists, std::string descriptor)
    : dimension_(dimension), storage_(std::move(lists)), descriptor_(std::move(descriptor)) {
  const auto& l = std::get<SuccessorLists>(storage_);
  if (l.offsets.size() != dimension + 1) throw std::invalid_argument("successor list offsets do not match dimension");
  for (std::size_t i = 0; i < dimension; ++i) {
    for (auto o = l.offsets[i]; o < l.offsets[i + 1]; ++o) {
      if (l.targets[o] >= dimension) throw std::invalid_argument("successor index out of range");
      if (o > l.offsets[i] && l.targets[o - 1] >= l.targets[o]) throw std::invalid_argument("successors must be sorted and unique");
    }
  }
}

Representation TransferOperator::representation() const noexcept {
  switch (storage_.index()) {
    case 0: return Representation::successor_lists;
    case 1: return Representation::bitset_rows;
    default: return Representation::matrix_free;
  }
}

bool TransferOperator::entry(std::size_t i, std::size_t j) const {
  if (i >= dimension_ || j >= dimension_) throw std::out_of_range("operator index out of range");
  if (const auto* l = std::get_if<SuccessorLists>(&storage_)) {
    return std::binary_search(l->targets.begin() + static_cast<std::ptrdiff_t>(l->offsets[i]),
                              l->targets.begin() + static_cast<std::ptrdiff_t>(l->offsets[i + 1]), static_cast<std::uint32_t>(j));
  }
  if (const auto* b = std::get_if<BitsetRows>(&storage_)) {
    return (b->bits[i * b->words_per_row + j / 64] >> (j % 64)) & 1u;
  }
  for (int p = 0; p < states_->length(); ++p)
    if (!vertical_->has_edge(states_->colour(i, p), states_->colour(j, p))) return false;
  return true;
}

std::vector<std::uint32_t> TransferOperator::successors(std::size_t i) const {
  if (i >= dimension_) throw std::out_of_range("operator index out of range");
  if (const auto* l = std::get_if<SuccessorLists>(&storage_)) {
    return {l->targets.begin() + static_cast<std::ptrdiff_t>(l->offsets[i]),
            l->targets.begin() + static_cast<std::ptrdiff_t>(l->offsets[i + 1])};
  }
  std::vector<std::uint32_t> out;
  for (std::size_t j = 0; j < dimension_; ++j)
    if (entry(i, j)) out.push_back(static_cast<std::uint32_t>(j));
  return out;
}

std::uint64_t TransferOperator::nonzeros() const {
  if (const auto* l = std::get_if<SuccessorLists>(&storage_)) return l->targets.size();
  if (const auto* b = std::get_if<BitsetRows>(&storage_)) {
    std::uint64_t n = 0;
    for (auto w : b->bits) n += static_cast<std::uint64_t>(std::popcount(w));
    return n;
  }
  return quadratic_form_count(*this, 1).convert_to<std::uint64_t>();
}

template <class Scalar>
void TransferOperator::apply(const Vector<Scalar>& in, Vector<Scalar>& out, int workers) const {
  if (static_cast<std::size_t>(in.size()) != dimension_) {
    throw std::invalid_argument("dimension mismatch: operator has " + std::to_string(dimension_) + " states, vector has " +
                                std::to_string(in.size()));
  }
  if (&in == &out) throw std::invalid_argument("apply cannot run in place");
  out.resize(in.size());
  std::visit(
      [&](const auto& rep) {
        using R = std::decay_t<decltype(rep)>;
        if constexpr (std::is_same_v<R, SuccessorLists>) apply_lists(rep, in, out, workers);
        else if constexpr (std::is_same_v<R, BitsetRows>) apply_bits(rep, in, out, workers);
        else apply_dp(rep, in, out, workers);
      },
      storage_);
}

template void TransferOperator::apply<double>(const Vector<double>&, Vector<double>&, int) const;
template void TransferOperator::apply<Real>(const Vector<Real>&, Vector<Real>&, int) const;
template void TransferOperator::apply<BigInt>(const Vector<BigInt>&, Vector<BigInt>&, int) const;

TransferOperator TransferOperator::with_representation(Representation r, const GuardLimits& guards) const {
  const std::string base = base_descriptor(descriptor_);
  if (states_ && vertical_) {
    BuildOptions opt;
    opt.representation = r;
    opt.guards = guards;
    return build_layer(states_, *vertical_, opt, base);
  }
  const auto& lists = std::get<SuccessorLists>(storage_);
  switch (r) {
    case Representation::automatic:
    case Representation::successor_lists: return TransferOperator(dimension_, lists, descriptor_);
    case Representation::bitset_rows: {
      TransferOperator op(dimension_, lists, with_rep(base, r));
      op.storage_ = bitset_from_lists(dimension_, lists);
      return op;
    }
    case Representation::matrix_free: break;
  }
  throw std::invalid_argument("matrix-free form needs a state space; this operator was given explicitly");
}

// ---------------------------------------------------------------------------

TransferOperator build_row_transfer_2d(const ConstraintSystem& sys, int n, Boundary boundary, const BuildOptions& options) {
  if (sys.dimension() < 2) throw std::invalid_argument("row transfer operators need at least 2 axes");
  auto states = std::make_shared<const StateSpace>(enumerate_words(sys.axis(0), n, boundary, options.guards));
  const std::string base = "row2d;sys=" + hex(system_fingerprint(sys)) + ";n=" + std::to_string(n) + ";b=" + to_string(boundary);
  return build_layer(std::move(states), sys.axis(1), options, base);
}

TransferOperator build_slab_transfer_3d(const ConstraintSystem& sys, int n1, int n2, BoundaryDescriptor bc,
                                        const BuildOptions& options) {
  if (sys.dimension() != 3) throw std::invalid_argument("slab transfer operators need a 3-axis system");
  auto states =
      std::make_shared<const StateSpace>(enumerate_slab_words(sys, n1, n2, bc.axis1, bc.axis2, options.guards));
  const std::string base = "slab3d;sys=" + hex(system_fingerprint(sys)) + ";n1=" + std::to_string(n1) +
                           ";n2=" + std::to_string(n2) + ";b=" + to_string(bc.axis1) + "/" + to_string(bc.axis2);
  return build_layer(std::move(states), sys.axis(2), options, base);
}

TransferOperator adjacency_operator(const ConstraintGraph& g) {
  SuccessorLists l;
  l.offsets.push_back(0);
  for (Colour i = 0; i < g.colours(); ++i) {
    for (Colour j = 0; j < g.colours(); ++j)
      if (g.has_edge(i, j)) l.targets.push_back(static_cast<std::uint32_t>(j));
    l.offsets.push_back(l.targets.size());
  }
  std::ostringstream d;
  d << "adjacency;k=" << g.colours() << ";edges=";
  for (auto [a, b] : g.edges()) d << a << '-' << b << ',';
  return TransferOperator(static_cast<std::size_t>(g.colours()), std::move(l), d.str());
}

// ---------------------------------------------------------------------------

std::string format_operator(const TransferOperator& op) {
  std::ostringstream os;
  os << "M " << op.dimension() << '\n';
  for (std::size_t i = 0; i < op.dimension(); ++i) {
    const auto s = op.successors(i);
    for (std::size_t j = 0; j < s.size(); ++j) os << (j ? " " : "") << s[j];
    os << '\n';
  }
  return os.str();
}

TransferOperator parse_operator(const std::string& text, const std::string& source) {
  std::istringstream in(text);
  std::string line;
  int line_no = 1;
  if (!std::getline(in, line)) throw ParseError(source, line_no, "empty operator file");
  std::istringstream head(line);
  std::string tag;
  std::size_t m = 0;
  if (!(head >> tag >> m) || tag != "M") throw ParseError(source, line_no, "expected 'M <dimension>'");
  SuccessorLists l;
  l.offsets.push_back(0);
  for (std::size_t i = 0; i < m; ++i) {
    ++line_no;
    if (!std::getline(in, line)) throw ParseError(source, line_no, "missing row " + std::to_string(i));
    std::istringstream ls(line);
    for (long long j; ls >> j;) {
      if (j < 0 || static_cast<std::size_t>(j) >= m) throw ParseError(source, line_no, "successor index out of range");
      l.targets.push_back(static_cast<std::uint32_t>(j));
    }
    if (!ls.eof()) throw ParseError(source, line_no, "malformed successor list");
    l.offsets.push_back(l.targets.size());
  }
  try {
    return TransferOperator(m, std::move(l), "imported;" + source);
  } catch (const std::exception& e) {
    throw ParseError(source, line_no, e.what());
  }
}

void export_operator(const TransferOperator& op, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << format_operator(op);
}

TransferOperator import_operator(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_operator(ss.str(), path.string());
}

}  // namespace caplab
