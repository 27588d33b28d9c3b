#include "caplab/words.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdlib>
#include <sstream>
#include <stdexcept>

#include "caplab/errors.hpp"

namespace caplab {

const char* to_string(Boundary b) { return b == Boundary::open ? "open" : "periodic"; }

Boundary parse_boundary(const std::string& text) {
  if (text == "open" || text == "aperiodic") return Boundary::open;
  if (text == "periodic" || text == "per") return Boundary::periodic;
  throw std::invalid_argument("unknown boundary '" + text + "' (expected open|periodic)");
}

GuardLimits GuardLimits::from_environment() {
  GuardLimits g;
  if (const char* env = std::getenv("CAPACITY_LAB_WORK_LIMIT"); env && *env) {
    char* end = nullptr;
    const double v = std::strtod(env, &end);
    if (end != env && v > 0) {
      g.max_states = v;
      g.oracle_work = v;
    }
  }
  return g;
}

std::string WordShape::describe() const {
  std::ostringstream os;
  switch (kind) {
    case WordKind::chain: os << "chain n=" << n1 << ' ' << to_string(b1); break;
    case WordKind::slab:
      os << "slab " << n1 << 'x' << n2 << ' ' << to_string(b1) << '/' << to_string(b2);
      break;
    case WordKind::helical: os << "helical " << n1 << 'x' << n2; break;
  }
  return os.str();
}

// ---------------------------------------------------------------------------

WordCodec::WordCodec(int colours, int length)
    : length_(length), bits_(std::max(1, static_cast<int>(std::bit_width(static_cast<unsigned>(colours - 1))))) {
  if (length < 1) throw std::invalid_argument("word length must be >= 1");
  if (length * bits_ > 64) {
    throw std::invalid_argument("word of length " + std::to_string(length) + " over " + std::to_string(colours) +
                                " colours does not fit the 64-bit packed representation");
  }
}

std::uint64_t WordCodec::encode(std::span<const Colour> word) const {
  if (static_cast<int>(word.size()) != length_) throw std::invalid_argument("word length mismatch");
  std::uint64_t code = 0;
  for (Colour c : word) code = (code << bits_) | static_cast<std::uint64_t>(c);
  return code;
}

std::vector<Colour> WordCodec::decode(std::uint64_t code) const {
  std::vector<Colour> w(static_cast<std::size_t>(length_));
  for (int p = 0; p < length_; ++p) w[static_cast<std::size_t>(p)] = colour(code, p);
  return w;
}

// ---------------------------------------------------------------------------

StateSpace::StateSpace(int colours, WordShape shape, std::vector<std::uint64_t> sorted_codes)
    : colours_(colours), shape_(shape), codec_(colours, shape.cells()), codes_(std::move(sorted_codes)) {
  for (std::size_t i = 1; i < codes_.size(); ++i) {
    if (codes_[i - 1] >= codes_[i]) throw std::invalid_argument("state codes must be strictly increasing");
  }
}

std::optional<std::size_t> StateSpace::index_of(std::uint64_t code) const {
  auto it = std::lower_bound(codes_.begin(), codes_.end(), code);
  if (it == codes_.end() || *it != code) return std::nullopt;
  return static_cast<std::size_t>(it - codes_.begin());
}

std::optional<std::size_t> StateSpace::index_of(const std::string& word) const {
  auto w = parse_word(word, colours_);
  if (static_cast<int>(w.size()) != length()) return std::nullopt;
  return index_of(codec_.encode(w));
}

std::string StateSpace::format(std::size_t i) const { return format_word(word(i), colours_); }

std::string format_word(std::span<const Colour> word, int colours) {
  std::string s;
  for (std::size_t i = 0; i < word.size(); ++i) {
    if (colours > 9 && i > 0) s += '.';
    s += std::to_string(word[i] + 1);
  }
  return s;
}

std::vector<Colour> parse_word(const std::string& text, int colours) {
  std::vector<Colour> w;
  auto push = [&](int one_based) {
    if (one_based < 1 || one_based > colours) throw std::invalid_argument("colour index out of range in word '" + text + "'");
    w.push_back(one_based - 1);
  };
  if (colours > 9) {
    std::istringstream in(text);
    for (std::string tok; std::getline(in, tok, '.');) push(std::stoi(tok));
  } else {
    for (char ch : text) {
      if (ch < '0' || ch > '9') throw std::invalid_argument("bad word '" + text + "'");
      push(ch - '0');
    }
  }
  return w;
}

// ---------------------------------------------------------------------------

namespace {

/// (w[from], w[to]) must be an edge of *graph.
struct PairCheck {
  int from;
  int to;
  const ConstraintGraph* graph;
};

/// Lexicographic depth-first enumeration of all words of length L whose
/// pair checks hold. checks_at[p] lists the checks completed at position p.
std::vector<std::uint64_t> enumerate_checked(int k, int length, const std::vector<std::vector<PairCheck>>& checks_at,
                                             double limit, const std::string& guard) {
  const WordCodec codec(k, length);
  const std::uint64_t all = k == 64 ? ~std::uint64_t{0} : (std::uint64_t{1} << k) - 1;

  // in_masks[graph][c]: colours a with (a, c) an edge.
  auto in_mask = [&](const ConstraintGraph& g, Colour c) {
    std::uint64_t m = 0;
    for (Colour a = 0; a < k; ++a)
      if (g.has_edge(a, c)) m |= std::uint64_t{1} << a;
    return m;
  };
  auto loop_mask = [&](const ConstraintGraph& g) {
    std::uint64_t m = 0;
    for (Colour a = 0; a < k; ++a)
      if (g.has_edge(a, a)) m |= std::uint64_t{1} << a;
    return m;
  };

  std::vector<Colour> w(static_cast<std::size_t>(length), 0);
  std::vector<std::uint64_t> remaining(static_cast<std::size_t>(length), 0);
  std::vector<std::uint64_t> prefix(static_cast<std::size_t>(length) + 1, 0);
  std::vector<std::uint64_t> out;

  auto allowed = [&](int p) {
    std::uint64_t m = all;
    for (const auto& c : checks_at[static_cast<std::size_t>(p)]) {
      if (c.from == p && c.to == p) {
        m &= loop_mask(*c.graph);
      } else if (c.to == p) {
        m &= c.graph->out_mask(w[static_cast<std::size_t>(c.from)]);
      } else {
        m &= in_mask(*c.graph, w[static_cast<std::size_t>(c.to)]);
      }
    }
    return m;
  };

  int p = 0;
  remaining[0] = allowed(0);
  while (p >= 0) {
    auto& rem = remaining[static_cast<std::size_t>(p)];
    if (rem == 0) {
      --p;
      continue;
    }
    const Colour c = std::countr_zero(rem);
    rem &= rem - 1;
    w[static_cast<std::size_t>(p)] = c;
    prefix[static_cast<std::size_t>(p) + 1] = (prefix[static_cast<std::size_t>(p)] << codec.bits()) | static_cast<std::uint64_t>(c);
    if (p + 1 == length) {
      out.push_back(prefix[static_cast<std::size_t>(length)]);
      if (static_cast<double>(out.size()) > limit) throw CapacityError(guard, static_cast<double>(out.size()), limit);
    } else {
      ++p;
      remaining[static_cast<std::size_t>(p)] = allowed(p);
    }
  }
  return out;
}

void add_check(std::vector<std::vector<PairCheck>>& at, int from, int to, const ConstraintGraph& g) {
  at[static_cast<std::size_t>(std::max(from, to))].push_back({from, to, &g});
}

void check_guard(const std::string& guard, double estimate, const GuardLimits& guards) {
  if (estimate > guards.max_states) throw CapacityError(guard, estimate, guards.max_states);
}

}  // namespace

double projected_chain_count(const ConstraintGraph& g, int n) {
  const int k = g.colours();
  std::vector<long double> cnt(static_cast<std::size_t>(k), 1.0L), next(static_cast<std::size_t>(k));
  for (int step = 1; step < n; ++step) {
    std::fill(next.begin(), next.end(), 0.0L);
    for (Colour a = 0; a < k; ++a)
      for (Colour b = 0; b < k; ++b)
        if (g.has_edge(a, b)) next[static_cast<std::size_t>(b)] += cnt[static_cast<std::size_t>(a)];
    cnt.swap(next);
  }
  long double total = 0;
  for (auto c : cnt) total += c;
  return static_cast<double>(total);
}

StateSpace enumerate_words(const ConstraintGraph& g, int n, Boundary boundary, const GuardLimits& guards) {
  if (n < 1) throw std::invalid_argument("word length must be >= 1");
  check_guard("states", projected_chain_count(g, n), guards);
  std::vector<std::vector<PairCheck>> at(static_cast<std::size_t>(n));
  for (int i = 0; i + 1 < n; ++i) add_check(at, i, i + 1, g);
  if (boundary == Boundary::periodic) add_check(at, n - 1, 0, g);
  auto codes = enumerate_checked(g.colours(), n, at, guards.max_states, "states");
  return StateSpace(g.colours(), WordShape{WordKind::chain, n, 1, boundary, Boundary::open}, std::move(codes));
}

StateSpace enumerate_slab_words(const ConstraintSystem& sys, int n1, int n2, Boundary b1, Boundary b2,
                                const GuardLimits& guards) {
  if (n1 < 1 || n2 < 1) throw std::invalid_argument("slab sides must be >= 1");
  if (sys.dimension() < 2) throw std::invalid_argument("slab words need a system with at least 2 axes");
  const auto& g1 = sys.axis(0);
  const auto& g2 = sys.axis(1);

  // Projected size: rows, then a row-to-row count along axis 2.
  const StateSpace rows = enumerate_words(g1, n1, b1, guards);
  {
    const std::size_t r = rows.size();
    std::vector<long double> cnt(r, 1.0L), next(r);
    for (int step = 1; step < n2; ++step) {
      std::fill(next.begin(), next.end(), 0.0L);
      for (std::size_t a = 0; a < r; ++a)
        for (std::size_t b = 0; b < r; ++b) {
          bool ok = true;
          for (int c = 0; c < n1 && ok; ++c) ok = g2.has_edge(rows.colour(a, c), rows.colour(b, c));
          if (ok) next[b] += cnt[a];
        }
      cnt.swap(next);
    }
    long double total = 0;
    for (auto c : cnt) total += c;
    check_guard("states", static_cast<double>(total), guards);
  }

  const int len = n1 * n2;
  std::vector<std::vector<PairCheck>> at(static_cast<std::size_t>(len));
  for (int r = 0; r < n2; ++r) {
    for (int c = 0; c + 1 < n1; ++c) add_check(at, r * n1 + c, r * n1 + c + 1, g1);
    if (b1 == Boundary::periodic) add_check(at, r * n1 + n1 - 1, r * n1, g1);
  }
  for (int c = 0; c < n1; ++c) {
    for (int r = 0; r + 1 < n2; ++r) add_check(at, r * n1 + c, (r + 1) * n1 + c, g2);
    if (b2 == Boundary::periodic) add_check(at, (n2 - 1) * n1 + c, c, g2);
  }
  auto codes = enumerate_checked(sys.colours(), len, at, guards.max_states, "states");
  return StateSpace(sys.colours(), WordShape{WordKind::slab, n1, n2, b1, b2}, std::move(codes));
}

StateSpace enumerate_helical_slab_words(const ConstraintSystem& sys, int n1, int n2, const GuardLimits& guards) {
  if (n1 < 1 || n2 < 1) throw std::invalid_argument("slab sides must be >= 1");
  if (sys.dimension() < 2) throw std::invalid_argument("helical words need a system with at least 2 axes");
  const auto& g1 = sys.axis(0);
  const auto& g2 = sys.axis(1);
  const int len = n1 * n2;
  // The plain chain count bounds the helical count from above.
  check_guard("states", projected_chain_count(g1, len), guards);
  std::vector<std::vector<PairCheck>> at(static_cast<std::size_t>(len));
  for (int i = 0; i + 1 < len; ++i) add_check(at, i, i + 1, g1);
  for (int i = 0; i + n1 < len; ++i) add_check(at, i, i + n1, g2);
  auto codes = enumerate_checked(sys.colours(), len, at, guards.max_states, "states");
  return StateSpace(sys.colours(), WordShape{WordKind::helical, n1, n2, Boundary::open, Boundary::open},
                    std::move(codes));
}

}  // namespace caplab
