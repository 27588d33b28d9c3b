#include "caplab/constraint.hpp"

#include <algorithm>
#include <bit>
#include <fstream>
#include <optional>
#include <sstream>
#include <stdexcept>

#include "caplab/errors.hpp"
#include "caplab/util.hpp"

namespace caplab {

CapacityError::CapacityError(std::string guard, double estimate, double limit)
    : std::runtime_error("capacity guard '" + guard + "' exceeded: projected size " +
                         std::to_string(static_cast<long double>(estimate)) + " > limit " +
                         std::to_string(static_cast<long double>(limit))),
      guard_(std::move(guard)),
      estimate_(estimate),
      limit_(limit) {}

ParseError::ParseError(const std::string& source, int line, const std::string& what)
    : std::runtime_error(source + ":" + std::to_string(line) + ": " + what), line_(line) {}

// ---------------------------------------------------------------------------

ConstraintGraph::ConstraintGraph(int k) : k_(k) {
  if (k < 1 || k > max_colours) {
    throw std::invalid_argument("colour count must be in [1, 64], got " + std::to_string(k));
  }
  out_.assign(static_cast<std::size_t>(k), 0);
}

ConstraintGraph::ConstraintGraph(int k, const std::vector<std::pair<Colour, Colour>>& edges)
    : ConstraintGraph(k) {
  for (auto [a, b] : edges) add_edge(a, b);
}

void ConstraintGraph::add_edge(Colour from, Colour to) {
  if (from < 0 || from >= k_ || to < 0 || to >= k_) {
    throw std::out_of_range("colour index out of range");
  }
  out_[static_cast<std::size_t>(from)] |= std::uint64_t{1} << to;
}

void ConstraintGraph::remove_edge(Colour from, Colour to) {
  if (from < 0 || from >= k_ || to < 0 || to >= k_) {
    throw std::out_of_range("colour index out of range");
  }
  out_[static_cast<std::size_t>(from)] &= ~(std::uint64_t{1} << to);
}

std::vector<std::pair<Colour, Colour>> ConstraintGraph::edges() const {
  std::vector<std::pair<Colour, Colour>> e;
  for (Colour i = 0; i < k_; ++i)
    for (Colour j = 0; j < k_; ++j)
      if (has_edge(i, j)) e.emplace_back(i, j);
  return e;
}

ConstraintGraph ConstraintGraph::transpose() const {
  ConstraintGraph t(k_);
  for (auto [a, b] : edges()) t.add_edge(b, a);
  return t;
}

bool ConstraintGraph::is_symmetric() const { return *this == transpose(); }

Eigen::MatrixXi ConstraintGraph::adjacency() const {
  Eigen::MatrixXi a = Eigen::MatrixXi::Zero(k_, k_);
  for (auto [i, j] : edges()) a(i, j) = 1;
  return a;
}

// ---------------------------------------------------------------------------

ConstraintSystem::ConstraintSystem(std::vector<ConstraintGraph> axes) : axes_(std::move(axes)) {
  if (axes_.empty()) throw std::invalid_argument("a constraint system needs at least one axis");
  const int k = axes_.front().colours();
  for (const auto& g : axes_) {
    if (g.colours() != k) {
      throw std::invalid_argument("inconsistent k across axes: " + std::to_string(k) + " vs " +
                                  std::to_string(g.colours()));
    }
  }
  symmetric_ = std::all_of(axes_.begin(), axes_.end(), [](const auto& g) { return g.is_symmetric(); });
  isotropic_ = std::all_of(axes_.begin(), axes_.end(), [&](const auto& g) { return g == axes_.front(); });
}

namespace {

std::vector<ConstraintGraph> repeated(int dimension, const ConstraintGraph& g) {
  if (dimension < 1) throw std::invalid_argument("dimension must be >= 1");
  return std::vector<ConstraintGraph>(static_cast<std::size_t>(dimension), g);
}

}  // namespace

ConstraintSystem::ConstraintSystem(int dimension, const ConstraintGraph& every_axis)
    : ConstraintSystem(repeated(dimension, every_axis)) {}

// ---------------------------------------------------------------------------

namespace {

AxisDiagnostics diagnose(const ConstraintGraph& g) {
  const int k = g.colours();
  AxisDiagnostics d;
  d.symmetric = g.is_symmetric();

  std::vector<std::uint64_t> in(static_cast<std::size_t>(k), 0);
  for (auto [a, b] : g.edges()) in[static_cast<std::size_t>(b)] |= std::uint64_t{1} << a;
  for (Colour i = 0; i < k; ++i)
    if (g.out_mask(i) == 0 && in[static_cast<std::size_t>(i)] == 0) d.isolated.push_back(i);

  // Transitive closure on bit rows; reach[i] includes i itself.
  std::vector<std::uint64_t> reach(static_cast<std::size_t>(k));
  for (Colour i = 0; i < k; ++i) reach[static_cast<std::size_t>(i)] = g.out_mask(i) | (std::uint64_t{1} << i);
  for (Colour m = 0; m < k; ++m)
    for (Colour i = 0; i < k; ++i)
      if ((reach[static_cast<std::size_t>(i)] >> m) & 1u) reach[static_cast<std::size_t>(i)] |= reach[static_cast<std::size_t>(m)];

  std::vector<int> comp_of(static_cast<std::size_t>(k), -1);
  for (Colour i = 0; i < k; ++i) {
    if (comp_of[static_cast<std::size_t>(i)] >= 0) continue;
    std::vector<Colour> comp;
    for (Colour j = i; j < k; ++j) {
      if (((reach[static_cast<std::size_t>(i)] >> j) & 1u) && ((reach[static_cast<std::size_t>(j)] >> i) & 1u)) {
        comp_of[static_cast<std::size_t>(j)] = static_cast<int>(d.components.size());
        comp.push_back(j);
      }
    }
    d.components.push_back(std::move(comp));
  }

  bool ok = d.isolated.empty();
  for (auto [a, b] : g.edges())
    if (comp_of[static_cast<std::size_t>(a)] != comp_of[static_cast<std::size_t>(b)]) ok = false;
  for (const auto& c : d.components)
    if (c.size() == 1 && !g.has_edge(c[0], c[0])) ok = false;
  d.union_of_strong_components = ok;
  d.strongly_connected = ok && d.components.size() == 1;
  return d;
}

}  // namespace

bool ValidationReport::ok() const {
  return std::all_of(axes.begin(), axes.end(), [](const auto& a) { return a.union_of_strong_components; });
}

std::string ValidationReport::describe() const {
  std::ostringstream os;
  for (std::size_t i = 0; i < axes.size(); ++i) {
    const auto& a = axes[i];
    os << "axis " << i + 1 << ": " << a.components.size() << " strong component(s)";
    if (!a.isolated.empty()) {
      os << ", isolated colours";
      for (Colour c : a.isolated) os << ' ' << c + 1;
    }
    os << (a.union_of_strong_components ? ", union of strong components" : ", NOT a union of strong components")
       << (a.symmetric ? ", symmetric" : ", directed") << '\n';
  }
  return os.str();
}

ValidationReport validate_system(const ConstraintSystem& sys) {
  ValidationReport r;
  for (const auto& g : sys.axes()) r.axes.push_back(diagnose(g));
  return r;
}

std::vector<Colour> find_friendly_colours(const ConstraintSystem& sys) {
  const int k = sys.colours();
  const std::uint64_t all = k == 64 ? ~std::uint64_t{0} : (std::uint64_t{1} << k) - 1;
  std::vector<Colour> out;
  for (Colour j = 0; j < k; ++j) {
    bool friendly = true;
    for (const auto& g : sys.axes()) {
      if (g.out_mask(j) != all) friendly = false;
      for (Colour i = 0; i < k && friendly; ++i)
        if (!g.has_edge(i, j)) friendly = false;
    }
    if (friendly) out.push_back(j);
  }
  return out;
}

ConstraintSystem permute_axes(const ConstraintSystem& sys, const std::vector<int>& order) {
  if (static_cast<int>(order.size()) != sys.dimension()) throw std::invalid_argument("axis permutation has wrong length");
  std::vector<ConstraintGraph> axes;
  std::vector<bool> seen(order.size(), false);
  for (int i : order) {
    if (i < 0 || i >= sys.dimension() || seen[static_cast<std::size_t>(i)]) throw std::invalid_argument("not an axis permutation");
    seen[static_cast<std::size_t>(i)] = true;
    axes.push_back(sys.axis(i));
  }
  return ConstraintSystem(std::move(axes));
}

// ---------------------------------------------------------------------------

ConstraintGraph hard_square_graph() { return ConstraintGraph(2, {{0, 1}, {1, 0}, {1, 1}}); }

ConstraintSystem hard_square_system(int dimension) { return ConstraintSystem(dimension, hard_square_graph()); }

ConstraintGraph complete_graph(int k) {
  ConstraintGraph g(k);
  for (Colour i = 0; i < k; ++i)
    for (Colour j = 0; j < k; ++j) g.add_edge(i, j);
  return g;
}

ConstraintSystem monomer_dimer_system(int d, bool same_axis_chain) {
  if (d < 1) throw std::invalid_argument("monomer-dimer dimension must be >= 1");
  const int k = 2 * d + 1;
  std::vector<ConstraintGraph> axes;
  for (int i = 0; i < d; ++i) {
    const Colour first = 2 * i, second = 2 * i + 1;  // colours 2i-1, 2i in 1-based terms
    ConstraintGraph g(k);
    for (Colour a = 0; a < k; ++a) {
      if (a == first || a == second) continue;
      for (Colour b = 0; b < k; ++b)
        if (b != first && b != second) g.add_edge(a, b);
      g.add_edge(a, first);
      g.add_edge(second, a);
    }
    g.add_edge(first, second);
    if (same_axis_chain) g.add_edge(second, first);
    axes.push_back(std::move(g));
  }
  return ConstraintSystem(std::move(axes));
}

// ---------------------------------------------------------------------------

namespace {

std::optional<long> to_int(const std::string& tok) {
  try {
    std::size_t used = 0;
    long v = std::stol(tok, &used);
    if (used != tok.size()) return std::nullopt;
    return v;
  } catch (const std::exception&) {
    return std::nullopt;
  }
}

}  // namespace

ConstraintSystem parse_system(std::string_view text, const std::string& source) {
  std::istringstream in{std::string(text)};
  std::string raw;
  int line_no = 0;
  std::optional<int> k, d;
  std::vector<std::optional<ConstraintGraph>> axes;
  int current = -1;

  while (std::getline(in, raw)) {
    ++line_no;
    if (auto hash = raw.find('#'); hash != std::string::npos) raw.erase(hash);
    std::istringstream ls(raw);
    std::vector<std::string> tok;
    for (std::string t; ls >> t;) tok.push_back(t);
    if (tok.empty()) continue;
    if (tok.size() != 2) throw ParseError(source, line_no, "expected two fields, got " + std::to_string(tok.size()));

    auto second = to_int(tok[1]);
    if (!second) throw ParseError(source, line_no, "expected an integer, got '" + tok[1] + "'");

    if (tok[0] == "k") {
      if (*second < 1 || *second > ConstraintGraph::max_colours)
        throw ParseError(source, line_no, "k must be in [1, 64]");
      if (k && *k != *second)
        throw ParseError(source, line_no, "inconsistent k across axes: " + std::to_string(*k) + " vs " + tok[1]);
      k = static_cast<int>(*second);
    } else if (tok[0] == "d") {
      if (d) throw ParseError(source, line_no, "duplicate 'd' line");
      if (*second < 1) throw ParseError(source, line_no, "d must be >= 1");
      d = static_cast<int>(*second);
      axes.assign(static_cast<std::size_t>(*d), std::nullopt);
    } else if (tok[0] == "axis") {
      if (!k || !d) throw ParseError(source, line_no, "'k' and 'd' must precede the first axis");
      if (*second < 1 || *second > *d) throw ParseError(source, line_no, "axis index out of range");
      current = static_cast<int>(*second) - 1;
      if (axes[static_cast<std::size_t>(current)]) throw ParseError(source, line_no, "axis declared twice");
      axes[static_cast<std::size_t>(current)].emplace(*k);
    } else {
      auto first = to_int(tok[0]);
      if (!first) throw ParseError(source, line_no, "unknown keyword '" + tok[0] + "'");
      if (current < 0) throw ParseError(source, line_no, "edge before any 'axis' line");
      if (*first < 1 || *first > *k || *second < 1 || *second > *k)
        throw ParseError(source, line_no, "colour index out of range");
      axes[static_cast<std::size_t>(current)]->add_edge(static_cast<Colour>(*first - 1),
                                                        static_cast<Colour>(*second - 1));
    }
  }
  if (!k || !d) throw ParseError(source, line_no, "missing 'k' or 'd'");
  std::vector<ConstraintGraph> graphs;
  for (std::size_t i = 0; i < axes.size(); ++i) {
    if (!axes[i]) throw ParseError(source, line_no, "axis " + std::to_string(i + 1) + " missing");
    graphs.push_back(*axes[i]);
  }
  return ConstraintSystem(std::move(graphs));
}

ConstraintSystem load_system(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open constraint file " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_system(ss.str(), path.string());
}

std::string format_system(const ConstraintSystem& sys) {
  std::ostringstream os;
  os << "k " << sys.colours() << '\n' << "d " << sys.dimension() << '\n';
  for (int i = 0; i < sys.dimension(); ++i) {
    os << "axis " << i + 1 << '\n';
    for (auto [a, b] : sys.axis(i).edges()) os << a + 1 << ' ' << b + 1 << '\n';
  }
  return os.str();
}

void save_system(const ConstraintSystem& sys, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write constraint file " + path.string());
  out << format_system(sys);
}

std::uint64_t system_fingerprint(const ConstraintSystem& sys) { return fnv1a64(format_system(sys)); }

}  // namespace caplab
