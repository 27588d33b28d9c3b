#include "caplab/bounds.hpp"

#include <algorithm>
#include <map>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace caplab {

const char* to_string(BoundKind k) { return k == BoundKind::lower ? "lower" : "upper"; }

const char* to_string(Rigor r) {
  switch (r) {
    case Rigor::rigorous: return "rigorous";
    case Rigor::heuristic: return "heuristic";
    case Rigor::conditional: return "conditional";
  }
  return "?";
}

namespace {

using boost::multiprecision::log;
using boost::multiprecision::pow;

void require_converged(const SpectralEstimate& e, const std::string& label) {
  if (!e.converged || !e.positive) {
    throw std::invalid_argument("rigorous bound refused: " + label + " did not converge to a certified enclosure");
  }
}

Real root(const Real& x, int n) { return n == 1 ? x : pow(x, Real(1) / n); }

std::string rho_label(const std::string& op, int n) { return "rho(" + op + "_" + std::to_string(n) + ")"; }

EntropyBound ratio_lower(const std::string& quantity, const SpectralEstimate& large, const std::string& large_label,
                         const SpectralEstimate& small, const std::string& small_label, int p, std::string formula) {
  require_converged(large, large_label);
  require_converged(small, small_label);
  if (!(small.cw_lower > 0)) throw std::invalid_argument("denominator radius must be positive");
  EntropyBound b;
  b.quantity = quantity;
  b.kind = BoundKind::lower;
  b.value = root(large.value / small.value, p);
  b.safe_value = outward::root_down(outward::div_down(large.cw_lower, small.cw_upper), static_cast<unsigned long>(p));
  b.formula = std::move(formula);
  b.inputs = {{large_label, large}, {small_label, small}};
  return b;
}

EntropyBound root_upper(const std::string& quantity, const SpectralEstimate& rho, const std::string& label, int cells,
                        std::string formula) {
  require_converged(rho, label);
  EntropyBound b;
  b.quantity = quantity;
  b.kind = BoundKind::upper;
  b.value = root(rho.value, cells);
  b.safe_value = outward::root_up(rho.cw_upper, static_cast<unsigned long>(cells));
  b.formula = std::move(formula);
  b.inputs = {{label, rho}};
  return b;
}

}  // namespace

EntropyBound lower_bound_open_2d(const SpectralEstimate& rho_large, const SpectralEstimate& rho_small, int p, int q) {
  if (p < 1 || q < 0) throw std::invalid_argument("open lower bound needs p >= 1, q >= 0");
  const int big = p + 2 * q + 1, small = 2 * q + 1;
  return ratio_lower("e^h2", rho_large, rho_label("T", big), rho_small, rho_label("T", small), p,
                     "(rho(T_" + std::to_string(big) + ")/rho(T_" + std::to_string(small) + "))^(1/" +
                         std::to_string(p) + ")");
}

EntropyBound upper_bound_open_2d(const SpectralEstimate& rho, int n) {
  if (n < 1) throw std::invalid_argument("open upper bound needs n >= 1");
  return root_upper("e^h2", rho, rho_label("T", n), n, "rho(T_" + std::to_string(n) + ")^(1/" + std::to_string(n) + ")");
}

EntropyBound lower_bound_periodic_2d(const SpectralEstimate& rho_large, const SpectralEstimate& rho_small, int p, int q) {
  if (p < 1 || q < 0) throw std::invalid_argument("periodic lower bound needs p >= 1, q >= 0");
  const int big = p + 2 * q, small = 2 * q;
  const std::string small_label = q == 0 ? "rho(Delta)" : rho_label("Tper", small);
  return ratio_lower("e^h2", rho_large, rho_label("Tper", big), rho_small, small_label, p,
                     "(rho(Tper_" + std::to_string(big) + ")/" + (q == 0 ? std::string("rho(Delta)") : "rho(Tper_" + std::to_string(small) + ")") +
                         ")^(1/" + std::to_string(p) + ")");
}

EntropyBound upper_bound_periodic_2d(const SpectralEstimate& rho, int side) {
  if (side < 2 || side % 2 != 0) {
    throw std::invalid_argument("periodic upper bound holds for even sides only, got " + std::to_string(side));
  }
  return root_upper("e^h2", rho, rho_label("Tper", side), side,
                    "rho(Tper_" + std::to_string(side) + ")^(1/" + std::to_string(side) + ")");
}

std::pair<EntropyBound, EntropyBound> bounds_periodic_2d(const SpectralEstimate& rho_large,
                                                        const SpectralEstimate& rho_small, int p, int q,
                                                        const SpectralEstimate& rho_even, int side) {
  return {lower_bound_periodic_2d(rho_large, rho_small, p, q), upper_bound_periodic_2d(rho_even, side)};
}

EntropyBound upper_bound_periodic_3d(const SpectralEstimate& rho, int side1, int side2) {
  if (side1 < 2 || side2 < 2 || side1 % 2 || side2 % 2) {
    throw std::invalid_argument("periodic 3D upper bound needs even torus sides, got (" + std::to_string(side1) + "," +
                                std::to_string(side2) + ")");
  }
  const std::string geom = std::to_string(side1) + "," + std::to_string(side2);
  return root_upper("e^h3", rho, "rho(Tper_(" + geom + "))", side1 * side2,
                    "rho(Tper_(" + geom + "))^(1/" + std::to_string(side1 * side2) + ")");
}

EntropyBound corner_ratio_lower_bound_3d(const SlabEstimate& r11, const SlabEstimate& r21, const SlabEstimate& r12,
                                         const SlabEstimate& r22, bool isotropic) {
  const int m1 = r11.n1, m2 = r11.n2;
  if (r21.n1 != m1 + 1 || r21.n2 != m2 || r12.n1 != m1 || r12.n2 != m2 + 1 || r22.n1 != m1 + 1 || r22.n2 != m2 + 1) {
    throw std::invalid_argument("corner ratio needs slab sizes (m1,m2), (m1+1,m2), (m1,m2+1), (m1+1,m2+1)");
  }
  auto label = [](const SlabEstimate& s) { return "rho(T_(" + std::to_string(s.n1) + "," + std::to_string(s.n2) + "))"; };
  for (const auto* s : {&r11, &r21, &r12, &r22}) {
    if (!s->estimate.converged || !s->estimate.positive) throw std::invalid_argument(label(*s) + " did not converge");
  }
  if (isotropic && (r21.estimate.cw_upper < r12.estimate.cw_lower || r12.estimate.cw_upper < r21.estimate.cw_lower)) {
    throw std::invalid_argument("isotropic system but " + label(r21) + " and " + label(r12) + " disagree");
  }
  EntropyBound b;
  b.quantity = "e^h3";
  b.kind = BoundKind::lower;
  b.rigor = Rigor::conditional;
  b.value = r22.estimate.value * r11.estimate.value / (r21.estimate.value * r12.estimate.value);
  b.safe_value = outward::div_down(outward::mul_down(r22.estimate.cw_lower, r11.estimate.cw_lower),
                                   outward::mul_up(r21.estimate.cw_upper, r12.estimate.cw_upper));
  b.formula = label(r22) + "*" + label(r11) + "/(" + label(r21) + "*" + label(r12) + ")";
  b.inputs = {{label(r11), r11.estimate}, {label(r21), r21.estimate}, {label(r12), r12.estimate}, {label(r22), r22.estimate}};
  return b;
}

SandwichReport sandwich_check_one_vertex(const OneVertexOperator& s, const TransferOperator& t_per_prev,
                                         const TransferOperator& t_open, const TransferOperator& t_per_next, int n,
                                         const IterationConfig& cfg, double slack) {
  SandwichReport r;
  r.n = n;
  r.t_per_prev = perron_radius(t_per_prev, cfg);
  r.s = perron_radius(s, cfg);
  r.t_open = perron_radius(t_open, cfg);
  r.t_per_next = perron_radius(t_per_next, cfg);
  PrecisionScope scope(cfg.precision_digits);
  const Real log_s = log(r.s.value);
  r.lower_gap = log_s - log(r.t_per_prev.value) / n;
  r.upper_gap = std::min(log(r.t_open.value), log(r.t_per_next.value)) / n - log_s;
  r.violated = r.lower_gap < -slack || r.upper_gap < -slack;
  return r;
}

SandwichReport sandwich_check_one_vertex(const ConstraintSystem& sys, int n, const IterationConfig& cfg, double slack) {
  if (sys.dimension() != 2 || !sys.isotropic() || !sys.symmetric()) {
    throw std::invalid_argument("the sandwich inequality needs an isotropic symmetric 2D system");
  }
  if (n < 2) throw std::invalid_argument("the sandwich inequality needs n >= 2");
  const auto s = build_one_vertex_2d(sys, n);
  const auto prev = build_row_transfer_2d(sys, n - 1, Boundary::periodic);
  const auto open = build_row_transfer_2d(sys, n, Boundary::open);
  const auto next = build_row_transfer_2d(sys, n + 1, Boundary::periodic);
  return sandwich_check_one_vertex(s, prev, open, next, n, cfg, slack);
}

FriendlyReport friendly_lower_bound_2d(const ConstraintSystem& sys, const SpectralEstimate& rho_r, int n,
                                       const SpectralEstimate& rho_p) {
  FriendlyReport r;
  r.n = n;
  r.friendly = find_friendly_colours(sys);
  if (r.friendly.empty()) throw std::invalid_argument("no friendly colour: the friendly-colour inequality does not apply");
  PrecisionScope scope(std::max(rho_r.precision_digits, rho_p.precision_digits));
  r.slack = log(rho_p.value) - log(rho_r.value) / (n + 1);
  // Certified only when the unfavourable ends of both enclosures comply.
  r.holds = rho_p.cw_lower > 0 && log(rho_p.cw_lower) >= log(rho_r.cw_upper) / (n + 1);
  return r;
}

HeuristicBracket heuristic_bracket_2d(const std::vector<std::pair<int, SpectralEstimate>>& values) {
  HeuristicBracket h;
  std::map<int, const SpectralEstimate*> even, odd;
  for (const auto& [n, e] : values) {
    if (n % 2 == 0) even[n] = &e;
    else if (n >= 3) odd[n] = &e;
  }
  auto scan = [&](const std::map<int, const SpectralEstimate*>& seq, bool increasing, bool& flag) {
    const SpectralEstimate* prev = nullptr;
    int prev_n = 0;
    for (const auto& [n, e] : seq) {
      if (prev && (increasing ? !(e->value > prev->value) : !(e->value < prev->value))) {
        flag = false;
        if (!h.violation) {
          h.violation = "rho(S_" + std::to_string(n) + ") is not " + (increasing ? "above" : "below") + " rho(S_" +
                        std::to_string(prev_n) + ")";
        }
      }
      prev = e;
      prev_n = n;
    }
  };
  scan(even, true, h.even_increasing);
  scan(odd, false, h.odd_decreasing);
  if (!h.even_increasing || !h.odd_decreasing || even.empty() || odd.empty()) return h;

  const auto& [ne, le] = *even.rbegin();
  const auto& [no, uo] = *odd.rbegin();
  EntropyBound lo;
  lo.quantity = "e^h2";
  lo.kind = BoundKind::lower;
  lo.rigor = Rigor::heuristic;
  lo.value = le->value;
  lo.safe_value = le->cw_lower;
  lo.formula = rho_label("S", ne) + " (even n, assumed increasing)";
  lo.inputs = {{rho_label("S", ne), *le}};
  EntropyBound up = lo;
  up.kind = BoundKind::upper;
  up.value = uo->value;
  up.safe_value = uo->cw_upper;
  up.formula = rho_label("S", no) + " (odd n, assumed decreasing)";
  up.inputs = {{rho_label("S", no), *uo}};
  h.lower = std::move(lo);
  h.upper = std::move(up);
  return h;
}

BoundReport bound_report(const std::vector<EntropyBound>& bounds) {
  BoundReport r;
  r.all = bounds;
  auto better = [](const std::optional<EntropyBound>& cur, const EntropyBound& b) {
    if (!cur) return true;
    return b.kind == BoundKind::lower ? b.safe_value > cur->safe_value : b.safe_value < cur->safe_value;
  };
  for (const auto& b : bounds) {
    switch (b.rigor) {
      case Rigor::rigorous: {
        auto& slot = b.kind == BoundKind::lower ? r.rigorous_lower : r.rigorous_upper;
        if (better(slot, b)) slot = b;
        break;
      }
      case Rigor::heuristic: {
        auto& slot = b.kind == BoundKind::lower ? r.heuristic_lower : r.heuristic_upper;
        if (better(slot, b)) slot = b;
        break;
      }
      case Rigor::conditional: r.conditional.push_back(b); break;
    }
  }
  return r;
}

namespace {

nlohmann::ordered_json bound_json(const EntropyBound& b, int digits) {
  nlohmann::ordered_json j;
  j["quantity"] = b.quantity;
  j["kind"] = to_string(b.kind);
  j["rigor"] = to_string(b.rigor);
  j["value"] = format_real(b.value, digits);
  j["safe_value"] = format_real(b.safe_value, digits);
  j["formula"] = b.formula;
  auto& inputs = j["inputs"] = nlohmann::ordered_json::array();
  for (const auto& in : b.inputs) {
    nlohmann::ordered_json e;
    e["label"] = in.label;
    e["value"] = format_real(in.estimate.value, digits);
    e["cw_lower"] = format_real(in.estimate.cw_lower, digits);
    e["cw_upper"] = format_real(in.estimate.cw_upper, digits);
    e["converged"] = in.estimate.converged;
    inputs.push_back(std::move(e));
  }
  return j;
}

void text_line(std::ostringstream& os, const char* title, const std::optional<EntropyBound>& b, int digits) {
  os << title << ": ";
  if (!b) {
    os << "none\n";
    return;
  }
  os << b->quantity << (b->kind == BoundKind::lower ? " >= " : " <= ") << format_real(b->safe_value, digits)
     << "  (value " << format_real(b->value, digits) << ", " << b->formula << ")\n";
}

}  // namespace

std::string BoundReport::to_json(int digits) const {
  nlohmann::ordered_json j;
  auto put = [&](const char* key, const std::optional<EntropyBound>& b) {
    j[key] = b ? bound_json(*b, digits) : nlohmann::ordered_json(nullptr);
  };
  put("rigorous_lower", rigorous_lower);
  put("rigorous_upper", rigorous_upper);
  put("heuristic_lower", heuristic_lower);
  put("heuristic_upper", heuristic_upper);
  j["conditional"] = nlohmann::ordered_json::array();
  for (const auto& b : conditional) j["conditional"].push_back(bound_json(b, digits));
  j["bounds"] = nlohmann::ordered_json::array();
  for (const auto& b : all) j["bounds"].push_back(bound_json(b, digits));
  return j.dump(2) + "\n";
}

std::string BoundReport::to_text(int digits) const {
  std::ostringstream os;
  os << "rigorous\n";
  text_line(os, "  lower", rigorous_lower, digits);
  text_line(os, "  upper", rigorous_upper, digits);
  os << "heuristic\n";
  text_line(os, "  lower", heuristic_lower, digits);
  text_line(os, "  upper", heuristic_upper, digits);
  os << "conditional\n";
  if (conditional.empty()) os << "  none\n";
  for (const auto& b : conditional) {
    os << "  " << b.quantity << (b.kind == BoundKind::lower ? " >= " : " <= ") << format_real(b.safe_value, digits)
       << "  (" << b.formula << ")\n";
  }
  return os.str();
}

}  // namespace caplab
