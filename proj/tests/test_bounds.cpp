#include <doctest.h>

#include <json.hpp>
#include <map>

#include "caplab/bounds.hpp"
#include "support.hpp"

using namespace caplab;
using boost::multiprecision::log;

namespace {

SpectralEstimate printed(const char* text) { return SpectralEstimate::from_printed(text); }

IterationConfig digits(unsigned d) {
  IterationConfig c;
  c.precision_digits = d;
  return c;
}

/// Hard-square radii computed here, cached across test cases.
struct Radii {
  std::map<int, SpectralEstimate> open, per;
  SpectralEstimate delta;
};

const Radii& hard_square_radii() {
  static const Radii r = [] {
    Radii out;
    const auto sys = hard_square_system(2);
    for (int n = 1; n <= 14; ++n) {
      out.open[n] = perron_radius(build_row_transfer_2d(sys, n, Boundary::open), digits(40));
      out.per[n] = perron_radius(build_row_transfer_2d(sys, n, Boundary::periodic), digits(40));
    }
    out.delta = perron_radius(adjacency_operator(sys.axis(0)), digits(40));
    return out;
  }();
  return r;
}

void check_safe_side(const EntropyBound& b) {
  if (b.kind == BoundKind::lower) CHECK(b.safe_value <= b.value);
  else CHECK(b.safe_value >= b.value);
}

}  // namespace

TEST_SUITE("bounds") {

TEST_CASE("open lower bound from tabulated T_14 and T_13") {
  PrecisionScope scope(40);
  const auto b = lower_bound_open_2d(printed("321.17516167688358891589859286791"),
                                     printed("213.68255974084561463042598863826"), 1, 6);
  CHECK(b.kind == BoundKind::lower);
  CHECK(b.rigor == Rigor::rigorous);
  CHECK(b.quantity == "e^h2");
  CHECK(testing::agrees_to(b.value, "1.503048082475", 11));
  CHECK(b.safe_value <= parse_real("1.503048082475339"));
  check_safe_side(b);
  CHECK(b.inputs.size() == 2);
  CHECK(b.formula == "(rho(T_14)/rho(T_13))^(1/1)");
}

TEST_CASE("tabulated radii reproduce the two 15-digit bounds") {
  PrecisionScope scope(40);
  const auto lower = lower_bound_open_2d(printed("96463.315708983666788807112233379"),
                                         printed("64178.462973799644995496644648926"), 1, 13);
  CHECK(testing::agrees_to(lower.value, "1.50304808247533226432204922", 27));
  const auto upper = upper_bound_periodic_2d(printed("2349759.746553886953259135919605940"), 36);
  CHECK(testing::agrees_to(upper.value, "1.50304808247533992728837255", 27));
  CHECK(lower.safe_value < upper.safe_value);
}

TEST_CASE("open upper bounds") {
  const auto& r = hard_square_radii();
  PrecisionScope scope(40);
  const auto b2 = upper_bound_open_2d(r.open.at(2), 2);
  CHECK(testing::shared_digits(b2.value, sqrt(1 + sqrt(Real(2)))) > 35);
  CHECK(testing::agrees_to(b2.value, "1.55377397", 9));
  check_safe_side(b2);

  const auto b12 = upper_bound_open_2d(printed("142.16615039284113705381555339180"), 12);
  CHECK(b12.value > parse_real("1.51"));
  CHECK(b12.value < parse_real("1.52"));

  // Degenerate n = 1: rho(T_1) is rho(Delta), the golden ratio here.
  const auto b1 = upper_bound_open_2d(r.open.at(1), 1);
  CHECK(b1.value == r.open.at(1).value);
  CHECK(testing::shared_digits(b1.value, (1 + sqrt(Real(5))) / 2) > 35);

  // Improves monotonically with n.
  for (int n = 3; n <= 14; ++n) {
    CAPTURE(n);
    CHECK(upper_bound_open_2d(r.open.at(n), n).value < upper_bound_open_2d(r.open.at(n - 1), n - 1).value);
  }
}

TEST_CASE("periodic bounds") {
  const auto& r = hard_square_radii();
  PrecisionScope scope(40);
  const auto up = upper_bound_periodic_2d(printed("132.9477940474849517182393096863462"), 12);
  CHECK(testing::shared_digits(up.value, pow(parse_real("132.9477940474849517182393096863462"), Real(1) / 12)) > 30);
  CHECK_THROWS_AS(upper_bound_periodic_2d(r.per.at(7), 7), std::invalid_argument);

  const auto low = lower_bound_periodic_2d(r.per.at(2), r.delta, 2, 0);
  CHECK(low.formula == "(rho(Tper_2)/rho(Delta))^(1/2)");
  CHECK(testing::shared_digits(low.value, sqrt((1 + sqrt(Real(2))) / ((1 + sqrt(Real(5))) / 2))) > 35);
  check_safe_side(low);

  const auto [l, u] = bounds_periodic_2d(r.per.at(12), r.per.at(10), 2, 5, r.per.at(12), 12);
  CHECK(l.safe_value < u.safe_value);
  CHECK_THROWS_AS(bounds_periodic_2d(r.per.at(12), r.per.at(10), 2, 5, r.per.at(11), 11), std::invalid_argument);
}

TEST_CASE("rigorous bounds refuse uncertified inputs") {
  SpectralEstimate rough = printed("321.17516167688358891589859286791");
  rough.converged = false;
  CHECK_THROWS_AS(upper_bound_open_2d(rough, 14), std::invalid_argument);
  CHECK_THROWS_AS(lower_bound_open_2d(rough, printed("213.68"), 1, 6), std::invalid_argument);
  CHECK_THROWS_AS(lower_bound_open_2d(printed("321.1"), printed("213.6"), 0, 6), std::invalid_argument);
}

TEST_CASE("every rigorous lower bound sits below every rigorous upper bound") {
  const auto& r = hard_square_radii();
  PrecisionScope scope(40);
  std::vector<EntropyBound> lowers, uppers;
  for (int n = 1; n <= 14; ++n) {
    uppers.push_back(upper_bound_open_2d(r.open.at(n), n));
    if (n % 2 == 0) uppers.push_back(upper_bound_periodic_2d(r.per.at(n), n));
  }
  for (int q = 0; 2 * q + 1 < 14; ++q)
    for (int p = 1; p + 2 * q + 1 <= 14; ++p) lowers.push_back(lower_bound_open_2d(r.open.at(p + 2 * q + 1), r.open.at(2 * q + 1), p, q));
  for (int q = 0; 2 * q < 14; ++q)
    for (int p = 1; p + 2 * q <= 14; ++p)
      lowers.push_back(lower_bound_periodic_2d(r.per.at(p + 2 * q), q == 0 ? r.delta : r.per.at(2 * q), p, q));
  Real max_lower = 0, min_upper = 1e9;
  for (const auto& b : lowers) {
    check_safe_side(b);
    if (b.safe_value > max_lower) max_lower = b.safe_value;
  }
  for (const auto& b : uppers) {
    check_safe_side(b);
    if (b.safe_value < min_upper) min_upper = b.safe_value;
  }
  CHECK(max_lower < min_upper);

  // The desk-scale bracket contains the 15-digit value.
  const auto rep = bound_report([&] {
    auto all = lowers;
    all.insert(all.end(), uppers.begin(), uppers.end());
    return all;
  }());
  REQUIRE(rep.rigorous_lower);
  REQUIRE(rep.rigorous_upper);
  CHECK(rep.rigorous_lower->safe_value <= parse_real("1.503048082475339"));
  CHECK(parse_real("1.503048082475339") <= rep.rigorous_upper->safe_value);
  CHECK(rep.rigorous_lower->formula == "(rho(T_14)/rho(T_13))^(1/1)");
}

TEST_CASE("entropy chain between Delta, periodic strips and odd 1-vertex operators") {
  const auto& r = hard_square_radii();
  const auto sys = hard_square_system(2);
  PrecisionScope scope(40);
  // h_2 itself is unknown; its certified upper bound makes the left inequality stricter.
  const Real h2_upper = log(r.per.at(14).cw_upper) / 14;
  for (int n = 2; n <= 5; ++n) {
    const auto s = perron_radius(build_one_vertex_2d(sys, 2 * n + 1), digits(40));
    const Real mid = log(r.per.at(2 * n).value) / (2 * n + 1);
    CAPTURE(n);
    CHECK(Real(2 * n) / (2 * n + 1) * h2_upper <= mid);
    CHECK(mid <= log(s.value));
  }
}

TEST_CASE("observed monotonicity of the strip sequences") {
  const auto& r = hard_square_radii();
  PrecisionScope scope(40);
  // Odd-to-even ratios, the p = 1 lower bounds, increase; the full ratio sequence oscillates.
  for (int n = 8; n <= 14; n += 2) {
    CAPTURE(n);
    CHECK(r.open.at(n).value / r.open.at(n - 1).value > r.open.at(n - 2).value / r.open.at(n - 3).value);
  }
  for (int m = 3; m <= 7; ++m) {
    CAPTURE(m);
    CHECK(pow(r.per.at(2 * m).value, Real(1) / (2 * m)) < pow(r.per.at(2 * m - 2).value, Real(1) / (2 * m - 2)));
  }
}

TEST_CASE("sandwich inequality for the 1-vertex operator") {
  const auto sys = hard_square_system(2);
  for (int n = 3; n <= 8; ++n) {
    const auto rep = sandwich_check_one_vertex(sys, n, digits(40));
    CAPTURE(n);
    CHECK_FALSE(rep.violated);
    CHECK(rep.lower_gap > 0);
    CHECK(rep.upper_gap > 0);
  }
  CHECK_THROWS_AS(sandwich_check_one_vertex(monomer_dimer_system(2), 4), std::invalid_argument);
}

TEST_CASE("a broken operator trips the sandwich check") {
  const auto sys = hard_square_system(2);
  const int n = 4;
  const auto s = build_one_vertex_2d(sys, n);
  const auto all_two = *s.states().index_of(std::string("2222"));
  const auto broken = s.without_transition(all_two, all_two);
  const auto prev = build_row_transfer_2d(sys, n - 1, Boundary::periodic);
  const auto open = build_row_transfer_2d(sys, n, Boundary::open);
  const auto next = build_row_transfer_2d(sys, n + 1, Boundary::periodic);
  CHECK_FALSE(sandwich_check_one_vertex(s, prev, open, next, n, digits(40)).violated);
  const auto rep = sandwich_check_one_vertex(broken, prev, open, next, n, digits(40));
  CHECK(rep.violated);
  CHECK(rep.lower_gap < 0);
}

TEST_CASE("friendly-colour inequality") {
  const auto& r = hard_square_radii();
  const auto sys = hard_square_system(2);
  std::map<int, Real> slack;
  for (int n = 2; n <= 8; ++n) {
    const auto p = perron_radius(build_one_vertex_2d(sys, n + 1), digits(40));
    const auto rep = friendly_lower_bound_2d(sys, r.open.at(n), n, p);
    CAPTURE(n);
    CHECK(rep.holds);
    CHECK(rep.friendly == std::vector<Colour>{1});
    CHECK(rep.slack > 0);
    slack[n] = rep.slack;
  }
  CHECK(slack.at(8) < slack.at(4));
  CHECK_THROWS_AS(friendly_lower_bound_2d(monomer_dimer_system(2), r.open.at(2), 2, r.open.at(3)), std::invalid_argument);
}

TEST_CASE("3D periodic upper bound") {
  PrecisionScope scope(40);
  const auto b68 = upper_bound_periodic_3d(printed("37133338.84386827"), 6, 8);
  CHECK(b68.quantity == "e^h3");
  CHECK(abs(b68.value - parse_real("1.43781634614")) <= parse_real("1e-11"));
  CHECK(b68.safe_value <= parse_real("1.43781634614") + parse_real("1e-11"));

  const auto b48 = upper_bound_periodic_3d(printed("117151.9963311473"), 4, 8);
  CHECK(testing::shared_digits(b48.value, pow(parse_real("117151.9963311473"), Real(1) / 32)) > 30);
  CHECK(testing::agrees_to(b48.value, "1.4401", 5));

  // A coarse torus still bounds from above.
  const auto t22 = perron_radius(
      build_slab_transfer_3d(hard_square_system(3), 2, 2, {Boundary::periodic, Boundary::periodic}), digits(30));
  CHECK(upper_bound_periodic_3d(t22, 2, 2).safe_value >= parse_real("1.43781634614"));
  CHECK_THROWS_AS(upper_bound_periodic_3d(t22, 5, 4), std::invalid_argument);
}

TEST_CASE("corner-ratio lower bound") {
  PrecisionScope scope(40);
  const SlabEstimate r55{5, 5, printed("13427.06985344107")}, r65{6, 5, printed("85738.84889761954")},
      r56{5, 6, printed("85738.84889761954")}, r66{6, 6, printed("786528.5060953929")};
  const auto b = corner_ratio_lower_bound_3d(r55, r65, r56, r66, true);
  CHECK(b.rigor == Rigor::conditional);
  CHECK(b.quantity == "e^h3");
  CHECK(testing::agrees_to(b.value, "1.436615", 7));
  check_safe_side(b);
  // Consistent with, not equal to, the published lower bound.
  CHECK(abs(b.value - parse_real("1.4365871627266")) < parse_real("1e-4"));

  const auto same = printed("1234.5");
  const auto one = corner_ratio_lower_bound_3d({2, 2, same}, {3, 2, same}, {2, 3, same}, {3, 3, same}, false);
  CHECK(one.value == 1);

  CHECK_THROWS_AS(corner_ratio_lower_bound_3d(r55, r56, r65, r66, true), std::invalid_argument);
  const SlabEstimate skewed{5, 6, printed("85000.0")};
  CHECK_THROWS_AS(corner_ratio_lower_bound_3d(r55, r65, skewed, r66, true), std::invalid_argument);
}

TEST_CASE("heuristic bracket from the 1-vertex table") {
  PrecisionScope scope(40);
  const std::vector<std::pair<int, const char*>> table{
      {26, "1.5030480824559338746449982720899"}, {28, "1.5030480824713491171046098760579"},
      {30, "1.5030480824745080695008293589330"}, {32, "1.5030480824751605743865692042299"},
      {34, "1.5030480824752962878823092158144"}, {36, "1.5030480824753246862738777999703"},
      {38, "1.5030480824753306606437859142329"}, {40, "1.5030480824753319235292607404167"},
      {39, "1.5030480824753330032275278142102"}, {37, "1.5030480824753357484850986619224"},
      {35, "1.5030480824753487657242129983806"}, {33, "1.5030480824754108025759894900493"},
      {31, "1.5030480824757081424841278582465"}, {29, "1.5030480824771425174857112752302"},
      {27, "1.5030480824841133358901685021830"}};
  std::vector<std::pair<int, SpectralEstimate>> values;
  for (const auto& [n, v] : table) values.emplace_back(n, printed(v));
  const auto h = heuristic_bracket_2d(values);
  CHECK(h.even_increasing);
  CHECK(h.odd_decreasing);
  CHECK_FALSE(h.violation);
  REQUIRE(h.lower);
  REQUIRE(h.upper);
  CHECK(h.lower->rigor == Rigor::heuristic);
  CHECK(format_real(h.lower->value, 32) == "1.5030480824753319235292607404167");
  CHECK(format_real(h.upper->value, 32) == "1.5030480824753330032275278142102");

  SUBCASE("a single value gives no bracket and no complaint") {
    const auto one = heuristic_bracket_2d({{27, printed("1.5030480824841133358901685021830")}});
    CHECK_FALSE(one.violation);
    CHECK_FALSE(one.lower);
    CHECK_FALSE(one.upper);
  }
  SUBCASE("a broken even sequence is reported") {
    auto bad = values;
    std::swap(bad[0].second, bad[1].second);
    const auto r = heuristic_bracket_2d(bad);
    CHECK_FALSE(r.even_increasing);
    REQUIRE(r.violation);
    CHECK(r.violation->find("rho(S_28)") != std::string::npos);
    CHECK_FALSE(r.lower);
  }
}

TEST_CASE("bound report") {
  PrecisionScope scope(40);
  CHECK_FALSE(bound_report({}).rigorous_lower);
  CHECK(bound_report({}).all.empty());
  CHECK(bound_report({}).conditional.empty());

  auto rig = upper_bound_open_2d(printed("321.17516167688358891589859286791"), 14);
  auto worse = upper_bound_open_2d(printed("142.16615039284113705381555339180"), 12);
  auto heur = rig;
  heur.rigor = Rigor::heuristic;
  heur.safe_value = heur.value = parse_real("1.50304808247534");
  auto cond = corner_ratio_lower_bound_3d({2, 2, printed("7")}, {3, 2, printed("8")}, {2, 3, printed("8")},
                                          {3, 3, printed("10")}, true);
  const auto rep = bound_report({worse, heur, rig, cond});
  REQUIRE(rep.rigorous_upper);
  CHECK(rep.rigorous_upper->formula == rig.formula);
  REQUIRE(rep.heuristic_upper);
  CHECK(rep.heuristic_upper->value == heur.value);
  CHECK_FALSE(rep.rigorous_lower);
  CHECK(rep.conditional.size() == 1);
  CHECK(rep.all.size() == 4);

  const auto j = nlohmann::json::parse(rep.to_json(20));
  CHECK(j["rigorous_lower"].is_null());
  CHECK(j["rigorous_upper"]["rigor"] == "rigorous");
  CHECK(j["heuristic_upper"]["rigor"] == "heuristic");
  CHECK(j["conditional"].size() == 1);
  CHECK(j["bounds"].size() == 4);
  CHECK(j["rigorous_upper"]["inputs"][0]["label"] == "rho(T_14)");
  const auto text = rep.to_text(20);
  CHECK(text.find("rigorous") < text.find("heuristic"));
  CHECK(text.find("conditional") != std::string::npos);
}

}  // TEST_SUITE
