#include <doctest.h>

#include "caplab/errors.hpp"
#include "caplab/one_vertex.hpp"
#include "caplab/oracle.hpp"
#include "caplab/transfer.hpp"

using namespace caplab;

namespace {

constexpr auto open = Boundary::open;
constexpr auto periodic = Boundary::periodic;

}  // namespace

TEST_SUITE("oracle") {

TEST_CASE("hard-square boxes") {
  const auto sys = hard_square_system(2);
  CHECK(brute_count_box(sys, {2, 2}, {open, open}).value == 7);
  const int fib[] = {2, 3, 5, 8};
  for (int n = 1; n <= 4; ++n) CHECK(brute_count_box(sys, {1, n}, {open, open}).value == fib[n - 1]);
  // 2x2 torus: each axis pair is doubled, the count matches the open box.
  CHECK(brute_count_box(sys, {2, 2}, {periodic, periodic}).value == 7);
  // Independent sets of the 3x3 torus grid.
  CHECK(brute_count_box(sys, {3, 3}, {periodic, periodic}).value == 34);
  // Odd cycle of length 3 (periodic) has 4 colourings; a single periodic cell needs the loop.
  CHECK(brute_count_box(sys, {3, 1}, {periodic, open}).value == 4);
  CHECK(brute_count_box(sys, {1, 1}, {periodic, open}).value == 1);
  CHECK(brute_count_box(sys, {2, 2}, {open, open}).instance == "box (2,2) open open");
}

TEST_CASE("slanted 2D counts") {
  const auto sys = hard_square_system(2);
  CHECK(brute_count_slanted_2d(sys, 2, 2).value == 6);
  // n = 1: both conditions hit the same pair, so this is a chain under E1 and E2.
  for (int q = 1; q <= 6; ++q) {
    CHECK(brute_count_slanted_2d(sys, 1, q).value == brute_count_box(sys, {1, q}, {open, open}).value);
  }
  // q = 1: plain Gamma_1 chains.
  for (int n = 1; n <= 8; ++n) {
    CHECK(brute_count_slanted_2d(sys, n, 1).value == enumerate_words(sys.axis(0), n, open).size());
  }
  const auto md = monomer_dimer_system(2);
  for (int n = 1; n <= 5; ++n)
    CHECK(brute_count_slanted_2d(md, n, 1).value == enumerate_words(md.axis(0), n, open).size());
}

TEST_CASE("slanted 3D counts") {
  const auto sys = hard_square_system(3);
  const auto p = build_one_vertex_3d(sys, 2, 2);
  CHECK(brute_count_slanted_3d(sys, 2, 2, 2).value == quadratic_form_count(p, 4));
  for (int a = 1; a <= 3; ++a)
    for (int b = 1; b <= 3; ++b)
      CHECK(brute_count_slanted_3d(sys, a, b, 1).value == enumerate_helical_slab_words(sys, a, b).size());
  // n2 = 1: the axis-2 and axis-3 pairs both sit n1 apart.
  const auto md = monomer_dimer_system(3);
  ConstraintGraph both(md.colours());
  for (auto [a, b] : md.axis(1).edges())
    if (md.axis(2).has_edge(a, b)) both.add_edge(a, b);
  const ConstraintSystem merged({md.axis(0), both});
  for (int n = 1; n <= 4; ++n)
    for (int m = 1; m <= 3; ++m)
      CHECK(brute_count_slanted_3d(md, n, 1, m).value == brute_count_slanted_2d(merged, n, m).value);
}

TEST_CASE("monomer-dimer tilings by direct placement") {
  CHECK(brute_count_monomer_dimer({1, 1}).value == 1);
  CHECK(brute_count_monomer_dimer({2, 2}).value == 7);
  // 1D: Fibonacci.
  const int fib[] = {1, 2, 3, 5, 8, 13, 21, 34};
  for (int n = 1; n <= 8; ++n) CHECK(brute_count_monomer_dimer({n}).value == fib[n - 1]);
  // Matchings of the 3x3 grid and of the 2x2x2 cube.
  CHECK(brute_count_monomer_dimer({3, 3}).value == 131);
  CHECK(brute_count_monomer_dimer({2, 2, 2}).value == 108);
  CHECK_THROWS_AS(brute_count_monomer_dimer({6, 6}), CapacityError);
}

TEST_CASE("colour coding with boundary masks counts tilings") {
  for (int d = 1; d <= 3; ++d) {
    const auto sys = monomer_dimer_system(d);
    std::vector<std::vector<int>> boxes;
    if (d == 1)
      for (int a = 1; a <= 8; ++a) boxes.push_back({a});
    if (d == 2)
      for (int a = 1; a <= 3; ++a)
        for (int b = 1; b <= 3; ++b) boxes.push_back({a, b});
    if (d == 3) boxes = {{2, 2, 2}, {1, 2, 3}, {2, 2, 1}};
    for (const auto& box : boxes) {
      CHECK(brute_count_box_masked(sys, box, monomer_dimer_boundary_masks(box)).value ==
            brute_count_monomer_dimer(box).value);
    }
  }
}

TEST_CASE("without the chaining edge the colour coding undercounts") {
  const auto literal = monomer_dimer_system(1, false);
  // Two dimers in a row need the (second half, first half) edge.
  CHECK(brute_count_box_masked(literal, {4}, monomer_dimer_boundary_masks({4})).value <
        brute_count_monomer_dimer({4}).value);
}

TEST_CASE("sandwich count inequalities") {
  const auto sys = hard_square_system(2);
  for (int n = 2; n <= 4; ++n) {
    const auto s = build_one_vertex_2d(sys, n);
    const auto t = build_row_transfer_2d(sys, n, open);
    const auto tp = build_row_transfer_2d(sys, n - 1, periodic);
    for (int q = 1; q <= 4; ++q) {
      const auto walks = quadratic_form_count(s, static_cast<unsigned>((q - 1) * n));
      CHECK(walks <= quadratic_form_count(t, static_cast<unsigned>(q - 1)));
      CHECK(quadratic_form_count(tp, static_cast<unsigned>(q - 1)) <= walks);
    }
  }
}

TEST_CASE("input checks and the work limit") {
  const auto sys = hard_square_system(2);
  CHECK_THROWS_AS(brute_count_box(sys, {2, 2, 2}, {open, open, open}), std::invalid_argument);
  CHECK_THROWS_AS(brute_count_box(sys, {2, 0}, {open, open}), std::invalid_argument);
  CHECK_THROWS_AS(brute_count_box(sys, {2, 2}, {open}), std::invalid_argument);
  GuardLimits tight;
  tight.oracle_work = 50;
  try {
    brute_count_box(sys, {5, 5}, {open, open}, tight);
    FAIL("expected the work guard");
  } catch (const CapacityError& e) {
    CHECK(e.guard() == "oracle work");
    CHECK(e.limit() == 50);
  }
  CHECK(brute_count_box(sys, {3, 3}, {open, open}).work > 0);
}

}  // TEST_SUITE
