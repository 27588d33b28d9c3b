#include <doctest.h>

#include <cstdlib>
#include <set>

#include "caplab/errors.hpp"
#include "caplab/words.hpp"

using namespace caplab;

namespace {

std::vector<std::string> all_words(const StateSpace& s) {
  std::vector<std::string> out;
  for (std::size_t i = 0; i < s.size(); ++i) out.push_back(s.format(i));
  return out;
}

/// Exhaustive filter over all k^n words: the independent definition.
std::vector<std::string> filter_words(const ConstraintGraph& g, int n, bool periodic) {
  std::vector<std::string> out;
  const int k = g.colours();
  std::vector<Colour> w(static_cast<std::size_t>(n), 0);
  for (;;) {
    bool ok = true;
    for (int i = 0; i + 1 < n; ++i) ok = ok && g.has_edge(w[i], w[i + 1]);
    if (periodic) ok = ok && g.has_edge(w[n - 1], w[0]);
    if (ok) out.push_back(format_word(w, k));
    int p = n - 1;
    while (p >= 0 && ++w[p] == k) w[p--] = 0;
    if (p < 0) break;
  }
  return out;
}

}  // namespace

TEST_SUITE("words") {

TEST_CASE("hard-square words of small length") {
  const auto g = hard_square_graph();
  CHECK(all_words(enumerate_words(g, 3, Boundary::open)) == std::vector<std::string>{"121", "122", "212", "221", "222"});
  CHECK(all_words(enumerate_words(g, 3, Boundary::periodic)) == std::vector<std::string>{"122", "212", "221", "222"});
  CHECK(all_words(enumerate_words(g, 2, Boundary::open)) == std::vector<std::string>{"12", "21", "22"});
}

TEST_CASE("hard-square open counts follow the Fibonacci recursion") {
  const auto g = hard_square_graph();
  std::vector<std::size_t> count{0, 2, 3};
  for (int n = 1; n <= 20; ++n) {
    const auto s = enumerate_words(g, n, Boundary::open);
    if (n >= 3) count.push_back(count[n - 1] + count[n - 2]);
    CHECK(s.size() == count[static_cast<std::size_t>(n)]);
    CHECK(projected_chain_count(g, n) == doctest::Approx(static_cast<double>(s.size())));
  }
}

TEST_CASE("enumeration agrees with the exhaustive filter") {
  for (const auto& g : {hard_square_graph(), monomer_dimer_system(1).axis(0), monomer_dimer_system(2).axis(1)}) {
    for (int n = 1; n <= 6; ++n) {
      CHECK(all_words(enumerate_words(g, n, Boundary::open)) == filter_words(g, n, false));
      CHECK(all_words(enumerate_words(g, n, Boundary::periodic)) == filter_words(g, n, true));
    }
  }
}

TEST_CASE("periodic words are a subset of open words") {
  const auto md = monomer_dimer_system(2);
  for (const auto& g : {hard_square_graph(), md.axis(0), md.axis(1)}) {
    for (int n = 1; n <= 9; ++n) {
      const auto open = enumerate_words(g, n, Boundary::open);
      const auto per = enumerate_words(g, n, Boundary::periodic);
      const std::set<std::uint64_t> o(open.codes().begin(), open.codes().end());
      for (auto c : per.codes()) CHECK(o.count(c) == 1);
    }
  }
}

TEST_CASE("helical slab words") {
  const auto sys = hard_square_system(2);
  SUBCASE("2x2: chain plus skip-2 conditions") {
    const auto s = enumerate_helical_slab_words(sys, 2, 2);
    CHECK(s.size() == 6);
    CHECK(all_words(s) == std::vector<std::string>{"1221", "1222", "2122", "2212", "2221", "2222"});
  }
  SUBCASE("n2 = 1 is the open chain") {
    for (const auto& test_sys : {sys, monomer_dimer_system(2), monomer_dimer_system(3)}) {
      for (int n = 1; n <= 7; ++n) {
        CHECK(enumerate_helical_slab_words(test_sys, n, 1).codes() ==
              enumerate_words(test_sys.axis(0), n, Boundary::open).codes());
      }
    }
  }
  SUBCASE("n1 = 1 with equal axes is the open chain") {
    CHECK(all_words(enumerate_helical_slab_words(sys, 1, 3)) == std::vector<std::string>{"121", "122", "212", "221", "222"});
  }
}

TEST_CASE("slab words") {
  const auto sys = hard_square_system(3);
  // Independent sets of the 2x2 and 3x3 grids, the 3x3 torus and a 4-path.
  CHECK(enumerate_slab_words(sys, 2, 2, Boundary::open, Boundary::open).size() == 7);
  CHECK(enumerate_slab_words(sys, 3, 3, Boundary::open, Boundary::open).size() == 63);
  CHECK(enumerate_slab_words(sys, 3, 3, Boundary::periodic, Boundary::periodic).size() == 34);
  CHECK(enumerate_slab_words(sys, 1, 4, Boundary::open, Boundary::open).size() == 8);
}

TEST_CASE("codec order is lexicographic") {
  const WordCodec codec(5, 4);
  const std::vector<Colour> a{0, 4, 4, 4}, b{1, 0, 0, 0};
  CHECK(codec.encode(a) < codec.encode(b));
  CHECK(codec.decode(codec.encode(a)) == a);
  CHECK(codec.shift_append(codec.encode(b), 3) == codec.encode(std::vector<Colour>{0, 0, 0, 3}));
  CHECK(parse_word("1.5.2", 10) == std::vector<Colour>{0, 4, 1});
  CHECK_THROWS_AS(parse_word("13", 2), std::invalid_argument);
}

TEST_CASE("state lookup") {
  const auto s = enumerate_words(hard_square_graph(), 4, Boundary::open);
  for (std::size_t i = 0; i < s.size(); ++i) CHECK(s.index_of(s.format(i)) == i);
  CHECK_FALSE(s.index_of(std::string("1122")).has_value());
}

TEST_CASE("guards name themselves and the size") {
  GuardLimits tight;
  tight.max_states = 100;
  try {
    enumerate_words(complete_graph(3), 10, Boundary::open, tight);
    FAIL("expected a capacity error");
  } catch (const CapacityError& e) {
    CHECK_FALSE(e.guard().empty());
    CHECK(e.estimate() > 100);
    CHECK(e.limit() == 100);
    CHECK(std::string(e.what()).find(e.guard()) != std::string::npos);
  }
}

TEST_CASE("work limit from the environment") {
  ::setenv("CAPACITY_LAB_WORK_LIMIT", "12345", 1);
  const auto g = GuardLimits::from_environment();
  ::unsetenv("CAPACITY_LAB_WORK_LIMIT");
  CHECK(g.max_states == 12345);
  CHECK(g.oracle_work == 12345);
  CHECK(GuardLimits::from_environment().max_states == GuardLimits{}.max_states);
}

TEST_CASE("boundary names") {
  CHECK(parse_boundary("open") == Boundary::open);
  CHECK(parse_boundary("aperiodic") == Boundary::open);
  CHECK(parse_boundary("periodic") == Boundary::periodic);
  CHECK_THROWS_AS(parse_boundary("twisted"), std::invalid_argument);
}

}  // TEST_SUITE
