#include <doctest.h>

#include <boost/math/tools/roots.hpp>

#include "caplab/oracle.hpp"
#include "caplab/one_vertex.hpp"
#include "caplab/spectral.hpp"
#include "caplab/transfer.hpp"
#include "support.hpp"

using namespace caplab;

namespace {

/// Real root of x^3 = x^2 + 1 by bracketed Newton, independent of any operator.
Real narayana_root(unsigned digits) {
  PrecisionScope scope(digits + 10);
  auto f = [](const Real& x) { return std::make_pair(Real(x * x * x - x * x - 1), Real(3 * x * x - 2 * x)); };
  return boost::math::tools::newton_raphson_iterate(f, Real(1.5), Real(1), Real(2),
                                                    static_cast<int>(digits * 3.33) + 8);
}

/// Every state has at most k successors and at most k predecessors.
template <class Op>
void check_sparsity(const Op& op, int k) {
  std::vector<int> indeg(op.dimension(), 0);
  bool ok = true;
  for (std::size_t i = 0; i < op.dimension(); ++i) {
    const auto s = op.successors(i);
    ok = ok && s.size() <= static_cast<std::size_t>(k);
    for (auto j : s) ++indeg[j];
  }
  for (int d : indeg) ok = ok && d <= k;
  CHECK(ok);
}

}  // namespace

TEST_SUITE("one_vertex") {

TEST_CASE("S_2 for the hard square") {
  const auto s = build_one_vertex_2d(hard_square_system(2), 2);
  REQUIRE(s.dimension() == 3);
  const auto& st = s.states();
  auto idx = [&](const char* w) { return static_cast<std::uint32_t>(*st.index_of(std::string(w))); };
  CHECK(s.successors(idx("12")) == std::vector<std::uint32_t>{idx("22")});
  CHECK(s.successors(idx("21")) == std::vector<std::uint32_t>{idx("12")});
  CHECK(s.successors(idx("22")) == std::vector<std::uint32_t>{idx("21"), idx("22")});
  CHECK(s.nonzeros() == 4);
  CHECK_THROWS_AS(s.successors(3), std::out_of_range);

  IterationConfig cfg;
  cfg.precision_digits = 40;
  const auto est = perron_radius(s, cfg);
  REQUIRE(est.converged);
  CHECK(testing::shared_digits(est.value, narayana_root(40)) > 35);
}

TEST_CASE("successor words are shifted states") {
  for (const auto& op : {build_one_vertex_2d(hard_square_system(2), 9), build_one_vertex_2d(monomer_dimer_system(2), 4),
                         build_one_vertex_3d(hard_square_system(3), 3, 2), build_one_vertex_3d(monomer_dimer_system(3), 2, 2)}) {
    const auto& st = op.states();
    const auto mask = st.codec().tail_mask(st.length() - 1);
    bool ok = true;
    for (std::size_t i = 0; i < op.dimension(); ++i) {
      for (auto j : op.successors(i)) {
        // The successor's first L-1 cells are the source's last L-1 cells.
        ok = ok && (st.code(j) >> st.codec().bits()) == (st.code(i) & mask);
      }
    }
    CHECK(ok);
  }
}

TEST_CASE("at most k successors and predecessors") {
  check_sparsity(build_one_vertex_2d(hard_square_system(2), 20), 2);
  check_sparsity(build_one_vertex_2d(monomer_dimer_system(2), 6), 5);
  check_sparsity(build_one_vertex_3d(hard_square_system(3), 4, 4), 2);
  check_sparsity(build_one_vertex_3d(monomer_dimer_system(3), 2, 3), 7);
}

TEST_CASE("slanted counting identity in 2D") {
  for (const auto& sys : {hard_square_system(2), monomer_dimer_system(2)}) {
    for (int n = 2; n <= 4; ++n) {
      const auto s = build_one_vertex_2d(sys, n);
      for (int q = 1; q <= 4; ++q) {
        CAPTURE(n);
        CAPTURE(q);
        CHECK(quadratic_form_count(s, static_cast<unsigned>((q - 1) * n)) == brute_count_slanted_2d(sys, n, q).value);
      }
    }
  }
  CHECK(quadratic_form_count(build_one_vertex_2d(hard_square_system(2), 2), 2) == 6);
}

TEST_CASE("slanted counting identity in 3D") {
  for (const auto& sys : {hard_square_system(3), monomer_dimer_system(3)}) {
    const auto p = build_one_vertex_3d(sys, 2, 2);
    for (int m = 1; m <= 3; ++m) {
      CHECK(quadratic_form_count(p, static_cast<unsigned>(4 * (m - 1))) == brute_count_slanted_3d(sys, 2, 2, m).value);
    }
  }
}

TEST_CASE("tabulated and on-the-fly successors agree") {
  OneVertexOptions lazy;
  lazy.max_table_entries = 0;
  const auto a = build_one_vertex_3d(hard_square_system(3), 3, 3);
  const auto b = build_one_vertex_3d(hard_square_system(3), 3, 3, lazy);
  CHECK(a.tabulated());
  CHECK_FALSE(b.tabulated());
  CHECK(a.nonzeros() == b.nonzeros());
  Vector<double> v(static_cast<Eigen::Index>(a.dimension()));
  for (Eigen::Index i = 0; i < v.size(); ++i) v[i] = 1.0 + static_cast<double>(i % 17);
  CHECK(caplab::apply(a, v) == caplab::apply(b, v, 3));
}

TEST_CASE("fault injection") {
  const auto s = build_one_vertex_2d(hard_square_system(2), 2);
  const auto broken = s.without_transition(2, 2);
  CHECK(broken.entry(2, 1));
  CHECK_FALSE(broken.entry(2, 2));
  CHECK(broken.nonzeros() == 3);
  CHECK(broken.descriptor() != s.descriptor());
  CHECK_THROWS_AS(s.without_transition(0, 0), std::invalid_argument);
}

TEST_CASE("3D operators at the tabulated sizes") {
  const auto sys = hard_square_system(3);
  IterationConfig cfg;
  cfg.precision_digits = 20;
  const auto p44 = perron_radius(build_one_vertex_3d(sys, 4, 4), cfg);
  const auto p45 = perron_radius(build_one_vertex_3d(sys, 4, 5), cfg);
  const auto p54 = perron_radius(build_one_vertex_3d(sys, 5, 4), cfg);
  // The 3D table truncates: 1.4339439 is listed as 1.433943.
  CHECK(testing::within_unit(p44.value, "1.431707", 7));
  CHECK(testing::within_unit(p45.value, "1.433880", 7));
  CHECK(testing::within_unit(p54.value, "1.433943", 7));
  // The helical order matters: transposed sizes give different operators.
  CHECK(p54.cw_lower > p45.cw_upper);
}

TEST_CASE("size checks") {
  CHECK_THROWS_AS(build_one_vertex_2d(hard_square_system(2), 1), std::invalid_argument);
  CHECK_THROWS_AS(build_one_vertex_3d(hard_square_system(3), 1, 1), std::invalid_argument);
  CHECK_THROWS_AS(build_one_vertex_3d(hard_square_system(2), 2, 2), std::invalid_argument);
}

}  // TEST_SUITE
