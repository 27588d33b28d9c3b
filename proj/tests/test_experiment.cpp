#include <doctest.h>

#include <sstream>

#include "caplab/experiment.hpp"

using namespace caplab;

namespace {

struct Run {
  int code;
  std::string out, log;
};

Run run(const ExperimentConfig& cfg) {
  std::ostringstream out, log;
  const int code = run_experiment(cfg, out, log);
  return {code, out.str(), log.str()};
}

ExperimentConfig sweep(std::vector<int> n) {
  ExperimentConfig cfg;
  cfg.task = Task::sweep;
  cfg.n = std::move(n);
  cfg.iteration.precision_digits = 30;
  return cfg;
}

}  // namespace

TEST_SUITE("experiment") {

TEST_CASE("integer lists") {
  CHECK(parse_int_list("5") == std::vector<int>{5});
  CHECK(parse_int_list("2..5") == std::vector<int>{2, 3, 4, 5});
  CHECK(parse_int_list("2,4,6") == std::vector<int>{2, 4, 6});
  CHECK(parse_int_list("2..3,8") == std::vector<int>{2, 3, 8});
  CHECK_THROWS_AS(parse_int_list(""), std::invalid_argument);
  CHECK_THROWS_AS(parse_int_list("5..2"), std::invalid_argument);
  CHECK_THROWS_AS(parse_int_list("3x"), std::invalid_argument);
}

TEST_CASE("names round trip") {
  for (auto k : {OpKind::standard, OpKind::periodic, OpKind::one_vertex}) CHECK(parse_op_kind(to_string(k)) == k);
  CHECK(parse_representation("lists") == Representation::successor_lists);
  CHECK_THROWS_AS(parse_op_kind("diagonal"), std::invalid_argument);
  CHECK_THROWS_AS(parse_representation("dense"), std::invalid_argument);
}

TEST_CASE("model catalogue") {
  const auto text = list_models();
  CHECK(text.find("hard-square (k=2)") < text.find("monomer-dimer d=2 (k=5)"));
  ExperimentConfig cfg;
  cfg.model = "monomer-dimer";
  cfg.model_d = 2;
  CHECK(resolve_model(cfg).colours() == 5);
  CHECK(model_label(cfg) == "monomer-dimer-d2");
  cfg.same_axis_chain = false;
  CHECK(model_label(cfg) == "monomer-dimer-d2-literal");
  cfg.model = "no-such-model";
  CHECK_THROWS_AS(resolve_model(cfg), std::invalid_argument);
}

TEST_CASE("sweep output is deterministic") {
  const auto a = run(sweep({2, 3, 4}));
  const auto b = run(sweep({2, 3, 4}));
  REQUIRE(a.code == exit_code::ok);
  CHECK(a.out == b.out);
  std::istringstream lines(a.out);
  std::string header, row;
  std::getline(lines, header);
  CHECK(header == "model,op_kind,geometry,boundary,precision,value,cw_lower,cw_upper,iterations,seconds");
  std::getline(lines, row);
  CHECK(row.rfind("hard-square,standard,2,open,30,2.4142135623", 0) == 0);
  // Without --timing the seconds column stays empty.
  CHECK(row.back() == ',');
}

TEST_CASE("exit codes") {
  auto bad = sweep({3});
  bad.format = "xml";
  const auto r = run(bad);
  CHECK(r.code == exit_code::config);
  CHECK(r.log.find("unknown format") != std::string::npos);

  auto huge = sweep({60});
  huge.op = OpKind::one_vertex;
  const auto h = run(huge);
  CHECK(h.code == exit_code::capacity);
  CHECK(h.log.find("CAPACITY_LAB_WORK_LIMIT") != std::string::npos);

  auto slow = sweep({6});
  slow.iteration.max_iterations = 2;
  slow.iteration.warm_start = false;
  CHECK(run(slow).code == exit_code::not_converged);

  auto md = sweep({});
  md.model = "monomer-dimer";
  md.model_d = 2;
  md.task = Task::oracle_check;
  md.max_n = 3;
  const auto o = run(md);
  CHECK(o.code == exit_code::ok);
  CHECK(o.out.find("FAIL") == std::string::npos);
}

}  // TEST_SUITE
