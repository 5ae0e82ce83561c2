#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <string>

#include "doctest.h"
#include "droci/errors.hpp"
#include "droci/experiments.hpp"
#include "droci/io.hpp"

using namespace droci;

TEST_CASE("csv text parses into a sample") {
  const std::string text = "x,y\n1.0,2.0\n3.5,-1.25\n0,4e-1\n";
  const Sample s = parse_csv_text(text);
  REQUIRE(s.n() == 3);
  REQUIRE(s.d() == 2);
  CHECK(s.at(0, 0) == 1.0);
  CHECK(s.at(1, 1) == -1.25);
  CHECK(s.at(2, 1) == 0.4);
}

TEST_CASE("csv accepts CRLF line endings") {
  const Sample s = parse_csv_text("x\r\n1.5\r\n2.5\r\n");
  REQUIRE(s.n() == 2);
  CHECK(s.at(1, 0) == 2.5);
}

TEST_CASE("csv errors carry file positions, header counted as line one") {
  try {
    parse_csv_text("x,y\n1,2\n3,4\n5,6\n7,oops\n");
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(e.row == 5);
    CHECK(e.col == 2);
  }
}

TEST_CASE("csv rejects ragged rows and empty bodies") {
  CHECK_THROWS_AS(parse_csv_text("x,y\n1,2\n3\n"), ParseError);
  CHECK_THROWS_AS(parse_csv_text("x,y\n"), EmptyData);
  CHECK_THROWS_AS(parse_csv_text(""), EmptyData);
}

TEST_CASE("scenario json round trip") {
  ScenarioConfig c;
  c.model = "optim:lsq-loss";
  c.divergence = "cressie-read:2";
  c.data_law = "regression";
  c.n = 25;
  c.nominal_levels = {0.8, 0.95};
  c.methods = {"el", "tb"};
  c.reps = 1234;
  c.base_seed = 99;
  c.oracle_reps = 777;
  c.truth_analytic = 1.0;
  c.truth_pairs = 5000;
  c.threads = 2;
  const ScenarioConfig d = scenario_from_json(scenario_to_json(c));
  CHECK(scenario_to_json(d).dump() == scenario_to_json(c).dump());
  CHECK(d.model == c.model);
  CHECK(d.nominal_levels == c.nominal_levels);
  CHECK(d.methods == c.methods);
  REQUIRE(d.truth_analytic.has_value());
  CHECK(*d.truth_analytic == 1.0);
}

TEST_CASE("report json round trip and csv layout") {
  ScenarioConfig c;
  c.model = "vstat:gamma-kernel";
  c.divergence = "reverse-kl";
  c.data_law = "gamma(2,1)";
  c.n = 10;
  c.nominal_levels = {0.8};
  c.methods = {"el"};
  c.reps = 150;
  c.base_seed = 5;
  c.oracle_reps = 300;
  c.truth_pairs = 10000;
  c.threads = 1;
  const CoverageReport r = run_coverage(c);
  const auto j = report_to_json(r);
  const CoverageReport rr = report_from_json(j);
  CHECK(report_to_json(rr).dump() == j.dump());

  const std::string csv = report_to_csv(r);
  CHECK(csv.rfind("method,level,coverage,half_width,mean_width,failures\n",
                  0) == 0);
  CHECK(csv.find("el,0.8") != std::string::npos);
}
