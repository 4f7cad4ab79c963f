#include <cmath>
#include <iostream>
#include <sstream>

#include <doctest.h>

#include "hazrate/error.hpp"
#include "hazrate/io.hpp"
#include "hazrate/prop_rates.hpp"
#include "hazrate/simulate.hpp"

using namespace hazrate;

TEST_SUITE("io") {
  TEST_CASE("counting rows are written with six decimals") {
    std::ostringstream os;
    write_counting_rows(os, {{7, 0.0, 0.5, 0, false}, {7, 0.5, 2.125, 1, true}});
    CHECK(os.str() == "id,start,stop,treat,event\n7,0.000000,0.500000,0,0\n7,0.500000,2.125000,1,1\n");
  }

  TEST_CASE("property: counting rows round trip") {
    SimConfig cfg;
    cfg.n = 500;
    auto trajs = simulate_cohort(constructed_example_model(), cfg);
    // six decimals: round the times first so the round trip is exact
    for (auto& t : trajs) {
      t.t_event = std::round(t.t_event * 1e6) / 1e6;
      if (t.u_init) {
        *t.u_init = std::round(*t.u_init * 1e6) / 1e6;
        if (*t.u_init >= t.t_event) t.u_init.reset();
      }
    }
    const auto rows = to_counting_rows(trajs);
    std::stringstream ss;
    write_counting_rows(ss, rows);
    CHECK(read_counting_rows(ss) == rows);
  }

  TEST_CASE("malformed counting-row CSV") {
    auto parse = [](const std::string& s) {
      std::istringstream is(s);
      return read_counting_rows(is);
    };
    CHECK_THROWS_AS(parse("id,begin,stop,treat,event\n"), InvalidInput);
    CHECK_THROWS_AS(parse("id,start,stop,treat,event\n1,0,1,0\n"), InvalidInput);
    CHECK_THROWS_AS(parse("id,start,stop,treat,event\n1,0,x,0,1\n"), InvalidInput);
    CHECK_THROWS_AS(parse("id,start,stop,treat,event\n1,0,1,0,2\n"), InvalidInput);
    CHECK_THROWS_AS(parse("id,start,stop,treat,event\n1,0,1,0,1\n1,1,2,1,0\n"), InvalidInput);
    CHECK(parse("id,start,stop,treat,event\n\n1,0,1.5,0,1\n").size() == 1);
    CHECK_THROWS_AS(read_counting_rows_file("/nonexistent/rows.csv"), InvalidInput);
  }

  TEST_CASE("model file round trip is exact") {
    const IllnessDeathModel m = constructed_example_model();
    std::stringstream ss;
    write_model(ss, m);
    const std::string text = ss.str();
    CHECK(text.rfind("# kernel two_piece early=0.4 late=0.2 lag=1\n", 0) == 0);
    const IllnessDeathModel back = read_model(ss);
    CHECK(back.grid() == m.grid());
    for (std::size_t k = 0; k < m.grid().size(); ++k) {
      REQUIRE(back.lambda02[k] == m.lambda02[k]);
      REQUIRE(back.lambda01[k] == m.lambda01[k]);
    }
    CHECK(back.lambda12(1.5, 0.0) == 0.2);
  }

  TEST_CASE("malformed model files") {
    auto parse = [](const std::string& s) {
      std::istringstream is(s);
      return read_model(is);
    };
    CHECK_THROWS_AS(parse("# grid t_max=1 step=0.5\nt,lambda01,lambda02\n0,1,1\n0.5,1,1\n1,1,1\n"), InvalidInput);
    CHECK_THROWS_AS(parse("# kernel two_piece early=0.4 late=0.2 lag=1\n# grid t_max=1 step=0.5\n"
                          "t,lambda01,lambda02\n0,1,1\n"),
                    GridMismatch);
    CHECK_THROWS_AS(parse("# kernel tabulated\n"), InvalidInput);
    CHECK_THROWS_AS(write_model(std::cout, IllnessDeathModel(GridFunction::constant(Grid(), 0.3),
                                                             GridFunction::constant(Grid(), 0.3),
                                                             HazardKernel::time_only(GridFunction::constant(Grid(), 0.1)))),
                    InvalidInput);
  }

  TEST_CASE("six significant digits") {
    CHECK(fmt6(2.0 / 3.0) == "0.666667");
    CHECK(fmt6(0.005) == "0.005");
    CHECK(fmt6(123456789.0) == "1.23457e+08");
  }
}
