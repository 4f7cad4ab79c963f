#include <cmath>
#include <random>

#include <doctest.h>

#include "hazrate/error.hpp"
#include "hazrate/grid.hpp"
#include "hazrate/kernel.hpp"

using namespace hazrate;
using doctest::Approx;

TEST_SUITE("grid") {
  TEST_CASE("default grid has 601 nodes on [0, 3]") {
    const Grid g;
    CHECK(g.size() == 601);
    CHECK(g.last_time() == Approx(3.0).epsilon(1e-15));
    CHECK(g.node_at(1.5) == 300);
    CHECK_THROWS_AS(g.node_at(0.0025), InvalidInput);
    CHECK(g.panel_of(3.0) == 599);
    CHECK(g.panel_of(0.0) == 0);
  }

  TEST_CASE("bad grids are rejected") {
    CHECK_THROWS_AS(Grid(3.0, 0.0), InvalidInput);
    CHECK_THROWS_AS(Grid(-1.0, 0.1), InvalidInput);
    CHECK_THROWS_AS(Grid(0.01, 0.1), InvalidInput);
    CHECK_THROWS_AS(GridFunction(Grid(1.0, 0.5), {1.0, 2.0}), GridMismatch);
    CHECK_THROWS_AS(GridFunction(Grid(1.0, 0.5), {1.0, NAN, 2.0}), InvalidInput);
  }

  TEST_CASE("linear interpolation between nodes") {
    const GridFunction f(Grid(1.0, 0.5), {0.0, 1.0, 4.0});
    CHECK(f.at(0.25) == Approx(0.5));
    CHECK(f.at(0.75) == Approx(2.5));
    CHECK(f.at(1.0) == 4.0);
    CHECK_THROWS_AS(f.at(1.2), InvalidInput);
    CHECK_THROWS_AS(f.at(-0.1), InvalidInput);
  }

  TEST_CASE("cumulative of zero is zero") {
    const GridFunction c = cumulative(GridFunction::constant(Grid(), 0.0));
    CHECK(c.max() == 0.0);
    CHECK(c.min() == 0.0);
  }

  TEST_CASE("cumulative of a constant") {
    const GridFunction c = cumulative(GridFunction::constant(Grid(), 0.3));
    CHECK(std::abs(c.at(2.0) - 0.6) < 1e-12);
    CHECK(c[0] == 0.0);
  }

  TEST_CASE("cumulative of t on [0,1] with step 0.01") {
    const Grid g(1.0, 0.01);
    const GridFunction c = cumulative(GridFunction::tabulate(g, [](double t) { return t; }));
    CHECK(std::abs(c.at(1.0) - 0.5) < 1e-6);
  }

  TEST_CASE("cumulative checks the expected grid") {
    const GridFunction f = GridFunction::constant(Grid(1.0, 0.1), 1.0);
    CHECK_THROWS_AS(cumulative(f, Grid(1.0, 0.05)), GridMismatch);
    CHECK_NOTHROW(cumulative(f, Grid(1.0, 0.1)));
  }

  TEST_CASE("survival from cumulative") {
    const Grid g;
    const GridFunction one = survival_from_cumulative(GridFunction::constant(g, 0.0));
    CHECK(one.min() == 1.0);
    const GridFunction s = survival_from_cumulative(GridFunction::tabulate(g, [](double t) { return 0.6 * t; }));
    CHECK(s.at(1.0) == Approx(0.548811636094026).epsilon(1e-12));
    CHECK(s[0] == 1.0);
  }

  TEST_CASE("property: cumulative is linear") {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> U(0.0, 2.0);
    const Grid g(2.0, 0.01);
    for (int rep = 0; rep < 20; ++rep) {
      std::vector<double> fv(g.size()), gv(g.size());
      for (auto& v : fv) v = U(rng);
      for (auto& v : gv) v = U(rng);
      const double a = U(rng);
      const double b = U(rng);
      const GridFunction f(g, fv), h(g, gv);
      const GridFunction lhs = cumulative(a * f + b * h);
      const GridFunction rhs = a * cumulative(f) + b * cumulative(h);
      for (std::size_t k = 0; k < g.size(); ++k) REQUIRE(std::abs(lhs[k] - rhs[k]) < 1e-12);
    }
  }

  TEST_CASE("property: survival of a constant hazard is exp(-ct) at nodes") {
    const Grid g;
    for (double c : {0.0, 0.1, 0.3, 1.7}) {
      const GridFunction s = survival_from_cumulative(cumulative(GridFunction::constant(g, c)));
      for (std::size_t k = 0; k < g.size(); ++k) REQUIRE(std::abs(s[k] - std::exp(-c * g.time(k))) < 1e-12);
    }
  }

  TEST_CASE("property: cumulative is non-decreasing for non-negative input") {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> U(0.0, 1.0);
    const Grid g(1.0, 0.01);
    std::vector<double> v(g.size());
    for (auto& x : v) x = U(rng);
    const GridFunction c = cumulative(GridFunction(g, v));
    for (std::size_t k = 1; k < g.size(); ++k) CHECK(c[k] >= c[k - 1]);
  }
}
