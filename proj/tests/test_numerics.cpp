#include <cmath>
#include <random>

#include <doctest.h>

#include "hazrate/error.hpp"
#include "hazrate/numerics.hpp"

using namespace hazrate;
using doctest::Approx;

TEST_SUITE("numerics") {
  TEST_CASE("trapz examples") {
    const Grid g;
    CHECK(trapz(GridFunction::constant(g, 1.0), 0.0, 2.0) == Approx(2.0).epsilon(1e-14));
    CHECK(std::abs(trapz(GridFunction::tabulate(g, [](double t) { return 2 * t; }), 0.0, 1.0) - 1.0) < 1e-6);
    CHECK(std::abs(trapz(GridFunction::constant(g, 0.3), 0.25, 0.75) - 0.15) < 1e-12);
  }

  TEST_CASE("trapz is exact for linear integrands between arbitrary endpoints") {
    const GridFunction f = GridFunction::tabulate(Grid(), [](double t) { return 2 * t; });
    CHECK(std::abs(trapz(f, 0.1234, 0.789) - (0.789 * 0.789 - 0.1234 * 0.1234)) < 1e-12);
    CHECK(std::abs(trapz(f, 0.1231, 0.1234) - (0.1234 * 0.1234 - 0.1231 * 0.1231)) < 1e-12);
    CHECK(trapz(f, 0.7, 0.7) == 0.0);
  }

  TEST_CASE("trapz errors") {
    const GridFunction f = GridFunction::constant(Grid(), 1.0);
    CHECK_THROWS_AS(trapz(f, 1.0, 0.5), InvalidInput);
    CHECK_THROWS_AS(trapz(f, 0.0, 3.5), InvalidInput);
  }

  TEST_CASE("property: trapz additivity") {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> U(0.0, 3.0);
    std::vector<double> v(Grid().size());
    for (auto& x : v) x = U(rng);
    const GridFunction f(Grid(), v);
    for (int rep = 0; rep < 200; ++rep) {
      double p[3] = {U(rng), U(rng), U(rng)};
      std::sort(p, p + 3);
      REQUIRE(std::abs(trapz(f, p[0], p[2]) - trapz(f, p[0], p[1]) - trapz(f, p[1], p[2])) < 1e-12);
    }
  }

  TEST_CASE("newton on a linear function takes one step") {
    const NewtonResult r = newton_scalar([](double x) { return std::make_pair(x - 1.0, 1.0); }, 0.0);
    CHECK(r.root == 1.0);
    CHECK(r.iterations == 1);
  }

  TEST_CASE("newton finds sqrt 2") {
    const SolverConfig cfg = SolverConfig::newton();
    const NewtonResult r = newton_scalar([](double x) { return std::make_pair(x * x - 2.0, 2.0 * x); }, 1.0, cfg);
    CHECK(std::abs(r.root - std::sqrt(2.0)) < cfg.tol);
  }

  TEST_CASE("newton on exp(x) - 1 from 5") {
    const NewtonResult r = newton_scalar([](double x) { return std::make_pair(std::expm1(x), std::exp(x)); }, 5.0);
    CHECK(std::abs(r.root) < 1e-10);
  }

  TEST_CASE("newton failure modes") {
    // flat derivative at the start
    CHECK_THROWS_AS(newton_scalar([](double x) { return std::make_pair(x * x + 1.0, 2.0 * x); }, 0.0),
                    ConvergenceError);
    // no real root: iterates wander until the cap
    SolverConfig cfg = SolverConfig::newton();
    cfg.max_iter = 5;
    try {
      newton_scalar([](double x) { return std::make_pair(x * x + 1.0, 2.0 * x); }, 0.3, cfg);
      FAIL("expected ConvergenceError");
    } catch (const ConvergenceError& e) {
      CHECK(e.iterations() <= 5);
    }
    CHECK_THROWS_AS(newton_scalar([](double) { return std::make_pair(NAN, 1.0); }, 0.0), ConvergenceError);
  }

  TEST_CASE("solver config validation") {
    CHECK_NOTHROW(SolverConfig::newton().validate());
    CHECK_NOTHROW(SolverConfig::fixed_point().validate());
    CHECK(SolverConfig::fixed_point().tol == 1e-6);
    CHECK(SolverConfig::newton().tol == 1e-10);
    CHECK_THROWS_AS((SolverConfig{0.0, 10, 1.0}.validate()), InvalidInput);
    CHECK_THROWS_AS((SolverConfig{1e-6, 0, 1.0}.validate()), InvalidInput);
    CHECK_THROWS_AS((SolverConfig{1e-6, 10, 0.0}.validate()), InvalidInput);
    CHECK_THROWS_AS((SolverConfig{1e-6, 10, 1.5}.validate()), InvalidInput);
  }

  TEST_CASE("inverse cdf examples") {
    const Grid g;
    const GridFunction id = GridFunction::tabulate(g, [](double t) { return t; });
    CHECK(std::abs(*inverse_cdf_sample(id, 0.7) - 0.7) < 1e-9);
    const GridFunction slow = GridFunction::tabulate(g, [](double t) { return 0.3 * t; });
    CHECK_FALSE(inverse_cdf_sample(slow, 2.0).has_value());
    const GridFunction mid = GridFunction::tabulate(g, [](double t) { return 0.6 * t; });
    CHECK(std::abs(*inverse_cdf_sample(mid, 0.6) - 1.0) < 1e-9);
  }

  TEST_CASE("property: inverse cdf round trip at nodes") {
    const Grid g;
    const GridFunction L = GridFunction::tabulate(g, [](double t) { return 0.2 * t + 0.1 * t * t; });
    for (std::size_t k = 1; k < g.size(); ++k) {
      const auto t = inverse_cdf_sample(L, L[k]);
      REQUIRE(t.has_value());
      REQUIRE(std::abs(*t - g.time(k)) <= g.step());
    }
  }
}
