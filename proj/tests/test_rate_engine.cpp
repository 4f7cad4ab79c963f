#include <cmath>

#include <doctest.h>

#include "hazrate/error.hpp"
#include "hazrate/numerics.hpp"
#include "hazrate/prop_rates.hpp"
#include "hazrate/rate_engine.hpp"

using namespace hazrate;
using doctest::Approx;

namespace {

IllnessDeathModel example_with_lambda02(double l02) {
  const Grid g;
  return IllnessDeathModel(GridFunction::constant(g, 0.3), GridFunction::constant(g, l02), lagged_drop_kernel());
}

// Simpson's rule on [a, b] with n (even) panels.
template <class F>
double simpson(F f, double a, double b, int n = 4000) {
  if (b <= a) return 0.0;
  const double h = (b - a) / n;
  double s = f(a) + f(b);
  for (int i = 1; i < n; ++i) s += f(a + i * h) * (i % 2 ? 4.0 : 2.0);
  return s * h / 3.0;
}

// r12(t) for constant lambda01 = a, lambda02 = b and the 0.4/0.2 lag-1 kernel, by direct quadrature.
double r12_oracle(double t, double a, double b) {
  auto K = [&](double u) { return t - u <= 1.0 ? 0.4 * (t - u) : 0.4 + 0.2 * (t - u - 1.0); };
  auto w = [&](double u) { return std::exp(-(a + b) * u) * a * std::exp(-K(u)); };
  const double split = std::max(0.0, t - 1.0);
  const double late = simpson([&](double u) { return w(u) * 0.2; }, 0.0, split);
  const double early = simpson([&](double u) { return w(u) * 0.4; }, split, t);
  const double mass = simpson(w, 0.0, split) + simpson(w, split, t);
  return (late + early) / mass;
}

}  // namespace

TEST_SUITE("rate_engine") {
  TEST_CASE("p00 examples") {
    const IllnessDeathModel m = example_with_lambda02(0.6);
    CHECK(p00(m, 0.0) == 1.0);
    CHECK(p00(m, 1.0) == Approx(std::exp(-0.9)).epsilon(1e-12));
    const Grid g;
    const IllnessDeathModel zero(GridFunction::constant(g, 0.0), GridFunction::constant(g, 0.0), lagged_drop_kernel());
    CHECK(p00(zero, 2.3) == 1.0);
  }

  TEST_CASE("p11 examples") {
    const IllnessDeathModel m = example_with_lambda02(0.6);
    CHECK(p11(m, 0.7, 0.7) == 1.0);
    CHECK(p11(m, 0.0, 1.0) == Approx(std::exp(-0.4)).epsilon(1e-12));
    CHECK(p11(m, 0.0, 2.0) == Approx(std::exp(-0.6)).epsilon(1e-12));
    CHECK_THROWS_AS(p11(m, 1.0, 0.5), InvalidInput);
  }

  TEST_CASE("occupation at t = 0 and the no-death closed form") {
    const IllnessDeathModel m = example_with_lambda02(0.6);
    CHECK(occupation(m, 0.0).p01 == 0.0);
    const Grid g;
    const IllnessDeathModel nodeath(GridFunction::constant(g, 0.3), GridFunction::constant(g, 0.0),
                                    HazardKernel::two_piece(0.0, 0.0, 1.0));
    const GridFunction p01 = occupation_probability(nodeath);
    for (double t : {0.5, 1.0, 2.0, 3.0}) CHECK(std::abs(p01.at(t) - (1.0 - std::exp(-0.3 * t))) < 1e-5);
    CHECK_THROWS_AS(occupation(m, 0.0025), InvalidInput);
  }

  TEST_CASE("occupation slice: weights are non-negative and integrate to p01") {
    const IllnessDeathModel m = example_with_lambda02(1.0);
    const OccupationSlice s = occupation(m, 2.0);
    REQUIRE(s.u.size() == s.weights.size());
    double tr = 0.0;
    for (std::size_t j = 0; j < s.weights.size(); ++j) {
      CHECK(s.weights[j] >= 0.0);
      if (j > 0) tr += 0.5 * (s.weights[j] + s.weights[j - 1]) * (s.u[j] - s.u[j - 1]);
    }
    CHECK(s.p01 == Approx(tr).epsilon(1e-3));
    CHECK(s.p01 > 0.0);
    CHECK(s.p01 < 1.0);
    CHECK(s.p01 == Approx(occupation_probability(m).at(2.0)).epsilon(1e-12));
  }

  TEST_CASE("rate among the treated for a Markov kernel is the kernel") {
    const Grid g;
    const GridFunction h = GridFunction::tabulate(g, [](double t) { return 0.2 + 0.1 * std::sin(t); });
    const IllnessDeathModel m(GridFunction::constant(g, 0.3), GridFunction::constant(g, 0.5), HazardKernel::time_only(h));
    const GridFunction r = rate_treated(m).rate;
    for (std::size_t k = 0; k < g.size(); ++k) REQUIRE(std::abs(r[k] - h[k]) < 1e-9);
  }

  TEST_CASE("rate among the treated is 0.4 on [0, 1] for the lagged kernel") {
    const IllnessDeathModel m = example_with_lambda02(1.0);
    const TreatedRate r = rate_treated(m);
    for (std::size_t k = 0; k <= 200; ++k) REQUIRE(std::abs(r.rate[k] - 0.4) < 1e-9);
    REQUIRE(r.vacuous_times.size() == 1);
    CHECK(r.vacuous_times[0] == 0.0);
  }

  TEST_CASE("rate among the treated matches direct quadrature") {
    for (double b : {0.3, 1.0}) {
      const IllnessDeathModel m = example_with_lambda02(b);
      const GridFunction r = rate_treated(m).rate;
      for (double t : {0.5, 1.2, 1.5, 2.0, 2.7, 3.0}) CHECK(std::abs(r.at(t) - r12_oracle(t, 0.3, b)) < 1e-5);
    }
  }

  TEST_CASE("property: rate lies between kernel extremes") {
    const IllnessDeathModel m = example_with_lambda02(0.8);
    const GridFunction r = rate_treated(m).rate;
    for (std::size_t k = 0; k < r.size(); ++k) {
      REQUIRE(r[k] >= 0.2 - 1e-12);
      REQUIRE(r[k] <= 0.4 + 1e-12);
    }
  }

  TEST_CASE("rate among the untreated is lambda02") {
    const IllnessDeathModel m = example_with_lambda02(0.45);
    const GridFunction r0 = rate_untreated(m);
    for (std::size_t k = 0; k < r0.size(); ++k) REQUIRE(r0[k] == m.lambda02[k]);
    const IllnessDeathModel c = constructed_example_model();
    for (std::size_t k = 0; k <= 200; ++k) REQUIRE(std::abs(rate_untreated(c)[k] - 0.6) < 1e-4);
    CHECK(rate_untreated(example_with_lambda02(0.0)).max() == 0.0);
  }

  TEST_CASE("ode residual") {
    const double beta = std::log(2.0 / 3.0);
    const IllnessDeathModel c = constructed_example_model();
    GridFunction res = ode_residual(c, beta);
    CHECK(std::max(std::abs(res.min()), std::abs(res.max())) < 1e-3);

    const Grid g;
    const GridFunction l02 = GridFunction::tabulate(g, [](double t) { return 0.5 + 0.1 * t; });
    const IllnessDeathModel markov(GridFunction::constant(g, 0.3), l02, HazardKernel::time_only(std::exp(beta) * l02));
    res = ode_residual(markov, beta);
    CHECK(std::max(std::abs(res.min()), std::abs(res.max())) < 1e-4);

    res = ode_residual(example_with_lambda02(1.0), beta);
    CHECK(std::max(std::abs(res.min()), std::abs(res.max())) > 0.01);
  }
}
