// Simulation checks against exact computations; the larger cohorts live here.
#include <cmath>

#include <doctest.h>

#include "hazrate/causal.hpp"
#include "hazrate/estimators.hpp"
#include "hazrate/frailty.hpp"
#include "hazrate/numerics.hpp"
#include "hazrate/prop_rates.hpp"
#include "hazrate/rate_engine.hpp"
#include "hazrate/simulate.hpp"

using namespace hazrate;

namespace {

// Observed events vs the compensator accumulated over [a, b].
struct OE {
  double observed = 0;
  double expected = 0;
  double z() const { return (observed - expected) / std::sqrt(expected); }
};

}  // namespace

TEST_SUITE("montecarlo") {
  TEST_CASE("death rate among the treated matches the rate engine") {
    const IllnessDeathModel m = constructed_example_model();
    const GridFunction r12 = rate_treated(m).rate;
    SimConfig cfg;
    cfg.n = 1000000;
    cfg.seed = 77;
    const auto trajs = simulate_cohort(m, cfg);
    for (double t : {0.5, 1.5, 2.5}) {
      const double a = t - 0.05, b = t + 0.05;
      OE oe;
      for (const auto& tr : trajs) {
        if (!tr.u_init) continue;
        const double lo = std::max(a, *tr.u_init), hi = std::min(b, tr.t_event);
        if (hi <= lo) continue;
        oe.expected += trapz(r12, lo, hi);
        oe.observed += tr.event && tr.t_event > a && tr.t_event <= b;
      }
      INFO("t = " << t << " O = " << oe.observed << " E = " << oe.expected);
      CHECK(std::abs(oe.z()) < 3.0);
    }
  }

  TEST_CASE("state-1 occupancy at the horizon") {
    const IllnessDeathModel m = constructed_example_model();
    SimConfig cfg;
    cfg.n = 1000000;
    cfg.seed = 78;
    std::size_t in_state_1 = 0;
    for (const auto& tr : simulate_cohort(m, cfg)) in_state_1 += tr.u_init && !tr.event;
    const double p = occupation(m, 3.0).p01;
    const double phat = static_cast<double>(in_state_1) / cfg.n;
    INFO("p01 = " << p << " empirical = " << phat);
    CHECK(std::abs(phat - p) < 3 * std::sqrt(p * (1 - p) / cfg.n));
  }

  TEST_CASE("forced regimes reproduce potential survival") {
    const IllnessDeathModel m = constructed_example_model();
    SimConfig cfg;
    cfg.n = 1000000;
    cfg.seed = 79;
    for (const Regime& regime : {Regime::never(), Regime::always(), Regime::initiate_at(1.0)}) {
      const auto trajs = simulate_regime(m, regime, cfg);
      const GridFunction s = potential_survival(m, regime);
      for (double t : {1.0, 2.0, 3.0}) {
        std::size_t alive = 0;
        for (const auto& tr : trajs) alive += t < 3.0 ? tr.t_event > t : !tr.event;
        const double shat = static_cast<double>(alive) / cfg.n;
        const double p = s.at(t);
        INFO(regime.describe() << " t = " << t << " exact " << p << " empirical " << shat);
        CHECK(std::abs(shat - p) < 3 * std::sqrt(p * (1 - p) / cfg.n));
      }
    }
  }

  TEST_CASE("gamma frailty: empirical hazards match the closed form") {
    const Grid g;
    const ConditionalHazardSpec spec(GridFunction::constant(g, 0.3), GridFunction::constant(g, 0.5));
    const FrailtySpec f = FrailtySpec::gamma(1.0);
    SimConfig cfg;
    cfg.n = 1000000;
    cfg.seed = 80;
    const auto cohort = sample_frailty_cohort(spec, f, GridFunction::constant(g, 0.5), cfg);
    for (double t : {0.5, 1.0, 2.0}) {
      const double a = t - 0.05, b = t + 0.05;
      OE level[2];
      for (const auto& tr : cohort) {
        const double u = tr.u_init.value_or(INFINITY);
        const TreatmentPath path{tr.u_init};
        // untreated part of the window, then treated part
        const double pieces[2][2] = {{a, std::min({b, u, tr.t_event})}, {std::max(a, u), std::min(b, tr.t_event)}};
        for (int l = 0; l < 2; ++l) {
          const double lo = pieces[l][0], hi = pieces[l][1];
          if (hi <= lo) continue;
          level[l].expected += marginal_hazard_at(spec, f, path, 0.5 * (lo + hi)) * (hi - lo);
        }
        if (tr.event && tr.t_event > a && tr.t_event <= b) level[path.level(tr.t_event)].observed += 1;
      }
      for (int l = 0; l < 2; ++l) {
        INFO("t = " << t << " level " << l << " O = " << level[l].observed << " E = " << level[l].expected);
        CHECK(std::abs(level[l].z()) < 3.0);
      }
    }
  }

  TEST_CASE("Cox recovers beta from a Markov proportional hazards model") {
    const Grid g;
    const double beta = std::log(2.0 / 3.0);
    const GridFunction l02 = GridFunction::tabulate(g, [](double t) { return 0.4 + 0.1 * t; });
    const IllnessDeathModel m(GridFunction::constant(g, 0.3), l02, HazardKernel::time_only(std::exp(beta) * l02));
    SimConfig cfg;
    cfg.n = 100000;
    cfg.seed = 81;
    const CoxFit fit = cox_fit(to_counting_rows(simulate_cohort(m, cfg)), CoxCovariates::current_level);
    CHECK(std::abs(fit.coef[0] - beta) < 0.03);
    CHECK(std::abs(fit.robust_se[0] / fit.model_se[0] - 1.0) < 0.15);
  }

  TEST_CASE("zero-effect data: beta near 0 and sandwich close to model variance") {
    const Grid g;
    const GridFunction l02 = GridFunction::constant(g, 0.5);
    const IllnessDeathModel m(GridFunction::constant(g, 0.3), l02, HazardKernel::time_only(l02));
    SimConfig cfg;
    cfg.n = 100000;
    cfg.seed = 82;
    const CoxFit fit = cox_fit(to_counting_rows(simulate_cohort(m, cfg)), CoxCovariates::current_level);
    CHECK(std::abs(fit.coef[0]) < 0.03);
    CHECK(std::abs(fit.robust_se[0] / fit.model_se[0] - 1.0) < 0.15);
  }

  TEST_CASE("Cox on the non-Markov example recovers the rate ratio; duration model finds gamma < 0") {
    const IllnessDeathModel m = constructed_example_model();
    SimConfig cfg;
    cfg.n = 100000;
    cfg.seed = 83;
    const auto rows = to_counting_rows(simulate_cohort(m, cfg));
    const CoxFit fit = cox_fit(rows, CoxCovariates::current_level);
    CHECK(std::abs(fit.coef[0] - std::log(2.0 / 3.0)) < 0.03);
    const CoxFit dur = cox_fit(rows, CoxCovariates::level_and_duration);
    CHECK(dur.coef[1] < 0.0);
    CHECK(dur.coef[1] / dur.robust_se[1] < -3.0);
  }

  TEST_CASE("Nelson-Aalen is pointwise consistent with the exact cumulative rates") {
    const IllnessDeathModel m = constructed_example_model();
    const GridFunction R1 = cumulative(rate_treated(m).rate), R0 = cumulative(m.lambda02);
    SimConfig cfg;
    cfg.n = 100000;
    cfg.seed = 84;
    const auto rows = to_counting_rows(simulate_cohort(m, cfg));
    const auto na = nelson_aalen_by_treatment(rows);
    for (int a = 0; a < 2; ++a) {
      const StepFunction& R = na.at(a);
      for (double t : {1.0, 2.0, 2.5}) {
        // Greenwood-type variance: sum of squared jumps
        double var = 0;
        for (std::size_t i = 0; i < R.size() && R.jump_times[i] <= t; ++i) var += R.increment(i) * R.increment(i);
        const double exact = (a ? R1 : R0).at(t);
        INFO("a = " << a << " t = " << t << " est " << R(t) << " exact " << exact);
        CHECK(std::abs(R(t) - exact) < 3 * std::sqrt(var));
      }
    }
  }
}
