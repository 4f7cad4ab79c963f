#include "hazrate/prop_rates.hpp"

#include <cmath>
#include <stdexcept>

#include <fmt/core.h>

#include "hazrate/error.hpp"
#include "hazrate/rate_engine.hpp"

namespace hazrate {

namespace {

constexpr double kTinyHazard = 1e-12;

RateRatio ratio_of(const GridFunction& r12, const GridFunction& l02) {
  std::vector<double> ratio(l02.size());
  std::vector<double> flagged;
  for (std::size_t k = 0; k < ratio.size(); ++k) {
    if (l02[k] < kTinyHazard) {
      ratio[k] = 0.0;
      flagged.push_back(l02.time(k));
    } else {
      ratio[k] = r12[k] / l02[k];
    }
  }
  return {GridFunction(l02.grid(), std::move(ratio)), std::move(flagged)};
}

}  // namespace

RateRatio rate_ratio(const IllnessDeathModel& model) { return ratio_of(rate_treated(model).rate, model.lambda02); }

double sup_deviation(const RateRatio& rr, double target) {
  double sup = 0.0;
  std::size_t next_flag = 0;
  for (std::size_t k = 1; k < rr.ratio.size(); ++k) {
    const double t = rr.ratio.time(k);
    while (next_flag < rr.flagged_times.size() && rr.flagged_times[next_flag] < t) ++next_flag;
    if (next_flag < rr.flagged_times.size() && rr.flagged_times[next_flag] == t) continue;
    sup = std::max(sup, std::abs(rr.ratio[k] - target));
  }
  return sup;
}

BuildReport build_proportional_rates(const GridFunction& lambda01, const HazardKernel& lambda12, double beta,
                                     const GridFunction& init_lambda02, const SolverConfig& cfg) {
  cfg.validate();
  require_same_grid(lambda01.grid(), init_lambda02.grid(), "build_proportional_rates");
  if (!(init_lambda02.min() > 0.0)) throw InvalidInput("initial lambda02 must be strictly positive");

  const double target = std::exp(beta);
  IllnessDeathModel model(lambda01, init_lambda02, lambda12);
  GridFunction r12 = rate_treated(model).rate;
  std::vector<IterationDiagnostic> history;
  history.push_back({0, sup_deviation(ratio_of(r12, model.lambda02), target), init_lambda02, r12});

  bool converged = history.back().sup_deviation < cfg.tol;
  for (int it = 1; it <= cfg.max_iter && !converged; ++it) {
    std::vector<double> next(r12.size());
    for (std::size_t k = 0; k < next.size(); ++k) {
      next[k] = (1.0 - cfg.damping) * model.lambda02[k] + cfg.damping * r12[k] / target;
      if (next[k] < 0.0) {
        throw std::logic_error(fmt::format("lambda02 went negative ({}) at t={}", next[k], r12.time(k)));
      }
    }
    model = model.with_lambda02(GridFunction(r12.grid(), std::move(next)));
    r12 = rate_treated(model).rate;
    history.push_back({it, sup_deviation(ratio_of(r12, model.lambda02), target), model.lambda02, r12});
    converged = history.back().sup_deviation < cfg.tol;
  }
  return {model.lambda02, std::move(history), converged};
}

ExampleSetup example_setup(const Grid& grid) {
  return {grid, GridFunction::constant(grid, kExampleInitiationHazard), lagged_drop_kernel(), std::log(2.0 / 3.0),
          GridFunction::constant(grid, 1.0)};
}

IllnessDeathModel constructed_example_model(const Grid& grid, const SolverConfig& cfg) {
  const ExampleSetup s = example_setup(grid);
  const BuildReport report = build_proportional_rates(s.lambda01, s.lambda12, s.beta, s.init_lambda02, cfg);
  if (!report.converged) {
    throw ConvergenceError(
        fmt::format("proportional-rates construction did not converge (deviation {})", report.final_deviation()),
        report.updates());
  }
  return IllnessDeathModel(s.lambda01, report.lambda02, s.lambda12);
}

}  // namespace hazrate
