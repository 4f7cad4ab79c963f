#pragma once

#include <vector>

#include "hazrate/grid.hpp"
#include "hazrate/model.hpp"
#include "hazrate/numerics.hpp"

namespace hazrate {

struct IterationDiagnostic {
  int index;             // 0 is the initial guess
  double sup_deviation;  // sup_{t > 0} |r12 / lambda02 - e^beta|
  GridFunction lambda02;
  GridFunction rate_treated;
};

struct BuildReport {
  GridFunction lambda02;
  std::vector<IterationDiagnostic> iterations;
  bool converged = false;

  double final_deviation() const { return iterations.back().sup_deviation; }
  // Number of updates performed after the initial guess.
  int updates() const { return iterations.back().index; }
};

// Fixed-point search for lambda02 such that the rate among the treated is e^beta times the
// rate among the untreated: alternate lambda02 <- r12 e^{-beta} and recompute r12.
// With cfg.damping < 1 the update blends in the previous iterate.
// Never throws on non-convergence; inspect BuildReport::converged.
BuildReport build_proportional_rates(const GridFunction& lambda01, const HazardKernel& lambda12, double beta,
                                     const GridFunction& init_lambda02,
                                     const SolverConfig& cfg = SolverConfig::fixed_point());

struct RateRatio {
  GridFunction ratio;                // r12 / lambda02, 0 at flagged nodes
  std::vector<double> flagged_times;  // lambda02 < 1e-12
};

RateRatio rate_ratio(const IllnessDeathModel& model);

// Sup over nodes t > 0 of |ratio - target|, ignoring flagged nodes.
double sup_deviation(const RateRatio& rr, double target);

// The worked example inputs: lambda01 = 0.3, lagged_drop_kernel, beta = log(2/3), lambda02 init = 1.
struct ExampleSetup {
  Grid grid;
  GridFunction lambda01;
  HazardKernel lambda12;
  double beta;
  GridFunction init_lambda02;
};
ExampleSetup example_setup(const Grid& grid = Grid());

// Runs the builder on example_setup and returns the converged model. Throws ConvergenceError on failure.
IllnessDeathModel constructed_example_model(const Grid& grid = Grid(),
                                            const SolverConfig& cfg = SolverConfig::fixed_point());

}  // namespace hazrate
