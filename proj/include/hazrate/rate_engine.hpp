#pragma once

#include <vector>

#include "hazrate/grid.hpp"
#include "hazrate/model.hpp"

namespace hazrate {

// State-1 occupation at time t, resolved by initiation time u in [0, t]:
// w(u, t) = P00(0, u) * lambda01(u) * P11(u, t | u), p01 = int_0^t w(u, t) du.
struct OccupationSlice {
  double t;
  std::vector<double> u;
  std::vector<double> weights;
  double p01;
};

double p00(const IllnessDeathModel& model, double u);
double p11(const IllnessDeathModel& model, double u, double t);

// t must be a grid node.
OccupationSlice occupation(const IllnessDeathModel& model, double t);
// P01(0, t) at every grid node.
GridFunction occupation_probability(const IllnessDeathModel& model);

struct TreatedRate {
  GridFunction rate;
  // Nodes where P01 < 1e-12; the rate there is lambda12(t | t) by continuity.
  std::vector<double> vacuous_times;
};

// Rate of death among the currently treated: E(lambda12(t | U) | X(t) = 1).
TreatedRate rate_treated(const IllnessDeathModel& model);

// Rate of death among the untreated. Only one history leads to state 0, so this is lambda02.
GridFunction rate_untreated(const IllnessDeathModel& model);

// d/dt P01 + e^beta lambda02 P01 - P00 lambda01, with P01 differentiated by central differences.
// Vanishes exactly when the proportional-rates equation r12 = e^beta lambda02 holds.
GridFunction ode_residual(const IllnessDeathModel& model, double beta);

}  // namespace hazrate
