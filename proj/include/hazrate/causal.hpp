#pragma once

#include "hazrate/grid.hpp"
#include "hazrate/model.hpp"
#include "hazrate/regime.hpp"

namespace hazrate {

// Survival of the potential outcome under a static regime, with no confounding:
// never -> exp(-Lambda02(t)), always -> exp(-int_0^t lambda12(s|0) ds),
// initiate_at(u) -> exp(-Lambda02(min(t,u)) - int_u^t lambda12(s|u) ds for t > u).
GridFunction potential_survival(const IllnessDeathModel& model, const Regime& regime);

// exp(-int_0^t rate): what one gets by treating a rate as if it were a hazard.
GridFunction rate_based_survival(const GridFunction& rate);

// lambda12(t | 0) / lambda02(t). Throws DomainError where lambda02 < 1e-12.
GridFunction causal_hazard_ratio(const IllnessDeathModel& model);

// log S1(t) / log S0(t) when the hazard is lambda0(t) exp(beta A(t) + gamma D(t)) and D is time on
// treatment: e^beta int_0^t lambda0(u) e^{gamma u} du / Lambda0(t). lambda0 is integrated exactly as
// a piecewise-linear function.
double duration_model_ratio(const GridFunction& lambda0, double beta, double gamma, double t);

}  // namespace hazrate
