#include "hazrate/causal.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/core.h>

#include "hazrate/error.hpp"
#include "hazrate/kernel.hpp"
#include "hazrate/numerics.hpp"

namespace hazrate {

std::string Regime::describe() const {
  switch (kind) {
    case Kind::never:
      return "never";
    case Kind::always:
      return "always";
    case Kind::initiate_at:
      return fmt::format("initiate_at({})", u);
  }
  return "unknown";
}

GridFunction potential_survival(const IllnessDeathModel& model, const Regime& regime) {
  const Grid& g = model.grid();
  switch (regime.kind) {
    case Regime::Kind::never:
      return survival_from_cumulative(cumulative(model.lambda02));
    case Regime::Kind::always:
      return GridFunction::tabulate(g, [&](double t) { return std::exp(-model.lambda12.cumulative(0.0, t)); });
    case Regime::Kind::initiate_at:
      break;
  }
  const double u = regime.u;
  if (!(u >= 0.0) || u > g.last_time() * (1.0 + 1e-12)) {
    throw InvalidInput(fmt::format("initiate_at({}) outside [0, {}]", u, g.last_time()));
  }
  const GridFunction L02 = cumulative(model.lambda02);
  const double L02u = trapz(model.lambda02, 0.0, std::min(u, g.last_time()));
  std::vector<double> s(g.size());
  for (std::size_t k = 0; k < g.size(); ++k) {
    const double t = g.time(k);
    s[k] = t <= u ? std::exp(-L02[k]) : std::exp(-L02u - model.lambda12.cumulative(u, t));
  }
  return GridFunction(g, std::move(s));
}

GridFunction rate_based_survival(const GridFunction& rate) {
  if (!rate.nonnegative()) throw InvalidInput("rate_based_survival: rate must be non-negative");
  return survival_from_cumulative(cumulative(rate));
}

GridFunction causal_hazard_ratio(const IllnessDeathModel& model) {
  const Grid& g = model.grid();
  std::vector<double> out(g.size());
  for (std::size_t k = 0; k < g.size(); ++k) {
    const double t = g.time(k);
    const double l02 = model.lambda02[k];
    if (l02 < 1e-12) throw DomainError(fmt::format("causal_hazard_ratio: lambda02({}) = {} is zero", t, l02));
    out[k] = model.lambda12(t, 0.0) / l02;
  }
  return GridFunction(g, std::move(out));
}

namespace {

// int_a^{a+h} e^{gamma s} (c0 + c1 (s - a)) ds
double panel_integral(double a, double h, double c0, double c1, double gamma) {
  const double x = gamma * h;
  double m0;  // int_0^1 e^{x v} dv
  double m1;  // int_0^1 v e^{x v} dv
  if (std::abs(x) < 1e-3) {
    m0 = 1.0 + x / 2.0 + x * x / 6.0 + x * x * x / 24.0;
    m1 = 0.5 + x / 3.0 + x * x / 8.0 + x * x * x / 30.0;
  } else {
    m0 = std::expm1(x) / x;
    m1 = (x * std::exp(x) - std::expm1(x)) / (x * x);
  }
  return std::exp(gamma * a) * h * (c0 * m0 + c1 * h * m1);
}

}  // namespace

double duration_model_ratio(const GridFunction& lambda0, double beta, double gamma, double t) {
  if (!std::isfinite(beta) || !std::isfinite(gamma)) throw InvalidInput("duration_model_ratio: non-finite coefficient");
  const Grid& g = lambda0.grid();
  if (!(t > 0.0) || t > g.last_time() * (1.0 + 1e-12)) {
    throw InvalidInput(fmt::format("duration_model_ratio: t = {} outside (0, {}]", t, g.last_time()));
  }
  t = std::min(t, g.last_time());
  const double L0 = trapz(lambda0, 0.0, t);
  if (!(L0 > 0.0)) throw DomainError(fmt::format("duration_model_ratio: Lambda0({}) = {}", t, L0));
  if (gamma == 0.0) return std::exp(beta);

  double num = 0.0;
  for (std::size_t k = 0; k + 1 < g.size() && g.time(k) < t; ++k) {
    const double a = g.time(k);
    const double slope = (lambda0[k + 1] - lambda0[k]) / g.step();
    const double h = std::min(g.step(), t - a);
    num += panel_integral(a, h, lambda0[k], slope, gamma);
  }
  return std::exp(beta) * num / L0;
}

}  // namespace hazrate
