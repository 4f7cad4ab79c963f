#include "hazrate/rate_engine.hpp"

#include <cmath>

#include <fmt/core.h>

#include "hazrate/error.hpp"
#include "hazrate/numerics.hpp"

namespace hazrate {

namespace {

constexpr double kVacuousOccupation = 1e-12;

struct OccupationTable {
  std::vector<double> p01;        // int_0^t w(u, t) du per node
  std::vector<double> numerator;  // int_0^t w(u, t) lambda12(t | u) du per node
};

std::vector<double> entry_density(const IllnessDeathModel& m) {
  // P00(0, u) * lambda01(u) at every node.
  const GridFunction out_of_zero = cumulative(m.lambda01 + m.lambda02);
  std::vector<double> d(out_of_zero.size());
  for (std::size_t j = 0; j < d.size(); ++j) d[j] = std::exp(-out_of_zero[j]) * m.lambda01[j];
  return d;
}

// Trapezoid over u in panels [u_j, u_{j+1}]. The kernel is evaluated with one-sided limits
// from inside each panel so a jump of lambda12 in u at a node costs no quadrature error.
OccupationTable tabulate_occupation(const IllnessDeathModel& m) {
  const Grid& g = m.grid();
  const std::size_t n = g.size();
  const double half = 0.5 * g.step();
  const std::vector<double> density = entry_density(m);

  OccupationTable table{std::vector<double>(n, 0.0), std::vector<double>(n, 0.0)};
  std::vector<double> w(n);
  for (std::size_t k = 1; k < n; ++k) {
    const double t = g.time(k);
    for (std::size_t j = 0; j <= k; ++j) {
      w[j] = density[j] * std::exp(-m.lambda12.cumulative(g.time(j), t));
    }
    double p01 = 0.0;
    double num = 0.0;
    for (std::size_t j = 0; j < k; ++j) {
      const double ulo = g.time(j);
      const double uhi = g.time(j + 1);
      p01 += half * (w[j] + w[j + 1]);
      num += half * (w[j] * m.lambda12(t, ulo) + w[j + 1] * m.lambda12.limit_from_below(t, uhi));
    }
    table.p01[k] = p01;
    table.numerator[k] = num;
  }
  return table;
}

}  // namespace

double p00(const IllnessDeathModel& model, double u) {
  return std::exp(-(trapz(model.lambda01, 0.0, u) + trapz(model.lambda02, 0.0, u)));
}

double p11(const IllnessDeathModel& model, double u, double t) {
  return std::exp(-kernel_cumulative(model.lambda12, u, t));
}

OccupationSlice occupation(const IllnessDeathModel& model, double t) {
  const Grid& g = model.grid();
  const std::size_t k = g.node_at(t);
  const std::vector<double> density = entry_density(model);
  OccupationSlice slice{g.time(k), std::vector<double>(k + 1), std::vector<double>(k + 1), 0.0};
  for (std::size_t j = 0; j <= k; ++j) {
    slice.u[j] = g.time(j);
    slice.weights[j] = density[j] * std::exp(-model.lambda12.cumulative(g.time(j), slice.t));
  }
  for (std::size_t j = 0; j < k; ++j) slice.p01 += 0.5 * g.step() * (slice.weights[j] + slice.weights[j + 1]);
  return slice;
}

GridFunction occupation_probability(const IllnessDeathModel& model) {
  return GridFunction(model.grid(), tabulate_occupation(model).p01);
}

TreatedRate rate_treated(const IllnessDeathModel& model) {
  const Grid& g = model.grid();
  const OccupationTable table = tabulate_occupation(model);
  std::vector<double> r(g.size());
  std::vector<double> vacuous;
  for (std::size_t k = 0; k < g.size(); ++k) {
    const double t = g.time(k);
    if (table.p01[k] < kVacuousOccupation) {
      r[k] = model.lambda12(t, t);
      vacuous.push_back(t);
    } else {
      r[k] = table.numerator[k] / table.p01[k];
    }
  }
  return {GridFunction(g, std::move(r)), std::move(vacuous)};
}

GridFunction rate_untreated(const IllnessDeathModel& model) { return model.lambda02; }

GridFunction ode_residual(const IllnessDeathModel& model, double beta) {
  const Grid& g = model.grid();
  const std::size_t n = g.size();
  if (n < 3) throw InvalidInput("ode_residual needs at least three grid nodes");
  const std::vector<double> p01 = tabulate_occupation(model).p01;
  const GridFunction out_of_zero = cumulative(model.lambda01 + model.lambda02);
  const double h = g.step();
  const double eb = std::exp(beta);

  std::vector<double> res(n);
  for (std::size_t k = 0; k < n; ++k) {
    double dp;
    if (k == 0) {
      dp = (-3.0 * p01[0] + 4.0 * p01[1] - p01[2]) / (2.0 * h);
    } else if (k == n - 1) {
      dp = (3.0 * p01[k] - 4.0 * p01[k - 1] + p01[k - 2]) / (2.0 * h);
    } else {
      dp = (p01[k + 1] - p01[k - 1]) / (2.0 * h);
    }
    res[k] = dp + eb * model.lambda02[k] * p01[k] - std::exp(-out_of_zero[k]) * model.lambda01[k];
  }
  return GridFunction(g, std::move(res));
}

}  // namespace hazrate
