#include "hazrate/numerics.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/core.h>

#include "hazrate/error.hpp"

namespace hazrate {

void SolverConfig::validate() const {
  if (!(tol > 0.0)) throw InvalidInput(fmt::format("solver tol must be positive, got {}", tol));
  if (max_iter < 1) throw InvalidInput(fmt::format("solver max_iter must be >= 1, got {}", max_iter));
  if (!(damping > 0.0 && damping <= 1.0)) {
    throw InvalidInput(fmt::format("solver damping must lie in (0, 1], got {}", damping));
  }
}

namespace {

// Integral of the linear segment on panel k between local offsets x0 <= x1 (in time units).
double panel_integral(const GridFunction& f, std::size_t k, double x0, double x1) {
  const double h = f.grid().step();
  const double slope = (f[k + 1] - f[k]) / h;
  const double f0 = f[k] + slope * x0;
  const double f1 = f[k] + slope * x1;
  return 0.5 * (f0 + f1) * (x1 - x0);
}

}  // namespace

double trapz(const GridFunction& f, double a, double b) {
  if (a > b) throw InvalidInput(fmt::format("trapz: lower limit {} exceeds upper limit {}", a, b));
  const Grid& g = f.grid();
  if (!g.contains(a) || !g.contains(b)) {
    throw InvalidInput(fmt::format("trapz: [{}, {}] outside grid [0, {}]", a, b, g.last_time()));
  }
  if (a == b) return 0.0;
  const std::size_t ka = g.panel_of(a);
  const std::size_t kb = g.panel_of(b);
  if (ka == kb) return panel_integral(f, ka, a - g.time(ka), b - g.time(ka));

  double total = panel_integral(f, ka, a - g.time(ka), g.step());
  const double half = 0.5 * g.step();
  for (std::size_t k = ka + 1; k < kb; ++k) total += half * (f[k] + f[k + 1]);
  total += panel_integral(f, kb, 0.0, b - g.time(kb));
  return total;
}

NewtonResult newton_scalar(const std::function<std::pair<double, double>(double)>& g, double x0,
                           const SolverConfig& cfg) {
  cfg.validate();
  double x = x0;
  for (int it = 0; it <= cfg.max_iter; ++it) {
    const auto [value, slope] = g(x);
    if (!std::isfinite(value) || !std::isfinite(slope)) {
      throw ConvergenceError(fmt::format("newton: non-finite evaluation at x={}", x), it);
    }
    if (std::abs(value) < cfg.tol) return {x, it};
    if (it == cfg.max_iter) break;
    if (std::abs(slope) < 1e-14) {
      throw ConvergenceError(fmt::format("newton: derivative {} vanishes at x={}", slope, x), it);
    }
    x -= value / slope;
  }
  throw ConvergenceError(fmt::format("newton: no convergence after {} iterations (x={})", cfg.max_iter, x),
                         cfg.max_iter);
}

std::optional<double> inverse_cdf_sample(const Grid& grid, std::span<const double> L, double level) {
  auto it = std::lower_bound(L.begin(), L.end(), level);
  if (it == L.end()) return std::nullopt;
  const auto k = static_cast<std::size_t>(it - L.begin());
  if (k == 0) return 0.0;
  const double lo = L[k - 1];
  const double hi = L[k];
  return grid.time(k - 1) + (level - lo) / (hi - lo) * grid.step();
}

std::optional<double> inverse_cdf_sample(const GridFunction& cumulative_hazard, double level) {
  return inverse_cdf_sample(cumulative_hazard.grid(), cumulative_hazard.values(), level);
}

}  // namespace hazrate
