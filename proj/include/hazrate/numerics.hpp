#pragma once

#include <functional>
#include <optional>
#include <span>
#include <utility>

#include "hazrate/grid.hpp"

namespace hazrate {

struct SolverConfig {
  double tol = 1e-10;
  int max_iter = 50;
  double damping = 1.0;

  void validate() const;

  static SolverConfig newton() { return {1e-10, 50, 1.0}; }
  // Sup-norm tolerance on the rate-ratio deviation for the proportional-rates builder.
  static SolverConfig fixed_point() { return {1e-6, 50, 1.0}; }
};

// Integral of the piecewise-linear interpolant of f over [a, b]; a and b need not be nodes.
double trapz(const GridFunction& f, double a, double b);

struct NewtonResult {
  double root;
  int iterations;
};

// g returns (value, derivative). Stops once |g(x)| < cfg.tol.
NewtonResult newton_scalar(const std::function<std::pair<double, double>(double)>& g, double x0,
                           const SolverConfig& cfg = SolverConfig::newton());

// Smallest t with L(t) >= level, interpolating linearly between the bracketing nodes.
// Returns nullopt when L never reaches `level` on the grid.
std::optional<double> inverse_cdf_sample(const GridFunction& cumulative_hazard, double level);
std::optional<double> inverse_cdf_sample(const Grid& grid, std::span<const double> cumulative_hazard,
                                         double level);

}  // namespace hazrate
