#include "hazrate/grid.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include <fmt/core.h>

#include "hazrate/error.hpp"

namespace hazrate {

Grid::Grid(double t_max, double step) : t_max_(t_max), step_(step) {
  if (!(step > 0.0) || !std::isfinite(step)) {
    throw InvalidInput(fmt::format("grid step must be positive and finite, got {}", step));
  }
  if (!(t_max > 0.0) || !std::isfinite(t_max)) {
    throw InvalidInput(fmt::format("grid horizon must be positive and finite, got {}", t_max));
  }
  // Tolerate t_max / step landing a hair below an integer.
  size_ = static_cast<std::size_t>(std::floor(t_max / step + 1e-9)) + 1;
  if (size_ < 2) {
    throw InvalidInput(fmt::format("grid needs at least two nodes (t_max={}, step={})", t_max, step));
  }
}

std::size_t Grid::node_at(double t) const {
  const double x = t / step_;
  const double k = std::round(x);
  if (std::abs(x - k) > 1e-9 || k < 0.0 || k >= static_cast<double>(size_)) {
    throw InvalidInput(fmt::format("time {} is not a grid node (step {})", t, step_));
  }
  return static_cast<std::size_t>(k);
}

std::size_t Grid::panel_of(double t) const {
  if (t <= 0.0) return 0;
  auto k = static_cast<std::size_t>(std::floor(t / step_));
  return std::min(k, size_ - 2);
}

bool Grid::contains(double t) const { return t >= 0.0 && t <= last_time() * (1.0 + 1e-12); }

bool Grid::operator==(const Grid& other) const {
  return size_ == other.size_ && std::abs(step_ - other.step_) <= 1e-12 * step_;
}

void require_same_grid(const Grid& a, const Grid& b, const char* context) {
  if (!(a == b)) {
    throw GridMismatch(fmt::format("{}: grid mismatch ({} nodes, step {} vs {} nodes, step {})", context,
                                   a.size(), a.step(), b.size(), b.step()));
  }
}

GridFunction::GridFunction(Grid grid, std::vector<double> values)
    : grid_(grid), values_(std::move(values)) {
  if (values_.size() != grid_.size()) {
    throw GridMismatch(fmt::format("grid has {} nodes but {} values were supplied", grid_.size(),
                                   values_.size()));
  }
  for (std::size_t k = 0; k < values_.size(); ++k) {
    if (!std::isfinite(values_[k])) {
      throw InvalidInput(fmt::format("non-finite value at t={}", grid_.time(k)));
    }
  }
}

GridFunction GridFunction::constant(const Grid& grid, double value) {
  return GridFunction(grid, std::vector<double>(grid.size(), value));
}

GridFunction GridFunction::tabulate(const Grid& grid, const std::function<double(double)>& f) {
  std::vector<double> v(grid.size());
  for (std::size_t k = 0; k < v.size(); ++k) v[k] = f(grid.time(k));
  return GridFunction(grid, std::move(v));
}

double GridFunction::at(double t) const {
  if (!grid_.contains(t)) {
    throw InvalidInput(fmt::format("time {} outside grid [0, {}]", t, grid_.last_time()));
  }
  const std::size_t k = grid_.panel_of(t);
  const double frac = std::clamp((t - grid_.time(k)) / grid_.step(), 0.0, 1.0);
  return values_[k] + frac * (values_[k + 1] - values_[k]);
}

double GridFunction::min() const { return *std::min_element(values_.begin(), values_.end()); }
double GridFunction::max() const { return *std::max_element(values_.begin(), values_.end()); }
bool GridFunction::nonnegative() const { return min() >= 0.0; }

GridFunction operator+(const GridFunction& a, const GridFunction& b) {
  require_same_grid(a.grid(), b.grid(), "operator+");
  std::vector<double> v(a.size());
  for (std::size_t k = 0; k < v.size(); ++k) v[k] = a[k] + b[k];
  return GridFunction(a.grid(), std::move(v));
}

GridFunction operator-(const GridFunction& a, const GridFunction& b) {
  require_same_grid(a.grid(), b.grid(), "operator-");
  std::vector<double> v(a.size());
  for (std::size_t k = 0; k < v.size(); ++k) v[k] = a[k] - b[k];
  return GridFunction(a.grid(), std::move(v));
}

GridFunction operator*(double s, const GridFunction& f) {
  std::vector<double> v(f.values().begin(), f.values().end());
  for (double& x : v) x *= s;
  return GridFunction(f.grid(), std::move(v));
}

GridFunction cumulative(const GridFunction& f) {
  const double half = 0.5 * f.grid().step();
  std::vector<double> out(f.size());
  out[0] = 0.0;
  for (std::size_t k = 1; k < out.size(); ++k) out[k] = out[k - 1] + half * (f[k - 1] + f[k]);
  return GridFunction(f.grid(), std::move(out));
}

GridFunction cumulative(const GridFunction& f, const Grid& expected) {
  require_same_grid(expected, f.grid(), "cumulative");
  return cumulative(f);
}

GridFunction survival_from_cumulative(const GridFunction& cumulative_hazard) {
  std::vector<double> out(cumulative_hazard.size());
  for (std::size_t k = 0; k < out.size(); ++k) out[k] = std::exp(-cumulative_hazard[k]);
  return GridFunction(cumulative_hazard.grid(), std::move(out));
}

}  // namespace hazrate
