#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace hazrate {

inline constexpr double kDefaultTMax = 3.0;
inline constexpr double kDefaultStep = 0.005;

// Uniform time grid: node k sits at k * step, k = 0 .. floor(t_max / step).
class Grid {
 public:
  Grid(double t_max = kDefaultTMax, double step = kDefaultStep);

  double t_max() const { return t_max_; }
  double step() const { return step_; }
  std::size_t size() const { return size_; }
  double time(std::size_t k) const { return static_cast<double>(k) * step_; }
  // Last grid time; equals t_max when t_max is a multiple of step.
  double last_time() const { return time(size_ - 1); }

  // Index of the node at time t, or throws if t is not (within 1e-9 * step) a node.
  std::size_t node_at(double t) const;
  // Index k of the panel [t_k, t_{k+1}] containing t (clamped to the last panel).
  std::size_t panel_of(double t) const;
  bool contains(double t) const;

  bool operator==(const Grid& other) const;

 private:
  double t_max_;
  double step_;
  std::size_t size_;
};

// Real-valued function sampled on a uniform grid, linearly interpolated between nodes.
class GridFunction {
 public:
  GridFunction(Grid grid, std::vector<double> values);

  static GridFunction constant(const Grid& grid, double value);
  static GridFunction tabulate(const Grid& grid, const std::function<double(double)>& f);

  const Grid& grid() const { return grid_; }
  std::span<const double> values() const { return values_; }
  std::size_t size() const { return values_.size(); }
  double operator[](std::size_t k) const { return values_[k]; }
  double time(std::size_t k) const { return grid_.time(k); }

  // Linear interpolation; t must lie in [0, last grid time].
  double at(double t) const;

  double min() const;
  double max() const;
  bool nonnegative() const;

  friend GridFunction operator+(const GridFunction& a, const GridFunction& b);
  friend GridFunction operator-(const GridFunction& a, const GridFunction& b);
  friend GridFunction operator*(double s, const GridFunction& f);

 private:
  Grid grid_;
  std::vector<double> values_;
};

void require_same_grid(const Grid& a, const Grid& b, const char* context);

// Trapezoidal running integral: result(t_k) = int_0^{t_k} f.
GridFunction cumulative(const GridFunction& f);
// Same, but first checks f lives on `expected`.
GridFunction cumulative(const GridFunction& f, const Grid& expected);

// Pointwise exp(-L).
GridFunction survival_from_cumulative(const GridFunction& cumulative_hazard);

}  // namespace hazrate
