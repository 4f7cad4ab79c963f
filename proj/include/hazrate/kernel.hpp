#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "hazrate/grid.hpp"

namespace hazrate {

// Post-initiation hazard that depends on time since initiation:
// `early` while t - u <= lag, `late` afterwards.
struct TwoPieceKernel {
  double early;
  double late;
  double lag;
};

// Initiation time is irrelevant: lambda(t | u) = hazard(t).
struct TimeOnlyKernel {
  GridFunction hazard;
  GridFunction cumulative;
};

// Arbitrary lambda(t | u) sampled on the lower triangle u <= t of a grid.
struct TabulatedKernel {
  Grid grid;
  std::vector<double> values;       // row k (time t_k) holds u-nodes 0..k
  std::vector<double> column_cums;  // same layout: int_{u_j}^{t_k} lambda(s | u_j) ds

  static std::size_t index(std::size_t k, std::size_t j) { return k * (k + 1) / 2 + j; }
};

// Hazard of death after treatment initiation, lambda(t | u) for 0 <= u <= t.
class HazardKernel {
 public:
  static HazardKernel two_piece(double early, double late, double lag);
  static HazardKernel time_only(GridFunction hazard);
  static HazardKernel tabulated(const Grid& grid, const std::function<double(double, double)>& f);

  double operator()(double t, double u) const;
  // Limit of lambda(t | u') as u' increases to u. Equals operator() except at jumps in u.
  double limit_from_below(double t, double u) const;

  // int_u^t lambda(s | u) ds. Exact for the two-piece form; trapezoid on the grid otherwise.
  double cumulative(double u, double t) const;
  // Smallest t in [u, horizon] with cumulative(u, t) >= level, or nullopt.
  std::optional<double> first_passage(double u, double level, double horizon) const;

  bool depends_on_initiation() const;
  // Grid the kernel was sampled on, if any.
  const Grid* grid() const;
  std::string describe() const;

  const std::variant<TwoPieceKernel, TimeOnlyKernel, TabulatedKernel>& representation() const {
    return *rep_;
  }

 private:
  explicit HazardKernel(std::variant<TwoPieceKernel, TimeOnlyKernel, TabulatedKernel> rep);
  std::shared_ptr<const std::variant<TwoPieceKernel, TimeOnlyKernel, TabulatedKernel>> rep_;
};

// int_u^t k(s | u) ds; throws if u > t.
double kernel_cumulative(const HazardKernel& k, double u, double t);

}  // namespace hazrate
