#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "hazrate/grid.hpp"
#include "hazrate/kernel.hpp"

namespace hazrate {

// Irreversible illness-death model: untreated (0) -> treated (1) -> dead (2), plus 0 -> 2.
struct IllnessDeathModel {
  GridFunction lambda01;  // treatment initiation
  GridFunction lambda02;  // death while untreated
  HazardKernel lambda12;  // death after initiation at u

  IllnessDeathModel(GridFunction lambda01, GridFunction lambda02, HazardKernel lambda12);

  const Grid& grid() const { return lambda01.grid(); }
  IllnessDeathModel with_lambda02(GridFunction lambda02) const;
};

// Kernel used throughout the worked example: 0.4 within one time unit of initiation, 0.2 after.
HazardKernel lagged_drop_kernel();
inline constexpr double kExampleInitiationHazard = 0.3;

struct Trajectory {
  std::int64_t id = 0;
  std::optional<double> u_init;  // absent: never treated within the horizon
  double t_event = 0.0;
  bool event = false;             // false: administratively censored at the horizon
  std::optional<double> frailty;  // simulation diagnostics only
};

// One at-risk interval (start, stop] in counting-process format.
struct CountingRow {
  std::int64_t id = 0;
  double start = 0.0;
  double stop = 0.0;
  int treat = 0;
  bool event = false;

  bool operator==(const CountingRow&) const = default;
};

// Throws InvalidInput on the first row or subject that breaks the counting-row invariants.
void validate_counting_rows(const std::vector<CountingRow>& rows);

// Frailty distribution described through its Laplace transform phi(s) = E exp(-Z s).
class FrailtySpec {
 public:
  enum class Kind { degenerate, gamma, custom };

  static FrailtySpec degenerate(double c);
  // Gamma with mean 1 and variance v > 0.
  static FrailtySpec gamma(double variance);
  // phi, phi' and phi^{-1} must agree; phi' is spot-checked against finite differences.
  static FrailtySpec custom(std::function<double(double)> phi, std::function<double(double)> phi_prime,
                            std::function<double(double)> phi_inverse);

  Kind kind() const { return kind_; }
  double parameter() const { return param_; }

  double laplace(double s) const;
  double laplace_derivative(double s) const;
  // phi^{-1}(p); p must lie in (0, 1].
  double laplace_inverse(double p) const;
  // -phi'(s) / phi(s) = E(Z | survived cumulative baseline hazard s).
  double hazard_multiplier(double s) const;

  std::string describe() const;

 private:
  FrailtySpec(Kind kind, double param) : kind_(kind), param_(param) {}

  Kind kind_;
  double param_;
  std::function<double(double)> phi_;
  std::function<double(double)> phi_prime_;
  std::function<double(double)> phi_inverse_;
};

}  // namespace hazrate
