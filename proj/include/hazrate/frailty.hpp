#pragma once

#include <array>
#include <optional>
#include <utility>
#include <vector>

#include "hazrate/grid.hpp"
#include "hazrate/model.hpp"

namespace hazrate {

// Irreversible binary treatment path: a(t) = 1 iff initiated and t >= u_init.
struct TreatmentPath {
  std::optional<double> u_init;

  static TreatmentPath never() { return {}; }
  static TreatmentPath from(double u) { return {u}; }
  int level(double t) const { return u_init && t >= *u_init ? 1 : 0; }
};

// Complete-data hazard Z * h(t, a): h depends on the current level only.
struct ConditionalHazardSpec {
  GridFunction untreated;  // h(t, 0)
  GridFunction treated;    // h(t, 1)

  ConditionalHazardSpec(GridFunction untreated, GridFunction treated);
  const Grid& grid() const { return untreated.grid(); }
};

// H(t, path) = int_0^t h(s, a(s)) ds at every grid node.
GridFunction path_cumulative(const ConditionalHazardSpec& spec, const TreatmentPath& path);
double path_cumulative_at(const ConditionalHazardSpec& spec, const TreatmentPath& path, double t);

// Hazard given the treatment history with the frailty integrated out:
// lambda(t | path) = -phi'(H) / phi(H) * h(t, a(t)).
GridFunction marginal_hazard(const ConditionalHazardSpec& spec, const FrailtySpec& frailty,
                             const TreatmentPath& path);
double marginal_hazard_at(const ConditionalHazardSpec& spec, const FrailtySpec& frailty, const TreatmentPath& path,
                          double t);

// |lambda(t | initiated at u1) - lambda(t | initiated at u2)| with both paths treated at t.
double markov_violation_gap(const ConditionalHazardSpec& spec, const FrailtySpec& frailty, double t, double u1,
                            double u2);

// Rates r(t | A(t) = a) per treatment level.
struct LevelRates {
  GridFunction untreated;
  GridFunction treated;
};

// History-dependent conditional hazard that makes the marginal hazard along `path` equal the
// target rate: h(t) = d/dt phi^{-1}(exp(-R(t))), R the cumulative target rate along the path.
// Returned as the two smooth pieces before and after initiation plus the along-path values.
struct InvertedHazard {
  ConditionalHazardSpec pieces;
  GridFunction along_path;
};

InvertedHazard invert_rate_to_h(const LevelRates& target, const FrailtySpec& frailty, const TreatmentPath& path);

// Two-period discrete scenario: event probability per period is z * p1 * effect^a.
struct ColliderScenario {
  double p1 = 0.2;
  double effect = 0.5;
  std::vector<std::pair<double, double>> frailty_levels;  // (z, probability)
  double p_treat_first = 0.5;                             // P(A1 = 1)
  std::array<double, 2> p_treat_second{0.5, 0.5};         // P(A2 = 1 | A1 = a1, N1 = 0)
};

struct ColliderCell {
  int a1;
  int a2;
  double p_event;     // P(N2 = 1 | N1 = 0, A1 = a1, A2 = a2)
  double p_survival;  // P(N2 = 0 | N1 = 0, A1 = a1, A2 = a2)
};

// Exact enumeration over frailty levels and both periods. Cells ordered (0,0), (0,1), (1,0), (1,1).
std::array<ColliderCell, 4> collider_table(const ColliderScenario& s);

}  // namespace hazrate
