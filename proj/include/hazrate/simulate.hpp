#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "hazrate/frailty.hpp"
#include "hazrate/model.hpp"
#include "hazrate/regime.hpp"
#include "hazrate/rng.hpp"

namespace hazrate {

struct SimConfig {
  std::size_t n = 1000;
  std::uint64_t seed = 20240101;
  std::optional<double> t_max;  // administrative censoring; defaults to the model grid horizon
  std::optional<FrailtySpec> frailty;
  unsigned threads = 1;

  void validate() const;
};

// Draws single trajectories from an illness-death model. Cumulative hazards are built once.
// A frailty value multiplies both death hazards (lambda02 and lambda12) but not initiation.
class IllnessDeathSampler {
 public:
  IllnessDeathSampler(const IllnessDeathModel& model, double horizon);

  Trajectory sample(SplitMix64& rng, std::int64_t id, double frailty = 1.0) const;
  // Treatment forced by the regime instead of drawn from lambda01.
  Trajectory sample_under(const Regime& regime, SplitMix64& rng, std::int64_t id, double frailty = 1.0) const;

  double horizon() const { return horizon_; }

 private:
  // Death time for a subject treated at u, or nullopt if alive at the horizon.
  std::optional<double> death_after_initiation(double u, SplitMix64& rng, double frailty) const;

  IllnessDeathModel model_;
  double horizon_;
  std::vector<double> cum01_;
  std::vector<double> cum02_;
};

Trajectory sample_trajectory(const IllnessDeathModel& model, SplitMix64& rng, std::int64_t id);

// n subjects with ids 0..n-1; subject i uses SplitMix64::for_subject(seed, i).
std::vector<Trajectory> simulate_cohort(const IllnessDeathModel& model, const SimConfig& cfg);
std::vector<Trajectory> simulate_regime(const IllnessDeathModel& model, const Regime& regime, const SimConfig& cfg);

// Frailty Z, exposure initiation from lambda_exposure (independent of Z), death hazard Z * h(t, a(t)).
std::vector<Trajectory> sample_frailty_cohort(const ConditionalHazardSpec& spec, const FrailtySpec& frailty,
                                              const GridFunction& lambda_exposure, const SimConfig& cfg);

// Split each trajectory at u_init into untreated/treated intervals; the event sits on the last row.
std::vector<CountingRow> to_counting_rows(const std::vector<Trajectory>& trajectories);
// Inverse of to_counting_rows (frailty is not recoverable). Output ordered by id.
std::vector<Trajectory> from_counting_rows(const std::vector<CountingRow>& rows);

}  // namespace hazrate
