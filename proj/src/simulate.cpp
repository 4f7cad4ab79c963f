#include "hazrate/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <random>
#include <thread>

#include <fmt/core.h>

#include "hazrate/error.hpp"
#include "hazrate/numerics.hpp"

namespace hazrate {

void SimConfig::validate() const {
  if (n < 1) throw InvalidInput("simulation needs n >= 1");
  if (t_max && !(*t_max > 0.0)) throw InvalidInput(fmt::format("simulation horizon must be positive, got {}", *t_max));
  if (threads < 1) throw InvalidInput("simulation needs at least one thread");
}

namespace {

// Smallest node-interpolated t with a*A(t) + b*B(t) >= level, A and B non-decreasing node values.
std::optional<double> first_crossing(const Grid& g, const std::vector<double>& A, double a,
                                     const std::vector<double>& B, double b, double level) {
  auto at = [&](std::size_t k) { return a * A[k] + b * B[k]; };
  std::size_t lo = 0;
  std::size_t hi = g.size();
  while (lo < hi) {
    const std::size_t mid = (lo + hi) / 2;
    if (at(mid) >= level) {
      hi = mid;
    } else {
      lo = mid + 1;
    }
  }
  if (lo == g.size()) return std::nullopt;
  if (lo == 0) return 0.0;
  const double v0 = at(lo - 1);
  const double v1 = at(lo);
  return g.time(lo - 1) + (level - v0) / (v1 - v0) * g.step();
}

double draw_frailty(const std::optional<FrailtySpec>& f, SplitMix64& rng) {
  if (!f) return 1.0;
  switch (f->kind()) {
    case FrailtySpec::Kind::degenerate:
      return f->parameter();
    case FrailtySpec::Kind::gamma: {
      const double v = f->parameter();
      std::gamma_distribution<double> dist(1.0 / v, v);
      return dist(rng);
    }
    case FrailtySpec::Kind::custom:
      break;
  }
  throw InvalidInput("cannot sample from a custom frailty distribution (only its Laplace transform is known)");
}

template <class Fn>
std::vector<Trajectory> for_each_subject(const SimConfig& cfg, Fn&& draw) {
  cfg.validate();
  std::vector<Trajectory> out(cfg.n);
  auto work = [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      SplitMix64 rng = SplitMix64::for_subject(cfg.seed, i);
      out[i] = draw(rng, static_cast<std::int64_t>(i));
    }
  };
  const unsigned threads = std::min<std::size_t>(cfg.threads, cfg.n);
  if (threads <= 1) {
    work(0, cfg.n);
    return out;
  }
  std::vector<std::jthread> pool;
  const std::size_t chunk = (cfg.n + threads - 1) / threads;
  for (unsigned w = 0; w < threads; ++w) {
    const std::size_t begin = w * chunk;
    const std::size_t end = std::min(cfg.n, begin + chunk);
    if (begin < end) pool.emplace_back(work, begin, end);
  }
  pool.clear();
  return out;
}

double resolve_horizon(const std::optional<double>& t_max, const Grid& g) {
  const double horizon = t_max.value_or(g.last_time());
  if (horizon > g.last_time() * (1.0 + 1e-12)) {
    throw InvalidInput(fmt::format("simulation horizon {} exceeds the model grid ({})", horizon, g.last_time()));
  }
  return horizon;
}

}  // namespace

IllnessDeathSampler::IllnessDeathSampler(const IllnessDeathModel& model, double horizon)
    : model_(model), horizon_(horizon) {
  const GridFunction c01 = cumulative(model.lambda01);
  const GridFunction c02 = cumulative(model.lambda02);
  cum01_.assign(c01.values().begin(), c01.values().end());
  cum02_.assign(c02.values().begin(), c02.values().end());
}

std::optional<double> IllnessDeathSampler::death_after_initiation(double u, SplitMix64& rng, double frailty) const {
  const double e = rng.exponential();
  return model_.lambda12.first_passage(u, e / frailty, horizon_);
}

Trajectory IllnessDeathSampler::sample(SplitMix64& rng, std::int64_t id, double frailty) const {
  const Grid& g = model_.grid();
  Trajectory tr;
  tr.id = id;
  const double e = rng.exponential();
  const std::optional<double> exit = first_crossing(g, cum01_, 1.0, cum02_, frailty, e);
  if (!exit || *exit >= horizon_) {
    tr.t_event = horizon_;
    tr.event = false;
    return tr;
  }
  // Cause of exit: share of the panel's cumulative increment due to initiation.
  const std::size_t k = g.panel_of(*exit);
  const double d01 = cum01_[k + 1] - cum01_[k];
  const double d02 = frailty * (cum02_[k + 1] - cum02_[k]);
  const bool initiated = rng.uniform() * (d01 + d02) < d01;
  if (!initiated) {
    tr.t_event = *exit;
    tr.event = true;
    return tr;
  }
  tr.u_init = *exit;
  const std::optional<double> death = death_after_initiation(*exit, rng, frailty);
  tr.t_event = death.value_or(horizon_);
  tr.event = death.has_value();
  return tr;
}

Trajectory IllnessDeathSampler::sample_under(const Regime& regime, SplitMix64& rng, std::int64_t id,
                                             double frailty) const {
  const Grid& g = model_.grid();
  Trajectory tr;
  tr.id = id;
  const std::optional<double> start = regime.initiation();
  double untreated_death = horizon_;
  bool died_untreated = false;
  if (!start || *start > 0.0) {
    const double e = rng.exponential();
    const std::optional<double> d = first_crossing(g, cum01_, 0.0, cum02_, frailty, e);
    if (d && *d < horizon_ && (!start || *d < *start)) {
      untreated_death = *d;
      died_untreated = true;
    }
  }
  if (died_untreated) {
    tr.t_event = untreated_death;
    tr.event = true;
    return tr;
  }
  if (!start || *start >= horizon_) {
    tr.t_event = horizon_;
    return tr;
  }
  tr.u_init = *start;
  const std::optional<double> death = death_after_initiation(*start, rng, frailty);
  tr.t_event = death.value_or(horizon_);
  tr.event = death.has_value();
  return tr;
}

Trajectory sample_trajectory(const IllnessDeathModel& model, SplitMix64& rng, std::int64_t id) {
  return IllnessDeathSampler(model, model.grid().last_time()).sample(rng, id);
}

std::vector<Trajectory> simulate_cohort(const IllnessDeathModel& model, const SimConfig& cfg) {
  const IllnessDeathSampler sampler(model, resolve_horizon(cfg.t_max, model.grid()));
  return for_each_subject(cfg, [&](SplitMix64& rng, std::int64_t id) {
    const double z = draw_frailty(cfg.frailty, rng);
    Trajectory tr = sampler.sample(rng, id, z);
    if (cfg.frailty) tr.frailty = z;
    return tr;
  });
}

std::vector<Trajectory> simulate_regime(const IllnessDeathModel& model, const Regime& regime, const SimConfig& cfg) {
  const IllnessDeathSampler sampler(model, resolve_horizon(cfg.t_max, model.grid()));
  return for_each_subject(cfg, [&](SplitMix64& rng, std::int64_t id) {
    const double z = draw_frailty(cfg.frailty, rng);
    Trajectory tr = sampler.sample_under(regime, rng, id, z);
    if (cfg.frailty) tr.frailty = z;
    return tr;
  });
}

std::vector<Trajectory> sample_frailty_cohort(const ConditionalHazardSpec& spec, const FrailtySpec& frailty,
                                              const GridFunction& lambda_exposure, const SimConfig& cfg) {
  const Grid& g = spec.grid();
  require_same_grid(g, lambda_exposure.grid(), "sample_frailty_cohort");
  const double horizon = resolve_horizon(cfg.t_max, g);
  const GridFunction cum_exposure = cumulative(lambda_exposure);
  const GridFunction H0 = cumulative(spec.untreated);
  const GridFunction H1 = cumulative(spec.treated);
  const std::optional<FrailtySpec> frailty_opt = frailty;

  return for_each_subject(cfg, [&](SplitMix64& rng, std::int64_t id) {
    Trajectory tr;
    tr.id = id;
    const double z = draw_frailty(frailty_opt, rng);
    tr.frailty = z;
    std::optional<double> u = inverse_cdf_sample(cum_exposure, rng.exponential());
    if (u && *u >= horizon) u.reset();
    const double level = rng.exponential() / z;

    std::optional<double> death;
    const double H0u = u ? trapz(spec.untreated, 0.0, *u) : 0.0;
    if (!u || level <= H0u) {
      death = inverse_cdf_sample(H0, level);
      if (u && death && *death > *u) death = *u;  // interpolation round-off at the switch
    } else {
      death = inverse_cdf_sample(H1, level - H0u + trapz(spec.treated, 0.0, *u));
    }
    if (death && *death < horizon) {
      tr.t_event = *death;
      tr.event = true;
    } else {
      tr.t_event = horizon;
      tr.event = false;
    }
    if (u && *u < tr.t_event) tr.u_init = u;
    return tr;
  });
}

std::vector<CountingRow> to_counting_rows(const std::vector<Trajectory>& trajectories) {
  std::vector<CountingRow> rows;
  rows.reserve(trajectories.size() * 2);
  for (const auto& tr : trajectories) {
    if (!(tr.t_event > 0.0)) throw InvalidInput(fmt::format("trajectory {} has non-positive follow-up {}", tr.id, tr.t_event));
    if (tr.u_init) {
      const double u = *tr.u_init;
      if (!(u >= 0.0) || !(u < tr.t_event)) {
        throw InvalidInput(fmt::format("trajectory {}: initiation {} not inside [0, {})", tr.id, u, tr.t_event));
      }
      if (u > 0.0) rows.push_back({tr.id, 0.0, u, 0, false});
      rows.push_back({tr.id, u, tr.t_event, 1, tr.event});
    } else {
      rows.push_back({tr.id, 0.0, tr.t_event, 0, tr.event});
    }
  }
  return rows;
}

std::vector<Trajectory> from_counting_rows(const std::vector<CountingRow>& rows) {
  validate_counting_rows(rows);
  std::map<std::int64_t, Trajectory> by_id;
  for (const auto& r : rows) {
    auto [it, inserted] = by_id.try_emplace(r.id);
    Trajectory& tr = it->second;
    if (inserted) tr.id = r.id;
    if (r.treat == 1 && (!tr.u_init || r.start < *tr.u_init)) tr.u_init = r.start;
    if (r.stop >= tr.t_event) {
      tr.t_event = r.stop;
      tr.event = r.event;
    }
  }
  std::vector<Trajectory> out;
  out.reserve(by_id.size());
  for (auto& [id, tr] : by_id) out.push_back(tr);
  return out;
}

}  // namespace hazrate
