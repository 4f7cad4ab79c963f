#include "hazrate/frailty.hpp"

#include <cmath>

#include <fmt/core.h>

#include "hazrate/error.hpp"
#include "hazrate/numerics.hpp"

namespace hazrate {

ConditionalHazardSpec::ConditionalHazardSpec(GridFunction h0, GridFunction h1)
    : untreated(std::move(h0)), treated(std::move(h1)) {
  require_same_grid(untreated.grid(), treated.grid(), "conditional hazard");
  if (!untreated.nonnegative() || !treated.nonnegative()) throw InvalidInput("conditional hazard must be >= 0");
}

namespace {

void check_path(const TreatmentPath& path, const Grid& g) {
  if (path.u_init && !(*path.u_init >= 0.0 && *path.u_init <= g.t_max())) {
    throw InvalidInput(fmt::format("treatment initiation {} outside [0, {}]", *path.u_init, g.t_max()));
  }
}

double multiplier(const FrailtySpec& frailty, double H, double t) {
  try {
    return frailty.hazard_multiplier(H);
  } catch (const DomainError& e) {
    throw DomainError(fmt::format("marginal hazard at t={}: {}", t, e.what()));
  }
}

}  // namespace

double path_cumulative_at(const ConditionalHazardSpec& spec, const TreatmentPath& path, double t) {
  if (!path.u_init || t <= *path.u_init) return trapz(spec.untreated, 0.0, t);
  const double u = *path.u_init;
  return trapz(spec.untreated, 0.0, u) + trapz(spec.treated, u, t);
}

GridFunction path_cumulative(const ConditionalHazardSpec& spec, const TreatmentPath& path) {
  const Grid& g = spec.grid();
  check_path(path, g);
  const GridFunction c0 = cumulative(spec.untreated);
  if (!path.u_init) return c0;
  const GridFunction c1 = cumulative(spec.treated);
  const double u = *path.u_init;
  const double offset = trapz(spec.untreated, 0.0, u) - trapz(spec.treated, 0.0, u);
  std::vector<double> H(g.size());
  for (std::size_t k = 0; k < H.size(); ++k) H[k] = g.time(k) <= u ? c0[k] : c1[k] + offset;
  return GridFunction(g, std::move(H));
}

GridFunction marginal_hazard(const ConditionalHazardSpec& spec, const FrailtySpec& frailty,
                             const TreatmentPath& path) {
  const GridFunction H = path_cumulative(spec, path);
  const Grid& g = spec.grid();
  std::vector<double> out(g.size());
  for (std::size_t k = 0; k < out.size(); ++k) {
    const double t = g.time(k);
    const double h = path.level(t) ? spec.treated[k] : spec.untreated[k];
    out[k] = multiplier(frailty, H[k], t) * h;
  }
  return GridFunction(g, std::move(out));
}

double marginal_hazard_at(const ConditionalHazardSpec& spec, const FrailtySpec& frailty, const TreatmentPath& path,
                          double t) {
  check_path(path, spec.grid());
  const double h = path.level(t) ? spec.treated.at(t) : spec.untreated.at(t);
  return multiplier(frailty, path_cumulative_at(spec, path, t), t) * h;
}

double markov_violation_gap(const ConditionalHazardSpec& spec, const FrailtySpec& frailty, double t, double u1,
                            double u2) {
  if (!(u1 < t && u2 < t)) {
    throw InvalidInput(fmt::format("markov_violation_gap: both initiation times ({}, {}) must precede t={}", u1, u2, t));
  }
  return std::abs(marginal_hazard_at(spec, frailty, TreatmentPath::from(u1), t) -
                  marginal_hazard_at(spec, frailty, TreatmentPath::from(u2), t));
}

InvertedHazard invert_rate_to_h(const LevelRates& target, const FrailtySpec& frailty, const TreatmentPath& path) {
  const Grid& g = target.untreated.grid();
  require_same_grid(g, target.treated.grid(), "invert_rate_to_h");
  check_path(path, g);
  if (!target.untreated.nonnegative() || !target.treated.nonnegative()) {
    throw InvalidInput("invert_rate_to_h: target rates must be >= 0");
  }

  // d/dt phi^{-1}(exp(-R)) = r / m(phi^{-1}(exp(-R))) with m = -phi'/phi, evaluated pointwise.
  auto invert_at = [&](double rate, double R, double t) {
    const double p = std::exp(-R);
    double G;
    try {
      G = frailty.laplace_inverse(p);
    } catch (const DomainError& e) {
      throw DomainError(fmt::format("invert_rate_to_h at t={}: {}", t, e.what()));
    }
    return rate / multiplier(frailty, G, t);
  };

  const std::size_t n = g.size();
  const GridFunction R0 = cumulative(target.untreated);
  std::vector<double> pre(n);
  for (std::size_t k = 0; k < n; ++k) pre[k] = invert_at(target.untreated[k], R0[k], g.time(k));

  std::vector<double> post = pre;
  if (path.u_init) {
    const double u = *path.u_init;
    const GridFunction R1 = cumulative(target.treated);
    const double offset = trapz(target.untreated, 0.0, u) - trapz(target.treated, 0.0, u);
    std::size_t first = n;
    for (std::size_t k = 0; k < n; ++k) {
      if (g.time(k) >= u) {
        if (first == n) first = k;
        post[k] = invert_at(target.treated[k], R1[k] + offset, g.time(k));
      }
    }
    // Nodes before initiation only feed the interpolant of the panel holding u: extend linearly.
    for (std::size_t k = first; k-- > 0;) {
      post[k] = k + 2 < n ? 2.0 * post[k + 1] - post[k + 2] : post[k + 1];
      if (post[k] < 0.0) post[k] = 0.0;
    }
  }

  std::vector<double> along(n);
  for (std::size_t k = 0; k < n; ++k) along[k] = path.level(g.time(k)) ? post[k] : pre[k];
  return {ConditionalHazardSpec(GridFunction(g, std::move(pre)), GridFunction(g, std::move(post))),
          GridFunction(g, std::move(along))};
}

std::array<ColliderCell, 4> collider_table(const ColliderScenario& s) {
  auto check_prob = [](double p, const char* what) {
    if (!(p >= 0.0 && p <= 1.0)) throw InvalidInput(fmt::format("collider: {} = {} is not a probability", what, p));
  };
  check_prob(s.p1, "p1");
  check_prob(s.p_treat_first, "P(A1=1)");
  check_prob(s.p_treat_second[0], "P(A2=1 | A1=0)");
  check_prob(s.p_treat_second[1], "P(A2=1 | A1=1)");
  if (!(s.effect > 0.0)) throw InvalidInput(fmt::format("collider: effect must be positive, got {}", s.effect));
  if (s.frailty_levels.empty()) throw InvalidInput("collider: at least one frailty level is required");
  double total = 0.0;
  for (const auto& [z, pz] : s.frailty_levels) {
    if (!(z > 0.0)) throw InvalidInput(fmt::format("collider: frailty value {} must be positive", z));
    check_prob(pz, "frailty probability");
    total += pz;
    for (int a = 0; a <= 1; ++a) {
      const double p = z * s.p1 * (a ? s.effect : 1.0);
      if (p > 1.0) {
        throw InvalidInput(fmt::format("collider: event probability {} for z={}, a={} exceeds 1", p, z, a));
      }
    }
  }
  if (std::abs(total - 1.0) > 1e-12) throw InvalidInput(fmt::format("collider: frailty probabilities sum to {}", total));

  auto event_prob = [&](double z, int a) { return z * s.p1 * (a ? s.effect : 1.0); };
  auto bern = [](double p, int x) { return x ? p : 1.0 - p; };

  // Treatment does not depend on z, so conditioning on (A1, A2) only matters through the
  // posterior weights of z given survival of period 1 under a1. Normalising them first keeps the
  // degenerate and no-effect cases exactly equal across a1.
  std::array<ColliderCell, 4> out{};
  for (int a1 = 0; a1 <= 1; ++a1) {
    std::vector<double> w;
    double total_w = 0.0;
    for (const auto& [z, pz] : s.frailty_levels) {
      w.push_back(pz * (1.0 - event_prob(z, a1)));
      total_w += w.back();
    }
    for (int a2 = 0; a2 <= 1; ++a2) {
      if (!(total_w > 0.0) || !(bern(s.p_treat_first, a1) * bern(s.p_treat_second[a1], a2) > 0.0)) {
        throw InvalidInput(fmt::format("collider: conditioning event (N1=0, A1={}, A2={}) has probability 0", a1, a2));
      }
      double p = 0.0;
      for (std::size_t j = 0; j < w.size(); ++j) p += (w[j] / total_w) * event_prob(s.frailty_levels[j].first, a2);
      out[2 * a1 + a2] = {a1, a2, p, 1.0 - p};
    }
  }
  return out;
}

}  // namespace hazrate
