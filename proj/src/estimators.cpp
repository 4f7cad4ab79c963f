#include "hazrate/estimators.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_map>

#include <fmt/core.h>

#include "hazrate/error.hpp"

namespace hazrate {

double StepFunction::operator()(double t) const {
  auto it = std::upper_bound(jump_times.begin(), jump_times.end(), t);
  if (it == jump_times.begin()) return initial;
  return values[static_cast<std::size_t>(it - jump_times.begin()) - 1];
}

namespace {

// At-risk counts per level: Y_a(t) = #{start < t} - #{stop < t}, i.e. t in (start, stop].
class LevelRiskSets {
 public:
  explicit LevelRiskSets(const std::vector<CountingRow>& rows) {
    for (const auto& r : rows) {
      starts_[r.treat].push_back(r.start);
      stops_[r.treat].push_back(r.stop);
    }
    for (int a = 0; a < 2; ++a) {
      std::sort(starts_[a].begin(), starts_[a].end());
      std::sort(stops_[a].begin(), stops_[a].end());
    }
  }

  double at_risk(int level, double t) const {
    const auto& s = starts_[level];
    const auto& e = stops_[level];
    const auto entered = std::lower_bound(s.begin(), s.end(), t) - s.begin();
    const auto left = std::lower_bound(e.begin(), e.end(), t) - e.begin();
    return static_cast<double>(entered - left);
  }

 private:
  std::vector<double> starts_[2];
  std::vector<double> stops_[2];
};

struct EventGroup {
  double time;
  int deaths[2];
};

// Distinct event times with deaths split by the level on the row where the death occurs.
std::vector<EventGroup> group_events(const std::vector<CountingRow>& rows) {
  std::vector<std::pair<double, int>> ev;
  for (const auto& r : rows) {
    if (r.event) ev.emplace_back(r.stop, r.treat);
  }
  std::sort(ev.begin(), ev.end());
  std::vector<EventGroup> groups;
  for (const auto& [t, a] : ev) {
    if (groups.empty() || groups.back().time != t) groups.push_back({t, {0, 0}});
    ++groups.back().deaths[a];
  }
  return groups;
}

std::map<int, StepFunction> product_limit_or_sum(const std::vector<CountingRow>& rows, bool product) {
  validate_counting_rows(rows);
  const LevelRiskSets risk(rows);
  std::map<int, StepFunction> out;
  for (int a = 0; a < 2; ++a) out[a].initial = product ? 1.0 : 0.0;
  for (const auto& g : group_events(rows)) {
    for (int a = 0; a < 2; ++a) {
      if (g.deaths[a] == 0) continue;
      const double y = risk.at_risk(a, g.time);
      StepFunction& f = out[a];
      const double prev = f.values.empty() ? f.initial : f.values.back();
      const double frac = g.deaths[a] / y;
      f.jump_times.push_back(g.time);
      f.values.push_back(product ? prev * (1.0 - frac) : prev + frac);
    }
  }
  return out;
}

}  // namespace

std::map<int, StepFunction> nelson_aalen_by_treatment(const std::vector<CountingRow>& rows) {
  return product_limit_or_sum(rows, false);
}

std::map<int, StepFunction> extended_km(const std::vector<CountingRow>& rows) {
  return product_limit_or_sum(rows, true);
}

AalenFit aalen_additive(const std::vector<CountingRow>& rows) {
  validate_counting_rows(rows);
  // Sweep in time: rows enter the risk set once start < t and leave once stop < t.
  std::vector<const CountingRow*> by_start;
  std::vector<const CountingRow*> by_stop;
  std::vector<std::pair<double, const CountingRow*>> events;
  for (const auto& r : rows) {
    by_start.push_back(&r);
    by_stop.push_back(&r);
    if (r.event) events.emplace_back(r.stop, &r);
  }
  std::sort(by_start.begin(), by_start.end(), [](auto* a, auto* b) { return a->start < b->start; });
  std::sort(by_stop.begin(), by_stop.end(), [](auto* a, auto* b) { return a->stop < b->stop; });
  std::sort(events.begin(), events.end(), [](const auto& a, const auto& b) { return a.first < b.first; });

  AalenFit fit;
  std::size_t in = 0;
  std::size_t out = 0;
  long y_untreated = 0;  // sum_i Y_i (1 - A_i)
  long y_treated = 0;    // sum_i Y_i A_i
  double b0 = 0.0;
  double b1 = 0.0;
  for (std::size_t e = 0; e < events.size();) {
    const double t = events[e].first;
    for (; in < by_start.size() && by_start[in]->start < t; ++in) (by_start[in]->treat ? y_treated : y_untreated)++;
    for (; out < by_stop.size() && by_stop[out]->stop < t; ++out) (by_stop[out]->treat ? y_treated : y_untreated)--;
    double dn_untreated = 0.0;
    double dn_treated = 0.0;
    for (; e < events.size() && events[e].first == t; ++e) {
      (events[e].second->treat ? dn_treated : dn_untreated) += 1.0;
    }
    if (y_untreated == 0 || y_treated == 0) {
      fit.singular_times.push_back(t);
      continue;
    }
    const double d0 = dn_untreated / static_cast<double>(y_untreated);
    const double d1 = dn_treated / static_cast<double>(y_treated) - d0;
    b0 += d0;
    b1 += d1;
    fit.times.push_back(t);
    fit.dB0.push_back(d0);
    fit.dB1.push_back(d1);
    fit.B0.jump_times.push_back(t);
    fit.B0.values.push_back(b0);
    fit.B1.jump_times.push_back(t);
    fit.B1.values.push_back(b1);
  }
  return fit;
}

IdentityCheck check_aalen_nelson_aalen_identity(const AalenFit& aalen, const std::map<int, StepFunction>& na,
                                                double tol) {
  auto increment_at = [](const StepFunction& f, double t) {
    auto it = std::lower_bound(f.jump_times.begin(), f.jump_times.end(), t);
    if (it == f.jump_times.end() || *it != t) return 0.0;
    return f.increment(static_cast<std::size_t>(it - f.jump_times.begin()));
  };
  IdentityCheck check;
  const StepFunction& r0 = na.at(0);
  const StepFunction& r1 = na.at(1);
  for (std::size_t i = 0; i < aalen.times.size(); ++i) {
    const double t = aalen.times[i];
    const double dr0 = increment_at(r0, t);
    const double dr1 = increment_at(r1, t);
    check.max_abs_error = std::max({check.max_abs_error, std::abs(aalen.dB0[i] - dr0),
                                    std::abs(aalen.dB1[i] - (dr1 - dr0))});
    ++check.compared;
  }
  check.pass = check.max_abs_error <= tol;
  return check;
}

namespace {

struct CoxRow {
  std::int64_t id;
  double start;
  double stop;
  bool treated;
  bool event;
  double u;  // initiation time of the subject (treated rows only)
};

struct CoxData {
  std::vector<CoxRow> rows;
  std::vector<std::size_t> by_start;
  std::vector<std::size_t> by_stop;
  std::vector<std::size_t> events;  // sorted by stop
  int p = 1;
  // deaths at level a while the other level had subjects at risk
  long informative_events[2] = {0, 0};
};

CoxData prepare_cox(const std::vector<CountingRow>& input, CoxCovariates cov) {
  validate_counting_rows(input);
  std::unordered_map<std::int64_t, double> initiation;
  for (const auto& r : input) {
    if (r.treat == 1) {
      auto [it, fresh] = initiation.try_emplace(r.id, r.start);
      if (!fresh) it->second = std::min(it->second, r.start);
    }
  }
  CoxData d;
  d.p = cov == CoxCovariates::current_level ? 1 : 2;
  d.rows.reserve(input.size());
  for (const auto& r : input) {
    const bool treated = r.treat == 1;
    d.rows.push_back({r.id, r.start, r.stop, treated, r.event, treated ? initiation.at(r.id) : 0.0});
  }
  const LevelRiskSets risk(input);
  for (const auto& r : input) {
    if (r.event && risk.at_risk(1 - r.treat, r.stop) > 0) ++d.informative_events[r.treat];
  }
  const std::size_t n = d.rows.size();
  d.by_start.resize(n);
  d.by_stop.resize(n);
  for (std::size_t i = 0; i < n; ++i) d.by_start[i] = d.by_stop[i] = i;
  std::sort(d.by_start.begin(), d.by_start.end(), [&](auto a, auto b) { return d.rows[a].start < d.rows[b].start; });
  std::sort(d.by_stop.begin(), d.by_stop.end(), [&](auto a, auto b) { return d.rows[a].stop < d.rows[b].stop; });
  for (std::size_t i : d.by_stop) {
    if (d.rows[i].event) d.events.push_back(i);
  }
  if (d.events.empty()) throw InvalidInput("cox_fit: no events in the data");
  return d;
}

// Per distinct event time: risk-set moments needed by both the derivatives and the residuals.
struct EventTime {
  double t;
  double deaths;
  double s0;
  double zbar[2];
  double treated_weight;  // exp(beta + gamma t)
};

struct Sweep {
  CoxDerivatives der;
  std::vector<EventTime> times;
};

Sweep sweep(const CoxData& d, const std::vector<double>& coef) {
  const int p = d.p;
  const double beta = coef[0];
  const double gamma = p == 2 ? coef[1] : 0.0;
  Sweep out;
  out.der.score.assign(p, 0.0);
  out.der.information.assign(p * p, 0.0);

  // Treated rows at risk contribute exp(beta + gamma t) exp(-gamma u); keep moments of u.
  double y0 = 0.0;
  double m0 = 0.0;  // sum exp(-gamma u)
  double m1 = 0.0;  // sum u exp(-gamma u)
  double m2 = 0.0;  // sum u^2 exp(-gamma u)
  auto apply = [&](const CoxRow& r, double sign) {
    if (!r.treated) {
      y0 += sign;
      return;
    }
    const double w = std::exp(-gamma * r.u);
    m0 += sign * w;
    m1 += sign * w * r.u;
    m2 += sign * w * r.u * r.u;
  };

  std::size_t in = 0;
  std::size_t gone = 0;
  for (std::size_t e = 0; e < d.events.size();) {
    const double t = d.rows[d.events[e]].stop;
    for (; in < d.by_start.size() && d.rows[d.by_start[in]].start < t; ++in) apply(d.rows[d.by_start[in]], 1.0);
    for (; gone < d.by_stop.size() && d.rows[d.by_stop[gone]].stop < t; ++gone) apply(d.rows[d.by_stop[gone]], -1.0);

    const double ew = std::exp(beta + gamma * t);
    const double s0 = y0 + ew * m0;
    const double s1[2] = {ew * m0, ew * (t * m0 - m1)};
    const double s2[2][2] = {{ew * m0, ew * (t * m0 - m1)}, {ew * (t * m0 - m1), ew * (t * t * m0 - 2.0 * t * m1 + m2)}};

    double deaths = 0.0;
    for (; e < d.events.size() && d.rows[d.events[e]].stop == t; ++e) {
      const CoxRow& r = d.rows[d.events[e]];
      deaths += 1.0;
      if (r.treated) {
        const double z[2] = {1.0, t - r.u};
        out.der.loglik += beta + gamma * z[1];
        for (int a = 0; a < p; ++a) out.der.score[a] += z[a];
      }
    }
    out.der.loglik -= deaths * std::log(s0);
    EventTime et{t, deaths, s0, {s1[0] / s0, s1[1] / s0}, ew};
    for (int a = 0; a < p; ++a) {
      out.der.score[a] -= deaths * et.zbar[a];
      for (int b = 0; b < p; ++b) {
        out.der.information[a * p + b] += deaths * (s2[a][b] / s0 - et.zbar[a] * et.zbar[b]);
      }
    }
    out.times.push_back(et);
  }
  return out;
}

std::vector<double> invert(const std::vector<double>& m, int p) {
  if (p == 1) {
    if (!(m[0] > 0.0)) throw ConvergenceError("cox: information is not positive definite", 0);
    return {1.0 / m[0]};
  }
  const double det = m[0] * m[3] - m[1] * m[2];
  if (!(det > 0.0) || !(m[0] > 0.0)) throw ConvergenceError("cox: information is not positive definite", 0);
  return {m[3] / det, -m[1] / det, -m[2] / det, m[0] / det};
}

// Subject-clustered score residuals (Lin-Wei), summed into sum_s U_s U_s^T.
std::vector<double> residual_meat(const CoxData& d, const Sweep& sw, const std::vector<double>& coef) {
  const int p = d.p;
  const double gamma = p == 2 ? coef[1] : 0.0;
  const std::size_t K = sw.times.size();
  // Prefix sums over event times (index k covers times[0..k-1]).
  std::vector<double> q[2], w1(K + 1, 0.0), wb(K + 1, 0.0), wt(K + 1, 0.0), wg(K + 1, 0.0);
  q[0].assign(K + 1, 0.0);
  q[1].assign(K + 1, 0.0);
  for (std::size_t k = 0; k < K; ++k) {
    const EventTime& et = sw.times[k];
    const double base = et.deaths / et.s0;
    const double w = et.treated_weight * base;
    q[0][k + 1] = q[0][k] + base * et.zbar[0];
    q[1][k + 1] = q[1][k] + base * et.zbar[1];
    w1[k + 1] = w1[k] + w;
    wb[k + 1] = wb[k] + w * et.zbar[0];
    wt[k + 1] = wt[k] + w * et.t;
    wg[k + 1] = wg[k] + w * et.zbar[1];
  }
  std::vector<double> times(K);
  for (std::size_t k = 0; k < K; ++k) times[k] = sw.times[k].t;

  std::unordered_map<std::int64_t, std::array<double, 2>> resid;
  for (const CoxRow& r : d.rows) {
    const auto lo = static_cast<std::size_t>(std::upper_bound(times.begin(), times.end(), r.start) - times.begin());
    const auto hi = static_cast<std::size_t>(std::upper_bound(times.begin(), times.end(), r.stop) - times.begin());
    auto& u = resid[r.id];
    if (!r.treated) {
      u[0] += q[0][hi] - q[0][lo];
      u[1] += q[1][hi] - q[1][lo];
    } else {
      const double scale = std::exp(-gamma * r.u);
      u[0] -= scale * ((w1[hi] - w1[lo]) - (wb[hi] - wb[lo]));
      u[1] -= scale * ((wt[hi] - wt[lo]) - r.u * (w1[hi] - w1[lo]) - (wg[hi] - wg[lo]));
    }
    if (r.event) {
      const auto k = static_cast<std::size_t>(std::lower_bound(times.begin(), times.end(), r.stop) - times.begin());
      const EventTime& et = sw.times[k];
      const double z[2] = {r.treated ? 1.0 : 0.0, r.treated ? r.stop - r.u : 0.0};
      u[0] += z[0] - et.zbar[0];
      u[1] += z[1] - et.zbar[1];
    }
  }
  std::vector<double> meat(p * p, 0.0);
  for (const auto& [id, u] : resid) {
    for (int a = 0; a < p; ++a) {
      for (int b = 0; b < p; ++b) meat[a * p + b] += u[a] * u[b];
    }
  }
  return meat;
}

}  // namespace

CoxDerivatives cox_derivatives(const std::vector<CountingRow>& rows, CoxCovariates covariates,
                               const std::vector<double>& coef) {
  const CoxData d = prepare_cox(rows, covariates);
  if (static_cast<int>(coef.size()) != d.p) {
    throw InvalidInput(fmt::format("cox_derivatives: expected {} coefficients, got {}", d.p, coef.size()));
  }
  return sweep(d, coef).der;
}

CoxFit cox_fit(const std::vector<CountingRow>& rows, CoxCovariates covariates, const SolverConfig& cfg) {
  cfg.validate();
  const CoxData d = prepare_cox(rows, covariates);
  if (d.informative_events[0] == 0 || d.informative_events[1] == 0) {
    throw ConvergenceError(fmt::format("cox: monotone likelihood (untreated deaths facing treated={}, treated deaths "
                                       "facing untreated={}); the estimate diverges",
                                       d.informative_events[0], d.informative_events[1]),
                           0);
  }
  const int p = d.p;
  std::vector<double> coef(p, 0.0);
  int iterations = 0;

  if (p == 1) {
    const NewtonResult nr = newton_scalar(
        [&](double b) {
          const CoxDerivatives der = sweep(d, {b}).der;
          return std::make_pair(der.score[0], -der.information[0]);
        },
        0.0, cfg);
    coef[0] = nr.root;
    iterations = nr.iterations;
  } else {
    Sweep sw = sweep(d, coef);
    for (;; ++iterations) {
      const double norm = std::max(std::abs(sw.der.score[0]), std::abs(sw.der.score[1]));
      if (norm < cfg.tol) break;
      if (iterations == cfg.max_iter) {
        throw ConvergenceError(fmt::format("cox: no convergence after {} iterations (|score|={})", iterations, norm),
                               iterations);
      }
      const std::vector<double> inv = invert(sw.der.information, p);
      std::vector<double> step = {inv[0] * sw.der.score[0] + inv[1] * sw.der.score[1],
                                  inv[2] * sw.der.score[0] + inv[3] * sw.der.score[1]};
      // Halve the step until the partial likelihood does not decrease.
      for (int halving = 0;; ++halving) {
        std::vector<double> trial = {coef[0] + step[0], coef[1] + step[1]};
        Sweep next = sweep(d, trial);
        if (next.der.loglik >= sw.der.loglik - 1e-12 * std::abs(sw.der.loglik) || halving == 30) {
          coef = trial;
          sw = std::move(next);
          break;
        }
        step[0] *= 0.5;
        step[1] *= 0.5;
      }
    }
  }

  const Sweep sw = sweep(d, coef);
  const std::vector<double> inv = invert(sw.der.information, p);
  const std::vector<double> meat = residual_meat(d, sw, coef);
  CoxFit fit;
  fit.coef = coef;
  fit.iterations = iterations;
  fit.loglik = sw.der.loglik;
  for (double s : sw.der.score) fit.score_norm = std::max(fit.score_norm, std::abs(s));
  for (int a = 0; a < p; ++a) {
    fit.model_se.push_back(std::sqrt(inv[a * p + a]));
    double v = 0.0;
    for (int i = 0; i < p; ++i) {
      for (int j = 0; j < p; ++j) v += inv[a * p + i] * meat[i * p + j] * inv[j * p + a];
    }
    fit.robust_se.push_back(std::sqrt(v));
  }
  return fit;
}

double log_surv_ratio(double s1, double s0) {
  if (!(s1 > 0.0 && s1 < 1.0) || !(s0 > 0.0 && s0 < 1.0)) {
    throw DomainError(fmt::format("log-survival ratio undefined for S1={}, S0={} (need both in (0, 1))", s1, s0));
  }
  return std::log(s1) / std::log(s0);
}

double log_surv_ratio(const StepFunction& s1, const StepFunction& s0, double t) { return log_surv_ratio(s1(t), s0(t)); }

}  // namespace hazrate
