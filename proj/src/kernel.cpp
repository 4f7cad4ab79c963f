#include "hazrate/kernel.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/core.h>

#include "hazrate/error.hpp"
#include "hazrate/numerics.hpp"

namespace hazrate {

namespace {

// Slack for comparing t - u against the lag; grid differences are exact to ~1e-15.
constexpr double kLagSlack = 1e-10;

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

double tabulated_value(const TabulatedKernel& k, double t, double u) {
  const Grid& g = k.grid;
  u = std::min(u, t);
  const std::size_t kt = g.panel_of(t);
  const std::size_t ju = g.panel_of(u);
  const double ft = std::clamp((t - g.time(kt)) / g.step(), 0.0, 1.0);
  const double fu = std::clamp((u - g.time(ju)) / g.step(), 0.0, 1.0);
  auto node = [&](std::size_t r, std::size_t c) { return k.values[TabulatedKernel::index(r, std::min(c, r))]; };
  const double lo = node(kt, ju) + fu * (node(kt, ju + 1) - node(kt, ju));
  const double hi = node(kt + 1, ju) + fu * (node(kt + 1, ju + 1) - node(kt + 1, ju));
  return lo + ft * (hi - lo);
}

double tabulated_cumulative(const TabulatedKernel& k, double u, double t) {
  const Grid& g = k.grid;
  const double ju_real = u / g.step();
  const double ju_round = std::round(ju_real);
  const double kt_real = t / g.step();
  const double kt_round = std::round(kt_real);
  if (std::abs(ju_real - ju_round) < 1e-9 && std::abs(kt_real - kt_round) < 1e-9) {
    const auto j = static_cast<std::size_t>(ju_round);
    const auto r = static_cast<std::size_t>(kt_round);
    return k.column_cums[TabulatedKernel::index(r, j)];
  }
  // Off-node: trapezoid through the interior nodes of [u, t].
  double total = 0.0;
  double s_prev = u;
  double v_prev = tabulated_value(k, u, u);
  for (std::size_t n = g.panel_of(u) + 1; n < g.size() && g.time(n) < t; ++n) {
    const double s = g.time(n);
    if (s <= u) continue;
    const double v = tabulated_value(k, s, u);
    total += 0.5 * (v_prev + v) * (s - s_prev);
    s_prev = s;
    v_prev = v;
  }
  total += 0.5 * (v_prev + tabulated_value(k, t, u)) * (t - s_prev);
  return total;
}

}  // namespace

HazardKernel::HazardKernel(std::variant<TwoPieceKernel, TimeOnlyKernel, TabulatedKernel> rep)
    : rep_(std::make_shared<const std::variant<TwoPieceKernel, TimeOnlyKernel, TabulatedKernel>>(
          std::move(rep))) {}

HazardKernel HazardKernel::two_piece(double early, double late, double lag) {
  if (!(early >= 0.0) || !(late >= 0.0) || !std::isfinite(early) || !std::isfinite(late)) {
    throw InvalidInput(fmt::format("two-piece kernel levels must be finite and >= 0 (got {}, {})", early, late));
  }
  if (!(lag >= 0.0) || !std::isfinite(lag)) {
    throw InvalidInput(fmt::format("two-piece kernel lag must be finite and >= 0, got {}", lag));
  }
  return HazardKernel(TwoPieceKernel{early, late, lag});
}

HazardKernel HazardKernel::time_only(GridFunction hazard) {
  if (!hazard.nonnegative()) throw InvalidInput("time-only kernel hazard must be >= 0");
  GridFunction cum = hazrate::cumulative(hazard);
  return HazardKernel(TimeOnlyKernel{std::move(hazard), std::move(cum)});
}

HazardKernel HazardKernel::tabulated(const Grid& grid, const std::function<double(double, double)>& f) {
  const std::size_t n = grid.size();
  TabulatedKernel k{grid, std::vector<double>(n * (n + 1) / 2), std::vector<double>(n * (n + 1) / 2)};
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t j = 0; j <= r; ++j) {
      const double v = f(grid.time(r), grid.time(j));
      if (!(v >= 0.0) || !std::isfinite(v)) {
        throw InvalidInput(fmt::format("tabulated kernel value {} at (t={}, u={}) must be finite and >= 0", v,
                                       grid.time(r), grid.time(j)));
      }
      k.values[TabulatedKernel::index(r, j)] = v;
    }
  }
  const double half = 0.5 * grid.step();
  for (std::size_t j = 0; j < n; ++j) {
    k.column_cums[TabulatedKernel::index(j, j)] = 0.0;
    for (std::size_t r = j + 1; r < n; ++r) {
      k.column_cums[TabulatedKernel::index(r, j)] =
          k.column_cums[TabulatedKernel::index(r - 1, j)] +
          half * (k.values[TabulatedKernel::index(r - 1, j)] + k.values[TabulatedKernel::index(r, j)]);
    }
  }
  return HazardKernel(std::move(k));
}

double HazardKernel::operator()(double t, double u) const {
  return std::visit(overloaded{
                        [&](const TwoPieceKernel& k) { return t - u <= k.lag + kLagSlack ? k.early : k.late; },
                        [&](const TimeOnlyKernel& k) { return k.hazard.at(t); },
                        [&](const TabulatedKernel& k) { return tabulated_value(k, t, u); },
                    },
                    *rep_);
}

double HazardKernel::limit_from_below(double t, double u) const {
  if (const auto* k = std::get_if<TwoPieceKernel>(rep_.get())) {
    return t - u < k->lag - kLagSlack ? k->early : k->late;
  }
  return (*this)(t, u);
}

double HazardKernel::cumulative(double u, double t) const {
  return std::visit(overloaded{
                        [&](const TwoPieceKernel& k) {
                          const double d = t - u;
                          return k.early * std::min(d, k.lag) + k.late * std::max(0.0, d - k.lag);
                        },
                        [&](const TimeOnlyKernel& k) { return trapz(k.hazard, u, t); },
                        [&](const TabulatedKernel& k) { return tabulated_cumulative(k, u, t); },
                    },
                    *rep_);
}

std::optional<double> HazardKernel::first_passage(double u, double level, double horizon) const {
  if (level <= 0.0) return u;
  std::optional<double> t = std::visit(
      overloaded{
          [&](const TwoPieceKernel& k) -> std::optional<double> {
            if (k.early * k.lag >= level) return u + level / k.early;
            if (k.late <= 0.0) return std::nullopt;
            return u + k.lag + (level - k.early * k.lag) / k.late;
          },
          [&](const TimeOnlyKernel& k) -> std::optional<double> {
            return inverse_cdf_sample(k.cumulative, trapz(k.hazard, 0.0, u) + level);
          },
          [&](const TabulatedKernel& k) -> std::optional<double> {
            const Grid& g = k.grid;
            double acc = 0.0;
            double s_prev = u;
            double v_prev = tabulated_value(k, u, u);
            for (std::size_t n = g.panel_of(u) + 1; n < g.size(); ++n) {
              const double s = g.time(n);
              if (s <= u) continue;
              const double v = tabulated_value(k, s, u);
              const double inc = 0.5 * (v_prev + v) * (s - s_prev);
              if (acc + inc >= level) return s_prev + (level - acc) / inc * (s - s_prev);
              acc += inc;
              s_prev = s;
              v_prev = v;
            }
            return std::nullopt;
          },
      },
      *rep_);
  if (t && *t > horizon) return std::nullopt;
  return t;
}

bool HazardKernel::depends_on_initiation() const {
  return std::visit(overloaded{
                        [](const TwoPieceKernel& k) { return k.early != k.late; },
                        [](const TimeOnlyKernel&) { return false; },
                        [](const TabulatedKernel&) { return true; },
                    },
                    *rep_);
}

const Grid* HazardKernel::grid() const {
  return std::visit(overloaded{
                        [](const TwoPieceKernel&) -> const Grid* { return nullptr; },
                        [](const TimeOnlyKernel& k) -> const Grid* { return &k.hazard.grid(); },
                        [](const TabulatedKernel& k) -> const Grid* { return &k.grid; },
                    },
                    *rep_);
}

std::string HazardKernel::describe() const {
  return std::visit(overloaded{
                        [](const TwoPieceKernel& k) {
                          return fmt::format("two_piece early={} late={} lag={}", k.early, k.late, k.lag);
                        },
                        [](const TimeOnlyKernel&) { return std::string("time_only"); },
                        [](const TabulatedKernel&) { return std::string("tabulated"); },
                    },
                    *rep_);
}

double kernel_cumulative(const HazardKernel& k, double u, double t) {
  if (u > t) throw InvalidInput(fmt::format("kernel_cumulative: u={} exceeds t={}", u, t));
  if (u < 0.0) throw InvalidInput(fmt::format("kernel_cumulative: u={} is negative", u));
  return k.cumulative(u, t);
}

}  // namespace hazrate
