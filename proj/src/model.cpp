#include "hazrate/model.hpp"

#include <algorithm>
#include <cfloat>
#include <cmath>
#include <map>

#include <fmt/core.h>

#include "hazrate/error.hpp"

namespace hazrate {

IllnessDeathModel::IllnessDeathModel(GridFunction l01, GridFunction l02, HazardKernel l12)
    : lambda01(std::move(l01)), lambda02(std::move(l02)), lambda12(std::move(l12)) {
  require_same_grid(lambda01.grid(), lambda02.grid(), "illness-death model (lambda01 vs lambda02)");
  if (const Grid* kg = lambda12.grid()) {
    require_same_grid(lambda01.grid(), *kg, "illness-death model (lambda01 vs lambda12)");
  }
  if (!lambda01.nonnegative()) throw InvalidInput("lambda01 must be >= 0");
  if (!lambda02.nonnegative()) throw InvalidInput("lambda02 must be >= 0");
}

IllnessDeathModel IllnessDeathModel::with_lambda02(GridFunction l02) const {
  return IllnessDeathModel(lambda01, std::move(l02), lambda12);
}

HazardKernel lagged_drop_kernel() { return HazardKernel::two_piece(0.4, 0.2, 1.0); }

void validate_counting_rows(const std::vector<CountingRow>& rows) {
  std::map<std::int64_t, std::vector<const CountingRow*>> by_id;
  for (const auto& r : rows) {
    if (!(r.start < r.stop)) {
      throw InvalidInput(fmt::format("row for id {} has start {} >= stop {}", r.id, r.start, r.stop));
    }
    if (r.treat != 0 && r.treat != 1) {
      throw InvalidInput(fmt::format("row for id {} has treatment level {} (expected 0/1)", r.id, r.treat));
    }
    by_id[r.id].push_back(&r);
  }
  for (auto& [id, subject] : by_id) {
    std::sort(subject.begin(), subject.end(), [](auto* a, auto* b) { return a->start < b->start; });
    if (subject.front()->start != 0.0) {
      throw InvalidInput(fmt::format("id {}: first interval starts at {} instead of 0", id, subject.front()->start));
    }
    for (std::size_t i = 1; i < subject.size(); ++i) {
      if (subject[i]->start != subject[i - 1]->stop) {
        throw InvalidInput(fmt::format("id {}: intervals not contiguous at {}", id, subject[i - 1]->stop));
      }
      if (subject[i]->treat < subject[i - 1]->treat) {
        throw InvalidInput(fmt::format("id {}: treatment switches off at {}", id, subject[i]->start));
      }
      if (subject[i - 1]->event) {
        throw InvalidInput(fmt::format("id {}: event flagged on a non-final interval", id));
      }
    }
  }
}

namespace {

void check_custom_consistency(const std::function<double(double)>& phi,
                              const std::function<double(double)>& phi_prime) {
  if (std::abs(phi(0.0) - 1.0) > 1e-12) throw InvalidInput("custom frailty: phi(0) must equal 1");
  for (int i = 1; i <= 10; ++i) {
    const double s = 0.25 * i;
    const double h = 1e-5 * std::max(1.0, s);
    const double fd = (phi(s + h) - phi(s - h)) / (2.0 * h);
    const double d = phi_prime(s);
    if (std::abs(fd - d) > 1e-6 * std::max(1.0, std::abs(d))) {
      throw InvalidInput(fmt::format("custom frailty: phi'({}) = {} disagrees with finite difference {}", s, d, fd));
    }
    if (!(phi(s) > 0.0) || !(phi(s) < phi(s - 0.25))) {
      throw InvalidInput(fmt::format("custom frailty: phi must be positive and strictly decreasing (s={})", s));
    }
  }
}

}  // namespace

FrailtySpec FrailtySpec::degenerate(double c) {
  if (!(c > 0.0) || !std::isfinite(c)) throw InvalidInput(fmt::format("degenerate frailty needs c > 0, got {}", c));
  return FrailtySpec(Kind::degenerate, c);
}

FrailtySpec FrailtySpec::gamma(double variance) {
  if (!(variance > 0.0) || !std::isfinite(variance)) {
    throw InvalidInput(fmt::format("gamma frailty needs variance > 0, got {} (use the degenerate kind instead)",
                                   variance));
  }
  return FrailtySpec(Kind::gamma, variance);
}

FrailtySpec FrailtySpec::custom(std::function<double(double)> phi, std::function<double(double)> phi_prime,
                                std::function<double(double)> phi_inverse) {
  if (!phi || !phi_prime || !phi_inverse) throw InvalidInput("custom frailty: all three transforms are required");
  check_custom_consistency(phi, phi_prime);
  FrailtySpec f(Kind::custom, 0.0);
  f.phi_ = std::move(phi);
  f.phi_prime_ = std::move(phi_prime);
  f.phi_inverse_ = std::move(phi_inverse);
  return f;
}

double FrailtySpec::laplace(double s) const {
  switch (kind_) {
    case Kind::degenerate:
      return std::exp(-param_ * s);
    case Kind::gamma:
      return std::pow(1.0 + param_ * s, -1.0 / param_);
    case Kind::custom:
      return phi_(s);
  }
  return 0.0;
}

double FrailtySpec::laplace_derivative(double s) const {
  switch (kind_) {
    case Kind::degenerate:
      return -param_ * std::exp(-param_ * s);
    case Kind::gamma:
      return -std::pow(1.0 + param_ * s, -1.0 / param_ - 1.0);
    case Kind::custom:
      return phi_prime_(s);
  }
  return 0.0;
}

double FrailtySpec::laplace_inverse(double p) const {
  if (!(p > 0.0 && p <= 1.0)) {
    throw DomainError(fmt::format("Laplace-transform inverse needs an argument in (0, 1], got {}", p));
  }
  switch (kind_) {
    case Kind::degenerate:
      return -std::log(p) / param_;
    case Kind::gamma:
      return std::expm1(-param_ * std::log(p)) / param_;
    case Kind::custom:
      return phi_inverse_(p);
  }
  return 0.0;
}

double FrailtySpec::hazard_multiplier(double s) const {
  switch (kind_) {
    case Kind::degenerate:
      return param_;
    case Kind::gamma:
      return 1.0 / (1.0 + param_ * s);
    case Kind::custom: {
      const double p = phi_(s);
      if (!(p > DBL_MIN)) throw DomainError(fmt::format("Laplace transform underflows at s={}", s));
      return -phi_prime_(s) / p;
    }
  }
  return 0.0;
}

std::string FrailtySpec::describe() const {
  switch (kind_) {
    case Kind::degenerate:
      return fmt::format("degenerate(c={})", param_);
    case Kind::gamma:
      return fmt::format("gamma(variance={})", param_);
    case Kind::custom:
      return "custom";
  }
  return "?";
}

}  // namespace hazrate
