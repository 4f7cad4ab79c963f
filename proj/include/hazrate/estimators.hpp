#pragma once

#include <map>
#include <vector>

#include "hazrate/model.hpp"
#include "hazrate/numerics.hpp"

namespace hazrate {

// Right-continuous step function: `initial` before the first jump, values[i] from jump_times[i] on.
struct StepFunction {
  std::vector<double> jump_times;
  std::vector<double> values;
  double initial = 0.0;

  double operator()(double t) const;
  double increment(std::size_t i) const { return values[i] - (i == 0 ? initial : values[i - 1]); }
  std::size_t size() const { return jump_times.size(); }
};

// Treatment-specific Nelson-Aalen estimators R_a(t) = int J_a / Y_a dN_a. Keys 0 and 1 always present.
std::map<int, StepFunction> nelson_aalen_by_treatment(const std::vector<CountingRow>& rows);

// Extended Kaplan-Meier curves: risk sets follow the current treatment level.
std::map<int, StepFunction> extended_km(const std::vector<CountingRow>& rows);

enum class CoxCovariates {
  current_level,       // beta * A(t)
  level_and_duration,  // beta * A(t) + gamma * D(t), D = time since initiation
};

struct CoxFit {
  std::vector<double> coef;  // beta, then gamma for the duration model
  std::vector<double> model_se;
  std::vector<double> robust_se;
  int iterations = 0;
  double loglik = 0.0;
  double score_norm = 0.0;
};

// Breslow log partial likelihood and its first two derivatives at `coef`.
struct CoxDerivatives {
  double loglik = 0.0;
  std::vector<double> score;
  std::vector<double> information;  // row-major p x p, negative Hessian
};

CoxDerivatives cox_derivatives(const std::vector<CountingRow>& rows, CoxCovariates covariates,
                               const std::vector<double>& coef);

// Newton-Raphson fit with model-based (inverse information) and robust sandwich standard errors,
// the latter clustering score residuals by subject id.
CoxFit cox_fit(const std::vector<CountingRow>& rows, CoxCovariates covariates,
               const SolverConfig& cfg = SolverConfig::newton());

// Least-squares additive-rates fit with binary A(t): increments at event times.
struct AalenFit {
  StepFunction B0;
  StepFunction B1;
  std::vector<double> times;  // non-singular event times
  std::vector<double> dB0;
  std::vector<double> dB1;
  std::vector<double> singular_times;  // Y0 = 0 or Y1 = 0; no increment
};

AalenFit aalen_additive(const std::vector<CountingRow>& rows);

struct IdentityCheck {
  bool pass = false;
  double max_abs_error = 0.0;
  std::size_t compared = 0;
};

// dB0 == dR0 and dB1 == dR1 - dR0 at every non-singular event time.
IdentityCheck check_aalen_nelson_aalen_identity(const AalenFit& aalen, const std::map<int, StepFunction>& na,
                                                double tol = 1e-12);

// log s1(t) / log s0(t); both survivals must lie strictly inside (0, 1).
double log_surv_ratio(const StepFunction& s1, const StepFunction& s0, double t);
double log_surv_ratio(double s1, double s0);

}  // namespace hazrate
