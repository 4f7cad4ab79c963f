#include "cli.hpp"

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <fmt/core.h>

#include "hazrate/causal.hpp"
#include "hazrate/error.hpp"
#include "hazrate/estimators.hpp"
#include "hazrate/frailty.hpp"
#include "hazrate/io.hpp"
#include "hazrate/prop_rates.hpp"
#include "hazrate/rate_engine.hpp"
#include "hazrate/simulate.hpp"

namespace hazrate::cli {
namespace {

struct Options {
  // grid and model
  double tmax = kDefaultTMax;
  double step = kDefaultStep;
  double lambda01 = kExampleInitiationHazard;
  double early = 0.4;
  double late = 0.2;
  double lag = 1.0;
  double beta = std::log(2.0 / 3.0);
  double init_lambda02 = 1.0;
  // solver
  double tol = 1e-6;
  int max_iter = 50;
  double damping = 1.0;
  // simulation
  std::size_t n = 100000;
  std::uint64_t seed = 20240101;
  unsigned threads = 1;
  std::string frailty = "none";
  std::string regime = "observed";
  // io
  std::string out_dir;
  std::string model_path;
  std::string out_path;
  std::string data_path;
  std::string method = "cox";
  // frailty demo
  double h0 = 0.3;
  double h1 = 0.5;
  double u = 1.5;
  // collider
  double p1 = 0.2;
  double effect = 0.5;
  std::string levels = "0.5:0.5,1.5:0.5";
  double p_treat_first = 0.5;
  double p_treat_second = 0.5;
  // reproduce
  int section = 5;
};

std::string default_out_dir() {
  const char* env = std::getenv("HAZRATE_OUT_DIR");
  return env && *env ? std::string(env) : std::string(".");
}

std::string output_path(const Options& o, const std::string& name) {
  std::filesystem::create_directories(o.out_dir);
  return (std::filesystem::path(o.out_dir) / name).string();
}

std::ofstream open_csv(const std::string& path) {
  std::ofstream os(path);
  if (!os) throw InvalidInput(fmt::format("cannot write '{}'", path));
  return os;
}

std::pair<std::string, std::optional<double>> split_spec(const std::string& s) {
  const auto colon = s.find(':');
  if (colon == std::string::npos) return {s, std::nullopt};
  const std::string num = s.substr(colon + 1);
  try {
    std::size_t used = 0;
    const double v = std::stod(num, &used);
    if (used != num.size()) throw std::invalid_argument(num);
    return {s.substr(0, colon), v};
  } catch (const std::exception&) {
    throw InvalidInput(fmt::format("cannot parse number in '{}'", s));
  }
}

std::optional<FrailtySpec> parse_frailty(const std::string& s) {
  const auto [kind, value] = split_spec(s);
  if (kind == "none" && !value) return std::nullopt;
  if (kind == "gamma" && value) return FrailtySpec::gamma(*value);
  if (kind == "degenerate" && value) return FrailtySpec::degenerate(*value);
  throw InvalidInput(fmt::format("frailty must be none, gamma:<variance> or degenerate:<c>, got '{}'", s));
}

std::optional<Regime> parse_regime(const std::string& s) {
  const auto [kind, value] = split_spec(s);
  if (kind == "observed" && !value) return std::nullopt;
  if (kind == "never" && !value) return Regime::never();
  if (kind == "always" && !value) return Regime::always();
  if (kind == "initiate_at" && value) return Regime::initiate_at(*value);
  throw InvalidInput(fmt::format("regime must be observed, never, always or initiate_at:<u>, got '{}'", s));
}

std::vector<std::pair<double, double>> parse_levels(const std::string& s) {
  std::vector<std::pair<double, double>> out;
  std::istringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const auto colon = item.find(':');
    if (colon == std::string::npos) throw InvalidInput(fmt::format("frailty level '{}' is not z:probability", item));
    try {
      out.emplace_back(std::stod(item.substr(0, colon)), std::stod(item.substr(colon + 1)));
    } catch (const std::exception&) {
      throw InvalidInput(fmt::format("cannot parse frailty level '{}'", item));
    }
  }
  return out;
}

Grid make_grid(const Options& o) { return Grid(o.tmax, o.step); }

HazardKernel make_kernel(const Options& o) { return HazardKernel::two_piece(o.early, o.late, o.lag); }

SolverConfig make_solver(const Options& o) {
  SolverConfig cfg = SolverConfig::fixed_point();
  cfg.tol = o.tol;
  cfg.max_iter = o.max_iter;
  cfg.damping = o.damping;
  cfg.validate();
  return cfg;
}

BuildReport build(const Options& o) {
  const Grid g = make_grid(o);
  return build_proportional_rates(GridFunction::constant(g, o.lambda01), make_kernel(o), o.beta,
                                  GridFunction::constant(g, o.init_lambda02), make_solver(o));
}

IllnessDeathModel model_from(const Options& o, const BuildReport& rep) {
  if (!rep.converged) {
    throw ConvergenceError(fmt::format("construction did not converge: sup deviation {} after {} updates",
                                       fmt6(rep.final_deviation()), rep.updates()),
                           rep.updates());
  }
  return IllnessDeathModel(GridFunction::constant(rep.lambda02.grid(), o.lambda01), rep.lambda02, make_kernel(o));
}

IllnessDeathModel resolve_model(const Options& o) {
  if (!o.model_path.empty()) return read_model_file(o.model_path);
  return model_from(o, build(o));
}

// ---- subcommands ----

struct ConstructOutcome {
  BuildReport report;
  std::string model_file;
};

ConstructOutcome do_construct(const Options& o, std::ostream& out) {
  BuildReport rep = build(o);
  {
    auto os = open_csv(output_path(o, "construct_iterations.csv"));
    os << "iteration,sup_deviation\n";
    for (const auto& it : rep.iterations) os << it.index << ',' << fmt6(it.sup_deviation) << '\n';
  }
  {
    auto os = open_csv(output_path(o, "lambda02.csv"));
    os << "t,lambda02\n";
    for (std::size_t k = 0; k < rep.lambda02.size(); ++k) {
      os << fmt6(rep.lambda02.time(k)) << ',' << fmt6(rep.lambda02[k]) << '\n';
    }
  }
  out << fmt::format("converged: {}\nupdates: {}\nsup_deviation: {}\n", rep.converged ? "yes" : "no", rep.updates(),
                     fmt6(rep.final_deviation()));
  const IllnessDeathModel model = model_from(o, rep);
  const std::string path = output_path(o, "model.csv");
  write_model_file(path, model);
  out << "model: " << path << '\n';
  return {std::move(rep), path};
}

void do_rates(const Options& o, std::ostream& out) {
  const IllnessDeathModel m = resolve_model(o);
  const TreatedRate r12 = rate_treated(m);
  const RateRatio rr = rate_ratio(m);
  auto os = open_csv(output_path(o, "rates.csv"));
  os << "t,r12,r02,rate_ratio\n";
  for (std::size_t k = 0; k < m.grid().size(); ++k) {
    os << fmt::format("{},{},{},{}\n", fmt6(m.grid().time(k)), fmt6(r12.rate[k]), fmt6(m.lambda02[k]), fmt6(rr.ratio[k]));
  }
  out << "sup_deviation_from_exp_beta: " << fmt6(sup_deviation(rr, std::exp(o.beta))) << '\n';
}

std::vector<CountingRow> do_simulate(const Options& o, const IllnessDeathModel& m, std::ostream& out) {
  SimConfig cfg;
  cfg.n = o.n;
  cfg.seed = o.seed;
  cfg.threads = o.threads;
  cfg.frailty = parse_frailty(o.frailty);
  const std::optional<Regime> regime = parse_regime(o.regime);
  const auto trajectories = regime ? simulate_regime(m, *regime, cfg) : simulate_cohort(m, cfg);
  const auto rows = to_counting_rows(trajectories);
  const std::string path = o.out_path.empty() ? output_path(o, "trajectories.csv") : o.out_path;
  write_counting_rows_file(path, rows);
  std::size_t events = 0;
  for (const auto& r : rows) events += r.event;
  out << fmt::format("subjects: {}\nrows: {}\nevents: {}\ndata: {}\n", trajectories.size(), rows.size(), events, path);
  return rows;
}

void write_steps(const Options& o, const std::string& name, const std::map<int, StepFunction>& f, const char* prefix,
                 bool with_ratio) {
  const Grid g = make_grid(o);
  auto os = open_csv(output_path(o, name));
  os << fmt::format("t,{0}0,{0}1{1}\n", prefix, with_ratio ? ",log_surv_ratio" : "");
  for (std::size_t k = 0; k < g.size(); ++k) {
    const double t = g.time(k);
    const double v0 = f.at(0)(t);
    const double v1 = f.at(1)(t);
    os << fmt6(t) << ',' << fmt6(v0) << ',' << fmt6(v1);
    if (with_ratio) {
      os << ',';
      if (v0 > 0.0 && v0 < 1.0 && v1 > 0.0 && v1 < 1.0) os << fmt6(log_surv_ratio(v1, v0));
    }
    os << '\n';
  }
}

void do_estimate(const Options& o, const std::vector<CountingRow>& rows, std::ostream& out) {
  const std::string& m = o.method;
  if (m == "na") {
    write_steps(o, "na.csv", nelson_aalen_by_treatment(rows), "R", false);
    out << "na: " << output_path(o, "na.csv") << '\n';
  } else if (m == "ekm") {
    write_steps(o, "ekm.csv", extended_km(rows), "S", true);
    out << "ekm: " << output_path(o, "ekm.csv") << '\n';
  } else if (m == "cox") {
    const CoxFit f = cox_fit(rows, CoxCovariates::current_level);
    out << "beta_hat,model_se,robust_se,loglik,iters\n"
        << fmt::format("{},{},{},{},{}\n", fmt6(f.coef[0]), fmt6(f.model_se[0]), fmt6(f.robust_se[0]), fmt6(f.loglik),
                       f.iterations);
  } else if (m == "cox-duration") {
    const CoxFit f = cox_fit(rows, CoxCovariates::level_and_duration);
    out << "beta_hat,gamma_hat,beta_model_se,gamma_model_se,beta_robust_se,gamma_robust_se,loglik,iters\n"
        << fmt::format("{},{},{},{},{},{},{},{}\n", fmt6(f.coef[0]), fmt6(f.coef[1]), fmt6(f.model_se[0]),
                       fmt6(f.model_se[1]), fmt6(f.robust_se[0]), fmt6(f.robust_se[1]), fmt6(f.loglik), f.iterations);
  } else if (m == "aalen") {
    const AalenFit fit = aalen_additive(rows);
    const IdentityCheck check = check_aalen_nelson_aalen_identity(fit, nelson_aalen_by_treatment(rows));
    auto os = open_csv(output_path(o, "aalen.csv"));
    os << "t,B0,B1\n";
    for (std::size_t i = 0; i < fit.times.size(); ++i) {
      os << fmt6(fit.times[i]) << ',' << fmt6(fit.B0.values[i]) << ',' << fmt6(fit.B1.values[i]) << '\n';
    }
    out << "aalen_na_identity: " << (check.pass ? "PASS" : "FAIL") << '\n'
        << fmt::format("compared: {}\nmax_abs_error: {}\nsingular_times: {}\n", check.compared,
                       fmt6(check.max_abs_error), fit.singular_times.size());
  } else {
    throw InvalidInput(fmt::format("unknown method '{}' (ekm, na, cox, cox-duration, aalen)", m));
  }
}

struct ContrastNumbers {
  double t;
  double true_contrast;
  double rate_based_contrast;
};

ContrastNumbers do_contrast(const Options& o, const IllnessDeathModel& m, std::ostream& out) {
  const GridFunction s_always = potential_survival(m, Regime::always());
  const GridFunction s_never = potential_survival(m, Regime::never());
  const GridFunction r12 = rate_treated(m).rate;
  const GridFunction s_treated_rb = rate_based_survival(r12);
  const GridFunction s_untreated_rb = rate_based_survival(m.lambda02);
  const GridFunction hr = causal_hazard_ratio(m);
  const RateRatio rr = rate_ratio(m);
  auto os = open_csv(output_path(o, "contrast.csv"));
  os << "t,S_always_true,S_never_true,S_treated_ratebased,S_untreated_ratebased,causal_hr,rate_ratio\n";
  for (std::size_t k = 0; k < m.grid().size(); ++k) {
    os << fmt::format("{},{},{},{},{},{},{}\n", fmt6(m.grid().time(k)), fmt6(s_always[k]), fmt6(s_never[k]),
                      fmt6(s_treated_rb[k]), fmt6(s_untreated_rb[k]), fmt6(hr[k]), fmt6(rr.ratio[k]));
  }
  const std::size_t last = m.grid().size() - 1;
  ContrastNumbers c{m.grid().time(last), s_always[last] - s_never[last], s_treated_rb[last] - s_untreated_rb[last]};
  out << fmt::format("true_contrast(t={}): {:.2f} ({})\n", fmt6(c.t), c.true_contrast, fmt6(c.true_contrast))
      << fmt::format("ratebased_contrast(t={}): {:.2f} ({})\n", fmt6(c.t), c.rate_based_contrast,
                     fmt6(c.rate_based_contrast));
  return c;
}

void do_frailty_demo(const Options& o, std::ostream& out) {
  const std::optional<FrailtySpec> f = parse_frailty(o.frailty);
  if (!f) throw InvalidInput("frailty-demo needs --frailty gamma:<v> or degenerate:<c>");
  const Grid g = make_grid(o);
  const ConditionalHazardSpec spec(GridFunction::constant(g, o.h0), GridFunction::constant(g, o.h1));
  const GridFunction never = marginal_hazard(spec, *f, TreatmentPath::never());
  const GridFunction from0 = marginal_hazard(spec, *f, TreatmentPath::from(0.0));
  const GridFunction fromu = marginal_hazard(spec, *f, TreatmentPath::from(o.u));
  auto os = open_csv(output_path(o, "frailty.csv"));
  os << "t,hazard_never,hazard_from_0,hazard_from_u,violation_gap\n";
  for (std::size_t k = 0; k < g.size(); ++k) {
    const double t = g.time(k);
    os << fmt::format("{},{},{},{},", fmt6(t), fmt6(never[k]), fmt6(from0[k]), fmt6(fromu[k]));
    if (t > o.u) os << fmt6(markov_violation_gap(spec, *f, t, 0.0, o.u));
    os << '\n';
  }
  const double t_probe = std::min(g.last_time(), std::max(2.0, o.u + g.step()));
  out << fmt::format("frailty: {}\nviolation_gap(t={}, u1=0, u2={}): {}\n", f->describe(), fmt6(t_probe), fmt6(o.u),
                     fmt6(markov_violation_gap(spec, *f, t_probe, 0.0, o.u)));
}

void do_collider(const Options& o, std::ostream& out) {
  ColliderScenario s;
  s.p1 = o.p1;
  s.effect = o.effect;
  s.frailty_levels = parse_levels(o.levels);
  s.p_treat_first = o.p_treat_first;
  s.p_treat_second = {o.p_treat_second, o.p_treat_second};
  const auto table = collider_table(s);
  auto os = open_csv(output_path(o, "collider.csv"));
  os << "a1,a2,p_event\n";
  out << "a1,a2,p_event\n";
  for (const auto& c : table) {
    const std::string line = fmt::format("{},{},{}\n", c.a1, c.a2, fmt6(c.p_event));
    os << line;
    out << line;
  }
}

void do_reproduce(Options o, std::ostream& out) {
  if (o.section != 5) throw InvalidInput(fmt::format("only section 5 is available, got {}", o.section));
  std::ostringstream log;
  const ConstructOutcome built = do_construct(o, log);
  const IllnessDeathModel m = read_model_file(built.model_file);
  const ContrastNumbers c = do_contrast(o, m, log);
  const std::vector<CountingRow> rows = do_simulate(o, m, log);
  const CoxFit cox = cox_fit(rows, CoxCovariates::current_level);
  const auto na = nelson_aalen_by_treatment(rows);
  const auto km = extended_km(rows);
  const IdentityCheck identity = check_aalen_nelson_aalen_identity(aalen_additive(rows), na);

  double slice = 0.0;
  for (std::size_t k = 0; k < m.grid().size() && m.grid().time(k) <= 1.0 + 1e-12; ++k) {
    slice = std::max(slice, std::abs(m.lambda02[k] - 0.6));
  }
  const GridFunction R1 = cumulative(rate_treated(m).rate);
  const GridFunction R0 = cumulative(m.lambda02);
  // grid nodes plus both sides of every jump, so the sup over the interval is exact
  std::vector<double> probes;
  for (std::size_t k = 0; k < m.grid().size(); ++k) probes.push_back(m.grid().time(k));
  for (const auto* s : {&na.at(0), &na.at(1), &km.at(0), &km.at(1)}) {
    for (double t : s->jump_times) {
      probes.push_back(t);
      probes.push_back(std::nextafter(t, 0.0));
    }
  }
  double na_sup = 0.0;
  double km_dev = 0.0;
  for (double t : probes) {
    if (t > 2.5 + 1e-12) continue;
    na_sup = std::max({na_sup, std::abs(na.at(0)(t) - R0.at(t)), std::abs(na.at(1)(t) - R1.at(t))});
    if (t >= 0.5 - 1e-12) km_dev = std::max(km_dev, std::abs(log_surv_ratio(km.at(1), km.at(0), t) - std::exp(o.beta)));
  }

  struct Line {
    std::string name;
    double value;
    std::string target;
    bool ok;
  };
  const double beta0 = std::log(2.0 / 3.0);
  const std::vector<Line> lines = {
      {"rate_ratio_sup_deviation", built.report.final_deviation(), "< 0.001", built.report.final_deviation() < 1e-3},
      {"construct_updates", static_cast<double>(built.report.updates()), "<= 5", built.report.updates() <= 5},
      {"lambda02_slice_sup_error", slice, "< 0.0001", slice < 1e-4},
      {"true_contrast", c.true_contrast, "0.22 +/- 0.005", std::abs(c.true_contrast - 0.22) <= 0.005},
      {"ratebased_contrast", c.rate_based_contrast, "0.14 +/- 0.005", std::abs(c.rate_based_contrast - 0.14) <= 0.005},
      {"beta_hat", cox.coef[0], "log(2/3) +/- 0.03", std::abs(cox.coef[0] - beta0) <= 0.03},
      {"beta_robust_se", cox.robust_se[0], "reported", true},
      {"nelson_aalen_sup_error", na_sup, "< 0.02", na_sup < 0.02},
      {"ekm_log_surv_ratio_sup_dev", km_dev, "< 0.05", km_dev < 0.05},
      {"aalen_na_identity_max_error", identity.max_abs_error, "<= 1e-12", identity.pass},
  };
  auto os = open_csv(output_path(o, "reproduce_summary.csv"));
  os << "quantity,value,target,status\n";
  for (const auto& l : lines) {
    const std::string row = fmt::format("{},{},{},{}\n", l.name, fmt6(l.value), l.target, l.ok ? "PASS" : "FAIL");
    os << row;
    out << row;
  }
  out << fmt::format("true_contrast: {:.2f}\nratebased_contrast: {:.2f}\n", c.true_contrast, c.rate_based_contrast);
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  Options o;
  o.out_dir = default_out_dir();
  CLI::App app{"Hazards, rates and causal contrasts in an illness-death model", "hazrate"};
  app.set_config("--config", "", "flat key=value file with option values; command-line flags take precedence");
  app.require_subcommand(1);
  app.fallthrough();

  app.add_option("--tmax", o.tmax, "grid horizon")->check(CLI::PositiveNumber);
  app.add_option("--step", o.step, "grid step")->check(CLI::PositiveNumber);
  app.add_option("--lambda01", o.lambda01, "constant initiation hazard");
  app.add_option("--early", o.early, "post-initiation hazard up to the lag");
  app.add_option("--late", o.late, "post-initiation hazard after the lag");
  app.add_option("--lag", o.lag, "lag of the post-initiation hazard drop");
  app.add_option("--beta", o.beta, "log rate ratio target");
  app.add_option("--init-lambda02", o.init_lambda02, "initial constant guess for lambda02");
  app.add_option("--tol", o.tol, "fixed-point tolerance on sup |RR - e^beta|");
  app.add_option("--max-iter", o.max_iter, "fixed-point iteration cap");
  app.add_option("--damping", o.damping, "fixed-point damping in (0, 1]");
  app.add_option("--model", o.model_path, "model CSV written by construct (otherwise built from the flags)");
  app.add_option("--out-dir", o.out_dir, "output directory (default $HAZRATE_OUT_DIR or .)");
  app.add_option("--n", o.n, "number of simulated subjects");
  app.add_option("--seed", o.seed, "simulation seed");
  app.add_option("--threads", o.threads, "simulation threads");
  app.add_option("--frailty", o.frailty, "none, gamma:<variance> or degenerate:<c>");

  auto* construct = app.add_subcommand("construct", "build lambda02 so that the rate ratio is e^beta");
  auto* rates = app.add_subcommand("rates", "tabulate r12, r02 and their ratio");
  auto* simulate = app.add_subcommand("simulate", "simulate counting-process data from a model");
  simulate->add_option("--out", o.out_path, "output CSV (default <out-dir>/trajectories.csv)");
  simulate->add_option("--regime", o.regime, "observed, never, always or initiate_at:<u>");
  auto* estimate = app.add_subcommand("estimate", "fit estimators to counting-process data");
  estimate->add_option("--data,--in", o.data_path, "counting-process CSV")->required();
  estimate->add_option("--method", o.method, "ekm, na, cox, cox-duration or aalen");
  auto* contrast = app.add_subcommand("contrast", "potential-outcome and rate-based survival curves");
  auto* frailty = app.add_subcommand("frailty-demo", "frailty-marginalized hazards and the Markov violation gap");
  frailty->add_option("--h0", o.h0, "conditional hazard while untreated");
  frailty->add_option("--h1", o.h1, "conditional hazard while treated");
  frailty->add_option("--u", o.u, "initiation time of the late path");
  auto* collider = app.add_subcommand("collider", "exact two-period collider enumeration");
  collider->add_option("--p1", o.p1, "baseline event probability per period");
  collider->add_option("--effect", o.effect, "multiplicative treatment effect");
  collider->add_option("--levels", o.levels, "frailty levels as z:prob,z:prob");
  collider->add_option("--p-treat-first", o.p_treat_first, "P(A1 = 1)");
  collider->add_option("--p-treat-second", o.p_treat_second, "P(A2 = 1 | N1 = 0)");
  auto* reproduce = app.add_subcommand("reproduce", "run the worked example end to end and summarize");
  reproduce->add_option("--paper-section", o.section, "worked example to reproduce (5)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : 1;
  }

  try {
    if (construct->parsed()) {
      do_construct(o, out);
    } else if (rates->parsed()) {
      do_rates(o, out);
    } else if (simulate->parsed()) {
      do_simulate(o, resolve_model(o), out);
    } else if (estimate->parsed()) {
      do_estimate(o, read_counting_rows_file(o.data_path), out);
    } else if (contrast->parsed()) {
      do_contrast(o, resolve_model(o), out);
    } else if (frailty->parsed()) {
      do_frailty_demo(o, out);
    } else if (collider->parsed()) {
      do_collider(o, out);
    } else if (reproduce->parsed()) {
      do_reproduce(o, out);
    }
  } catch (const ConvergenceError& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::domain_error& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::filesystem::filesystem_error& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}

int run(int argc, const char* const* argv) { return run(argc, argv, std::cout, std::cerr); }

}  // namespace hazrate::cli
