#include <pybind11/functional.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <fmt/core.h>

#include "hazrate/causal.hpp"
#include "hazrate/error.hpp"
#include "hazrate/estimators.hpp"
#include "hazrate/frailty.hpp"
#include "hazrate/io.hpp"
#include "hazrate/prop_rates.hpp"
#include "hazrate/rate_engine.hpp"
#include "hazrate/simulate.hpp"

namespace py = pybind11;
using namespace hazrate;

namespace {

using Array = py::array_t<double>;

Array to_array(std::span<const double> v) { return Array(static_cast<py::ssize_t>(v.size()), v.data()); }

// Counting-process rows travel as a dict of equal-length numpy arrays.
py::dict rows_to_dict(const std::vector<CountingRow>& rows) {
  const auto n = static_cast<py::ssize_t>(rows.size());
  py::array_t<std::int64_t> id(n), treat(n);
  Array start(n), stop(n);
  py::array_t<bool> event(n);
  auto id_ = id.mutable_unchecked<1>();
  auto treat_ = treat.mutable_unchecked<1>();
  auto start_ = start.mutable_unchecked<1>();
  auto stop_ = stop.mutable_unchecked<1>();
  auto event_ = event.mutable_unchecked<1>();
  for (py::ssize_t i = 0; i < n; ++i) {
    const auto& r = rows[static_cast<std::size_t>(i)];
    id_(i) = r.id;
    start_(i) = r.start;
    stop_(i) = r.stop;
    treat_(i) = r.treat;
    event_(i) = r.event;
  }
  py::dict d;
  d["id"] = id;
  d["start"] = start;
  d["stop"] = stop;
  d["treat"] = treat;
  d["event"] = event;
  return d;
}

std::vector<CountingRow> rows_from_dict(const py::dict& d) {
  for (const char* key : {"id", "start", "stop", "treat", "event"}) {
    if (!d.contains(key)) throw InvalidInput(std::string("rows: missing column '") + key + "'");
  }
  const auto id = d["id"].cast<py::array_t<std::int64_t, py::array::forcecast>>();
  const auto start = d["start"].cast<py::array_t<double, py::array::forcecast>>();
  const auto stop = d["stop"].cast<py::array_t<double, py::array::forcecast>>();
  const auto treat = d["treat"].cast<py::array_t<int, py::array::forcecast>>();
  const auto event = d["event"].cast<py::array_t<bool, py::array::forcecast>>();
  const py::ssize_t n = id.size();
  if (start.size() != n || stop.size() != n || treat.size() != n || event.size() != n) {
    throw InvalidInput("rows: columns have different lengths");
  }
  std::vector<CountingRow> rows(static_cast<std::size_t>(n));
  for (py::ssize_t i = 0; i < n; ++i) {
    rows[static_cast<std::size_t>(i)] = {id.at(i), start.at(i), stop.at(i), treat.at(i), event.at(i)};
  }
  validate_counting_rows(rows);
  return rows;
}

py::tuple step_to_tuple(const StepFunction& s) { return py::make_tuple(to_array(s.jump_times), to_array(s.values)); }

py::dict step_map(const std::map<int, StepFunction>& m) {
  py::dict d;
  for (const auto& [a, s] : m) d[py::int_(a)] = step_to_tuple(s);
  return d;
}

SimConfig sim_config(std::size_t n, std::uint64_t seed, unsigned threads, std::optional<FrailtySpec> frailty) {
  SimConfig cfg;
  cfg.n = n;
  cfg.seed = seed;
  cfg.threads = threads;
  cfg.frailty = std::move(frailty);
  return cfg;
}

}  // namespace

PYBIND11_MODULE(_hazrate, m) {
  m.doc() = "Illness-death rates, frailty hazards and estimators";
  m.attr("__version__") = "0.1.0";

  static py::exception<ConvergenceError> convergence_error(m, "ConvergenceError", PyExc_RuntimeError);
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const ConvergenceError& e) {
      py::set_error(convergence_error, e.what());
    }
  });

  py::class_<Grid>(m, "Grid")
      .def(py::init<double, double>(), py::arg("t_max") = kDefaultTMax, py::arg("step") = kDefaultStep)
      .def_property_readonly("t_max", &Grid::t_max)
      .def_property_readonly("step", &Grid::step)
      .def("__len__", &Grid::size)
      .def("times", [](const Grid& g) {
        Array out(static_cast<py::ssize_t>(g.size()));
        for (std::size_t k = 0; k < g.size(); ++k) out.mutable_at(k) = g.time(k);
        return out;
      })
      .def("__repr__", [](const Grid& g) { return fmt::format("Grid(t_max={}, step={})", g.t_max(), g.step()); });

  py::class_<GridFunction>(m, "GridFunction")
      .def(py::init([](const Grid& g, const std::vector<double>& v) { return GridFunction(g, v); }), py::arg("grid"),
           py::arg("values"))
      .def_static("constant", &GridFunction::constant, py::arg("grid"), py::arg("value"))
      .def_static("tabulate", &GridFunction::tabulate, py::arg("grid"), py::arg("f"))
      .def_property_readonly("grid", &GridFunction::grid)
      .def_property_readonly("values", [](const GridFunction& f) { return to_array(f.values()); })
      .def("at", &GridFunction::at, py::arg("t"))
      .def("__call__", &GridFunction::at)
      .def("__len__", &GridFunction::size)
      .def("min", &GridFunction::min)
      .def("max", &GridFunction::max);
  m.def("cumulative", py::overload_cast<const GridFunction&>(&cumulative), py::arg("f"));

  py::class_<HazardKernel>(m, "HazardKernel")
      .def_static("two_piece", &HazardKernel::two_piece, py::arg("early"), py::arg("late"), py::arg("lag"))
      .def_static("time_only", &HazardKernel::time_only, py::arg("hazard"))
      .def_static("tabulated", &HazardKernel::tabulated, py::arg("grid"), py::arg("f"))
      .def("__call__", &HazardKernel::operator(), py::arg("t"), py::arg("u"))
      .def("cumulative", &HazardKernel::cumulative, py::arg("u"), py::arg("t"))
      .def("__repr__", &HazardKernel::describe);

  py::class_<IllnessDeathModel>(m, "IllnessDeathModel")
      .def(py::init<GridFunction, GridFunction, HazardKernel>(), py::arg("lambda01"), py::arg("lambda02"),
           py::arg("lambda12"))
      .def_readonly("lambda01", &IllnessDeathModel::lambda01)
      .def_readonly("lambda02", &IllnessDeathModel::lambda02)
      .def_readonly("lambda12", &IllnessDeathModel::lambda12)
      .def_property_readonly("grid", &IllnessDeathModel::grid)
      .def("with_lambda02", &IllnessDeathModel::with_lambda02);

  py::class_<BuildReport>(m, "BuildReport")
      .def_readonly("lambda02", &BuildReport::lambda02)
      .def_readonly("converged", &BuildReport::converged)
      .def_property_readonly("updates", &BuildReport::updates)
      .def_property_readonly("final_deviation", &BuildReport::final_deviation)
      .def_property_readonly("deviations", [](const BuildReport& r) {
        std::vector<double> d;
        for (const auto& it : r.iterations) d.push_back(it.sup_deviation);
        return d;
      });
  m.def(
      "build_proportional_rates",
      [](const GridFunction& l01, const HazardKernel& l12, double beta, const GridFunction& init, double tol,
         int max_iter, double damping) {
        return build_proportional_rates(l01, l12, beta, init, SolverConfig{tol, max_iter, damping});
      },
      py::arg("lambda01"), py::arg("lambda12"), py::arg("beta"), py::arg("init_lambda02"), py::arg("tol") = 1e-6,
      py::arg("max_iter") = 50, py::arg("damping") = 1.0);
  m.def("constructed_example_model", [](const Grid& g) { return constructed_example_model(g); },
        py::arg("grid") = Grid());

  m.def("rate_treated", [](const IllnessDeathModel& md) { return rate_treated(md).rate; });
  m.def("rate_untreated", &rate_untreated);
  m.def("rate_ratio", [](const IllnessDeathModel& md) { return rate_ratio(md).ratio; });
  m.def("occupation_probability", &occupation_probability);
  m.def("ode_residual", &ode_residual, py::arg("model"), py::arg("beta"));

  py::class_<Regime>(m, "Regime")
      .def_static("never", &Regime::never)
      .def_static("always", &Regime::always)
      .def_static("initiate_at", &Regime::initiate_at, py::arg("u"))
      .def("__repr__", &Regime::describe);
  m.def("potential_survival", &potential_survival, py::arg("model"), py::arg("regime"));
  m.def("rate_based_survival", &rate_based_survival, py::arg("rate"));
  m.def("causal_hazard_ratio", &causal_hazard_ratio, py::arg("model"));
  m.def("duration_model_ratio", &duration_model_ratio, py::arg("lambda0"), py::arg("beta"), py::arg("gamma"),
        py::arg("t"));

  py::class_<FrailtySpec>(m, "FrailtySpec")
      .def_static("gamma", &FrailtySpec::gamma, py::arg("variance"))
      .def_static("degenerate", &FrailtySpec::degenerate, py::arg("c"))
      .def("laplace", &FrailtySpec::laplace)
      .def("__repr__", &FrailtySpec::describe);
  py::class_<ConditionalHazardSpec>(m, "ConditionalHazardSpec")
      .def(py::init<GridFunction, GridFunction>(), py::arg("untreated"), py::arg("treated"))
      .def_readonly("untreated", &ConditionalHazardSpec::untreated)
      .def_readonly("treated", &ConditionalHazardSpec::treated);
  py::class_<TreatmentPath>(m, "TreatmentPath")
      .def_static("never", &TreatmentPath::never)
      .def_static("start_at", &TreatmentPath::from, py::arg("u"))
      .def_readonly("u_init", &TreatmentPath::u_init);
  m.def("marginal_hazard", &marginal_hazard, py::arg("spec"), py::arg("frailty"), py::arg("path"));
  m.def("markov_violation_gap", &markov_violation_gap, py::arg("spec"), py::arg("frailty"), py::arg("t"),
        py::arg("u1"), py::arg("u2"));
  m.def(
      "invert_rate_to_h",
      [](const GridFunction& untreated, const GridFunction& treated, const FrailtySpec& f, const TreatmentPath& p) {
        return invert_rate_to_h(LevelRates{untreated, treated}, f, p).pieces;
      },
      py::arg("untreated_rate"), py::arg("treated_rate"), py::arg("frailty"), py::arg("path"));
  m.def(
      "collider_table",
      [](double p1, double effect, std::vector<std::pair<double, double>> levels, double p_first,
         std::array<double, 2> p_second) {
        ColliderScenario s{p1, effect, std::move(levels), p_first, p_second};
        std::vector<std::tuple<int, int, double>> out;
        for (const auto& c : collider_table(s)) out.emplace_back(c.a1, c.a2, c.p_event);
        return out;
      },
      py::arg("p1") = 0.2, py::arg("effect") = 0.5,
      py::arg("levels") = std::vector<std::pair<double, double>>{{0.5, 0.5}, {1.5, 0.5}},
      py::arg("p_treat_first") = 0.5, py::arg("p_treat_second") = std::array<double, 2>{0.5, 0.5});

  m.def(
      "simulate",
      [](const IllnessDeathModel& md, std::size_t n, std::uint64_t seed, std::optional<Regime> regime,
         unsigned threads) {
        const SimConfig cfg = sim_config(n, seed, threads, std::nullopt);
        std::vector<Trajectory> trajs;
        {
          py::gil_scoped_release release;
          trajs = regime ? simulate_regime(md, *regime, cfg) : simulate_cohort(md, cfg);
        }
        return rows_to_dict(to_counting_rows(trajs));
      },
      py::arg("model"), py::arg("n"), py::arg("seed") = 20240101, py::arg("regime") = std::nullopt,
      py::arg("threads") = 1);

  m.def("nelson_aalen", [](const py::dict& rows) { return step_map(nelson_aalen_by_treatment(rows_from_dict(rows))); });
  m.def("extended_km", [](const py::dict& rows) { return step_map(extended_km(rows_from_dict(rows))); });

  py::class_<CoxFit>(m, "CoxFit")
      .def_readonly("coef", &CoxFit::coef)
      .def_readonly("model_se", &CoxFit::model_se)
      .def_readonly("robust_se", &CoxFit::robust_se)
      .def_readonly("iterations", &CoxFit::iterations)
      .def_readonly("loglik", &CoxFit::loglik);
  m.def(
      "cox_fit",
      [](const py::dict& rows, bool duration) {
        return cox_fit(rows_from_dict(rows),
                       duration ? CoxCovariates::level_and_duration : CoxCovariates::current_level);
      },
      py::arg("rows"), py::arg("duration") = false);
  m.def(
      "aalen_additive",
      [](const py::dict& d) {
        const auto rows = rows_from_dict(d);
        const AalenFit fit = aalen_additive(rows);
        const IdentityCheck check = check_aalen_nelson_aalen_identity(fit, nelson_aalen_by_treatment(rows));
        py::dict out;
        out["times"] = to_array(fit.times);
        out["B0"] = to_array(fit.B0.values);
        out["B1"] = to_array(fit.B1.values);
        out["singular_times"] = to_array(fit.singular_times);
        out["na_identity_max_error"] = check.max_abs_error;
        return out;
      },
      py::arg("rows"));

  m.def("write_model", [](const IllnessDeathModel& md, const std::string& path) { write_model_file(path, md); });
  m.def("read_model", [](const std::string& path) { return read_model_file(path); });
}
