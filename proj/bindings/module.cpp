// Python bindings for the estimation core. The panel exchanges columns as
// numpy float64 arrays with NaN marking missing cells.
#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <pybind11/eigen.h>
#include <pybind11/numpy.h>
#include <pybind11/operators.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <nlohmann/json.hpp>

#include "pcanatomy/csv.hpp"
#include "pcanatomy/dgp.hpp"
#include "pcanatomy/errors.hpp"
#include "pcanatomy/forge.hpp"
#include "pcanatomy/mc.hpp"
#include "pcanatomy/panel.hpp"
#include "pcanatomy/quarter.hpp"
#include "pcanatomy/regression.hpp"
#include "pcanatomy/report.hpp"
#include "pcanatomy/structural.hpp"

namespace py = pybind11;
using namespace pcanatomy;

namespace {

py::array_t<double> column_to_numpy(const PanelDataset& data, const std::string& name) {
  const Column& col = data.column(name);
  py::array_t<double> out({data.n_units(), data.n_quarters()});
  auto buf = out.mutable_unchecked<2>();
  for (int u = 0; u < data.n_units(); ++u) {
    for (int t = 0; t < data.n_quarters(); ++t) {
      const Cell& c = col[data.cell_index(u, t)];
      buf(u, t) = c ? *c : std::numeric_limits<double>::quiet_NaN();
    }
  }
  return out;
}

void numpy_to_column(PanelDataset& data, const std::string& name,
                     const py::array_t<double>& values) {
  auto buf = values.unchecked<2>();
  if (buf.shape(0) != data.n_units() || buf.shape(1) != data.n_quarters()) {
    throw DataError("column '" + name + "': expected shape (" +
                    std::to_string(data.n_units()) + ", " + std::to_string(data.n_quarters()) +
                    ")");
  }
  Column col(data.n_cells());
  for (int u = 0; u < data.n_units(); ++u) {
    for (int t = 0; t < data.n_quarters(); ++t) {
      double v = buf(u, t);
      if (!std::isnan(v)) col[data.cell_index(u, t)] = v;
    }
  }
  data.add_column(name, std::move(col));
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Regional Phillips-curve estimation core";
  m.attr("__version__") = kToolVersion;
  m.attr("DEFAULT_BETA") = kDefaultBeta;

  py::register_exception<UsageError>(m, "UsageError", PyExc_ValueError);
  py::register_exception<DataError>(m, "DataError", PyExc_ValueError);
  py::register_exception<EstimationError>(m, "EstimationError", PyExc_RuntimeError);

  py::class_<Quarter>(m, "Quarter")
      .def(py::init<int, int>(), py::arg("year"), py::arg("q"))
      .def_static("parse", [](const std::string& s) { return Quarter::parse(s); })
      .def_property_readonly("year", &Quarter::year)
      .def_property_readonly("q", &Quarter::q)
      .def("__str__", &Quarter::str)
      .def("__repr__", [](const Quarter& q) { return "Quarter('" + q.str() + "')"; })
      .def("__add__", [](const Quarter& q, int k) { return q + k; })
      .def("__sub__", [](const Quarter& q, int k) { return q - k; })
      .def("diff", [](const Quarter& a, const Quarter& b) { return a - b; })
      .def(py::self == py::self)
      .def(py::self != py::self)
      .def(py::self < py::self)
      .def(py::self <= py::self)
      .def(py::self > py::self)
      .def(py::self >= py::self);

  py::class_<PanelDataset>(m, "PanelDataset")
      .def(py::init([](std::vector<std::string> units, const Quarter& first, int n_quarters) {
             return PanelDataset(std::move(units), first, n_quarters);
           }),
           py::arg("units"), py::arg("first_quarter"), py::arg("n_quarters"))
      .def_property_readonly("units", &PanelDataset::units)
      .def_property_readonly("n_units", &PanelDataset::n_units)
      .def_property_readonly("n_quarters", &PanelDataset::n_quarters)
      .def_property_readonly("first_quarter", &PanelDataset::first_quarter)
      .def_property_readonly("last_quarter", &PanelDataset::last_quarter)
      .def_property_readonly("column_names", &PanelDataset::column_names)
      .def("has_column", &PanelDataset::has_column)
      .def("column", &column_to_numpy, py::arg("name"),
           "Column as a (n_units, n_quarters) float64 array; NaN = missing.")
      .def("add_column", &numpy_to_column, py::arg("name"), py::arg("values"));

  m.def("load_csv", [](const std::string& path) { return load_csv(path); }, py::arg("path"));
  m.def("write_csv", &write_csv, py::arg("data"), py::arg("path"));

  m.def("add_model_variables", &add_model_variables, py::arg("data"), py::arg("pandemic_onset"),
        py::arg("tau"), "Adds pi_core_4q, theta, slack, rel_p_lag, regime dummies and the "
                        "model interactions in place.");

  py::enum_<CovKind>(m, "CovKind")
      .value("cluster_unit", CovKind::cluster_unit)
      .value("driscoll_kraay", CovKind::driscoll_kraay);

  py::class_<CovarianceRequest>(m, "CovarianceRequest")
      .def(py::init<>())
      .def_readwrite("kind", &CovarianceRequest::kind)
      .def_readwrite("dk_lags", &CovarianceRequest::dk_lags)
      .def_readwrite("small_sample", &CovarianceRequest::small_sample);

  py::class_<FeSet>(m, "FeSet")
      .def(py::init<>())
      .def_readwrite("unit", &FeSet::unit)
      .def_readwrite("time", &FeSet::time);

  py::class_<Window>(m, "Window")
      .def(py::init<Quarter, Quarter>(), py::arg("first"), py::arg("last"))
      .def_readwrite("first", &Window::first)
      .def_readwrite("last", &Window::last);

  py::class_<DesignSpec>(m, "DesignSpec")
      .def(py::init<>())
      .def_readwrite("depvar", &DesignSpec::depvar)
      .def_readwrite("exog", &DesignSpec::exog)
      .def_readwrite("endog", &DesignSpec::endog)
      .def_readwrite("instruments", &DesignSpec::instruments)
      .def_readwrite("fe", &DesignSpec::fe)
      .def_readwrite("window", &DesignSpec::window)
      .def_readwrite("cov", &DesignSpec::cov)
      .def_readwrite("wu_hausman", &DesignSpec::wu_hausman)
      .def_static("parse", &DesignSpec::parse, py::arg("text"));

  py::class_<FirstStageInfo>(m, "FirstStageInfo")
      .def_readonly("endog", &FirstStageInfo::endog)
      .def_readonly("partial_f", &FirstStageInfo::partial_f)
      .def_readonly("f_capped", &FirstStageInfo::f_capped)
      .def_readonly("r2", &FirstStageInfo::r2);

  py::class_<FitResult>(m, "FitResult")
      .def_readonly("names", &FitResult::names)
      .def_readonly("coef", &FitResult::coef)
      .def_readonly("vcov", &FitResult::vcov)
      .def_readonly("n_obs", &FitResult::n_obs)
      .def_readonly("n_units", &FitResult::n_units)
      .def_readonly("n_clusters", &FitResult::n_clusters)
      .def_readonly("n_periods", &FitResult::n_periods)
      .def_readonly("r2_within", &FitResult::r2_within)
      .def_readonly("df_t", &FitResult::df_t)
      .def_readonly("first_stage", &FitResult::first_stage)
      .def_readonly("wu_hausman", &FitResult::wu_hausman)
      .def("find", &FitResult::find)
      .def("se", &FitResult::se)
      .def("tstat", &FitResult::tstat)
      .def("pvalue", &FitResult::pvalue);

  m.def("tsls_fit", &tsls_fit, py::arg("spec"), py::arg("data"),
        "Two-way FE 2SLS (plain within-OLS when no endogenous columns).");
  m.def("ar1_persistence",
        [](const PanelDataset& data, const std::string& col, const Window& w) {
          Ar1Result r = ar1_persistence(data, col, w);
          return py::make_tuple(r.rho, r.n_obs, r.n_units);
        },
        py::arg("data"), py::arg("column"), py::arg("window"),
        "Unit-FE AR(1) coefficient; returns (rho, n_obs, n_units).");

  m.def("kappa_from_psi", &kappa_from_psi, py::arg("psi"), py::arg("rho"),
        py::arg("beta") = kDefaultBeta);
  m.def("psi_from_kappa", &psi_from_kappa, py::arg("kappa"), py::arg("rho"),
        py::arg("beta") = kDefaultBeta);
  m.def("implied_post_slope", &implied_post_slope, py::arg("psi_base"), py::arg("delta"));
  m.def("calvo_kappa", &calvo_kappa, py::arg("xi"), py::arg("beta"));

  py::class_<DgpConfig>(m, "DgpConfig")
      .def(py::init<>())
      .def_readwrite("n_units", &DgpConfig::n_units)
      .def_readwrite("n_quarters", &DgpConfig::n_quarters)
      .def_readwrite("first_quarter", &DgpConfig::first_quarter)
      .def_readwrite("pandemic_onset", &DgpConfig::pandemic_onset)
      .def_readwrite("psi_base", &DgpConfig::psi_base)
      .def_readwrite("delta_psi", &DgpConfig::delta_psi)
      .def_readwrite("beta2_tight", &DgpConfig::beta2_tight)
      .def_readwrite("phi", &DgpConfig::phi)
      .def_readwrite("rho_slack", &DgpConfig::rho_slack)
      .def_readwrite("tau", &DgpConfig::tau)
      .def_readwrite("instrument_loading", &DgpConfig::instrument_loading)
      .def_readwrite("theta_level_pre", &DgpConfig::theta_level_pre)
      .def_readwrite("theta_level_post", &DgpConfig::theta_level_post)
      .def_readwrite("theta_floor", &DgpConfig::theta_floor)
      .def_readwrite("sigma_demand", &DgpConfig::sigma_demand)
      .def_readwrite("sigma_supply", &DgpConfig::sigma_supply)
      .def_readwrite("sigma_measure", &DgpConfig::sigma_measure)
      .def_readwrite("sigma_industry", &DgpConfig::sigma_industry)
      .def_readwrite("endog_corr", &DgpConfig::endog_corr)
      .def_readwrite("rho_relprice", &DgpConfig::rho_relprice)
      .def_readwrite("sigma_relprice", &DgpConfig::sigma_relprice)
      .def_readwrite("sigma_alpha", &DgpConfig::sigma_alpha)
      .def_readwrite("sigma_delta", &DgpConfig::sigma_delta)
      .def_readwrite("agg_rho", &DgpConfig::agg_rho)
      .def_readwrite("agg_pi_load", &DgpConfig::agg_pi_load)
      .def_readwrite("agg_rp_load", &DgpConfig::agg_rp_load)
      .def_readwrite("slack_relprice_load", &DgpConfig::slack_relprice_load)
      .def_readwrite("n_industries", &DgpConfig::n_industries)
      .def_readwrite("seed", &DgpConfig::seed)
      .def("validate", &DgpConfig::validate)
      .def("to_json", [](const DgpConfig& c) { return c.to_json().dump(2); })
      .def_static("from_json",
                  [](const std::string& s) { return DgpConfig::from_json(nlohmann::json::parse(s)); })
      .def_static("load_file", &DgpConfig::load_file)
      .def("save_file", &DgpConfig::save_file);

  py::class_<SyntheticPanel>(m, "SyntheticPanel")
      .def_readonly("panel", &SyntheticPanel::panel)
      .def_readonly("truth", &SyntheticPanel::truth)
      .def("internal_column", [](const SyntheticPanel& sp, const std::string& name) {
        auto it = sp.internal.find(name);
        if (it == sp.internal.end()) throw DataError("no internal column '" + name + "'");
        py::array_t<double> out(
            {sp.panel.n_units(), sp.panel.n_quarters()});
        auto buf = out.mutable_unchecked<2>();
        for (int u = 0; u < sp.panel.n_units(); ++u) {
          for (int t = 0; t < sp.panel.n_quarters(); ++t) {
            const Cell& c = it->second[sp.panel.cell_index(u, t)];
            buf(u, t) = c ? *c : std::numeric_limits<double>::quiet_NaN();
          }
        }
        return out;
      });

  m.def("gen_panel", &gen_panel, py::arg("config"));

  py::enum_<Model>(m, "Model")
      .value("model_i", Model::model_i)
      .value("model_ii", Model::model_ii);

  m.def("model_spec", &model_spec, py::arg("model"), py::arg("cov") = CovarianceRequest{});

  py::class_<McParamStat>(m, "McParamStat")
      .def_readonly("param", &McParamStat::param)
      .def_readonly("truth", &McParamStat::truth)
      .def_readonly("mean", &McParamStat::mean)
      .def_readonly("sd", &McParamStat::sd)
      .def_readonly("bias", &McParamStat::bias)
      .def_readonly("rmse", &McParamStat::rmse)
      .def_readonly("coverage", &McParamStat::coverage);

  py::class_<McResult>(m, "McResult")
      .def_readonly("n_reps", &McResult::n_reps)
      .def_readonly("n_failed", &McResult::n_failed)
      .def_readonly("failures", &McResult::failures)
      .def_readonly("tsls", &McResult::tsls)
      .def_readonly("ols", &McResult::ols);

  m.def("mc_study", &mc_study, py::arg("config"), py::arg("n_reps"), py::arg("model"),
        py::arg("n_threads") = 0, py::call_guard<py::gil_scoped_release>());
}
