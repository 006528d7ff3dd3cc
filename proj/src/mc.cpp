#include "pcanatomy/mc.hpp"

#include <atomic>
#include <cmath>
#include <optional>
#include <thread>

#include "pcanatomy/errors.hpp"
#include "pcanatomy/forge.hpp"
#include "pcanatomy/inference.hpp"

namespace pcanatomy {

DesignSpec model_spec(Model model, CovarianceRequest cov) {
  DesignSpec spec;
  spec.depvar = colname::pi_core_4q;
  spec.exog = {colname::rel_p_lag};
  if (model == Model::model_i) {
    spec.endog = {colname::slack, colname::slack_x_pandemic};
    spec.instruments = {colname::shift_share, colname::shift_share_x_pandemic};
  } else {
    spec.endog = {colname::slack, colname::slack_x_tight};
    spec.instruments = {colname::shift_share, colname::shift_share_x_tight};
  }
  spec.fe = {true, true};
  spec.cov = cov;
  return spec;
}

double true_coef(const DgpConfig& cfg, Model model, const std::string& name) {
  if (name == colname::slack) return cfg.psi_base;
  if (name == colname::rel_p_lag) return cfg.phi;
  if (model == Model::model_i && name == colname::slack_x_pandemic) return cfg.delta_psi;
  if (model == Model::model_ii && name == colname::slack_x_tight) return cfg.beta2_tight;
  throw UsageError("true_coef: no truth recorded for '" + name + "'");
}

namespace {

struct RepOut {
  bool ok = false;
  std::string error;
  // Per parameter, 2SLS then OLS: estimate and covered-at-95% indicator.
  std::vector<double> tsls_est, tsls_cov, ols_est, ols_cov;
};

DesignSpec ols_variant(const DesignSpec& tsls) {
  DesignSpec ols = tsls;
  ols.exog.insert(ols.exog.begin(), tsls.endog.begin(), tsls.endog.end());
  ols.endog.clear();
  ols.instruments.clear();
  ols.wu_hausman = false;
  return ols;
}

std::vector<McParamStat> reduce(const std::vector<std::string>& params,
                                const std::vector<double>& truths,
                                const std::vector<const RepOut*>& done, bool use_tsls) {
  std::vector<McParamStat> out;
  const auto n = static_cast<double>(done.size());
  for (std::size_t p = 0; p < params.size(); ++p) {
    McParamStat st;
    st.param = params[p];
    st.truth = truths[p];
    double sum = 0.0, sumsq = 0.0, sse = 0.0, covered = 0.0;
    for (const RepOut* r : done) {
      double est = use_tsls ? r->tsls_est[p] : r->ols_est[p];
      double cov = use_tsls ? r->tsls_cov[p] : r->ols_cov[p];
      sum += est;
      sumsq += est * est;
      sse += (est - st.truth) * (est - st.truth);
      covered += cov;
    }
    st.mean = sum / n;
    st.sd = n > 1 ? std::sqrt(std::max(0.0, (sumsq - n * st.mean * st.mean) / (n - 1))) : 0.0;
    st.bias = st.mean - st.truth;
    st.rmse = std::sqrt(sse / n);
    st.coverage = covered / n;
    out.push_back(st);
  }
  return out;
}

}  // namespace

McResult mc_study(const DgpConfig& cfg, int n_reps, Model model, int n_threads) {
  cfg.validate();
  if (n_reps < 2) throw UsageError("mc_study: n_reps must be >= 2");

  const DesignSpec tsls_spec = model_spec(model);
  const DesignSpec ols_spec = ols_variant(tsls_spec);
  std::vector<std::string> params = tsls_spec.endog;
  params.insert(params.end(), tsls_spec.exog.begin(), tsls_spec.exog.end());
  std::vector<double> truths;
  for (const auto& p : params) truths.push_back(true_coef(cfg, model, p));

  std::vector<RepOut> slots(n_reps);
  std::atomic<int> next{0};
  auto worker = [&]() {
    for (int rep = next.fetch_add(1); rep < n_reps; rep = next.fetch_add(1)) {
      RepOut& out = slots[rep];
      try {
        DgpConfig rep_cfg = cfg;
        rep_cfg.seed = cfg.seed + static_cast<std::uint64_t>(rep);
        SyntheticPanel sp = gen_panel(rep_cfg);
        add_model_variables(sp.panel, cfg.pandemic_onset, cfg.tau);
        for (const DesignSpec* spec : {&tsls_spec, &ols_spec}) {
          FitResult fit = tsls_fit(*spec, sp.panel);
          double crit = t_critical(0.05, fit.df_t);
          for (std::size_t p = 0; p < params.size(); ++p) {
            int idx = fit.find(params[p]);
            double est = fit.coef(idx);
            double covered = std::abs(est - truths[p]) <= crit * fit.se(idx) ? 1.0 : 0.0;
            if (spec == &tsls_spec) {
              out.tsls_est.push_back(est);
              out.tsls_cov.push_back(covered);
            } else {
              out.ols_est.push_back(est);
              out.ols_cov.push_back(covered);
            }
          }
        }
        out.ok = true;
      } catch (const std::exception& e) {
        out.ok = false;
        out.error = e.what();
      }
    }
  };

  int hw = static_cast<int>(std::thread::hardware_concurrency());
  if (n_threads <= 0) n_threads = hw > 0 ? hw : 1;
  n_threads = std::min(n_threads, n_reps);
  if (n_threads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(n_threads);
    for (int i = 0; i < n_threads; ++i) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }

  McResult res;
  res.model = model;
  res.n_reps = n_reps;
  std::vector<const RepOut*> done;
  for (int rep = 0; rep < n_reps; ++rep) {
    if (slots[rep].ok) {
      done.push_back(&slots[rep]);
    } else {
      ++res.n_failed;
      res.failures.push_back("rep " + std::to_string(rep) + ": " + slots[rep].error);
    }
  }
  if (done.empty()) throw EstimationError("mc_study: every replication failed");
  res.tsls = reduce(params, truths, done, true);
  res.ols = reduce(params, truths, done, false);
  return res;
}

}  // namespace pcanatomy
