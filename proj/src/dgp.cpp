#include "pcanatomy/dgp.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <utility>

#include <nlohmann/json.hpp>

#include "pcanatomy/errors.hpp"
#include "pcanatomy/rng.hpp"

namespace pcanatomy {

void DgpConfig::validate() const {
  auto fail = [](const std::string& field, const std::string& why) {
    throw UsageError("DgpConfig." + field + ": " + why);
  };
  if (n_units < 1) fail("n_units", "must be >= 1");
  if (n_quarters < 1) fail("n_quarters", "must be >= 1");
  if (n_industries < 1) fail("n_industries", "must be >= 1");
  auto sigma = [&](const char* name, double v) {
    if (!(v >= 0.0)) fail(name, "must be >= 0");
  };
  sigma("sigma_demand", sigma_demand);
  sigma("sigma_supply", sigma_supply);
  sigma("sigma_measure", sigma_measure);
  sigma("sigma_industry", sigma_industry);
  sigma("sigma_relprice", sigma_relprice);
  sigma("sigma_alpha", sigma_alpha);
  sigma("sigma_delta", sigma_delta);
  if (!(std::abs(endog_corr) <= 1.0)) fail("endog_corr", "must lie in [-1, 1]");
  if (!(rho_slack > -1.0 && rho_slack < 1.0)) fail("rho_slack", "must lie in (-1, 1)");
  if (!(rho_relprice > -1.0 && rho_relprice < 1.0)) fail("rho_relprice", "must lie in (-1, 1)");
  if (!(agg_rho > -1.0 && agg_rho < 1.0)) fail("agg_rho", "must lie in (-1, 1)");
  if (!(tau > 0.0)) fail("tau", "must be > 0");
  if (!(theta_floor > 0.0)) fail("theta_floor", "must be > 0");
  if (!(theta_level_pre > 0.0)) fail("theta_level_pre", "must be > 0");
  if (!(theta_level_post > 0.0)) fail("theta_level_post", "must be > 0");
}

nlohmann::json DgpConfig::to_json() const {
  return nlohmann::json{{"n_units", n_units},
                        {"n_quarters", n_quarters},
                        {"first_quarter", first_quarter.str()},
                        {"pandemic_onset", pandemic_onset.str()},
                        {"psi_base", psi_base},
                        {"delta_psi", delta_psi},
                        {"beta2_tight", beta2_tight},
                        {"phi", phi},
                        {"rho_slack", rho_slack},
                        {"tau", tau},
                        {"instrument_loading", instrument_loading},
                        {"theta_level_pre", theta_level_pre},
                        {"theta_level_post", theta_level_post},
                        {"theta_floor", theta_floor},
                        {"sigma_demand", sigma_demand},
                        {"sigma_supply", sigma_supply},
                        {"sigma_measure", sigma_measure},
                        {"sigma_industry", sigma_industry},
                        {"endog_corr", endog_corr},
                        {"rho_relprice", rho_relprice},
                        {"sigma_relprice", sigma_relprice},
                        {"sigma_alpha", sigma_alpha},
                        {"sigma_delta", sigma_delta},
                        {"agg_rho", agg_rho},
                        {"agg_pi_load", agg_pi_load},
                        {"agg_rp_load", agg_rp_load},
                        {"slack_relprice_load", slack_relprice_load},
                        {"n_industries", n_industries},
                        {"seed", seed}};
}

DgpConfig DgpConfig::from_json(const nlohmann::json& j) {
  DgpConfig c;
  if (!j.is_object()) throw UsageError("DgpConfig: expected a JSON object");
  for (const auto& [key, value] : j.items()) {
    try {
      if (key == "n_units") c.n_units = value.get<int>();
      else if (key == "n_quarters") c.n_quarters = value.get<int>();
      else if (key == "first_quarter") c.first_quarter = Quarter::parse(value.get<std::string>());
      else if (key == "pandemic_onset") c.pandemic_onset = Quarter::parse(value.get<std::string>());
      else if (key == "psi_base") c.psi_base = value.get<double>();
      else if (key == "delta_psi") c.delta_psi = value.get<double>();
      else if (key == "beta2_tight") c.beta2_tight = value.get<double>();
      else if (key == "phi") c.phi = value.get<double>();
      else if (key == "rho_slack") c.rho_slack = value.get<double>();
      else if (key == "tau") c.tau = value.get<double>();
      else if (key == "instrument_loading") c.instrument_loading = value.get<double>();
      else if (key == "theta_level_pre") c.theta_level_pre = value.get<double>();
      else if (key == "theta_level_post") c.theta_level_post = value.get<double>();
      else if (key == "theta_floor") c.theta_floor = value.get<double>();
      else if (key == "sigma_demand") c.sigma_demand = value.get<double>();
      else if (key == "sigma_supply") c.sigma_supply = value.get<double>();
      else if (key == "sigma_measure") c.sigma_measure = value.get<double>();
      else if (key == "sigma_industry") c.sigma_industry = value.get<double>();
      else if (key == "endog_corr") c.endog_corr = value.get<double>();
      else if (key == "rho_relprice") c.rho_relprice = value.get<double>();
      else if (key == "sigma_relprice") c.sigma_relprice = value.get<double>();
      else if (key == "sigma_alpha") c.sigma_alpha = value.get<double>();
      else if (key == "sigma_delta") c.sigma_delta = value.get<double>();
      else if (key == "agg_rho") c.agg_rho = value.get<double>();
      else if (key == "agg_pi_load") c.agg_pi_load = value.get<double>();
      else if (key == "agg_rp_load") c.agg_rp_load = value.get<double>();
      else if (key == "slack_relprice_load") c.slack_relprice_load = value.get<double>();
      else if (key == "n_industries") c.n_industries = value.get<int>();
      else if (key == "seed") c.seed = value.get<std::uint64_t>();
      else throw UsageError("DgpConfig: unknown field '" + key + "'");
    } catch (const nlohmann::json::exception& e) {
      throw UsageError("DgpConfig." + key + ": " + e.what());
    }
  }
  c.validate();
  return c;
}

DgpConfig DgpConfig::load_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot open config file '" + path + "'");
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw UsageError("config file '" + path + "': " + e.what());
  }
  return from_json(j);
}

void DgpConfig::save_file(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw UsageError("cannot write config file '" + path + "'");
  out << to_json().dump(2) << "\n";
}

Eigen::MatrixXd gen_shift_share(const Eigen::MatrixXd& shares, const Eigen::MatrixXd& shocks) {
  if (shares.cols() != shocks.rows()) {
    throw DataError("gen_shift_share: shares have " + std::to_string(shares.cols()) +
                    " industries but shocks have " + std::to_string(shocks.rows()));
  }
  for (long i = 0; i < shares.rows(); ++i) {
    if ((shares.row(i).array() < 0.0).any()) {
      throw DataError("gen_shift_share: negative share for unit " + std::to_string(i));
    }
    double sum = shares.row(i).sum();
    if (std::abs(sum - 1.0) > 1e-8) {
      throw DataError("gen_shift_share: shares of unit " + std::to_string(i) + " sum to " +
                      std::to_string(sum) + ", expected 1");
    }
  }
  return shares * shocks;
}

namespace {

constexpr int kBurnIn = 16;  // pre-sample quarters for the AR processes

std::vector<std::string> unit_names(int n) {
  std::vector<std::string> names;
  names.reserve(n);
  char buf[16];
  for (int i = 0; i < n; ++i) {
    std::snprintf(buf, sizeof(buf), "msa%04d", i + 1);
    names.emplace_back(buf);
  }
  return names;
}

}  // namespace

SyntheticPanel gen_panel(const DgpConfig& cfg) {
  cfg.validate();
  const int N = cfg.n_units;
  const int T = cfg.n_quarters;
  const int K = cfg.n_industries;
  const int B = kBurnIn;
  Rng rng(cfg.seed);

  // Draw order is fixed: shares, industry shocks, unit FE, time FE,
  // aggregate factor, relative prices, slack innovations, measurement error.
  Eigen::MatrixXd shares(N, K);
  for (int i = 0; i < N; ++i) {
    for (int k = 0; k < K; ++k) shares(i, k) = rng.exponential();
    shares.row(i) /= shares.row(i).sum();
  }
  Eigen::MatrixXd shocks(K, T);
  for (int k = 0; k < K; ++k) {
    for (int t = 0; t < T; ++t) shocks(k, t) = rng.normal(0.0, cfg.sigma_industry);
  }
  Eigen::MatrixXd Z = gen_shift_share(shares, shocks);

  Eigen::VectorXd alpha(N);
  for (int i = 0; i < N; ++i) alpha(i) = rng.normal(0.0, cfg.sigma_alpha);
  Eigen::VectorXd delta(T);
  for (int t = 0; t < T; ++t) delta(t) = rng.normal(0.0, cfg.sigma_delta);

  // Aggregate AR(1) factor over burn-in + sample (index t+B).
  std::vector<double> agg(B + T);
  double prev = 0.0;
  for (int t = 0; t < B + T; ++t) {
    prev = cfg.agg_rho * prev + rng.normal();
    agg[t] = prev;
  }

  // Relative prices: idiosyncratic AR(1) plus aggregate loading.
  Eigen::MatrixXd rp(N, B + T);
  for (int i = 0; i < N; ++i) {
    double idio = 0.0;
    for (int t = 0; t < B + T; ++t) {
      idio = cfg.rho_relprice * idio + rng.normal(0.0, cfg.sigma_relprice);
      rp(i, t) = idio + cfg.agg_rp_load * agg[t];
    }
  }

  // Latent slack and correlated inflation errors. The shared component of
  // (a, b) gives corr(slack innovation, inflation error) = endog_corr.
  const double c = cfg.endog_corr;
  const double c_perp = std::sqrt(std::max(0.0, 1.0 - c * c));
  Eigen::MatrixXd s(N, B + T);
  Eigen::MatrixXd eps(N, T);
  for (int i = 0; i < N; ++i) {
    double prev_s = 0.0;
    for (int t = 0; t < B + T; ++t) {
      double a = rng.normal();
      double b = rng.normal();
      double v = cfg.sigma_demand * a;
      double e = cfg.sigma_supply * (c * a + c_perp * b);
      double z = t >= B ? cfg.instrument_loading * Z(i, t - B) : 0.0;
      prev_s = cfg.rho_slack * prev_s + z + cfg.slack_relprice_load * rp(i, t) + v;
      s(i, t) = prev_s;
      if (t >= B) eps(i, t - B) = e;
    }
  }

  Eigen::MatrixXd me(N, T);
  for (int i = 0; i < N; ++i) {
    for (int t = 0; t < T; ++t) me(i, t) = rng.normal(0.0, cfg.sigma_measure);
  }

  // Observables. u/v fluctuates around a regime-dependent level and is
  // clamped away from zero so theta stays finite.
  const int onset_pos = cfg.pandemic_onset - cfg.first_quarter;
  Eigen::MatrixXd uv_true(N, T), uv_obs(N, T), vu(N, T);
  for (int t = 0; t < T; ++t) {
    double level = t < onset_pos ? cfg.theta_level_pre : cfg.theta_level_post;
    for (int i = 0; i < N; ++i) {
      uv_true(i, t) = std::max(s(i, t + B) + level, cfg.theta_floor);
      uv_obs(i, t) = std::max(s(i, t + B) + level + me(i, t), cfg.theta_floor);
      vu(i, t) = 1.0 / uv_obs(i, t);
    }
  }

  // Demeaned slack, noise-free (enters the inflation equation) and observed
  // (what variable_forge reconstructs from the vu column).
  Eigen::MatrixXd slack_true(N, T), slack_obs(N, T);
  for (int t = 0; t < T; ++t) {
    double m_true = uv_true.col(t).mean();
    double m_obs = uv_obs.col(t).mean();
    for (int i = 0; i < N; ++i) {
      slack_true(i, t) = uv_true(i, t) - m_true;
      slack_obs(i, t) = uv_obs(i, t) - m_obs;
    }
  }

  // Inflation, built so the estimating equation with the observed regime
  // dummies is correctly specified: the tight dummy uses observed theta.
  Eigen::MatrixXd pi(N, T);
  for (int t = 0; t < T; ++t) {
    double pand = t >= onset_pos ? 1.0 : 0.0;
    for (int i = 0; i < N; ++i) {
      double tight = vu(i, t) > cfg.tau ? 1.0 : 0.0;
      double slope = cfg.psi_base + cfg.delta_psi * pand + cfg.beta2_tight * tight;
      pi(i, t) = alpha(i) + delta(t) + cfg.agg_pi_load * agg[t + B] +
                 slope * slack_true(i, t) + cfg.phi * rp(i, t + B - 4) + eps(i, t);
    }
  }

  // Price levels: integrate inflation 4 quarters apart from a base of 100,
  // then peel off relative prices, so forge reconstruction is exact.
  Eigen::MatrixXd cpi_core(N, T), cpi(N, T);
  for (int t = 0; t < T; ++t) {
    for (int i = 0; i < N; ++i) {
      cpi_core(i, t) = t < 4 ? 100.0 : cpi_core(i, t - 4) * std::exp(pi(i, t) / 100.0);
      cpi(i, t) = cpi_core(i, t) * std::exp(-rp(i, t + B));
    }
  }

  SyntheticPanel out{PanelDataset(unit_names(N), cfg.first_quarter, T), cfg, {}};
  auto put = [&](const std::string& name, const Eigen::MatrixXd& m, Column* dest = nullptr) {
    Column col(out.panel.n_cells());
    for (int i = 0; i < N; ++i) {
      for (int t = 0; t < T; ++t) col[out.panel.cell_index(i, t)] = m(i, t);
    }
    if (dest) *dest = col;
    else out.panel.add_column(name, std::move(col));
  };
  put("CPI_core", cpi_core);
  put("CPI", cpi);
  put("vu", vu);
  put("shift_share", Z);

  Column tmp;
  put("", pi, &tmp);
  out.internal["pi"] = tmp;
  put("", slack_obs, &tmp);
  out.internal["slack_obs"] = tmp;
  put("", slack_true, &tmp);
  out.internal["slack_true"] = tmp;
  Eigen::MatrixXd rp_sample = rp.rightCols(T);
  put("", rp_sample, &tmp);
  out.internal["rel_p"] = tmp;
  Eigen::MatrixXd theta_true = uv_true.cwiseInverse();
  put("", theta_true, &tmp);
  out.internal["theta_true"] = tmp;
  return out;
}

DgpConfig figure_demo_config() {
  DgpConfig c;
  c.psi_base = -0.25;
  c.delta_psi = 0.0;
  c.beta2_tight = 0.0;
  c.theta_level_pre = 1.2;
  c.theta_level_post = 1.2;
  c.agg_rho = 0.85;
  c.agg_pi_load = 5.0;
  c.agg_rp_load = 0.03;
  c.slack_relprice_load = -1.5;
  c.seed = 424242;
  return c;
}

}  // namespace pcanatomy
