#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>
#include <cstdio>
#include <string>

#include <nlohmann/json.hpp>

#include <pcanatomy/dgp.hpp>
#include <pcanatomy/errors.hpp>
#include <pcanatomy/forge.hpp>
#include <pcanatomy/mc.hpp>

using namespace pcanatomy;

namespace {

DgpConfig small_config() {
  DgpConfig c;
  c.n_units = 12;
  c.n_quarters = 40;
  c.first_quarter = Quarter(2012, 1);
  c.pandemic_onset = Quarter(2020, 1);
  return c;
}

}  // namespace

TEST_CASE("shift-share: hand-computed aggregation") {
  Eigen::MatrixXd shares(1, 2);
  shares << 0.3, 0.7;
  Eigen::MatrixXd shocks(2, 1);
  shocks << 2.0, -1.0;
  Eigen::MatrixXd z = gen_shift_share(shares, shocks);
  CHECK(z(0, 0) == doctest::Approx(0.3 * 2.0 + 0.7 * (-1.0)).epsilon(1e-15));
}

TEST_CASE("shift-share: single industry passes national shocks through") {
  Eigen::MatrixXd shares = Eigen::MatrixXd::Ones(3, 1);
  Eigen::MatrixXd shocks(1, 4);
  shocks << 0.5, -0.25, 0.0, 2.0;
  Eigen::MatrixXd z = gen_shift_share(shares, shocks);
  for (int i = 0; i < 3; ++i) {
    for (int t = 0; t < 4; ++t) CHECK(z(i, t) == shocks(0, t));
  }
}

TEST_CASE("shift-share: invalid shares are rejected with the unit index") {
  Eigen::MatrixXd shocks(2, 1);
  shocks << 1.0, 1.0;

  Eigen::MatrixXd bad_sum(1, 2);
  bad_sum << 0.3, 0.6;
  CHECK_THROWS_AS(gen_shift_share(bad_sum, shocks), DataError);

  Eigen::MatrixXd negative(1, 2);
  negative << 1.5, -0.5;
  CHECK_THROWS_AS(gen_shift_share(negative, shocks), DataError);

  Eigen::MatrixXd mismatched(1, 3);
  mismatched << 0.2, 0.3, 0.5;
  CHECK_THROWS_AS(gen_shift_share(mismatched, shocks), DataError);
}

TEST_CASE("seed determinism is exact; different seeds differ") {
  DgpConfig cfg = small_config();
  SyntheticPanel a = gen_panel(cfg);
  SyntheticPanel b = gen_panel(cfg);
  for (const std::string& col : {"CPI_core", "CPI", "vu", "shift_share"}) {
    const Column& ca = a.panel.column(col);
    const Column& cb = b.panel.column(col);
    for (std::size_t i = 0; i < ca.size(); ++i) CHECK(*ca[i] == *cb[i]);
  }

  cfg.seed += 1;
  SyntheticPanel c = gen_panel(cfg);
  CHECK(*a.panel.column("vu")[0] != *c.panel.column("vu")[0]);
}

TEST_CASE("panel shape, naming, and price-level base") {
  DgpConfig cfg = small_config();
  SyntheticPanel sp = gen_panel(cfg);
  CHECK(sp.panel.n_units() == 12);
  CHECK(sp.panel.n_quarters() == 40);
  CHECK(sp.panel.units()[0] == "msa0001");
  CHECK(sp.panel.units()[11] == "msa0012");
  CHECK(sp.panel.first_quarter() == Quarter(2012, 1));

  // The first four quarters are the price-level base.
  for (int u = 0; u < 12; ++u) {
    for (int t = 0; t < 4; ++t) {
      CHECK(*sp.panel.column("CPI_core")[sp.panel.cell_index(u, t)] == 100.0);
    }
  }

  for (const std::string& name : {"pi", "slack_obs", "slack_true", "rel_p", "theta_true"}) {
    CAPTURE(name);
    CHECK(sp.internal.count(name) == 1);
  }
  CHECK(sp.truth.seed == cfg.seed);
}

TEST_CASE("forge reconstruction matches the generator internals") {
  DgpConfig cfg = small_config();
  SyntheticPanel sp = gen_panel(cfg);
  PanelDataset& d = sp.panel;
  add_model_variables(d, cfg.pandemic_onset, cfg.tau);

  const Column& pi_forge = d.column(colname::pi_core_4q);
  const Column& pi_true = sp.internal.at("pi");
  const Column& slack_forge = d.column(colname::slack);
  const Column& slack_true = sp.internal.at("slack_obs");
  const Column& rel_forge = d.column(colname::rel_p_lag);
  const Column& rel_true = sp.internal.at("rel_p");
  const Column& theta_forge = d.column(colname::theta);
  const Column& theta_true = sp.internal.at("theta_true");

  for (int u = 0; u < d.n_units(); ++u) {
    for (int t = 0; t < d.n_quarters(); ++t) {
      std::size_t i = d.cell_index(u, t);
      CHECK(std::abs(*slack_forge[i] - *slack_true[i]) < 1e-12);
      // sigma_measure defaults to zero, so observed theta is the true one.
      CHECK(std::abs(*theta_forge[i] - *theta_true[i]) < 1e-12);
      if (t < 4) {
        CHECK_FALSE(pi_forge[i].has_value());
        CHECK_FALSE(rel_forge[i].has_value());
      } else {
        CHECK(std::abs(*pi_forge[i] - *pi_true[i]) < 1e-9);
        CHECK(std::abs(*rel_forge[i] - *rel_true[d.cell_index(u, t - 4)]) < 1e-9);
      }
    }
  }
}

TEST_CASE("per-quarter mean of generated slack is zero") {
  SyntheticPanel sp = gen_panel(small_config());
  PanelDataset& d = sp.panel;
  add_model_variables(d, sp.truth.pandemic_onset, sp.truth.tau);
  const Column& s = d.column(colname::slack);
  for (int t = 0; t < d.n_quarters(); ++t) {
    double sum = 0.0;
    for (int u = 0; u < d.n_units(); ++u) sum += *s[d.cell_index(u, t)];
    CHECK(std::abs(sum / d.n_units()) < 1e-12);
  }
}

TEST_CASE("noise-free generation is recovered exactly by the estimator") {
  DgpConfig cfg;
  cfg.n_units = 20;
  cfg.n_quarters = 60;
  cfg.first_quarter = Quarter(2006, 1);
  cfg.pandemic_onset = Quarter(2018, 1);
  cfg.sigma_demand = 0.0;
  cfg.sigma_supply = 0.0;
  cfg.sigma_measure = 0.0;
  cfg.sigma_alpha = 0.0;
  cfg.sigma_delta = 0.0;
  cfg.theta_level_post = cfg.theta_level_pre;  // keep uv away from the floor
  cfg.psi_base = -0.6;
  cfg.delta_psi = -0.2;
  cfg.phi = 0.15;

  SyntheticPanel sp = gen_panel(cfg);
  add_model_variables(sp.panel, cfg.pandemic_onset, cfg.tau);
  FitResult fit = tsls_fit(model_spec(Model::model_i), sp.panel);

  CHECK(std::abs(fit.coef(fit.find(colname::slack)) - cfg.psi_base) < 1e-9);
  CHECK(std::abs(fit.coef(fit.find(colname::slack_x_pandemic)) - cfg.delta_psi) < 1e-9);
  CHECK(std::abs(fit.coef(fit.find(colname::rel_p_lag)) - cfg.phi) < 1e-9);
  CHECK(fit.r2_within == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("a single unit has identically zero slack") {
  DgpConfig cfg = small_config();
  cfg.n_units = 1;
  SyntheticPanel sp = gen_panel(cfg);
  add_model_variables(sp.panel, cfg.pandemic_onset, cfg.tau);
  const Column& s = sp.panel.column(colname::slack);
  for (std::size_t i = 0; i < sp.panel.n_cells(); ++i) CHECK(*s[i] == 0.0);
}

TEST_CASE("config JSON round trip covers every field") {
  DgpConfig c = small_config();
  c.psi_base = -0.61;
  c.delta_psi = -0.21;
  c.beta2_tight = -0.11;
  c.phi = 0.07;
  c.rho_slack = 0.8;
  c.tau = 1.25;
  c.instrument_loading = 2.0;
  c.theta_level_pre = 1.6;
  c.theta_level_post = 0.75;
  c.theta_floor = 0.25;
  c.sigma_demand = 0.17;
  c.sigma_supply = 1.1;
  c.sigma_measure = 0.02;
  c.sigma_industry = 0.33;
  c.endog_corr = -0.4;
  c.rho_relprice = 0.88;
  c.sigma_relprice = 0.03;
  c.sigma_alpha = 0.2;
  c.sigma_delta = 0.4;
  c.agg_rho = 0.7;
  c.agg_pi_load = 1.0;
  c.agg_rp_load = 0.01;
  c.slack_relprice_load = -0.5;
  c.n_industries = 9;
  c.seed = 123456789ULL;

  DgpConfig r = DgpConfig::from_json(c.to_json());
  CHECK(r.to_json() == c.to_json());
  CHECK(r.first_quarter == c.first_quarter);
  CHECK(r.pandemic_onset == c.pandemic_onset);
  CHECK(r.seed == c.seed);
  CHECK(r.endog_corr == c.endog_corr);

  // File round trip.
  std::string path = "pcanatomy_test_cfg.json";
  c.save_file(path);
  DgpConfig f = DgpConfig::load_file(path);
  CHECK(f.to_json() == c.to_json());
  std::remove(path.c_str());
}

TEST_CASE("config JSON rejects unknown fields and bad values") {
  CHECK_THROWS_AS(DgpConfig::from_json(nlohmann::json{{"sigma_typo", 1.0}}), UsageError);
  CHECK_THROWS_AS(DgpConfig::from_json(nlohmann::json::array()), UsageError);
  CHECK_THROWS_AS(DgpConfig::from_json(nlohmann::json{{"n_units", "fifty"}}), UsageError);
  // Partial objects keep defaults for everything else.
  DgpConfig c = DgpConfig::from_json(nlohmann::json{{"n_units", 7}});
  CHECK(c.n_units == 7);
  CHECK(c.n_quarters == DgpConfig{}.n_quarters);
}

TEST_CASE("config validation names the offending field") {
  DgpConfig c;

  c.sigma_supply = -1.0;
  try {
    c.validate();
    FAIL("expected UsageError");
  } catch (const UsageError& e) {
    CHECK(std::string(e.what()).find("sigma_supply") != std::string::npos);
  }

  c = DgpConfig{};
  c.rho_slack = 1.0;
  CHECK_THROWS_AS(c.validate(), UsageError);
  c = DgpConfig{};
  c.endog_corr = 1.5;
  CHECK_THROWS_AS(c.validate(), UsageError);
  c = DgpConfig{};
  c.n_industries = 0;
  CHECK_THROWS_AS(c.validate(), UsageError);
  c = DgpConfig{};
  c.tau = 0.0;
  CHECK_THROWS_AS(c.validate(), UsageError);
  c = DgpConfig{};
  c.theta_floor = -0.1;
  CHECK_THROWS_AS(c.validate(), UsageError);
}

TEST_CASE("figure demo preset validates and has the documented loadings") {
  DgpConfig c = figure_demo_config();
  CHECK_NOTHROW(c.validate());
  CHECK(c.agg_pi_load > 0.0);
  CHECK(c.agg_rp_load > 0.0);
  CHECK(c.slack_relprice_load < 0.0);
  CHECK(c.psi_base < 0.0);
  CHECK(c.theta_level_pre == c.theta_level_post);
}

TEST_CASE("mc study is deterministic and thread-count invariant") {
  DgpConfig cfg = small_config();
  McResult a = mc_study(cfg, 6, Model::model_i, 1);
  McResult b = mc_study(cfg, 6, Model::model_i, 4);
  REQUIRE(a.tsls.size() == b.tsls.size());
  CHECK(a.n_failed == 0);
  for (std::size_t i = 0; i < a.tsls.size(); ++i) {
    CHECK(a.tsls[i].param == b.tsls[i].param);
    CHECK(a.tsls[i].mean == b.tsls[i].mean);
    CHECK(a.tsls[i].sd == b.tsls[i].sd);
    CHECK(a.tsls[i].coverage == b.tsls[i].coverage);
    CHECK(a.ols[i].mean == b.ols[i].mean);
  }

  McResult c = mc_study(cfg, 6, Model::model_i, 1);
  CHECK(c.tsls[0].mean == a.tsls[0].mean);
}

TEST_CASE("mc study reports the truth it is judged against") {
  DgpConfig cfg = small_config();
  cfg.psi_base = -0.55;
  cfg.delta_psi = -0.15;
  McResult r = mc_study(cfg, 4, Model::model_i, 1);
  bool found = false;
  for (const auto& p : r.tsls) {
    if (p.param == colname::slack) {
      CHECK(p.truth == -0.55);
      found = true;
    }
    if (p.param == colname::slack_x_pandemic) CHECK(p.truth == -0.15);
  }
  CHECK(found);

  // Model II: the interaction truth is beta2.
  cfg.beta2_tight = -0.3;
  McResult r2 = mc_study(cfg, 4, Model::model_ii, 1);
  for (const auto& p : r2.tsls) {
    if (p.param == colname::slack_x_tight) CHECK(p.truth == -0.3);
  }
}

TEST_CASE("mc study surfaces degenerate designs as errors") {
  DgpConfig cfg = small_config();
  // Tightness never crosses tau: the tight dummy is identically zero and
  // every Model II replication fails on collinearity.
  cfg.tau = 1e9;
  CHECK_THROWS_AS(mc_study(cfg, 3, Model::model_ii, 1), EstimationError);

  CHECK_THROWS_AS(mc_study(cfg, 1, Model::model_i, 1), UsageError);
  CHECK_THROWS_AS(mc_study(cfg, 0, Model::model_i, 1), UsageError);
}

TEST_CASE("ols benchmark diverges from 2sls under endogeneity") {
  DgpConfig cfg;
  cfg.n_units = 30;
  cfg.n_quarters = 60;
  cfg.first_quarter = Quarter(2006, 1);
  cfg.pandemic_onset = Quarter(2018, 1);
  cfg.endog_corr = 0.8;
  McResult r = mc_study(cfg, 12, Model::model_i, 1);
  double tsls_bias = 0.0, ols_bias = 0.0;
  for (const auto& p : r.tsls) {
    if (p.param == colname::slack) tsls_bias = p.bias;
  }
  for (const auto& p : r.ols) {
    if (p.param == colname::slack) ols_bias = p.bias;
  }
  CHECK(std::abs(ols_bias) > 0.2);               // endogeneity poisons OLS
  CHECK(std::abs(tsls_bias) < 0.1);              // the instrument cleans it up
  CHECK(std::abs(ols_bias) > 3.0 * std::abs(tsls_bias));
}
