#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json_fwd.hpp>

#include "pcanatomy/panel.hpp"
#include "pcanatomy/quarter.hpp"

namespace pcanatomy {

/// Synthetic panel generator configuration. The documented fields pin the
/// true slopes and shock scales; everything is serialized to/from JSON so a
/// config file fully determines a panel (seed included).
struct DgpConfig {
  // Panel shape.
  int n_units = 50;
  int n_quarters = 94;
  Quarter first_quarter{2000, 1};
  Quarter pandemic_onset{2020, 1};

  // True slopes of the inflation equation.
  double psi_base = -0.7;    // slope on slack in the base regime
  double delta_psi = -0.3;   // post-onset slope shift (Model I truth)
  double beta2_tight = 0.0;  // tight-regime slope shift (Model II truth)
  double phi = 0.1;          // coefficient on lagged relative prices

  // Latent slack dynamics and the regime threshold.
  double rho_slack = 0.85;          // AR(1) persistence of latent slack
  double tau = 1.0;                 // tightness threshold theta > tau
  double instrument_loading = 1.5;  // effect of the shift-share on slack

  // Inverse-tightness level path: u/v fluctuates around level_pre before
  // onset and level_post after, so theta = v/u crosses tau on demand.
  double theta_level_pre = 1.7;
  double theta_level_post = 0.7;
  double theta_floor = 0.2;  // lower clamp on u/v, keeps theta finite

  // Shock standard deviations.
  double sigma_demand = 0.18;    // slack innovations
  double sigma_supply = 1.2;     // inflation equation errors
  double sigma_measure = 0.0;    // measurement error on observed u/v
  double sigma_industry = 0.5;  // national industry shocks feeding the instrument
  double endog_corr = 0.0;       // corr(slack innovation, inflation error)

  // Relative-price process (AR(1) per unit, log units).
  double rho_relprice = 0.9;
  double sigma_relprice = 0.02;

  // Fixed-effect dispersion.
  double sigma_alpha = 0.3;  // unit intercepts
  double sigma_delta = 0.5;  // time intercepts

  // Aggregate AR(1) factor with loadings into relative prices, inflation,
  // and (via relative prices) slack. All loadings default to zero; they are
  // only switched on to demonstrate common-shock contamination of pooled
  // slopes (the time-FE motivation).
  double agg_rho = 0.85;
  double agg_pi_load = 0.0;        // factor -> inflation
  double agg_rp_load = 0.0;        // factor -> relative prices
  double slack_relprice_load = 0.0;  // relative prices -> slack innovations

  int n_industries = 12;
  std::uint64_t seed = 20260826ULL;

  /// Throws UsageError naming the offending field.
  void validate() const;

  nlohmann::json to_json() const;
  static DgpConfig from_json(const nlohmann::json& j);
  static DgpConfig load_file(const std::string& path);
  void save_file(const std::string& path) const;
};

/// Generated panel in the exact ingest schema plus the truth needed by
/// validation tests: the generating config and the internally constructed
/// derived columns (noise-free and observed).
struct SyntheticPanel {
  PanelDataset panel;  // columns: CPI_core, CPI, vu, shift_share
  DgpConfig truth;
  /// Internal series keyed by name: "pi" (generated inflation, all
  /// quarters), "slack_obs" (demeaned observed u/v), "slack_true"
  /// (noise-free regressor entering the inflation equation), "rel_p"
  /// (current relative price; its 4-quarter lag is the forge column),
  /// "theta_true".
  std::map<std::string, Column> internal;
};

/// Z_it = sum_k w_ik * d_kt with base-period shares w (units x industries)
/// and national shocks d (industries x quarters). Each row of shares must be
/// nonnegative and sum to 1 within 1e-8.
Eigen::MatrixXd gen_shift_share(const Eigen::MatrixXd& shares, const Eigen::MatrixXd& shocks);

/// Generates a synthetic panel. Identical configs (seed included) produce
/// bit-identical output; the draw order is fixed by this function alone.
SyntheticPanel gen_panel(const DgpConfig& config);

/// Preset illustrating the time-fixed-effects mechanism behind figure 4:
/// a persistent aggregate factor feeds both inflation and relative prices,
/// and slack co-moves with relative prices. Residualizing on the lagged
/// relative price without time effects then drags the aggregate factor into
/// the slack residual and flips the fitted slope positive, while the
/// two-way-FE slope stays near the (negative) structural value.
DgpConfig figure_demo_config();

}  // namespace pcanatomy
