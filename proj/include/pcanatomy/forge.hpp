#pragma once

#include <string>

#include "pcanatomy/panel.hpp"

namespace pcanatomy {

/// Canonical derived-column names used by the CLI and reports.
namespace colname {
inline const std::string pi_core_4q = "pi_core_4q";
inline const std::string theta = "theta";
inline const std::string slack = "slack";
inline const std::string rel_p_lag = "rel_p_lag";
inline const std::string pandemic_period = "pandemic_period_num";
inline const std::string tight_dummy = "tight_market_dummy";
inline const std::string slack_x_pandemic = "slack_x_pandemic_period_num";
inline const std::string slack_x_tight = "slack_x_tight_market_dummy";
inline const std::string shift_share = "shift_share";
inline const std::string shift_share_x_pandemic = "shift_share_x_pandemic_period_num";
inline const std::string shift_share_x_tight = "shift_share_x_tight_market_dummy";
}  // namespace colname

/// scale * (ln x_t - ln x_{t-4}); missing when either input is missing or the
/// lag precedes the index. Nonpositive cells are DataErrors with location.
Column four_quarter_log_diff(const PanelDataset& data, const std::string& col,
                             double scale = 100.0);

/// Tightness theta = vu, a checked pass-through (negative vu is an error).
Column tightness(const PanelDataset& data, const std::string& vu_col = "vu");

/// Slack = 1/theta demeaned by the contemporaneous cross-sectional mean over
/// units with non-missing theta that quarter. theta = 0 is an error.
Column slack_demeaned(const PanelDataset& data, const std::string& theta_col = colname::theta);

/// rel_p_lag_t = ln(CPI_core_{t-4}) - ln(CPI_{t-4}); missing when the lag is
/// unavailable. Nonpositive prices are DataErrors with location.
Column relative_price_lag(const PanelDataset& data, const std::string& core_col = "CPI_core",
                          const std::string& cpi_col = "CPI");

struct RegimeDummies {
  Column pandemic_period;  // 1{t >= onset}, unit-invariant, never missing
  Column tight_dummy;      // 1{theta > tau} strictly; missing where theta is
};

RegimeDummies regime_dummies(const PanelDataset& data, Quarter pandemic_onset, double tau,
                             const std::string& theta_col = colname::theta);

/// Elementwise product; missing if either factor is missing.
Column interact(const PanelDataset& data, const std::string& a, const std::string& b);

/// Adds the full set of derived model columns under their canonical names:
/// pi_core_4q, theta, slack, rel_p_lag, pandemic_period_num,
/// tight_market_dummy, and the slack/instrument interactions for both models.
void add_model_variables(PanelDataset& data, Quarter pandemic_onset, double tau);

}  // namespace pcanatomy
