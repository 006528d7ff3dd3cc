#include "pcanatomy/forge.hpp"

#include <cmath>

#include "pcanatomy/errors.hpp"

namespace pcanatomy {

namespace {

std::string at(const PanelDataset& data, int u, int t) {
  return "(" + data.units()[u] + ", " + data.quarter_at(t).str() + ")";
}

void require_positive(const PanelDataset& data, const std::string& col) {
  const Column& c = data.column(col);
  for (int u = 0; u < data.n_units(); ++u) {
    for (int t = 0; t < data.n_quarters(); ++t) {
      const Cell& cell = c[data.cell_index(u, t)];
      if (cell && *cell <= 0.0) {
        throw DataError(col + ": nonpositive value " + std::to_string(*cell) + " at " +
                        at(data, u, t));
      }
    }
  }
}

}  // namespace

Column four_quarter_log_diff(const PanelDataset& data, const std::string& col, double scale) {
  require_positive(data, col);
  const Column& x = data.column(col);
  Column out(data.n_cells());
  for (int u = 0; u < data.n_units(); ++u) {
    for (int t = 4; t < data.n_quarters(); ++t) {
      const Cell& now = x[data.cell_index(u, t)];
      const Cell& lag = x[data.cell_index(u, t - 4)];
      if (now && lag) out[data.cell_index(u, t)] = scale * (std::log(*now) - std::log(*lag));
    }
  }
  return out;
}

Column tightness(const PanelDataset& data, const std::string& vu_col) {
  const Column& vu = data.column(vu_col);
  Column out(data.n_cells());
  for (int u = 0; u < data.n_units(); ++u) {
    for (int t = 0; t < data.n_quarters(); ++t) {
      const Cell& cell = vu[data.cell_index(u, t)];
      if (!cell) continue;
      if (*cell < 0.0) {
        throw DataError(vu_col + ": negative value " + std::to_string(*cell) + " at " +
                        at(data, u, t));
      }
      out[data.cell_index(u, t)] = *cell;
    }
  }
  return out;
}

Column slack_demeaned(const PanelDataset& data, const std::string& theta_col) {
  const Column& theta = data.column(theta_col);
  Column out(data.n_cells());
  for (int t = 0; t < data.n_quarters(); ++t) {
    double sum = 0.0;
    int n = 0;
    for (int u = 0; u < data.n_units(); ++u) {
      const Cell& cell = theta[data.cell_index(u, t)];
      if (!cell) continue;
      if (*cell == 0.0) {
        throw DataError(theta_col + ": division by zero at " + at(data, u, t));
      }
      sum += 1.0 / *cell;
      ++n;
    }
    if (n == 0) continue;
    double mean = sum / n;
    for (int u = 0; u < data.n_units(); ++u) {
      const Cell& cell = theta[data.cell_index(u, t)];
      if (cell) out[data.cell_index(u, t)] = 1.0 / *cell - mean;
    }
  }
  return out;
}

Column relative_price_lag(const PanelDataset& data, const std::string& core_col,
                          const std::string& cpi_col) {
  require_positive(data, core_col);
  require_positive(data, cpi_col);
  const Column& core = data.column(core_col);
  const Column& cpi = data.column(cpi_col);
  Column out(data.n_cells());
  for (int u = 0; u < data.n_units(); ++u) {
    for (int t = 4; t < data.n_quarters(); ++t) {
      const Cell& c = core[data.cell_index(u, t - 4)];
      const Cell& p = cpi[data.cell_index(u, t - 4)];
      if (c && p) out[data.cell_index(u, t)] = std::log(*c) - std::log(*p);
    }
  }
  return out;
}

RegimeDummies regime_dummies(const PanelDataset& data, Quarter pandemic_onset, double tau,
                             const std::string& theta_col) {
  const Column& theta = data.column(theta_col);
  RegimeDummies out;
  out.pandemic_period.resize(data.n_cells());
  out.tight_dummy.resize(data.n_cells());
  for (int u = 0; u < data.n_units(); ++u) {
    for (int t = 0; t < data.n_quarters(); ++t) {
      std::size_t i = data.cell_index(u, t);
      out.pandemic_period[i] = data.quarter_at(t) >= pandemic_onset ? 1.0 : 0.0;
      const Cell& th = theta[i];
      if (th) out.tight_dummy[i] = *th > tau ? 1.0 : 0.0;
    }
  }
  return out;
}

Column interact(const PanelDataset& data, const std::string& a, const std::string& b) {
  const Column& ca = data.column(a);
  const Column& cb = data.column(b);
  Column out(data.n_cells());
  for (std::size_t i = 0; i < data.n_cells(); ++i) {
    if (ca[i] && cb[i]) out[i] = *ca[i] * *cb[i];
  }
  return out;
}

void add_model_variables(PanelDataset& data, Quarter pandemic_onset, double tau) {
  data.add_column(colname::pi_core_4q, four_quarter_log_diff(data, "CPI_core"));
  data.add_column(colname::theta, tightness(data));
  data.add_column(colname::slack, slack_demeaned(data));
  data.add_column(colname::rel_p_lag, relative_price_lag(data));
  RegimeDummies dummies = regime_dummies(data, pandemic_onset, tau);
  data.add_column(colname::pandemic_period, std::move(dummies.pandemic_period));
  data.add_column(colname::tight_dummy, std::move(dummies.tight_dummy));
  data.add_column(colname::slack_x_pandemic,
                  interact(data, colname::slack, colname::pandemic_period));
  data.add_column(colname::slack_x_tight, interact(data, colname::slack, colname::tight_dummy));
  data.add_column(colname::shift_share_x_pandemic,
                  interact(data, colname::shift_share, colname::pandemic_period));
  data.add_column(colname::shift_share_x_tight,
                  interact(data, colname::shift_share, colname::tight_dummy));
}

}  // namespace pcanatomy
