#pragma once

#include <Eigen/Dense>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "pcanatomy/inference.hpp"
#include "pcanatomy/panel.hpp"

namespace pcanatomy {

struct FeSet {
  bool unit = true;
  bool time = true;
  bool any() const { return unit || time; }
};

struct Window {
  Quarter first, last;  // inclusive
  bool contains(Quarter t) const { return first <= t && t <= last; }
  int n_quarters() const { return last - first + 1; }
};

/// Declarative description of one regression. Endogenous columns are
/// instrumented by the excluded instruments; with no endogenous columns the
/// fit is plain within-OLS. Without fixed effects a constant is added.
struct DesignSpec {
  std::string depvar;
  std::vector<std::string> exog;
  std::vector<std::string> endog;
  std::vector<std::string> instruments;
  FeSet fe;
  std::optional<Window> window;
  CovarianceRequest cov;
  bool wu_hausman = true;

  /// Order condition, regressor disjointness, depvar not among regressors.
  void validate() const;

  /// Plain-text form: one `key = value` per line, lists comma-separated,
  /// '#' starts a comment. Keys: depvar, exog, endog, instruments, fe
  /// (unit/time/none), window (YYYYqQ:YYYYqQ), cov (cluster|dk), dk_lags,
  /// small_sample (true|false).
  static DesignSpec parse(const std::string& text);
};

struct AbsorbStats {
  int iterations = 0;
  double final_delta = 0.0;
};

/// Demeans every column of M by the requested fixed-effect dimensions,
/// alternating unit and time sweeps until the largest subtracted group mean
/// falls below tol. Throws EstimationError on non-convergence, reporting the
/// last delta.
AbsorbStats within_transform(Eigen::MatrixXd& M, const std::vector<int>& unit_ids,
                             const std::vector<int>& time_ids, FeSet fe, double tol = 1e-10,
                             int max_iter = 10000);

struct OlsFit {
  Eigen::VectorXd coef;
  Eigen::VectorXd fitted;
  Eigen::VectorXd residuals;
};

/// Least squares by rank-revealing QR (relative pivot tolerance 1e-10).
/// Rank deficiency is an error naming a collinear column, never a silent drop.
OlsFit ols_fit(const Eigen::VectorXd& y, const Eigen::MatrixXd& X,
               const std::vector<std::string>& names);

struct FirstStageInfo {
  std::string endog;
  std::vector<std::string> regressors;  // excluded instruments first, then exog
  Eigen::VectorXd coef;
  double partial_f = 0.0;  // Wald on excluded instruments / #instruments
  bool f_capped = false;   // perfect-relevance guard hit
  double r2 = 0.0;
};

struct FitResult {
  std::vector<std::string> names;  // endog..., then exog...
  Eigen::VectorXd coef;
  Eigen::MatrixXd vcov;
  long n_obs = 0;
  long n_units = 0;
  long n_clusters = 0;
  long n_periods = 0;
  double r2_within = 0.0;
  double df_t = 0.0;  // dof for t statistics: G-1 (cluster) or T-1 (DK)
  std::vector<FirstStageInfo> first_stage;
  std::optional<std::pair<double, double>> wu_hausman;  // (F statistic, p-value)

  int find(const std::string& name) const;
  double se(int i) const { return std::sqrt(vcov(i, i)); }
  double tstat(int i) const { return coef(i) / se(i); }
  double pvalue(int i) const;
};

/// Two-stage least squares with fixed-effect absorption. First stage per
/// endogenous column on (instruments + exog) post-absorption; the second
/// stage replaces endogenous columns with fitted values; residuals for the
/// covariance use the original endogenous columns. Listwise deletion over
/// exactly the referenced columns.
FitResult tsls_fit(const DesignSpec& spec, const PanelDataset& data);

/// Control-function endogeneity test for the given 2SLS spec: the second
/// stage augmented with first-stage residuals, their coefficients jointly
/// tested with the fit's covariance estimator. Returns (F statistic, p-value
/// from F(m, n-k)).
std::pair<double, double> wu_hausman(const DesignSpec& spec, const PanelDataset& data);

struct Ar1Result {
  double rho = 0.0;
  long n_obs = 0;
  long n_units = 0;
};

/// OLS of col on its one-quarter lag with unit fixed effects absorbed; the
/// sample keeps rows where both t and t-1 lie inside the window.
Ar1Result ar1_persistence(const PanelDataset& data, const std::string& col, Window window);

}  // namespace pcanatomy
