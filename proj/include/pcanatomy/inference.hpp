#pragma once

#include <Eigen/Dense>
#include <vector>

namespace pcanatomy {

enum class CovKind { cluster_unit, driscoll_kraay };

struct CovarianceRequest {
  CovKind kind = CovKind::cluster_unit;
  int dk_lags = -1;          // Driscoll-Kraay only; -1 selects the Newey-West rule
  bool small_sample = true;  // finite-sample scaling (CR1-style)
};

/// Newey-West default bandwidth floor(4*(T/100)^{2/9}).
int newey_west_lags(int n_periods);

/// Cluster-robust sandwich (X'X)^{-1} [sum_g X_g'e_g e_g'X_g] (X'X)^{-1}.
/// With small_sample, scaled by G/(G-1) * (n-1)/(n-k). Requires >= 2 clusters.
Eigen::MatrixXd cluster_cov(const Eigen::MatrixXd& X, const Eigen::VectorXd& e,
                            const std::vector<int>& cluster_ids, bool small_sample);

/// Driscoll-Kraay HAC on cross-sectionally summed scores h_t = sum_i x_it e_it:
/// S = Omega_0 + sum_{j<=lags} w_j (Omega_j + Omega_j') with Bartlett weights
/// w_j = 1 - j/(lags+1), sandwiched in (X'X)^{-1}. Lag distance is measured in
/// time-id units. With small_sample, scaled by (n-1)/(n-k). Requires at least
/// lags+2 distinct periods.
Eigen::MatrixXd driscoll_kraay_cov(const Eigen::MatrixXd& X, const Eigen::VectorXd& e,
                                   const std::vector<int>& time_ids, int lags,
                                   bool small_sample);

/// Dispatch on the request; resolves dk_lags = -1 via newey_west_lags.
Eigen::MatrixXd sandwich_cov(const CovarianceRequest& req, const Eigen::MatrixXd& X,
                             const Eigen::VectorXd& e, const std::vector<int>& cluster_ids,
                             const std::vector<int>& time_ids);

struct WaldF {
  double stat = 0.0;   // Wald statistic divided by the number of restrictions
  bool capped = false; // true when clamped instead of overflowing
};

/// Joint test that the coefficients at `idx` are all zero. Throws
/// EstimationError when the tested covariance sub-block is singular.
WaldF wald_f(const Eigen::VectorXd& coef, const Eigen::MatrixXd& vcov,
             const std::vector<int>& idx);

double f_pvalue(double f, double df1, double df2);
double t_pvalue_two_sided(double t, double df);
double t_critical(double two_sided_level, double df);  // e.g. 0.05 -> ~1.96 for large df

}  // namespace pcanatomy
