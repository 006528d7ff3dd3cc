#include "pcanatomy/inference.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <unordered_map>

#include <boost/math/distributions/fisher_f.hpp>
#include <boost/math/distributions/students_t.hpp>

#include "pcanatomy/errors.hpp"

namespace pcanatomy {

namespace {

constexpr double kWaldCap = 1e12;

Eigen::MatrixXd bread_inverse(const Eigen::MatrixXd& X) {
  Eigen::MatrixXd xtx = X.transpose() * X;
  Eigen::FullPivLU<Eigen::MatrixXd> lu(xtx);
  lu.setThreshold(1e-12);
  if (!lu.isInvertible()) {
    throw EstimationError("covariance bread X'X is singular");
  }
  return lu.inverse();
}

Eigen::MatrixXd symmetrize(Eigen::MatrixXd m) {
  return 0.5 * (m + m.transpose());
}

}  // namespace

int newey_west_lags(int n_periods) {
  return static_cast<int>(std::floor(4.0 * std::pow(n_periods / 100.0, 2.0 / 9.0)));
}

Eigen::MatrixXd cluster_cov(const Eigen::MatrixXd& X, const Eigen::VectorXd& e,
                            const std::vector<int>& cluster_ids, bool small_sample) {
  const long n = X.rows();
  const long k = X.cols();
  if (e.size() != n || static_cast<long>(cluster_ids.size()) != n) {
    throw EstimationError("cluster_cov: residuals and cluster ids must align with rows");
  }
  std::unordered_map<int, Eigen::VectorXd> scores;
  for (long i = 0; i < n; ++i) {
    auto [it, fresh] = scores.try_emplace(cluster_ids[i], Eigen::VectorXd::Zero(k));
    it->second += X.row(i).transpose() * e(i);
  }
  const long g = static_cast<long>(scores.size());
  if (g < 2) throw EstimationError("cluster_cov: need at least 2 clusters, got " + std::to_string(g));

  Eigen::MatrixXd meat = Eigen::MatrixXd::Zero(k, k);
  for (const auto& [id, h] : scores) meat += h * h.transpose();

  Eigen::MatrixXd bread = bread_inverse(X);
  Eigen::MatrixXd v = bread * meat * bread;
  if (small_sample) {
    v *= (static_cast<double>(g) / (g - 1)) * (static_cast<double>(n - 1) / (n - k));
  }
  return symmetrize(std::move(v));
}

Eigen::MatrixXd driscoll_kraay_cov(const Eigen::MatrixXd& X, const Eigen::VectorXd& e,
                                   const std::vector<int>& time_ids, int lags,
                                   bool small_sample) {
  const long n = X.rows();
  const long k = X.cols();
  if (e.size() != n || static_cast<long>(time_ids.size()) != n) {
    throw EstimationError("driscoll_kraay_cov: residuals and time ids must align with rows");
  }
  if (lags < 0) throw EstimationError("driscoll_kraay_cov: negative lag length");

  std::map<int, Eigen::VectorXd> h;  // ordered by time id
  for (long i = 0; i < n; ++i) {
    auto [it, fresh] = h.try_emplace(time_ids[i], Eigen::VectorXd::Zero(k));
    it->second += X.row(i).transpose() * e(i);
  }
  const long t_count = static_cast<long>(h.size());
  if (lags + 2 > t_count) {
    throw EstimationError("driscoll_kraay_cov: lag length " + std::to_string(lags) +
                          " too large for " + std::to_string(t_count) + " distinct periods");
  }

  Eigen::MatrixXd s = Eigen::MatrixXd::Zero(k, k);
  for (const auto& [t, ht] : h) s += ht * ht.transpose();
  for (int j = 1; j <= lags; ++j) {
    double w = 1.0 - static_cast<double>(j) / (lags + 1);
    Eigen::MatrixXd omega = Eigen::MatrixXd::Zero(k, k);
    for (const auto& [t, ht] : h) {
      auto prev = h.find(t - j);
      if (prev != h.end()) omega += ht * prev->second.transpose();
    }
    s += w * (omega + omega.transpose());
  }

  Eigen::MatrixXd bread = bread_inverse(X);
  Eigen::MatrixXd v = bread * s * bread;
  if (small_sample) v *= static_cast<double>(n - 1) / (n - k);
  return symmetrize(std::move(v));
}

Eigen::MatrixXd sandwich_cov(const CovarianceRequest& req, const Eigen::MatrixXd& X,
                             const Eigen::VectorXd& e, const std::vector<int>& cluster_ids,
                             const std::vector<int>& time_ids) {
  if (req.kind == CovKind::cluster_unit) {
    return cluster_cov(X, e, cluster_ids, req.small_sample);
  }
  int t_count = 0;
  {
    std::vector<int> sorted(time_ids);
    std::sort(sorted.begin(), sorted.end());
    t_count = static_cast<int>(std::unique(sorted.begin(), sorted.end()) - sorted.begin());
  }
  int lags = req.dk_lags >= 0 ? req.dk_lags : newey_west_lags(t_count);
  return driscoll_kraay_cov(X, e, time_ids, lags, req.small_sample);
}

WaldF wald_f(const Eigen::VectorXd& coef, const Eigen::MatrixXd& vcov,
             const std::vector<int>& idx) {
  const int q = static_cast<int>(idx.size());
  if (q == 0) throw EstimationError("wald_f: empty restriction set");
  Eigen::VectorXd b(q);
  Eigen::MatrixXd v(q, q);
  for (int i = 0; i < q; ++i) {
    b(i) = coef(idx[i]);
    for (int j = 0; j < q; ++j) v(i, j) = vcov(idx[i], idx[j]);
  }
  Eigen::FullPivLU<Eigen::MatrixXd> lu(v);
  lu.setThreshold(1e-12);
  if (!lu.isInvertible()) {
    throw EstimationError("wald_f: covariance singular on the tested sub-block");
  }
  double stat = b.dot(lu.solve(b)) / q;
  WaldF out;
  if (!std::isfinite(stat) || stat > kWaldCap) {
    out.stat = kWaldCap;
    out.capped = true;
  } else {
    out.stat = stat;
  }
  return out;
}

double f_pvalue(double f, double df1, double df2) {
  if (f <= 0.0) return 1.0;
  boost::math::fisher_f dist(df1, df2);
  return boost::math::cdf(boost::math::complement(dist, f));
}

double t_pvalue_two_sided(double t, double df) {
  boost::math::students_t dist(df);
  return 2.0 * boost::math::cdf(boost::math::complement(dist, std::abs(t)));
}

double t_critical(double two_sided_level, double df) {
  boost::math::students_t dist(df);
  return boost::math::quantile(dist, 1.0 - two_sided_level / 2.0);
}

}  // namespace pcanatomy
