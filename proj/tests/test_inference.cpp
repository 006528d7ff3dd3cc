#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include <pcanatomy/errors.hpp>
#include <pcanatomy/inference.hpp>
#include <pcanatomy/rng.hpp>

using namespace pcanatomy;

namespace {

/// Brute-force HC0: (X'X)^-1 [sum_i e_i^2 x_i x_i'] (X'X)^-1.
Eigen::MatrixXd hc0(const Eigen::MatrixXd& X, const Eigen::VectorXd& e) {
  Eigen::MatrixXd bread = (X.transpose() * X).inverse();
  Eigen::MatrixXd meat = Eigen::MatrixXd::Zero(X.cols(), X.cols());
  for (long i = 0; i < X.rows(); ++i) {
    meat += e(i) * e(i) * X.row(i).transpose() * X.row(i);
  }
  return bread * meat * bread;
}

struct TestData {
  Eigen::MatrixXd X;
  Eigen::VectorXd e;
};

TestData make_test_data(long n, int k, std::uint64_t seed) {
  Rng rng(seed);
  TestData d{Eigen::MatrixXd(n, k), Eigen::VectorXd(n)};
  for (long i = 0; i < n; ++i) {
    for (int j = 0; j < k; ++j) d.X(i, j) = rng.normal();
    d.e(i) = rng.normal();
  }
  return d;
}

}  // namespace

TEST_CASE("one observation per cluster equals HC0") {
  auto [X, e] = make_test_data(60, 3, 1);
  std::vector<int> ids(60);
  std::iota(ids.begin(), ids.end(), 0);
  Eigen::MatrixXd v = cluster_cov(X, e, ids, /*small_sample=*/false);
  Eigen::MatrixXd o = hc0(X, e);
  CHECK((v - o).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("cluster covariance matches a hand-built two-cluster oracle") {
  Eigen::MatrixXd X(4, 1);
  X << 1.0, 2.0, 3.0, 4.0;
  Eigen::VectorXd e(4);
  e << 0.5, -1.0, 2.0, 0.25;
  std::vector<int> ids{7, 7, 3, 3};  // arbitrary labels, two clusters

  // Scores: g1 = 1*0.5 + 2*(-1) = -1.5; g2 = 3*2 + 4*0.25 = 7.
  // meat = (-1.5)^2 + 7^2 = 51.25; bread = 1/30.
  double expected = 51.25 / (30.0 * 30.0);
  Eigen::MatrixXd v = cluster_cov(X, e, ids, false);
  CHECK(v(0, 0) == doctest::Approx(expected).epsilon(1e-14));

  // CR1 scaling: G/(G-1) * (n-1)/(n-k).
  Eigen::MatrixXd v1 = cluster_cov(X, e, ids, true);
  CHECK(v1(0, 0) == doctest::Approx(expected * 2.0 * 3.0 / 3.0).epsilon(1e-14));
}

TEST_CASE("cluster covariance is invariant to row order") {
  auto [X, e] = make_test_data(90, 2, 2);
  std::vector<int> ids(90);
  for (int i = 0; i < 90; ++i) ids[i] = i % 9;
  Eigen::MatrixXd v = cluster_cov(X, e, ids, true);

  // Reverse all rows.
  Eigen::MatrixXd Xr = X.colwise().reverse();
  Eigen::VectorXd er = e.reverse();
  std::vector<int> idr(ids.rbegin(), ids.rend());
  Eigen::MatrixXd vr = cluster_cov(Xr, er, idr, true);
  CHECK((v - vr).cwiseAbs().maxCoeff() < 1e-13);
}

TEST_CASE("cluster covariance needs at least two clusters") {
  auto [X, e] = make_test_data(10, 1, 3);
  std::vector<int> ids(10, 5);
  CHECK_THROWS_AS(cluster_cov(X, e, ids, true), EstimationError);
}

TEST_CASE("Driscoll-Kraay with zero lags and one unit equals HC0") {
  auto [X, e] = make_test_data(40, 2, 4);
  std::vector<int> times(40);
  std::iota(times.begin(), times.end(), 100);  // offset labels are fine
  Eigen::MatrixXd v = driscoll_kraay_cov(X, e, times, 0, false);
  Eigen::MatrixXd o = hc0(X, e);
  CHECK((v - o).cwiseAbs().maxCoeff() < 1e-12);

  // Small-sample scaling is (n-1)/(n-k).
  Eigen::MatrixXd vs = driscoll_kraay_cov(X, e, times, 0, true);
  CHECK((vs - o * (39.0 / 38.0)).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("Driscoll-Kraay lags pick up serial correlation in the scores") {
  // Build residuals with a strong positive MA structure over time so the
  // Bartlett terms add variance.
  const int T = 120;
  Rng rng(5);
  Eigen::MatrixXd X = Eigen::MatrixXd::Ones(T, 1);
  Eigen::VectorXd shock(T + 3), e(T);
  for (int t = 0; t < T + 3; ++t) shock(t) = rng.normal();
  for (int t = 0; t < T; ++t) e(t) = shock(t) + shock(t + 1) + shock(t + 2) + shock(t + 3);
  std::vector<int> times(T);
  std::iota(times.begin(), times.end(), 0);

  double v0 = driscoll_kraay_cov(X, e, times, 0, false)(0, 0);
  double v3 = driscoll_kraay_cov(X, e, times, 3, false)(0, 0);
  CHECK(v3 > 1.5 * v0);

  // Lag distance is measured in time-id units: relabeling times t -> 10*t
  // makes every pair more than `lags` apart, collapsing DK(3) back to DK(0).
  std::vector<int> spread(T);
  for (int t = 0; t < T; ++t) spread[t] = 10 * t;
  double vspread = driscoll_kraay_cov(X, e, spread, 3, false)(0, 0);
  CHECK(vspread == doctest::Approx(v0).epsilon(1e-12));
}

TEST_CASE("Driscoll-Kraay needs lags+2 distinct periods") {
  auto [X, e] = make_test_data(12, 1, 6);
  std::vector<int> times(12);
  for (int i = 0; i < 12; ++i) times[i] = i % 4;  // 4 distinct periods
  CHECK_THROWS_AS(driscoll_kraay_cov(X, e, times, 3, false), EstimationError);
  CHECK_NOTHROW(driscoll_kraay_cov(X, e, times, 2, false));
}

TEST_CASE("sandwich_cov dispatches and resolves automatic lags") {
  auto [X, e] = make_test_data(50, 2, 7);
  std::vector<int> cluster(50), times(50);
  for (int i = 0; i < 50; ++i) {
    cluster[i] = i / 10;
    times[i] = i % 10;
  }
  CovarianceRequest req;
  req.kind = CovKind::cluster_unit;
  Eigen::MatrixXd a = sandwich_cov(req, X, e, cluster, times);
  CHECK((a - cluster_cov(X, e, cluster, true)).cwiseAbs().maxCoeff() == 0.0);

  req.kind = CovKind::driscoll_kraay;  // dk_lags = -1 -> newey_west_lags(10) = 2
  Eigen::MatrixXd b = sandwich_cov(req, X, e, cluster, times);
  CHECK((b - driscoll_kraay_cov(X, e, times, newey_west_lags(10), true)).cwiseAbs().maxCoeff() ==
        0.0);
}

TEST_CASE("Newey-West bandwidth rule, frozen values") {
  CHECK(newey_west_lags(25) == 2);
  CHECK(newey_west_lags(50) == 3);
  CHECK(newey_west_lags(94) == 3);
  CHECK(newey_west_lags(100) == 4);
  CHECK(newey_west_lags(200) == 4);
}

TEST_CASE("Wald F: frozen small cases, cap, and singular block") {
  Eigen::VectorXd coef(2);
  coef << 1.0, 2.0;
  Eigen::MatrixXd vcov = Eigen::MatrixXd::Identity(2, 2);
  WaldF w1 = wald_f(coef, vcov, {0});
  CHECK(w1.stat == doctest::Approx(1.0).epsilon(1e-14));
  CHECK_FALSE(w1.capped);

  WaldF w2 = wald_f(coef, vcov, {0, 1});
  CHECK(w2.stat == doctest::Approx(2.5).epsilon(1e-14));

  vcov(0, 0) = 4.0;
  WaldF w3 = wald_f(coef, vcov, {0});
  CHECK(w3.stat == doctest::Approx(0.25).epsilon(1e-14));

  // Near-zero variance blows the statistic past the cap.
  Eigen::MatrixXd tiny = Eigen::MatrixXd::Identity(2, 2) * 1e-30;
  WaldF w4 = wald_f(coef, tiny, {0, 1});
  CHECK(w4.capped);
  CHECK(w4.stat == 1e12);

  Eigen::MatrixXd sing = Eigen::MatrixXd::Zero(2, 2);
  CHECK_THROWS_AS(wald_f(coef, sing, {0, 1}), EstimationError);
  CHECK_THROWS_AS(wald_f(coef, vcov, {}), EstimationError);
}

TEST_CASE("F and t distribution tails match independent references") {
  // Reference numbers computed with an independent statistics library.
  CHECK(f_pvalue(3.0, 2, 100) == doctest::Approx(0.054288361816690896).epsilon(1e-12));
  CHECK(f_pvalue(10.0, 1, 40) == doctest::Approx(0.002984452998834331).epsilon(1e-12));
  CHECK(f_pvalue(0.5, 3, 20) == doctest::Approx(0.6865186128364029).epsilon(1e-12));

  CHECK(t_pvalue_two_sided(2.0, 10) == doctest::Approx(0.07338803477074039).epsilon(1e-12));
  CHECK(t_pvalue_two_sided(-1.5, 30) == doctest::Approx(0.14406592912864605).epsilon(1e-12));
  CHECK(t_pvalue_two_sided(2.776, 4) == doctest::Approx(0.0500227783199764).epsilon(1e-12));

  CHECK(t_critical(0.05, 49) == doctest::Approx(2.0095752371292397).epsilon(1e-9));
  CHECK(t_critical(0.05, 9) == doctest::Approx(2.2621571628540993).epsilon(1e-9));
  CHECK(t_critical(0.10, 120) == doctest::Approx(1.6576508993473795).epsilon(1e-9));
}
