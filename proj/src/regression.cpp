#include "pcanatomy/regression.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>
#include <unordered_map>

#include "pcanatomy/errors.hpp"

namespace pcanatomy {

void DesignSpec::validate() const {
  if (depvar.empty()) throw UsageError("DesignSpec: depvar is required");
  if (instruments.size() < endog.size()) {
    throw UsageError("DesignSpec: order condition failed, " + std::to_string(endog.size()) +
                     " endogenous regressors but only " + std::to_string(instruments.size()) +
                     " instruments");
  }
  if (endog.empty() && !instruments.empty()) {
    throw UsageError("DesignSpec: instruments given but no endogenous regressors");
  }
  std::set<std::string> seen;
  auto check = [&](const std::vector<std::string>& cols, const char* what) {
    for (const auto& c : cols) {
      if (c == depvar) throw UsageError("DesignSpec: depvar '" + c + "' also appears in " + what);
      if (!seen.insert(c).second) {
        throw UsageError("DesignSpec: column '" + c + "' appears twice across regressor lists");
      }
    }
  };
  check(exog, "exog");
  check(endog, "endog");
  // Instruments may not overlap the regressor lists except in the Z=X case,
  // where an endogenous column instruments itself.
  for (const auto& c : instruments) {
    if (c == depvar) throw UsageError("DesignSpec: depvar '" + c + "' used as instrument");
    if (std::find(exog.begin(), exog.end(), c) != exog.end()) {
      throw UsageError("DesignSpec: exogenous regressor '" + c + "' listed as excluded instrument");
    }
  }
}

namespace {

std::string trim(const std::string& s) {
  auto b = s.find_first_not_of(" \t");
  auto e = s.find_last_not_of(" \t");
  return b == std::string::npos ? "" : s.substr(b, e - b + 1);
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream in(s);
  while (std::getline(in, cur, ',')) {
    cur = trim(cur);
    if (!cur.empty()) out.push_back(cur);
  }
  return out;
}

}  // namespace

DesignSpec DesignSpec::parse(const std::string& text) {
  DesignSpec spec;
  spec.fe = {false, false};
  bool fe_seen = false;
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw UsageError("spec line " + std::to_string(line_no) + ": expected key = value");
    }
    std::string key = trim(line.substr(0, eq));
    std::string value = trim(line.substr(eq + 1));
    if (key == "depvar") {
      spec.depvar = value;
    } else if (key == "exog") {
      spec.exog = split_list(value);
    } else if (key == "endog") {
      spec.endog = split_list(value);
    } else if (key == "instruments") {
      spec.instruments = split_list(value);
    } else if (key == "fe") {
      fe_seen = true;
      for (const auto& dim : split_list(value)) {
        if (dim == "unit") spec.fe.unit = true;
        else if (dim == "time") spec.fe.time = true;
        else if (dim == "none") spec.fe = {false, false};
        else throw UsageError("spec line " + std::to_string(line_no) + ": unknown fe '" + dim + "'");
      }
    } else if (key == "window") {
      auto colon = value.find(':');
      if (colon == std::string::npos) {
        throw UsageError("spec line " + std::to_string(line_no) + ": window must be YYYYqQ:YYYYqQ");
      }
      spec.window = Window{Quarter::parse(trim(value.substr(0, colon))),
                           Quarter::parse(trim(value.substr(colon + 1)))};
    } else if (key == "cov") {
      if (value == "cluster") spec.cov.kind = CovKind::cluster_unit;
      else if (value == "dk") spec.cov.kind = CovKind::driscoll_kraay;
      else throw UsageError("spec line " + std::to_string(line_no) + ": cov must be cluster or dk");
    } else if (key == "dk_lags") {
      spec.cov.dk_lags = std::stoi(value);
    } else if (key == "small_sample") {
      spec.cov.small_sample = (value == "true" || value == "1" || value == "yes");
    } else {
      throw UsageError("spec line " + std::to_string(line_no) + ": unknown key '" + key + "'");
    }
  }
  if (!fe_seen) spec.fe = {true, true};
  spec.validate();
  return spec;
}

namespace {

// Compacts arbitrary int labels to 0..n-1.
std::vector<int> compact_ids(const std::vector<int>& ids, int* n_out) {
  std::unordered_map<int, int> map;
  std::vector<int> out(ids.size());
  for (std::size_t i = 0; i < ids.size(); ++i) {
    auto [it, fresh] = map.try_emplace(ids[i], static_cast<int>(map.size()));
    out[i] = it->second;
  }
  *n_out = static_cast<int>(map.size());
  return out;
}

// One demeaning sweep over one dimension; returns the largest |group mean|.
double demean_sweep(Eigen::MatrixXd& m, const std::vector<int>& ids, int n_groups) {
  const long n = m.rows();
  Eigen::VectorXd count = Eigen::VectorXd::Zero(n_groups);
  for (long i = 0; i < n; ++i) count(ids[i]) += 1.0;
  double delta = 0.0;
  for (long c = 0; c < m.cols(); ++c) {
    Eigen::VectorXd sum = Eigen::VectorXd::Zero(n_groups);
    for (long i = 0; i < n; ++i) sum(ids[i]) += m(i, c);
    for (int g = 0; g < n_groups; ++g) {
      sum(g) /= count(g);
      delta = std::max(delta, std::abs(sum(g)));
    }
    for (long i = 0; i < n; ++i) m(i, c) -= sum(ids[i]);
  }
  return delta;
}

}  // namespace

AbsorbStats within_transform(Eigen::MatrixXd& M, const std::vector<int>& unit_ids,
                             const std::vector<int>& time_ids, FeSet fe, double tol,
                             int max_iter) {
  if (!fe.any()) throw EstimationError("within_transform: at least one fixed-effect dimension");
  if (static_cast<long>(unit_ids.size()) != M.rows() ||
      static_cast<long>(time_ids.size()) != M.rows()) {
    throw EstimationError("within_transform: id vectors must match row count");
  }
  int n_units = 0, n_times = 0;
  std::vector<int> u = compact_ids(unit_ids, &n_units);
  std::vector<int> t = compact_ids(time_ids, &n_times);

  AbsorbStats stats;
  for (int iter = 1; iter <= max_iter; ++iter) {
    double delta = 0.0;
    if (fe.unit) delta = std::max(delta, demean_sweep(M, u, n_units));
    if (fe.time) delta = std::max(delta, demean_sweep(M, t, n_times));
    stats.iterations = iter;
    stats.final_delta = delta;
    if (delta <= tol) return stats;
  }
  throw EstimationError("within_transform: no convergence after " + std::to_string(max_iter) +
                        " sweeps, last delta " + std::to_string(stats.final_delta));
}

OlsFit ols_fit(const Eigen::VectorXd& y, const Eigen::MatrixXd& X,
               const std::vector<std::string>& names) {
  if (X.rows() != y.size()) throw EstimationError("ols_fit: y and X row mismatch");
  if (X.cols() == 0) throw EstimationError("ols_fit: no regressors");
  if (X.rows() < X.cols()) {
    throw EstimationError("ols_fit: fewer rows (" + std::to_string(X.rows()) +
                          ") than columns (" + std::to_string(X.cols()) + ")");
  }
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(X);
  qr.setThreshold(1e-10);
  if (qr.rank() < X.cols()) {
    int bad = qr.colsPermutation().indices()(qr.rank());
    std::string name = bad < static_cast<int>(names.size()) ? names[bad]
                                                            : "#" + std::to_string(bad);
    throw EstimationError("rank deficiency: column '" + name +
                          "' is collinear (or zero) after absorption");
  }
  OlsFit fit;
  fit.coef = qr.solve(y);
  fit.fitted = X * fit.coef;
  fit.residuals = y - fit.fitted;
  return fit;
}

int FitResult::find(const std::string& name) const {
  for (int i = 0; i < static_cast<int>(names.size()); ++i) {
    if (names[i] == name) return i;
  }
  throw EstimationError("FitResult: no coefficient named '" + name + "'");
}

double FitResult::pvalue(int i) const { return t_pvalue_two_sided(tstat(i), df_t); }

namespace {

struct Frame {
  Eigen::VectorXd y;
  Eigen::MatrixXd Xen, Xex, Z;
  std::vector<int> unit_ids;  // compact
  std::vector<int> time_ids;  // quarter index values (order-preserving)
  long n_units = 0, n_periods = 0;
  std::vector<std::string> exog_names;
};

Frame build_frame(const DesignSpec& spec, const PanelDataset& data) {
  Window win = spec.window.value_or(Window{data.first_quarter(), data.last_quarter()});
  int t0 = std::max(0, win.first - data.first_quarter());
  int t1 = std::min(data.n_quarters() - 1, win.last - data.first_quarter());

  std::vector<const Column*> cols;
  std::vector<std::string> all_names;
  all_names.push_back(spec.depvar);
  for (const auto& n : spec.endog) all_names.push_back(n);
  for (const auto& n : spec.exog) all_names.push_back(n);
  for (const auto& n : spec.instruments) all_names.push_back(n);
  {
    std::set<std::string> dedup;
    std::vector<std::string> unique_names;
    for (const auto& n : all_names) {
      if (dedup.insert(n).second) unique_names.push_back(n);
    }
    all_names = std::move(unique_names);
  }
  std::unordered_map<std::string, const Column*> by_name;
  for (const auto& n : all_names) by_name.emplace(n, &data.column(n));

  // Listwise deletion over exactly the referenced columns.
  std::vector<std::pair<int, int>> rows;
  for (int u = 0; u < data.n_units(); ++u) {
    for (int t = t0; t <= t1; ++t) {
      bool complete = true;
      for (const auto& n : all_names) {
        if (!(*by_name[n])[data.cell_index(u, t)]) { complete = false; break; }
      }
      if (complete) rows.emplace_back(u, t);
    }
  }
  if (rows.empty()) {
    throw EstimationError("empty estimation sample in window " + win.first.str() + ":" +
                          win.last.str() + " after listwise deletion");
  }

  Frame f;
  const long n = static_cast<long>(rows.size());
  f.y.resize(n);
  f.Xen.resize(n, static_cast<long>(spec.endog.size()));
  f.Z.resize(n, static_cast<long>(spec.instruments.size()));
  const bool add_const = !spec.fe.any();
  f.Xex.resize(n, static_cast<long>(spec.exog.size()) + (add_const ? 1 : 0));
  if (add_const) f.exog_names.push_back("const");
  for (const auto& nm : spec.exog) f.exog_names.push_back(nm);

  std::vector<int> raw_units(n);
  f.time_ids.resize(n);
  for (long i = 0; i < n; ++i) {
    auto [u, t] = rows[i];
    std::size_t idx = data.cell_index(u, t);
    f.y(i) = *(*by_name[spec.depvar])[idx];
    for (std::size_t j = 0; j < spec.endog.size(); ++j) {
      f.Xen(i, j) = *(*by_name[spec.endog[j]])[idx];
    }
    long off = add_const ? 1 : 0;
    if (add_const) f.Xex(i, 0) = 1.0;
    for (std::size_t j = 0; j < spec.exog.size(); ++j) {
      f.Xex(i, j + off) = *(*by_name[spec.exog[j]])[idx];
    }
    for (std::size_t j = 0; j < spec.instruments.size(); ++j) {
      f.Z(i, j) = *(*by_name[spec.instruments[j]])[idx];
    }
    raw_units[i] = u;
    f.time_ids[i] = data.quarter_at(t).index();
  }
  int nu = 0;
  f.unit_ids = compact_ids(raw_units, &nu);
  f.n_units = nu;
  {
    std::vector<int> sorted(f.time_ids);
    std::sort(sorted.begin(), sorted.end());
    f.n_periods = std::unique(sorted.begin(), sorted.end()) - sorted.begin();
  }
  return f;
}

constexpr double kPerfectFitTol = 1e-20;  // relative residual SS triggering the F cap
constexpr double kCappedF = 1e12;

}  // namespace

FitResult tsls_fit(const DesignSpec& spec, const PanelDataset& data) {
  spec.validate();
  Frame f = build_frame(spec, data);
  const long n = f.y.size();
  const long k_en = f.Xen.cols();
  const long k_ex = f.Xex.cols();
  const long k_z = f.Z.cols();

  if (spec.cov.kind == CovKind::cluster_unit && f.n_units < 2) {
    throw EstimationError("tsls_fit: need at least 2 clusters, sample has " +
                          std::to_string(f.n_units));
  }

  // Absorb FE from every variable jointly.
  Eigen::MatrixXd m(n, 1 + k_en + k_ex + k_z);
  m.col(0) = f.y;
  if (k_en > 0) m.middleCols(1, k_en) = f.Xen;
  if (k_ex > 0) m.middleCols(1 + k_en, k_ex) = f.Xex;
  if (k_z > 0) m.middleCols(1 + k_en + k_ex, k_z) = f.Z;
  if (spec.fe.any()) within_transform(m, f.unit_ids, f.time_ids, spec.fe);
  Eigen::VectorXd y = m.col(0);
  Eigen::MatrixXd xen = m.middleCols(1, k_en);
  Eigen::MatrixXd xex = m.middleCols(1 + k_en, k_ex);
  Eigen::MatrixXd z = m.middleCols(1 + k_en + k_ex, k_z);

  FitResult res;
  for (const auto& nm : spec.endog) res.names.push_back(nm);
  for (const auto& nm : f.exog_names) res.names.push_back(nm);
  res.n_obs = n;
  res.n_units = f.n_units;
  res.n_clusters = f.n_units;
  res.n_periods = f.n_periods;

  // First stage per endogenous column on instruments + exog.
  Eigen::MatrixXd fitted_en(n, k_en);
  Eigen::MatrixXd fs_resid(n, k_en);
  if (k_en > 0) {
    Eigen::MatrixXd w(n, k_z + k_ex);
    if (k_z > 0) w.leftCols(k_z) = z;
    if (k_ex > 0) w.rightCols(k_ex) = xex;
    std::vector<std::string> w_names(spec.instruments);
    w_names.insert(w_names.end(), f.exog_names.begin(), f.exog_names.end());

    for (long j = 0; j < k_en; ++j) {
      OlsFit fs;
      try {
        fs = ols_fit(xen.col(j), w, w_names);
      } catch (const EstimationError& e) {
        throw EstimationError("first stage for '" + spec.endog[j] + "': " + e.what());
      }
      fitted_en.col(j) = fs.fitted;
      fs_resid.col(j) = fs.residuals;

      FirstStageInfo info;
      info.endog = spec.endog[j];
      info.regressors = w_names;
      info.coef = fs.coef;
      double ss_tot = xen.col(j).squaredNorm();
      double ss_res = fs.residuals.squaredNorm();
      info.r2 = ss_tot > 0 ? 1.0 - ss_res / ss_tot : 0.0;
      if (ss_res <= kPerfectFitTol * std::max(ss_tot, 1e-300)) {
        info.partial_f = kCappedF;
        info.f_capped = true;
      } else {
        Eigen::MatrixXd vfs =
            sandwich_cov(spec.cov, w, fs.residuals, f.unit_ids, f.time_ids);
        std::vector<int> idx(k_z);
        for (int i = 0; i < k_z; ++i) idx[i] = i;
        WaldF wf = wald_f(fs.coef, vfs, idx);
        info.partial_f = wf.stat;
        info.f_capped = wf.capped;
      }
      res.first_stage.push_back(std::move(info));
    }
  }

  // Second stage on fitted endogenous values.
  Eigen::MatrixXd xhat(n, k_en + k_ex);
  if (k_en > 0) xhat.leftCols(k_en) = fitted_en;
  if (k_ex > 0) xhat.rightCols(k_ex) = xex;
  OlsFit second = ols_fit(y, xhat, res.names);
  res.coef = second.coef;

  // Residuals with the original endogenous columns.
  Eigen::MatrixXd xorig(n, k_en + k_ex);
  if (k_en > 0) xorig.leftCols(k_en) = xen;
  if (k_ex > 0) xorig.rightCols(k_ex) = xex;
  Eigen::VectorXd e = y - xorig * res.coef;

  res.vcov = sandwich_cov(spec.cov, xhat, e, f.unit_ids, f.time_ids);
  double ss_tot = y.squaredNorm();
  res.r2_within = ss_tot > 0 ? 1.0 - e.squaredNorm() / ss_tot : 0.0;
  res.df_t = spec.cov.kind == CovKind::cluster_unit ? static_cast<double>(res.n_clusters - 1)
                                                    : static_cast<double>(res.n_periods - 1);

  // Wu-Hausman in control-function form.
  if (spec.wu_hausman && k_en > 0) {
    bool all_tiny = true;
    for (long j = 0; j < k_en; ++j) {
      if (fs_resid.col(j).squaredNorm() >
          kPerfectFitTol * std::max(xen.col(j).squaredNorm(), 1e-300)) {
        all_tiny = false;
        break;
      }
    }
    if (all_tiny) {
      res.wu_hausman = {0.0, 1.0};  // Z=X: OLS and 2SLS coincide
    } else {
      Eigen::MatrixXd xcf(n, k_en + k_ex + k_en);
      xcf.leftCols(k_en) = xen;
      if (k_ex > 0) xcf.middleCols(k_en, k_ex) = xex;
      xcf.rightCols(k_en) = fs_resid;
      std::vector<std::string> cf_names(res.names);
      for (const auto& nm : spec.endog) cf_names.push_back("fs_resid:" + nm);
      OlsFit cf = ols_fit(y, xcf, cf_names);
      Eigen::MatrixXd vcf = sandwich_cov(spec.cov, xcf, cf.residuals, f.unit_ids, f.time_ids);
      std::vector<int> idx(k_en);
      for (long j = 0; j < k_en; ++j) idx[j] = static_cast<int>(k_en + k_ex + j);
      WaldF wf = wald_f(cf.coef, vcf, idx);
      double p = f_pvalue(wf.stat, static_cast<double>(k_en),
                          static_cast<double>(n - xcf.cols()));
      res.wu_hausman = {wf.stat, p};
    }
  }
  return res;
}

std::pair<double, double> wu_hausman(const DesignSpec& spec, const PanelDataset& data) {
  DesignSpec with = spec;
  with.wu_hausman = true;
  FitResult res = tsls_fit(with, data);
  if (!res.wu_hausman) throw EstimationError("wu_hausman: spec has no endogenous regressors");
  return *res.wu_hausman;
}

Ar1Result ar1_persistence(const PanelDataset& data, const std::string& col, Window window) {
  if (window.n_quarters() < 3) {
    throw EstimationError("ar1_persistence: window " + window.first.str() + ":" +
                          window.last.str() + " has fewer than 3 quarters");
  }
  const Column& x = data.column(col);
  std::vector<double> ys, xs;
  std::vector<int> units, times;
  for (int u = 0; u < data.n_units(); ++u) {
    for (int t = 1; t < data.n_quarters(); ++t) {
      Quarter now = data.quarter_at(t);
      if (!window.contains(now) || !window.contains(now - 1)) continue;
      const Cell& cur = x[data.cell_index(u, t)];
      const Cell& lag = x[data.cell_index(u, t - 1)];
      if (!cur || !lag) continue;
      ys.push_back(*cur);
      xs.push_back(*lag);
      units.push_back(u);
      times.push_back(now.index());
    }
  }
  if (ys.empty()) {
    throw EstimationError("ar1_persistence: empty sample for '" + col + "' in window " +
                          window.first.str() + ":" + window.last.str());
  }
  const long n = static_cast<long>(ys.size());
  Eigen::MatrixXd m(n, 2);
  for (long i = 0; i < n; ++i) {
    m(i, 0) = ys[i];
    m(i, 1) = xs[i];
  }
  within_transform(m, units, times, FeSet{true, false});
  try {
    OlsFit fit = ols_fit(m.col(0), m.col(1), {col + "[t-1]"});
    Ar1Result out;
    out.rho = fit.coef(0);
    out.n_obs = n;
    int nu = 0;
    compact_ids(units, &nu);
    out.n_units = nu;
    return out;
  } catch (const EstimationError& e) {
    throw EstimationError("ar1_persistence: degenerate regressor for '" + col + "': " + e.what());
  }
}

}  // namespace pcanatomy
