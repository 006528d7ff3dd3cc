#include "pcanatomy/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <sstream>

#include <nlohmann/json.hpp>

#include "pcanatomy/csv.hpp"
#include "pcanatomy/errors.hpp"
#include "pcanatomy/forge.hpp"
#include "pcanatomy/inference.hpp"

namespace fs = std::filesystem;

namespace pcanatomy {

std::string fnv1a_hex(const std::string& bytes) {
  std::uint64_t h = 14695981039346656037ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  char buf[24];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

nlohmann::json RunManifest::to_json() const {
  nlohmann::json opts = nlohmann::json::object();
  for (const auto& [k, v] : options) opts[k] = v;
  nlohmann::json outs = nlohmann::json::array();
  for (const auto& [name, digest] : outputs) {
    outs.push_back(nlohmann::json{{"file", name}, {"digest", digest}});
  }
  nlohmann::json j{{"command", command}, {"tool", kToolName}, {"tool_version", tool_version},
                   {"options", opts},    {"outputs", outs}};
  if (!input_path.empty()) {
    j["input"] = input_path;
    j["input_digest"] = input_digest;
  }
  return j;
}

void RunManifest::write(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write manifest '" + path + "'");
  out << to_json().dump(2) << "\n";
}

namespace {

std::string f4(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.4f", v);
  return buf;
}

std::string g10(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.10g", v);
  return buf;
}

std::string stars_for(double p) {
  if (p < 0.01) return "***";
  if (p < 0.05) return "**";
  if (p < 0.1) return "*";
  return "";
}

std::string read_bytes(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open input file '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string write_text(const std::string& dir, const std::string& name,
                       const std::string& content) {
  fs::create_directories(dir);
  fs::path p = fs::path(dir) / name;
  std::ofstream out(p);
  if (!out) throw DataError("cannot write output file '" + p.string() + "'");
  out << content;
  return p.string();
}

void attach_outputs(RunManifest& man, const std::vector<std::string>& files) {
  for (const auto& f : files) {
    man.outputs.emplace_back(fs::path(f).filename().string(), fnv1a_hex(read_bytes(f)));
  }
}

std::string cov_name(const CovarianceRequest& cov) {
  return cov.kind == CovKind::cluster_unit ? "cluster" : "dk";
}

/// Ingest + forge with the failing stage named in errors.
PanelDataset load_forged(const CommonOptions& opt, std::string* digest) {
  if (opt.input.empty()) throw UsageError("--input is required");
  *digest = fnv1a_hex(read_bytes(opt.input));
  PanelDataset data = load_csv(opt.input);
  for (const auto& col :
       {colname::pi_core_4q, colname::theta, colname::slack, colname::rel_p_lag}) {
    if (data.has_column(col)) {
      throw DataError("input already contains derived column '" + col +
                      "'; provide the raw ingest schema (CPI_core, CPI, vu, shift_share)");
    }
  }
  try {
    add_model_variables(data, opt.pandemic_onset, opt.tau);
  } catch (const DataError& e) {
    throw DataError(std::string("variable construction: ") + e.what());
  }
  return data;
}

/// Restricts the quarter index to the window (derived columns keep the
/// values their lags produced, mirroring how estimation windows a sample).
PanelDataset slice_window(const PanelDataset& data, Window w) {
  Quarter first = std::max(w.first, data.first_quarter());
  Quarter last = std::min(w.last, data.last_quarter());
  if (last < first) {
    throw DataError("window " + w.first.str() + ":" + w.last.str() +
                    " does not overlap the sample " + data.first_quarter().str() + ":" +
                    data.last_quarter().str());
  }
  const int off = first - data.first_quarter();
  const int nq = last - first + 1;
  PanelDataset out(data.units(), first, nq);
  for (const auto& name : data.column_names()) {
    const Column& src = data.column(name);
    Column dst(out.n_cells());
    for (int u = 0; u < data.n_units(); ++u) {
      for (int t = 0; t < nq; ++t) dst[out.cell_index(u, t)] = src[data.cell_index(u, t + off)];
    }
    out.add_column(name, std::move(dst));
  }
  return out;
}

std::vector<std::pair<std::string, std::string>> common_manifest_options(
    const CommonOptions& opt) {
  std::vector<std::pair<std::string, std::string>> kv;
  kv.emplace_back("window", opt.window ? opt.window->first.str() + ":" + opt.window->last.str()
                                       : "full");
  kv.emplace_back("pandemic_onset", opt.pandemic_onset.str());
  kv.emplace_back("tau", g10(opt.tau));
  kv.emplace_back("cov", cov_name(opt.cov));
  kv.emplace_back("dk_lags", opt.cov.dk_lags < 0 ? "auto" : std::to_string(opt.cov.dk_lags));
  kv.emplace_back("beta", g10(opt.beta));
  return kv;
}

}  // namespace

DescribeResult cmd_describe(const CommonOptions& opt, std::optional<Quarter> split_arg) {
  std::string digest;
  PanelDataset data = load_forged(opt, &digest);
  if (opt.window) data = slice_window(data, *opt.window);
  Quarter split = split_arg.value_or(opt.pandemic_onset);
  const std::vector<std::string> cols = {colname::pi_core_4q, colname::slack, colname::theta,
                                         colname::shift_share, colname::rel_p_lag};
  DescribeResult res;
  res.stats = summary_stats(data, split, cols);

  std::ostringstream text, csv;
  text << "Summary statistics (" << data.first_quarter().str() << ".."
       << data.last_quarter().str() << ", split at " << split.str() << ")\n";
  char line[256];
  std::snprintf(line, sizeof(line), "%-14s %-6s %8s %12s %12s %12s %12s\n", "variable", "sample",
                "n", "mean", "sd", "min", "max");
  text << line;
  csv << "variable,sample,n,mean,sd,min,max\n";
  for (const auto& row : res.stats.rows) {
    const std::pair<const char*, const ColumnStats*> blocks[] = {
        {"full", &row.full}, {"pre", &row.pre}, {"post", &row.post}};
    for (const auto& [sample, st] : blocks) {
      if (st->count == 0) {
        std::snprintf(line, sizeof(line), "%-14s %-6s %8lld %12s %12s %12s %12s\n",
                      row.column.c_str(), sample, st->count, "-", "-", "-", "-");
        text << line;
        csv << row.column << "," << sample << ",0,,,,\n";
        continue;
      }
      std::snprintf(line, sizeof(line), "%-14s %-6s %8lld %12s %12s %12s %12s\n",
                    row.column.c_str(), sample, st->count, f4(st->mean).c_str(),
                    f4(st->sd).c_str(), f4(st->min).c_str(), f4(st->max).c_str());
      text << line;
      csv << row.column << "," << sample << "," << st->count << "," << g10(st->mean) << ","
          << g10(st->sd) << "," << g10(st->min) << "," << g10(st->max) << "\n";
    }
  }
  res.text = text.str();
  res.files.push_back(write_text(opt.out_dir, "describe_stats.txt", res.text));
  res.files.push_back(write_text(opt.out_dir, "describe_stats.csv", csv.str()));

  RunManifest man;
  man.command = "describe";
  man.input_path = opt.input;
  man.input_digest = digest;
  man.options = common_manifest_options(opt);
  man.options.emplace_back("split", split.str());
  attach_outputs(man, res.files);
  fs::path mp = fs::path(opt.out_dir) / "describe_stats.manifest.json";
  man.write(mp.string());
  res.files.push_back(mp.string());
  return res;
}

nlohmann::json EstimateResult::machine() const {
  nlohmann::json coefs = nlohmann::json::array();
  for (int i = 0; i < static_cast<int>(fit.names.size()); ++i) {
    coefs.push_back({{"name", fit.names[i]},
                     {"coef", fit.coef(i)},
                     {"se", fit.se(i)},
                     {"t", fit.tstat(i)},
                     {"p", fit.pvalue(i)},
                     {"stars", stars_for(fit.pvalue(i))}});
  }
  nlohmann::json fs_arr = nlohmann::json::array();
  for (const auto& info : fit.first_stage) {
    fs_arr.push_back({{"endog", info.endog},
                      {"partial_f", info.partial_f},
                      {"capped", info.f_capped},
                      {"r2", info.r2}});
  }
  auto opt_num = [](const std::optional<double>& v) {
    return v ? nlohmann::json(*v) : nlohmann::json(nullptr);
  };
  nlohmann::json j{
      {"command", "estimate"},
      {"tool_version", kToolVersion},
      {"model", model},
      {"depvar", spec.depvar},
      {"cov", spec.cov.kind == CovKind::cluster_unit ? "cluster" : "dk"},
      {"sample",
       {{"n_obs", fit.n_obs},
        {"n_units", fit.n_units},
        {"n_clusters", fit.n_clusters},
        {"n_periods", fit.n_periods},
        {"r2_within", fit.r2_within},
        {"df_t", fit.df_t}}},
      {"coefficients", coefs},
      {"first_stage", fs_arr}};
  if (!base_name.empty() && !shift_name.empty()) {
    j["implied_post_slope"] = implied_post;
    j["structural"] = {{"beta", beta},
                       {"rho_pre", opt_num(rho_pre)},
                       {"rho_post", opt_num(rho_post)},
                       {"kappa_pre", opt_num(kappa_pre)},
                       {"kappa_post", opt_num(kappa_post)}};
  } else {
    j["implied_post_slope"] = nullptr;
    j["structural"] = nullptr;
  }
  if (fit.wu_hausman) {
    j["wu_hausman"] = {{"stat", fit.wu_hausman->first}, {"p", fit.wu_hausman->second}};
  } else {
    j["wu_hausman"] = nullptr;
  }
  return j;
}

EstimateResult cmd_estimate(const CommonOptions& opt, int model,
                            std::optional<DesignSpec> custom) {
  std::string digest;
  PanelDataset data = load_forged(opt, &digest);

  EstimateResult res;
  res.model = custom ? 0 : model;
  res.beta = opt.beta;
  if (custom) {
    res.spec = *custom;
  } else {
    if (model != 1 && model != 2) throw UsageError("--model must be 1 or 2");
    res.spec = model_spec(model == 1 ? Model::model_i : Model::model_ii, opt.cov);
  }
  res.spec.cov = opt.cov;
  if (opt.window) res.spec.window = opt.window;

  try {
    res.fit = tsls_fit(res.spec, data);
  } catch (const EstimationError& e) {
    std::string msg = std::string("estimation: ") + e.what();
    if (msg.find("collinear") != std::string::npos) {
      msg += "; hint: a regime interaction that is constant or all-zero in the sample (e.g. no "
             "tight-market observations under the chosen --tau, or an onset outside the window) "
             "is not identified — adjust --tau, --pandemic-onset, or --window";
    }
    throw EstimationError(msg);
  }

  // Structural mapping when the canonical slack terms are present.
  bool has_slack = std::find(res.fit.names.begin(), res.fit.names.end(), colname::slack) !=
                   res.fit.names.end();
  std::string shift;
  for (const auto& cand : {colname::slack_x_pandemic, colname::slack_x_tight}) {
    if (std::find(res.fit.names.begin(), res.fit.names.end(), cand) != res.fit.names.end()) {
      shift = cand;
      break;
    }
  }
  Window win = res.spec.window.value_or(Window{data.first_quarter(), data.last_quarter()});
  if (has_slack && !shift.empty()) {
    res.base_name = colname::slack;
    res.shift_name = shift;
    double base = res.fit.coef(res.fit.find(res.base_name));
    double delta = res.fit.coef(res.fit.find(res.shift_name));
    res.implied_post = implied_post_slope(base, delta);
    auto rho_of = [&](Window w) -> std::optional<double> {
      try {
        return ar1_persistence(data, colname::slack, w).rho;
      } catch (const EstimationError&) {
        return std::nullopt;
      }
    };
    if (opt.pandemic_onset - 1 >= win.first) {
      res.rho_pre = rho_of(Window{win.first, opt.pandemic_onset - 1});
    }
    if (opt.pandemic_onset <= win.last && opt.pandemic_onset >= win.first) {
      res.rho_post = rho_of(Window{opt.pandemic_onset, win.last});
    }
    if (res.rho_pre) res.kappa_pre = kappa_from_psi(base, *res.rho_pre, opt.beta);
    if (res.rho_post) res.kappa_post = kappa_from_psi(res.implied_post, *res.rho_post, opt.beta);
  }

  // Human-readable report; the machine() JSON carries the same numbers at
  // full precision.
  std::ostringstream text;
  std::string title = res.model == 0 ? "custom specification"
                                     : (res.model == 1 ? "Model I (post-onset shift)"
                                                       : "Model II (tight-market shift)");
  bool is_iv = !res.spec.endog.empty();
  text << "Phillips curve estimation - " << title << "\n";
  text << "Estimator: " << (is_iv ? "2SLS" : "OLS") << ", FE: "
       << (res.spec.fe.unit && res.spec.fe.time
               ? "unit + time"
               : (res.spec.fe.unit ? "unit" : (res.spec.fe.time ? "time" : "none")))
       << ", SEs: "
       << (res.spec.cov.kind == CovKind::cluster_unit ? "clustered by unit" : "Driscoll-Kraay")
       << "\n";
  text << "Dependent variable: " << res.spec.depvar << "\n";
  text << "Sample: " << win.first.str() << ".." << win.last.str() << "  n_obs=" << res.fit.n_obs
       << "  n_units=" << res.fit.n_units << "  n_clusters=" << res.fit.n_clusters
       << "  n_periods=" << res.fit.n_periods << "\n";
  text << "Within R2: " << f4(res.fit.r2_within) << "\n\n";
  text << "Coefficients (SE in parentheses; * p<0.10 ** p<0.05 *** p<0.01)\n";
  char line[256];
  for (int i = 0; i < static_cast<int>(res.fit.names.size()); ++i) {
    std::snprintf(line, sizeof(line), "  %-36s %10s (%s) %s\n", res.fit.names[i].c_str(),
                  f4(res.fit.coef(i)).c_str(), f4(res.fit.se(i)).c_str(),
                  stars_for(res.fit.pvalue(i)).c_str());
    text << line;
  }
  if (!res.base_name.empty()) {
    text << "\nImplied post/tight slope (" << res.base_name << " + " << res.shift_name
         << "): " << f4(res.implied_post) << "\n";
    text << "Structural mapping (beta = " << f4(res.beta) << "):\n";
    text << "  rho_pre  = " << (res.rho_pre ? f4(*res.rho_pre) : "n/a")
         << "   kappa_pre  = " << (res.kappa_pre ? f4(*res.kappa_pre) : "n/a") << "\n";
    text << "  rho_post = " << (res.rho_post ? f4(*res.rho_post) : "n/a")
         << "   kappa_post = " << (res.kappa_post ? f4(*res.kappa_post) : "n/a") << "\n";
  }
  if (!res.fit.first_stage.empty()) {
    text << "\nFirst-stage partial F (excluded instruments):\n";
    for (const auto& info : res.fit.first_stage) {
      text << "  " << info.endog << ": F = " << f4(info.partial_f)
           << (info.f_capped ? " (capped: perfect fit)" : "") << ", R2 = " << f4(info.r2)
           << "\n";
    }
  }
  if (res.fit.wu_hausman) {
    text << "Wu-Hausman endogeneity test: F = " << f4(res.fit.wu_hausman->first)
         << ", p = " << f4(res.fit.wu_hausman->second) << "\n";
  }
  res.text = text.str();

  std::string stem = res.model == 0 ? "estimate_custom" : "estimate_model" + std::to_string(model);
  res.files.push_back(write_text(opt.out_dir, stem + ".txt", res.text));
  res.files.push_back(write_text(opt.out_dir, stem + ".json", res.machine().dump(2) + "\n"));

  RunManifest man;
  man.command = "estimate";
  man.input_path = opt.input;
  man.input_digest = digest;
  man.options = common_manifest_options(opt);
  man.options.emplace_back("model", res.model == 0 ? "custom" : std::to_string(model));
  if (res.model == 0) {
    man.options.emplace_back("depvar", res.spec.depvar);
  }
  attach_outputs(man, res.files);
  fs::path mp = fs::path(opt.out_dir) / (stem + ".manifest.json");
  man.write(mp.string());
  res.files.push_back(mp.string());
  return res;
}

namespace {

/// Residualizes y and s against FE (+ rel_p_lag) and returns the fitted
/// slope of y on s, plus the residual points.
struct ResidualizedPeriod {
  std::vector<int> units, qpos;
  Eigen::VectorXd s_resid, y_resid;
  double slope = 0.0;
};

ResidualizedPeriod residualize_period(const PanelDataset& data, Window w, bool time_fe) {
  const Column& pi = data.column(colname::pi_core_4q);
  const Column& slack = data.column(colname::slack);
  const Column& rel = data.column(colname::rel_p_lag);
  std::vector<double> ys, ss, rs;
  ResidualizedPeriod out;
  for (int u = 0; u < data.n_units(); ++u) {
    for (int t = 0; t < data.n_quarters(); ++t) {
      if (!w.contains(data.quarter_at(t))) continue;
      std::size_t idx = data.cell_index(u, t);
      if (!pi[idx] || !slack[idx] || !rel[idx]) continue;
      ys.push_back(*pi[idx]);
      ss.push_back(*slack[idx]);
      rs.push_back(*rel[idx]);
      out.units.push_back(u);
      out.qpos.push_back(t);
    }
  }
  const long n = static_cast<long>(ys.size());
  if (n < 3) {
    throw EstimationError("figure 4: fewer than 3 observations in period " + w.first.str() +
                          ":" + w.last.str());
  }
  Eigen::MatrixXd m(n, 3);
  std::vector<int> times(n);
  for (long i = 0; i < n; ++i) {
    m(i, 0) = ys[i];
    m(i, 1) = ss[i];
    m(i, 2) = rs[i];
    times[i] = data.quarter_at(out.qpos[i]).index();
  }
  within_transform(m, out.units, times, FeSet{true, time_fe});
  OlsFit ry = ols_fit(m.col(0), m.col(2), {colname::rel_p_lag});
  OlsFit rsl = ols_fit(m.col(1), m.col(2), {colname::rel_p_lag});
  out.y_resid = ry.residuals;
  out.s_resid = rsl.residuals;
  OlsFit slope = ols_fit(out.y_resid, out.s_resid, {"slack_resid"});
  out.slope = slope.coef(0);
  return out;
}

}  // namespace

FiguresResult cmd_figures(const CommonOptions& opt, int which,
                          const std::vector<std::string>& msa_ids) {
  std::string digest;
  PanelDataset data = load_forged(opt, &digest);
  Window win{data.first_quarter(), data.last_quarter()};
  if (opt.window) win = *opt.window;

  FiguresResult res;
  res.which = which;
  std::vector<std::pair<std::string, std::string>> extra_opts;

  if (which == 2) {
    const Column& pi = data.column(colname::pi_core_4q);
    const Column& theta = data.column(colname::theta);
    std::ostringstream csv;
    csv << "quarter,mean_pi,mean_theta\n";
    for (int t = 0; t < data.n_quarters(); ++t) {
      if (!win.contains(data.quarter_at(t))) continue;
      double sum_pi = 0, sum_th = 0;
      long n_pi = 0, n_th = 0;
      for (int u = 0; u < data.n_units(); ++u) {
        std::size_t idx = data.cell_index(u, t);
        if (pi[idx]) { sum_pi += *pi[idx]; ++n_pi; }
        if (theta[idx]) { sum_th += *theta[idx]; ++n_th; }
      }
      csv << data.quarter_at(t).str() << ",";
      if (n_pi) csv << g10(sum_pi / n_pi);
      csv << ",";
      if (n_th) csv << g10(sum_th / n_th);
      csv << "\n";
    }
    res.files.push_back(write_text(opt.out_dir, "fig2_series.csv", csv.str()));
  } else if (which == 3) {
    if (msa_ids.empty()) throw UsageError("figure 3 requires at least one --msa id");
    std::vector<int> upos;
    for (const auto& id : msa_ids) {
      int p = data.unit_pos(id);
      if (p < 0) {
        std::string avail;
        for (const auto& u : data.units()) avail += (avail.empty() ? "" : ", ") + u;
        throw DataError("unknown MSA id '" + id + "'; available: " + avail);
      }
      upos.push_back(p);
    }
    const Column& slack = data.column(colname::slack);
    std::ostringstream csv;
    csv << "quarter";
    for (const auto& id : msa_ids) csv << "," << id;
    csv << "\n";
    for (int t = 0; t < data.n_quarters(); ++t) {
      if (!win.contains(data.quarter_at(t))) continue;
      csv << data.quarter_at(t).str();
      for (int p : upos) {
        csv << ",";
        const Cell& c = slack[data.cell_index(p, t)];
        if (c) csv << g10(*c);
      }
      csv << "\n";
    }
    std::string joined;
    for (const auto& id : msa_ids) joined += (joined.empty() ? "" : ",") + id;
    extra_opts.emplace_back("msa", joined);
    res.files.push_back(write_text(opt.out_dir, "fig3_slack.csv", csv.str()));
  } else if (which == 4) {
    struct PeriodSpec {
      std::string name;
      Window w;
    };
    std::vector<PeriodSpec> periods;
    if (opt.pandemic_onset - 1 >= win.first) {
      periods.push_back({"pre", Window{win.first, std::min(opt.pandemic_onset - 1, win.last)}});
    }
    if (opt.pandemic_onset <= win.last) {
      periods.push_back({"post", Window{std::max(opt.pandemic_onset, win.first), win.last}});
    }
    std::ostringstream points, slopes, binned;
    points << "period,treatment,msa_id,quarter,slack_resid,pi_resid\n";
    slopes << "period,treatment,slope,n_obs\n";
    binned << "period,treatment,bin,slack_mean,pi_mean,n_points\n";
    for (const auto& per : periods) {
      for (bool time_fe : {false, true}) {
        std::string treatment = time_fe ? "time_fe" : "no_time_fe";
        ResidualizedPeriod r = residualize_period(data, per.w, time_fe);
        const long n = r.s_resid.size();
        for (long i = 0; i < n; ++i) {
          points << per.name << "," << treatment << "," << data.units()[r.units[i]] << ","
                 << data.quarter_at(r.qpos[i]).str() << "," << g10(r.s_resid(i)) << ","
                 << g10(r.y_resid(i)) << "\n";
        }
        slopes << per.name << "," << treatment << "," << g10(r.slope) << "," << n << "\n";
        res.slopes.push_back({per.name, treatment, r.slope, n});

        std::vector<long> order(n);
        std::iota(order.begin(), order.end(), 0L);
        std::sort(order.begin(), order.end(),
                  [&](long a, long b) { return r.s_resid(a) < r.s_resid(b); });
        const int n_bins = 20;
        for (int b = 0; b < n_bins; ++b) {
          long lo = n * b / n_bins, hi = n * (b + 1) / n_bins;
          if (hi <= lo) continue;
          double sm = 0, ym = 0;
          for (long i = lo; i < hi; ++i) {
            sm += r.s_resid(order[i]);
            ym += r.y_resid(order[i]);
          }
          binned << per.name << "," << treatment << "," << b << "," << g10(sm / (hi - lo)) << ","
                 << g10(ym / (hi - lo)) << "," << (hi - lo) << "\n";
        }
      }
    }
    res.files.push_back(write_text(opt.out_dir, "fig4_points.csv", points.str()));
    res.files.push_back(write_text(opt.out_dir, "fig4_slopes.csv", slopes.str()));
    res.files.push_back(write_text(opt.out_dir, "fig4_binned.csv", binned.str()));
  } else {
    throw UsageError("--which must be 2, 3, or 4 (figure 1 needs an aggregate expectations "
                     "series outside the ingest schema and is not emitted)");
  }

  RunManifest man;
  man.command = "figures";
  man.input_path = opt.input;
  man.input_digest = digest;
  man.options = common_manifest_options(opt);
  man.options.emplace_back("which", std::to_string(which));
  for (auto& kv : extra_opts) man.options.push_back(std::move(kv));
  attach_outputs(man, res.files);
  fs::path mp = fs::path(opt.out_dir) / ("fig" + std::to_string(which) + ".manifest.json");
  man.write(mp.string());
  res.files.push_back(mp.string());
  return res;
}

SimulateResult cmd_simulate(const DgpConfig& config, const std::string& out_csv) {
  SyntheticPanel sp = gen_panel(config);
  fs::path out(out_csv);
  if (out.has_parent_path()) fs::create_directories(out.parent_path());
  write_csv(sp.panel, out_csv);

  SimulateResult res;
  res.csv_path = out_csv;
  res.files.push_back(out_csv);
  RunManifest man;
  man.command = "simulate";
  man.options.emplace_back("config", config.to_json().dump());
  man.options.emplace_back("out", out_csv);
  attach_outputs(man, res.files);
  man.write(out_csv + ".manifest.json");
  res.files.push_back(out_csv + ".manifest.json");
  return res;
}

McRunResult cmd_mc(const DgpConfig& config, int n_reps, Model model, int n_threads,
                   const std::string& out_dir) {
  McRunResult res;
  res.mc = mc_study(config, n_reps, model, n_threads);

  std::ostringstream text, csv;
  text << "Monte Carlo study - " << (model == Model::model_i ? "Model I" : "Model II") << ", "
       << res.mc.n_reps << " replications";
  if (res.mc.n_failed > 0) text << " (" << res.mc.n_failed << " failed)";
  text << "\n";
  char line[256];
  std::snprintf(line, sizeof(line), "%-5s %-36s %10s %10s %10s %10s %10s %10s\n", "est",
                "param", "truth", "mean", "sd", "bias", "rmse", "coverage");
  text << line;
  csv << "estimator,param,truth,mean,sd,bias,rmse,coverage\n";
  auto block = [&](const char* est, const std::vector<McParamStat>& stats) {
    for (const auto& st : stats) {
      std::snprintf(line, sizeof(line), "%-5s %-36s %10s %10s %10s %10s %10s %10s\n", est,
                    st.param.c_str(), f4(st.truth).c_str(), f4(st.mean).c_str(),
                    f4(st.sd).c_str(), f4(st.bias).c_str(), f4(st.rmse).c_str(),
                    f4(st.coverage).c_str());
      text << line;
      csv << est << "," << st.param << "," << g10(st.truth) << "," << g10(st.mean) << ","
          << g10(st.sd) << "," << g10(st.bias) << "," << g10(st.rmse) << ","
          << g10(st.coverage) << "\n";
    }
  };
  block("2sls", res.mc.tsls);
  block("ols", res.mc.ols);
  for (const auto& f : res.mc.failures) text << "FAILED " << f << "\n";
  res.text = text.str();

  res.files.push_back(write_text(out_dir, "mc_results.txt", res.text));
  res.files.push_back(write_text(out_dir, "mc_results.csv", csv.str()));
  RunManifest man;
  man.command = "mc";
  man.options.emplace_back("config", config.to_json().dump());
  man.options.emplace_back("reps", std::to_string(n_reps));
  man.options.emplace_back("model", model == Model::model_i ? "1" : "2");
  attach_outputs(man, res.files);
  fs::path mp = fs::path(out_dir) / "mc_results.manifest.json";
  man.write(mp.string());
  res.files.push_back(mp.string());
  return res;
}

}  // namespace pcanatomy
