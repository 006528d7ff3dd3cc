// pc-anatomy: regional Phillips-curve estimation pipeline.
// Exit codes: 0 success, 1 usage error, 2 data error, 3 estimation error.
#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "pcanatomy/dgp.hpp"
#include "pcanatomy/errors.hpp"
#include "pcanatomy/report.hpp"

namespace {

using namespace pcanatomy;

Quarter parse_quarter_flag(const std::string& text, const std::string& flag) {
  try {
    return Quarter::parse(text);
  } catch (const DataError& e) {
    throw UsageError(flag + ": " + e.what());
  }
}

std::optional<Window> parse_window_flag(const std::string& text) {
  if (text.empty()) return std::nullopt;
  auto colon = text.find(':');
  if (colon == std::string::npos) {
    throw UsageError("--window must be YYYYqQ:YYYYqQ, got '" + text + "'");
  }
  Window w{parse_quarter_flag(text.substr(0, colon), "--window"),
           parse_quarter_flag(text.substr(colon + 1), "--window")};
  if (w.last < w.first) throw UsageError("--window: last quarter precedes first");
  return w;
}

struct CommonState {
  std::string input;
  std::string window;
  std::string cov = "cluster";
  int dk_lags = -1;
  bool no_small_sample = false;
  double tau = 1.0;
  std::string onset = "2020q1";
  double beta = kDefaultBeta;
  std::string out_dir = ".";
};

void add_common(CLI::App* cmd, CommonState& st, bool needs_input) {
  auto* in = cmd->add_option("--input", st.input, "panel CSV (msa_id, quarter, CPI_core, CPI, "
                                                  "vu, shift_share)");
  if (needs_input) in->required();
  cmd->add_option("--window", st.window, "estimation window YYYYqQ:YYYYqQ (default: full)");
  cmd->add_option("--cov", st.cov, "covariance estimator")
      ->check(CLI::IsMember({"cluster", "dk"}));
  cmd->add_option("--dk-lags", st.dk_lags, "Driscoll-Kraay lags (-1 = Newey-West default)");
  cmd->add_flag("--no-small-sample", st.no_small_sample, "drop small-sample covariance factors");
  cmd->add_option("--tau", st.tau, "tightness threshold for the tight-market dummy")
      ->capture_default_str();
  cmd->add_option("--pandemic-onset", st.onset, "first post-onset quarter")
      ->capture_default_str();
  cmd->add_option("--beta", st.beta, "quarterly discount factor for the structural mapping")
      ->capture_default_str();
  cmd->add_option("--out-dir", st.out_dir, "output directory")->capture_default_str();
}

CommonOptions make_options(const CommonState& st) {
  CommonOptions opt;
  opt.input = st.input;
  opt.window = parse_window_flag(st.window);
  opt.pandemic_onset = parse_quarter_flag(st.onset, "--pandemic-onset");
  opt.tau = st.tau;
  opt.cov.kind = st.cov == "dk" ? CovKind::driscoll_kraay : CovKind::cluster_unit;
  opt.cov.dk_lags = st.dk_lags;
  opt.cov.small_sample = !st.no_small_sample;
  opt.beta = st.beta;
  opt.out_dir = st.out_dir;
  return opt;
}

void print_files(const std::vector<std::string>& files) {
  for (const auto& f : files) std::cout << "wrote: " << f << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"pc-anatomy: regional Phillips-curve panel estimation"};
  app.set_version_flag("--version", std::string(kToolName) + " " + kToolVersion);
  app.require_subcommand(1);

  CommonState describe_st;
  std::string describe_split;
  auto* describe = app.add_subcommand("describe", "summary statistics with a pre/post split");
  add_common(describe, describe_st, true);
  describe->add_option("--split", describe_split, "split quarter (default: --pandemic-onset)");

  CommonState estimate_st;
  int estimate_model = 1;
  std::string estimate_spec_path;
  auto* estimate = app.add_subcommand("estimate", "two-way FE 2SLS Phillips-curve estimates");
  add_common(estimate, estimate_st, true);
  estimate->add_option("--model", estimate_model, "1 = post-onset shift, 2 = tight-market shift")
      ->capture_default_str()
      ->check(CLI::IsMember({1, 2}));
  estimate->add_option("--spec", estimate_spec_path,
                       "custom design file (key = value lines: depvar/exog/endog/instruments/"
                       "fe/window/cov)");

  CommonState figures_st;
  int figures_which = 0;
  std::vector<std::string> figures_msa;
  auto* figures = app.add_subcommand("figures", "plot-ready CSV data files");
  add_common(figures, figures_st, true);
  figures->add_option("--which", figures_which, "2 = mean series, 3 = slack paths, 4 = "
                                                "residualized scatter")->required();
  figures->add_option("--msa", figures_msa, "MSA ids for figure 3")->delimiter(',');

  std::string sim_config_path, sim_preset = "default", sim_out = "synthetic_panel.csv";
  std::optional<std::uint64_t> sim_seed;
  bool sim_print_config = false;
  auto* simulate = app.add_subcommand("simulate", "generate a synthetic panel CSV");
  simulate->add_option("--config", sim_config_path, "DGP config JSON (default: built-in)");
  simulate->add_option("--preset", sim_preset, "base config preset: default | figure4")
      ->capture_default_str()
      ->check(CLI::IsMember({"default", "figure4"}));
  simulate->add_option("--out", sim_out, "output CSV path")->capture_default_str();
  simulate->add_option("--seed", sim_seed, "override the config seed");
  simulate->add_flag("--print-config", sim_print_config,
                     "print the effective config JSON and exit");

  std::string mc_config_path, mc_out_dir = ".";
  int mc_reps = 200, mc_model = 1, mc_threads = 0;
  std::optional<std::uint64_t> mc_seed;
  auto* mc = app.add_subcommand("mc", "Monte Carlo bias/coverage study of the estimators");
  mc->add_option("--config", mc_config_path, "DGP config JSON (default: built-in)");
  mc->add_option("--reps", mc_reps, "replications")->capture_default_str()->check(CLI::PositiveNumber);
  mc->add_option("--model", mc_model, "1 or 2")->capture_default_str()->check(CLI::IsMember({1, 2}));
  mc->add_option("--threads", mc_threads, "worker threads (0 = hardware)")->capture_default_str();
  mc->add_option("--seed", mc_seed, "override the config seed");
  mc->add_option("--out-dir", mc_out_dir, "output directory")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (app.got_subcommand(describe)) {
      CommonOptions opt = make_options(describe_st);
      std::optional<Quarter> split;
      if (!describe_split.empty()) split = parse_quarter_flag(describe_split, "--split");
      DescribeResult res = cmd_describe(opt, split);
      std::cout << res.text;
      print_files(res.files);
    } else if (app.got_subcommand(estimate)) {
      CommonOptions opt = make_options(estimate_st);
      std::optional<DesignSpec> custom;
      if (!estimate_spec_path.empty()) {
        std::ifstream in(estimate_spec_path);
        if (!in) throw UsageError("cannot open spec file '" + estimate_spec_path + "'");
        std::ostringstream ss;
        ss << in.rdbuf();
        custom = DesignSpec::parse(ss.str());
      }
      EstimateResult res = cmd_estimate(opt, estimate_model, custom);
      std::cout << res.text;
      print_files(res.files);
    } else if (app.got_subcommand(figures)) {
      CommonOptions opt = make_options(figures_st);
      FiguresResult res = cmd_figures(opt, figures_which, figures_msa);
      for (const auto& s : res.slopes) {
        std::cout << "figure 4 slope [" << s.period << ", " << s.treatment
                  << "]: " << s.slope << " (n=" << s.n_obs << ")\n";
      }
      print_files(res.files);
    } else if (app.got_subcommand(simulate)) {
      if (!sim_config_path.empty() && sim_preset != "default")
        throw UsageError("--config and --preset are mutually exclusive");
      DgpConfig cfg = sim_preset == "figure4" ? figure_demo_config() : DgpConfig{};
      if (!sim_config_path.empty()) cfg = DgpConfig::load_file(sim_config_path);
      if (sim_seed) cfg.seed = *sim_seed;
      cfg.validate();
      if (sim_print_config) {
        std::cout << cfg.to_json().dump(2) << "\n";
        return 0;
      }
      SimulateResult res = cmd_simulate(cfg, sim_out);
      print_files(res.files);
    } else if (app.got_subcommand(mc)) {
      DgpConfig cfg = mc_config_path.empty() ? DgpConfig{} : DgpConfig::load_file(mc_config_path);
      if (mc_seed) cfg.seed = *mc_seed;
      McRunResult res = cmd_mc(cfg, mc_reps, mc_model == 1 ? Model::model_i : Model::model_ii,
                               mc_threads, mc_out_dir);
      std::cout << res.text;
      print_files(res.files);
    }
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return 1;
  } catch (const DataError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return 2;
  } catch (const EstimationError& e) {
    std::cerr << "estimation error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
  return 0;
}
