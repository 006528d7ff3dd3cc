#pragma once

#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "pcanatomy/mc.hpp"
#include "pcanatomy/panel.hpp"
#include "pcanatomy/quarter.hpp"
#include "pcanatomy/regression.hpp"
#include "pcanatomy/structural.hpp"

namespace pcanatomy {

inline constexpr const char* kToolName = "pc-anatomy";
inline constexpr const char* kToolVersion = "0.1.0";

/// FNV-1a 64-bit digest, hex-encoded; used to fingerprint input files.
std::string fnv1a_hex(const std::string& bytes);

/// Reproducibility sidecar written next to every output file.
struct RunManifest {
  std::string command;
  std::string tool_version = kToolVersion;
  std::string input_path;    // empty when the command reads no file
  std::string input_digest;  // fnv1a of the input bytes
  std::vector<std::pair<std::string, std::string>> options;  // ordered
  std::vector<std::pair<std::string, std::string>> outputs;  // filename, digest
  nlohmann::json to_json() const;
  void write(const std::string& path) const;
};

/// Flags shared by the analysis commands.
struct CommonOptions {
  std::string input;
  std::optional<Window> window;
  Quarter pandemic_onset{2020, 1};
  double tau = 1.0;
  CovarianceRequest cov;
  double beta = kDefaultBeta;
  std::string out_dir = ".";
};

struct DescribeResult {
  SummaryStats stats;
  std::string text;
  std::vector<std::string> files;
};

/// Ingests, forges the model variables, and tabulates count/mean/sd/min/max
/// for the core columns over the full, pre-split and post-split samples.
DescribeResult cmd_describe(const CommonOptions& opt,
                            std::optional<Quarter> split = std::nullopt);

struct EstimateResult {
  int model = 1;  // 1, 2, or 0 for a custom spec file
  DesignSpec spec;
  FitResult fit;
  std::string base_name, shift_name;       // slack term and its interaction
  double implied_post = 0.0;               // base + shift
  double beta = kDefaultBeta;
  std::optional<double> rho_pre, rho_post;  // AR(1) of slack per sub-period
  std::optional<double> kappa_pre, kappa_post;
  std::string text;
  nlohmann::json machine() const;  // same numbers, full precision
  std::vector<std::string> files;
};

/// Full pipeline: forge -> 2SLS -> inference -> structural mapping. model 1
/// interacts slack with the post-onset dummy, model 2 with the tight dummy;
/// a custom parsed DesignSpec may replace both.
EstimateResult cmd_estimate(const CommonOptions& opt, int model,
                            std::optional<DesignSpec> custom = std::nullopt);

struct FigureSlope {
  std::string period;     // "pre" | "post"
  std::string treatment;  // "no_time_fe" | "time_fe"
  double slope = 0.0;
  long n_obs = 0;
};

struct FiguresResult {
  int which = 0;
  std::vector<FigureSlope> slopes;  // figure 4 only
  std::vector<std::string> files;
};

/// Emits plot-ready CSV data. Figure 2: cross-MSA mean inflation and
/// tightness per quarter. Figure 3: slack paths for the requested MSAs.
/// Figure 4: inflation and slack residualized against MSA FE and rel_p_lag
/// (with and without time FE), split at the onset quarter, plus fitted
/// slopes and a 20-quantile binned version.
FiguresResult cmd_figures(const CommonOptions& opt, int which,
                          const std::vector<std::string>& msa_ids = {});

struct SimulateResult {
  std::string csv_path;
  std::vector<std::string> files;
};

/// Generates a synthetic panel from a config and writes it in the ingest
/// CSV schema. Byte-identical for identical configs.
SimulateResult cmd_simulate(const DgpConfig& config, const std::string& out_csv);

struct McRunResult {
  McResult mc;
  std::string text;
  std::vector<std::string> files;
};

/// Monte Carlo validation: bias/RMSE/coverage for 2SLS and OLS.
McRunResult cmd_mc(const DgpConfig& config, int n_reps, Model model, int n_threads,
                   const std::string& out_dir);

}  // namespace pcanatomy
