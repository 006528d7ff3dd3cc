#pragma once

#include <string>
#include <vector>

#include "pcanatomy/dgp.hpp"
#include "pcanatomy/regression.hpp"

namespace pcanatomy {

/// The two estimating equations: Model I interacts slack with the
/// post-onset dummy, Model II with the tight-market dummy.
enum class Model { model_i, model_ii };

/// Canonical 2SLS design for a model: two endogenous slack terms
/// instrumented by the shift-share and its matching interaction, lagged
/// relative prices exogenous, two-way FE.
DesignSpec model_spec(Model model, CovarianceRequest cov = {});

/// True coefficient for a canonical regressor name under a config.
double true_coef(const DgpConfig& cfg, Model model, const std::string& name);

struct McParamStat {
  std::string param;
  double truth = 0.0;
  double mean = 0.0;
  double sd = 0.0;
  double bias = 0.0;
  double rmse = 0.0;
  double coverage = 0.0;  // share of reps whose nominal 95% CI covers truth
};

struct McResult {
  Model model = Model::model_i;
  int n_reps = 0;
  int n_failed = 0;
  std::vector<std::string> failures;  // "rep <i>: <error>", never dropped silently
  std::vector<McParamStat> tsls;
  std::vector<McParamStat> ols;  // same data, endogenous columns treated as exogenous
};

/// Runs n_reps independent replications (seed + replication index), fitting
/// the model by 2SLS and by OLS on each generated panel. Replications run
/// concurrently when n_threads != 1 (0 = hardware concurrency); results are
/// reduced in replication order, so the table is thread-count invariant.
McResult mc_study(const DgpConfig& cfg, int n_reps, Model model, int n_threads = 0);

}  // namespace pcanatomy
