#pragma once

#include <cstdint>
#include <optional>

#include "shapedist/estimators.hpp"
#include "shapedist/moments.hpp"
#include "shapedist/response.hpp"

namespace shapedist {

// Full data-path configuration for the moment estimator. The bias cap is an
// absolute cap on the similarity score; it is converted to the scaled-units
// program cap c = cap * denom / sqrt(kappa) internally.
struct MomentPipelineConfig {
  int order = 5;
  std::optional<double> bias_cap;
  int grid_size = 1000;
  std::size_t n_boot = 500;
  std::int64_t tuple_budget = 10000;
  double alpha = 0.05;
  double margin = 1.5;
  std::uint64_t seed = 0;
  int threads = 0;
};

struct MomentPipelineResult {
  EstimateReport nuclear;  // moment_nuclear_norm kind
  EstimateReport cosine;   // moment_cos_similarity kind
  CoefficientSolution coeffs;
  double kappa = 0.0;
  double denom = 0.0;
  bool split_trial = false;
};

// Covariances (split-trial diagonals when replicates are given), rescaling,
// Monte-Carlo moments, bootstrap covariance, coefficient selection, point
// estimates and confidence intervals.
MomentPipelineResult run_moment_pipeline(const ResponseMatrix& x, const ResponseMatrix& y,
                                         const std::optional<ResponseMatrix>& x_rep,
                                         const std::optional<ResponseMatrix>& y_rep,
                                         const MomentPipelineConfig& cfg);

// Plug-in reports for the same inputs (split-trial traces when replicates are
// given).
struct PluginResult {
  EstimateReport sq_procrustes;
  EstimateReport cosine;
  bool split_trial = false;
};

PluginResult run_plugin_estimators(const ResponseMatrix& x, const ResponseMatrix& y,
                                   const std::optional<ResponseMatrix>& x_rep,
                                   const std::optional<ResponseMatrix>& y_rep,
                                   int threads = 0);

}  // namespace shapedist
