#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "shapedist/synthetic.hpp"

namespace shapedist::sweep {

struct SweepCondition {
  double target_cos = 0.0;
  std::size_t n = 30;
  std::size_t m = 200;
  std::optional<double> bias_cap;  // absolute, on the similarity score
  double noise_std = 0.0;
  int replicates = 1;
};

struct SweepSettings {
  int order = 5;
  int grid_size = 1000;
  std::int64_t tuple_budget = 10000;
  std::size_t trials = 500;
  std::size_t cov_datasets = 200;  // fresh datasets for the moment covariance
  double alpha = 0.05;
  double margin = 1.5;
  double trace_scale_per_unit = 1.0;  // Tr[S_ii] = n * this
  synth::SpectrumSpec spectrum = synth::SpectrumSpec::flat();
  std::uint64_t seed = 0;
  int threads = 0;
};

struct SweepRow {
  std::size_t condition = 0;
  SweepCondition params;
  std::string estimator;  // "plugin" or "moments"
  std::size_t trials = 0;
  double mean = 0.0;
  double sd = 0.0;
  std::optional<double> bias_bound;     // moments only
  std::optional<double> variance_term;  // gamma' A gamma, moments only
  std::optional<double> coverage;       // CI coverage, moments only
  std::optional<double> kappa;
  std::string error;  // non-empty when the condition could not run
};

// Simulation harness for the cosine similarity: per condition, builds a
// ground-truth model, estimates the moment covariance from fresh datasets
// (the simulation path uses the ground-truth denominator and rescaling), then
// aggregates plug-in and moment estimates over the trials. Conditions that
// differ only in the bias cap share the model, the covariance, and the
// per-trial moment draws, so a cap sweep isolates the coefficient choice.
// Per-trial seeds derive from (seed, condition group, trial); the result is
// identical for any thread count.
std::vector<SweepRow> run_similarity_sweep(const std::vector<SweepCondition>& conditions,
                                           const SweepSettings& settings);

struct Preset {
  std::string name;
  std::string description;
  std::vector<SweepCondition> conditions;
  std::size_t default_trials = 500;
};

const std::vector<Preset>& presets();
const Preset* find_preset(const std::string& name);

}  // namespace shapedist::sweep
