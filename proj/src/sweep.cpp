#include "shapedist/sweep.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <tuple>

#include "shapedist/error.hpp"
#include "shapedist/kernels.hpp"
#include "shapedist/moments.hpp"
#include "shapedist/pipeline.hpp"
#include "shapedist/qp.hpp"

namespace shapedist::sweep {

namespace {

struct Stats {
  double mean = 0.0;
  double sd = 0.0;
};

Stats mean_sd(const std::vector<double>& v) {
  Stats s;
  if (v.empty()) return s;
  for (double x : v) s.mean += x;
  s.mean /= static_cast<double>(v.size());
  if (v.size() > 1) {
    double acc = 0.0;
    for (double x : v) acc += (x - s.mean) * (x - s.mean);
    s.sd = std::sqrt(acc / static_cast<double>(v.size() - 1));
  }
  return s;
}

using GroupKey = std::tuple<double, std::size_t, std::size_t, double, int>;

GroupKey key_of(const SweepCondition& c) {
  return {c.target_cos, c.n, c.m, c.noise_std, c.replicates};
}

}  // namespace

std::vector<SweepRow> run_similarity_sweep(const std::vector<SweepCondition>& conditions,
                                           const SweepSettings& settings) {
  std::vector<SweepRow> rows(conditions.size() * 2);
  for (std::size_t i = 0; i < conditions.size(); ++i) {
    rows[2 * i].condition = i;
    rows[2 * i].params = conditions[i];
    rows[2 * i].estimator = "plugin";
    rows[2 * i].trials = settings.trials;
    rows[2 * i + 1].condition = i;
    rows[2 * i + 1].params = conditions[i];
    rows[2 * i + 1].estimator = "moments";
    rows[2 * i + 1].trials = settings.trials;
  }

  // Conditions that differ only in the bias cap share one group: the model,
  // moment covariance, and per-trial moment draws are computed once.
  std::map<GroupKey, std::size_t> group_of;
  std::vector<std::vector<std::size_t>> groups;
  for (std::size_t i = 0; i < conditions.size(); ++i) {
    const GroupKey k = key_of(conditions[i]);
    auto it = group_of.find(k);
    if (it == group_of.end()) {
      group_of.emplace(k, groups.size());
      groups.push_back({i});
    } else {
      groups[it->second].push_back(i);
    }
  }

  for (std::size_t gi = 0; gi < groups.size(); ++gi) {
    const std::vector<std::size_t>& members = groups[gi];
    const SweepCondition& base = conditions[members.front()];
    const std::uint64_t group_seed = mix_seed(settings.seed, gi);

    auto fail_group = [&](const std::string& message) {
      for (std::size_t ci : members) {
        rows[2 * ci].error = message;
        rows[2 * ci + 1].error = message;
      }
    };

    synth::GroundTruthModel model;
    double kappa = 0.0, denom = 0.0;
    try {
      Rng model_rng(mix_seed(group_seed, 0));
      model = synth::make_ground_truth(
          base.n, base.target_cos,
          settings.trace_scale_per_unit * static_cast<double>(base.n),
          settings.spectrum, model_rng);
      kappa = rescale_factor(model.covariances(), settings.margin);
      denom = std::sqrt(model.sigma_ii.trace() * model.sigma_jj.trace());
    } catch (const std::exception& e) {
      fail_group(e.what());
      continue;
    }
    const synth::NoiseConfig noise{base.noise_std, base.replicates};

    // Ground-truth moment covariance from fresh datasets (simulation path).
    std::vector<std::vector<double>> cov_draws(settings.cov_datasets);
    MomentCovariance a;
    try {
      kernels::parallel_for(
          static_cast<std::int64_t>(settings.cov_datasets), settings.threads,
          [&](std::int64_t t) {
            Rng rng(mix_seed(group_seed, 1000000 + static_cast<std::uint64_t>(t)));
            const synth::SampledResponses s =
                synth::sample_responses(model, base.m, noise, rng);
            const GramPair g = gram_pair(s.x, s.y, 1);
            cov_draws[static_cast<std::size_t>(t)] =
                estimate_eigenmoments(g, settings.order, kappa, settings.tuple_budget,
                                      mix_seed(group_seed, 2000000 + static_cast<std::uint64_t>(t)),
                                      1)
                    .values;
          });
      a = moment_covariance_of(cov_draws);
    } catch (const std::exception& e) {
      fail_group(e.what());
      continue;
    }

    // Shared per-trial draws: plug-in estimate and scaled moment vector.
    std::vector<double> plugin_vals(settings.trials);
    std::vector<EigenmomentVector> trial_moments(settings.trials);
    try {
      kernels::parallel_for(
          static_cast<std::int64_t>(settings.trials), settings.threads,
          [&](std::int64_t t) {
            Rng rng(mix_seed(group_seed, 3000000 + static_cast<std::uint64_t>(t)));
            const synth::SampledResponses s =
                synth::sample_responses(model, base.m, noise, rng);
            plugin_vals[static_cast<std::size_t>(t)] =
                plugin_cosine_similarity(covariances_from_responses(s.x, s.y, 1)).value;
            const GramPair g = gram_pair(s.x, s.y, 1);
            trial_moments[static_cast<std::size_t>(t)] =
                estimate_eigenmoments(g, settings.order, kappa, settings.tuple_budget,
                                      mix_seed(group_seed, 4000000 + static_cast<std::uint64_t>(t)),
                                      1);
          });
    } catch (const std::exception& e) {
      fail_group(e.what());
      continue;
    }
    const Stats plugin_stats = mean_sd(plugin_vals);

    for (std::size_t ci : members) {
      SweepRow& prow = rows[2 * ci];
      prow.mean = plugin_stats.mean;
      prow.sd = plugin_stats.sd;
      prow.kappa = kappa;

      SweepRow& mrow = rows[2 * ci + 1];
      mrow.kappa = kappa;
      try {
        std::optional<double> cap_scaled;
        if (conditions[ci].bias_cap)
          cap_scaled = *conditions[ci].bias_cap * denom / std::sqrt(kappa);
        const CoefficientSolution coeffs = qp::select_coefficients(
            a, base.n, settings.order, settings.grid_size, cap_scaled);
        std::vector<double> est(settings.trials);
        std::size_t covered = 0;
        for (std::size_t t = 0; t < settings.trials; ++t) {
          const double nuc = moment_nuclear_norm(trial_moments[t], coeffs);
          est[t] = nuc / denom;
          const auto [lo, hi] =
              confidence_interval(nuc, coeffs, base.n, kappa, settings.alpha, denom);
          if (lo <= model.true_cos && model.true_cos <= hi) ++covered;
        }
        const Stats ms = mean_sd(est);
        mrow.mean = ms.mean;
        mrow.sd = ms.sd;
        mrow.bias_bound =
            std::sqrt(kappa) * static_cast<double>(base.n) * coeffs.u / denom;
        mrow.variance_term = coeffs.variance;
        mrow.coverage = static_cast<double>(covered) / static_cast<double>(settings.trials);
      } catch (const std::exception& e) {
        mrow.error = e.what();
      }
    }
  }
  return rows;
}

const std::vector<Preset>& presets() {
  static const std::vector<Preset> table = [] {
    std::vector<Preset> p;
    {
      Preset f;
      f.name = "fig2a";
      f.description = "20 ground-truth similarities in [0,1], N=30, M=200";
      for (int i = 0; i < 20; ++i) {
        SweepCondition c;
        c.target_cos = static_cast<double>(i) / 19.0;
        c.n = 30;
        c.m = 200;
        f.conditions.push_back(c);
      }
      p.push_back(std::move(f));
    }
    {
      Preset f;
      f.name = "fig2b";
      f.description = "sample-size sweep at similarity 0.2, 5% bias cap";
      for (std::size_t m : {25, 50, 100, 200, 400, 800}) {
        SweepCondition c;
        c.target_cos = 0.2;
        c.n = 30;
        c.m = m;
        c.bias_cap = 0.05;
        f.conditions.push_back(c);
      }
      p.push_back(std::move(f));
    }
    {
      Preset f;
      f.name = "fig2c";
      f.description = "dimensionality sweep at similarity 0.2, 10% bias cap";
      for (std::size_t n : {10, 20, 40, 80}) {
        SweepCondition c;
        c.target_cos = 0.2;
        c.n = n;
        c.m = 200;
        c.bias_cap = 0.10;
        f.conditions.push_back(c);
      }
      p.push_back(std::move(f));
    }
    {
      Preset f;
      f.name = "fig2d";
      f.description = "CI coverage at the fig2b setting (similarity 0.2)";
      SweepCondition c;
      c.target_cos = 0.2;
      c.n = 30;
      c.m = 200;
      c.bias_cap = 0.05;
      f.conditions.push_back(c);
      f.default_trials = 1000;
      p.push_back(std::move(f));
    }
    {
      Preset f;
      f.name = "fig3a";
      f.description = "bias-cap sweep at similarity 0.5, N=30, M=50";
      for (double cap : {0.20, 0.10, 0.05, 0.03}) {
        SweepCondition c;
        c.target_cos = 0.5;
        c.n = 30;
        c.m = 50;
        c.bias_cap = cap;
        f.conditions.push_back(c);
      }
      p.push_back(std::move(f));
    }
    return p;
  }();
  return table;
}

const Preset* find_preset(const std::string& name) {
  for (const Preset& p : presets())
    if (p.name == name) return &p;
  return nullptr;
}

}  // namespace shapedist::sweep
