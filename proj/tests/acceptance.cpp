// Acceptance suite: each criterion prints one PASS/FAIL line. The CLI binary
// path must be passed as argv[1] for the determinism criterion.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "shapedist/bounds.hpp"
#include "shapedist/csv.hpp"
#include "shapedist/estimators.hpp"
#include "shapedist/kernels.hpp"
#include "shapedist/linalg.hpp"
#include "shapedist/moments.hpp"
#include "shapedist/qp.hpp"
#include "shapedist/response.hpp"
#include "shapedist/rng.hpp"
#include "shapedist/sweep.hpp"
#include "shapedist/synthetic.hpp"

using namespace shapedist;

namespace {

int g_failures = 0;

double now_seconds() {
  using clock = std::chrono::steady_clock;
  static const clock::time_point start = clock::now();
  return std::chrono::duration<double>(clock::now() - start).count();
}

void report(int index, const std::string& name, bool pass, const std::string& detail) {
  std::printf("[%s] criterion %d: %s — %s\n", pass ? "PASS" : "FAIL", index,
              name.c_str(), detail.c_str());
  std::fflush(stdout);
  if (!pass) ++g_failures;
}

struct MeanSd {
  double mean = 0.0;
  double sd = 0.0;
};

MeanSd mean_sd(const std::vector<double>& v) {
  MeanSd r;
  for (double x : v) r.mean += x;
  r.mean /= double(v.size());
  if (v.size() > 1) {
    double acc = 0.0;
    for (double x : v) acc += (x - r.mean) * (x - r.mean);
    r.sd = std::sqrt(acc / double(v.size() - 1));
  }
  return r;
}

std::string fmt(const char* pattern, double a, double b = 0.0, double c = 0.0) {
  char buf[256];
  std::snprintf(buf, sizeof(buf), pattern, a, b, c);
  return buf;
}

// 1. Ginibre asymptote at N=50, M=2000, 20 trials, within 5%, under 30 s.
void criterion1() {
  const double t0 = now_seconds();
  const std::vector<std::size_t> grid{2000};
  const auto rows = bounds::verify_lower_bound_experiment(50, grid, 20, 1001);
  const double rel = std::fabs(rows[0].mean_nuclear - rows[0].asymptote) / rows[0].asymptote;
  const double elapsed = now_seconds() - t0;
  report(1, "Ginibre asymptote", rel <= 0.05 && elapsed < 30.0,
         fmt("relative error %.4f (limit 0.05), %.1f s", rel, elapsed));
}

// 2. Theorem 2 constant on Rademacher pairs, N=64, M=65536, within 10%.
void criterion2() {
  const double t0 = now_seconds();
  const std::size_t n = 64, m = 65536;
  const double b = 1.0;
  const double truth_rho2 = 2.0 * b * b * double(n);
  std::vector<double> errs(20);
  kernels::parallel_for(20, 0, [&](std::int64_t t) {
    Rng rng(mix_seed(2002, std::uint64_t(t)));
    auto [x, y] = synth::rademacher_pair(m, n, b, rng);
    const double rho2 =
        plugin_squared_procrustes(covariances_from_responses(x, y, 1)).value;
    errs[std::size_t(t)] = std::fabs(rho2 - truth_rho2) / double(n);
  });
  const double mean = mean_sd(errs).mean;
  const double target = bounds::plugin_error_lower_bound({b, n, m, 0.05});
  const double rel = std::fabs(mean - target) / target;
  const double elapsed = now_seconds() - t0;
  report(2, "Theorem 2 lower-bound constant", rel <= 0.10 && elapsed < 120.0,
         fmt("relative gap %.4f (limit 0.10), %.1f s", rel, elapsed));
}

// 3. Eigenmoment exactness (vs nested-loop brute force) and unbiasedness.
void criterion3() {
  // Brute-force comparison with zero tolerance, same factor order.
  bool exact_ok = true;
  Rng rng(3003);
  for (std::size_t m : {6, 8}) {
    Matrix x(m, 3), y(m, 3);
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t j = 0; j < 3; ++j) {
        x(i, j) = rng.normal();
        y(i, j) = rng.normal();
      }
    const GramPair g = gram_pair(make_response(x), make_response(y), 1);
    {
      double sum = 0.0;
      std::size_t count = 0;
      for (std::size_t a = 0; a < m; ++a)
        for (std::size_t bb = 0; bb < m; ++bb) {
          if (bb == a) continue;
          sum += 1.0 * g.gy(a, bb) * g.gx(bb, a);
          ++count;
        }
      if (eigenmoment(1, g, MomentStrategy::exact()) != sum / double(count))
        exact_ok = false;
    }
    {
      double sum = 0.0;
      std::size_t count = 0;
      for (std::size_t a1 = 0; a1 < m; ++a1)
        for (std::size_t b1 = 0; b1 < m; ++b1) {
          if (b1 == a1) continue;
          for (std::size_t a2 = 0; a2 < m; ++a2) {
            if (a2 == a1 || a2 == b1) continue;
            for (std::size_t b2 = 0; b2 < m; ++b2) {
              if (b2 == a1 || b2 == b1 || b2 == a2) continue;
              sum += 1.0 * g.gy(a1, b1) * g.gx(b1, a2) * g.gy(a2, b2) * g.gx(b2, a1);
              ++count;
            }
          }
        }
      if (eigenmoment(2, g, MomentStrategy::exact()) != sum / double(count))
        exact_ok = false;
    }
  }

  // Unbiasedness across 2000 fresh datasets per (p, M).
  Rng model_rng(3033);
  const auto model =
      synth::make_ground_truth(4, 0.5, 4.0, synth::SpectrumSpec::flat(), model_rng);
  bool unbiased_ok = true;
  double worst_z = 0.0;
  for (std::size_t m : {6, 8}) {
    for (int p : {1, 2}) {
      const double truth = 4.0 * std::pow(0.25, p);  // each lambda = 0.25
      const int datasets = 2000;
      std::vector<double> vals(datasets);
      kernels::parallel_for(datasets, 0, [&](std::int64_t d) {
        Rng r(mix_seed(3300 + std::uint64_t(p) * 10 + m, std::uint64_t(d)));
        const auto s = synth::sample_responses(model, m, {}, r);
        vals[std::size_t(d)] =
            eigenmoment(p, gram_pair(s.x, s.y, 1), MomentStrategy::exact());
      });
      const MeanSd ms = mean_sd(vals);
      const double z = std::fabs(ms.mean - truth) / (ms.sd / std::sqrt(double(datasets)));
      worst_z = std::max(worst_z, z);
      if (z > 4.0) unbiased_ok = false;
    }
  }
  report(3, "eigenmoment brute-force equality and unbiasedness",
         exact_ok && unbiased_ok,
         fmt("exact match %s, worst |z| %.2f (limit 4)", exact_ok ? 1.0 : 0.0, worst_z));
}

// 4. Minimax QP solution (1/8, 1, 1/8) within 2e-3, verified by grid search.
void criterion4() {
  MomentCovariance zero;
  zero.a = Matrix(2, 2, 0.0);
  zero.n_boot = 2;
  const auto coeffs = qp::select_coefficients(zero, 1, 1, 1001, {});

  // Dense grid search oracle over (gamma_0, gamma_1).
  double best_u = 1e9;
  for (int i = 0; i <= 300; ++i) {
    const double g0 = 0.0 + 0.25 * i / 300.0;
    for (int j = 0; j <= 400; ++j) {
      const double g1 = 0.8 + 0.4 * j / 400.0;
      double worst = 0.0;
      for (int t = 0; t <= 1000; ++t) {
        const double x = t / 1000.0;
        worst = std::max(worst, std::fabs(std::sqrt(x) - g0 - g1 * x));
        if (worst > best_u) break;
      }
      best_u = std::min(best_u, worst);
    }
  }

  const bool pass = std::fabs(coeffs.gamma[0] - 0.125) <= 2e-3 &&
                    std::fabs(coeffs.gamma[1] - 1.0) <= 2e-3 &&
                    std::fabs(coeffs.u - 0.125) <= 2e-3 &&
                    std::fabs(best_u - 0.125) <= 2e-3;
  report(4, "QP minimax oracle", pass,
         fmt("gamma=(%.5f, %.5f), u=%.5f vs grid-search 0.125", coeffs.gamma[0],
             coeffs.gamma[1], coeffs.u));
}

// 5. Bias containment over 20 ground-truth similarities (fig2a), and the
//    plug-in bias at zero truth, under 10 minutes.
void criterion5() {
  const double t0 = now_seconds();
  const sweep::Preset* preset = sweep::find_preset("fig2a");
  sweep::SweepSettings s;
  s.trials = 500;
  s.cov_datasets = 200;
  s.seed = 55055;
  const auto rows = sweep::run_similarity_sweep(preset->conditions, s);

  bool contained = true;
  double worst_excess = -1e9;
  for (std::size_t ci = 0; ci < preset->conditions.size(); ++ci) {
    const auto& m = rows[2 * ci + 1];
    if (!m.error.empty()) {
      contained = false;
      continue;
    }
    const double se = m.sd / std::sqrt(double(m.trials));
    const double excess =
        std::fabs(m.mean - preset->conditions[ci].target_cos) - (*m.bias_bound + 3.0 * se);
    worst_excess = std::max(worst_excess, excess);
    if (excess > 0.0) contained = false;
  }
  const auto& plugin_zero = rows[0];  // condition 0 has target 0
  const double plugin_se = plugin_zero.sd / std::sqrt(double(plugin_zero.trials));
  const bool plugin_biased = plugin_zero.mean > 5.0 * plugin_se;
  const double elapsed = now_seconds() - t0;
  report(5, "moment bias containment across fig2a", contained && plugin_biased && elapsed < 600.0,
         fmt("worst containment excess %.4f, plug-in bias z %.1f, %.0f s", worst_excess,
             plugin_zero.mean / plugin_se, elapsed));
}

// 6. CI coverage over 1000 simulations at the fig2b-style setting.
void criterion6() {
  const sweep::Preset* preset = sweep::find_preset("fig2d");
  sweep::SweepSettings s;
  s.trials = 1000;
  s.cov_datasets = 200;
  s.seed = 66066;
  const auto rows = sweep::run_similarity_sweep(preset->conditions, s);
  const auto& m = rows[1];
  const bool pass = m.error.empty() && m.coverage && *m.coverage >= 0.95;
  report(6, "95% CI coverage (fig2d)", pass,
         fmt("coverage %.3f over %.0f simulations", m.coverage ? *m.coverage : -1.0,
             double(m.trials)));
}

// 7. Bias-variance monotonicity along the fig3a cap sweep.
void criterion7() {
  const sweep::Preset* preset = sweep::find_preset("fig3a");
  sweep::SweepSettings s;
  s.trials = 500;
  s.cov_datasets = 200;
  s.seed = 77077;
  const auto rows = sweep::run_similarity_sweep(preset->conditions, s);
  bool ok = true;
  double prev_var = -1e300, prev_sd = -1e300, prev_sd_se = 0.0;
  std::string detail;
  for (std::size_t ci = 0; ci < preset->conditions.size(); ++ci) {
    const auto& m = rows[2 * ci + 1];
    if (!m.error.empty()) {
      ok = false;
      detail = m.error;
      break;
    }
    if (*m.variance_term < prev_var - 1e-8 * std::max(1.0, std::fabs(prev_var))) ok = false;
    const double sd_se = m.sd / std::sqrt(2.0 * double(m.trials - 1));
    if (m.sd < prev_sd - prev_sd_se) ok = false;
    prev_var = *m.variance_term;
    prev_sd = m.sd;
    prev_sd_se = sd_se;
    detail += fmt("[cap %.2f: var %.3g sd %.3g] ", *preset->conditions[ci].bias_cap,
                  *m.variance_term, m.sd);
  }
  report(7, "bias-variance monotonicity (fig3a)", ok, detail);
}

// 8. Split-trial trace correctness under unit noise.
void criterion8() {
  const std::size_t n = 20;
  Rng model_rng(8008);
  const auto model =
      synth::make_ground_truth(n, 0.5, double(n), synth::SpectrumSpec::flat(), model_rng);
  const int trials = 500;
  std::vector<double> split(trials), naive(trials);
  kernels::parallel_for(trials, 0, [&](std::int64_t t) {
    Rng rng(mix_seed(8080, std::uint64_t(t)));
    const auto s = synth::sample_responses(model, 100, {1.0, 2}, rng);
    split[std::size_t(t)] = split_trial_covariance(s.x, *s.x_rep, false, 1).trace();
    naive[std::size_t(t)] = empirical_covariance(s.x, 1).trace();
  });
  const MeanSd sp = mean_sd(split);
  const MeanSd nv = mean_sd(naive);
  const double z_split = std::fabs(sp.mean - double(n)) / (sp.sd / std::sqrt(double(trials)));
  const double z_naive =
      std::fabs(nv.mean - 2.0 * double(n)) / (nv.sd / std::sqrt(double(trials)));
  const bool pass = z_split <= 4.0 && z_naive <= 4.0;
  report(8, "split-trial unbiasedness", pass,
         fmt("split trace %.3f (truth 20, z %.2f); naive inflated to %.3f", sp.mean,
             z_split, nv.mean));
}

// 9. Covariance-form vs alignment-form plug-in equality on 50 instances.
void criterion9() {
  Rng rng(9009);
  double worst = 0.0;
  for (int rep = 0; rep < 50; ++rep) {
    const std::size_t m = 20 + rng.below(40), n = 3 + rng.below(8);
    auto [x, y] = synth::gaussian_pair(m, n, rng);
    const CovarianceSet cov = covariances_from_responses(x, y, 1);
    const double covariance_form = plugin_squared_procrustes(cov).value;
    const auto svd = linalg::svd(cov.sigma_ij);
    const Matrix q = kernels::matmul(svd.right_vectors, svd.left_vectors.transposed());
    const Matrix yq = kernels::matmul(y.data, q);
    double frob = 0.0;
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t j = 0; j < n; ++j) {
        const double d = x.data(i, j) - yq(i, j);
        frob += d * d;
      }
    worst = std::max(worst, std::fabs(covariance_form - frob / double(m)));
  }
  report(9, "plug-in formulation equivalence", worst < 1e-8,
         fmt("worst |difference| %.2e (limit 1e-8)", worst));
}

// 10. CLI byte-identical determinism across runs and thread counts.
void criterion10(const std::string& cli) {
  if (cli.empty()) {
    report(10, "CLI determinism", false, "no CLI path given on the command line");
    return;
  }
  namespace fs = std::filesystem;
  const fs::path dir = fs::temp_directory_path() / "shapedist_acceptance";
  fs::create_directories(dir);

  Rng rng(1010);
  Matrix x(40, 6), y(40, 6);
  for (std::size_t i = 0; i < 40; ++i)
    for (std::size_t j = 0; j < 6; ++j) {
      x(i, j) = rng.normal();
      y(i, j) = rng.normal();
    }
  io::write_response_csv(dir / "x.csv", x);
  io::write_response_csv(dir / "y.csv", y);
  {
    std::ofstream grid(dir / "grid.csv");
    grid << "target_cos,n,m,bias_cap\n0.3,6,40,\n0.3,6,40,0.2\n";
  }

  auto slurp = [](const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
  };
  auto run = [&](const std::string& command, int threads, const fs::path& out) {
    std::string full = "SHAPEDIST_THREADS=" + std::to_string(threads) + " " + cli + " " +
                       command + " --out " + out.string() + " >/dev/null 2>&1";
    return std::system(full.c_str()) == 0;
  };

  const std::string est_cmd = "estimate --x " + (dir / "x.csv").string() + " --y " +
                              (dir / "y.csv").string() +
                              " --estimator both --order 3 --n-boot 40 "
                              "--tuple-budget 800 --seed 42";
  const std::string sim_cmd = "simulate --preset custom --grid " +
                              (dir / "grid.csv").string() +
                              " --trials 20 --cov-datasets 15 --tuple-budget 500 "
                              "--grid-size 300 --seed 7";
  const std::string vlb_cmd = "verify-lower-bound --n 12 --m-grid 500 --m-grid 1000 "
                              "--trials 5 --seed 3";

  bool ok = true;
  std::string detail;
  const std::vector<std::pair<std::string, std::string>> cases = {
      {"estimate", est_cmd}, {"simulate", sim_cmd}, {"verify-lower-bound", vlb_cmd}};
  for (const auto& [name, cmd] : cases) {
    const fs::path o1 = dir / (name + "_t1.out");
    const fs::path o2 = dir / (name + "_t4.out");
    const fs::path o3 = dir / (name + "_t1b.out");
    if (!run(cmd, 1, o1) || !run(cmd, 4, o2) || !run(cmd, 1, o3)) {
      ok = false;
      detail += name + ": nonzero exit; ";
      continue;
    }
    const std::string c1 = slurp(o1), c2 = slurp(o2), c3 = slurp(o3);
    if (c1.empty() || c1 != c2 || c1 != c3) {
      ok = false;
      detail += name + ": outputs differ; ";
    }
  }
  if (ok) detail = "estimate/simulate/verify-lower-bound byte-identical at 1 and 4 threads";
  report(10, "CLI determinism", ok, detail);
  fs::remove_all(dir);
}

}  // namespace

int main(int argc, char** argv) {
  const std::string cli = argc > 1 ? argv[1] : "";
  criterion1();
  criterion2();
  criterion3();
  criterion4();
  criterion5();
  criterion6();
  criterion7();
  criterion8();
  criterion9();
  criterion10(cli);
  if (g_failures == 0) {
    std::printf("all acceptance criteria passed\n");
    return 0;
  }
  std::printf("%d acceptance criteria FAILED\n", g_failures);
  return 1;
}
