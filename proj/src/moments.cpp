#include "shapedist/moments.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "shapedist/error.hpp"
#include "shapedist/kernels.hpp"
#include "shapedist/linalg.hpp"
#include "shapedist/rng.hpp"

namespace shapedist {

namespace {

constexpr std::int64_t kTupleBlock = 256;

// Product for one ordered tuple (a_1,b_1,...,a_p,b_p), with the factor order
// fixed so the exact path is bit-reproducible against a nested-loop oracle.
inline double tuple_term(const Matrix& gx, const Matrix& gy, const std::size_t* idx,
                         int p) {
  double prod = 1.0;
  const int len = 2 * p;
  for (int s = 0; s < p; ++s) {
    const std::size_t a = idx[2 * s];
    const std::size_t b = idx[2 * s + 1];
    const std::size_t a_next = idx[(2 * s + 2) % len];
    prod *= gy(a, b);
    prod *= gx(b, a_next);
  }
  return prod;
}

double tuple_count(std::size_t m, int p) {
  double c = 1.0;
  for (int k = 0; k < 2 * p; ++k) c *= static_cast<double>(m - static_cast<std::size_t>(k));
  return c;
}

// Lexicographic depth-first enumeration of all ordered distinct tuples.
// Strictly serial with a single accumulator: matches the order and rounding
// of a plain nested loop.
void enumerate_exact(const Matrix& gx, const Matrix& gy, int p, std::size_t m,
                     std::vector<std::size_t>& idx, std::vector<bool>& used, int depth,
                     double& sum) {
  if (depth == 2 * p) {
    sum += tuple_term(gx, gy, idx.data(), p);
    return;
  }
  for (std::size_t v = 0; v < m; ++v) {
    if (used[v]) continue;
    used[v] = true;
    idx[static_cast<std::size_t>(depth)] = v;
    enumerate_exact(gx, gy, p, m, idx, used, depth + 1, sum);
    used[v] = false;
  }
}

double eigenmoment_exact(const GramPair& g, int p) {
  const std::size_t m = g.n_stimuli();
  std::vector<std::size_t> idx(static_cast<std::size_t>(2 * p));
  std::vector<bool> used(m, false);
  double sum = 0.0;
  enumerate_exact(g.gx, g.gy, p, m, idx, used, 0, sum);
  return sum / tuple_count(m, p);
}

// Samples one ordered distinct tuple by a partial Fisher-Yates pass over
// scratch (any permutation of 0..m-1 works as the starting state).
inline void sample_tuple(Rng& rng, std::vector<std::size_t>& scratch, std::size_t* idx,
                         int len) {
  const std::size_t m = scratch.size();
  for (int t = 0; t < len; ++t) {
    const std::size_t j =
        static_cast<std::size_t>(t) + rng.below(m - static_cast<std::size_t>(t));
    std::swap(scratch[static_cast<std::size_t>(t)], scratch[j]);
    idx[t] = scratch[static_cast<std::size_t>(t)];
  }
}

// Monte-Carlo tuple average. Work is split into fixed blocks with derived
// seeds and the partial sums are reduced sequentially, so the result is
// identical for any thread count. remap, when present, carries the original
// stimulus identity of each resampled row; tuples whose identities collide
// are redrawn.
double eigenmoment_mc(const GramPair& g, int p, std::int64_t n_tuples,
                      std::uint64_t seed, const std::vector<std::uint32_t>* remap,
                      int threads) {
  const std::size_t m = g.n_stimuli();
  const int len = 2 * p;
  const std::int64_t n_blocks = (n_tuples + kTupleBlock - 1) / kTupleBlock;
  std::vector<double> block_sums(static_cast<std::size_t>(n_blocks), 0.0);

  kernels::parallel_for(n_blocks, threads, [&](std::int64_t block) {
    Rng rng(mix_seed(seed, static_cast<std::uint64_t>(block)));
    std::vector<std::size_t> scratch(m);
    for (std::size_t i = 0; i < m; ++i) scratch[i] = i;
    std::vector<std::size_t> idx(static_cast<std::size_t>(len));
    std::vector<std::size_t> mapped(static_cast<std::size_t>(len));
    const std::int64_t begin = block * kTupleBlock;
    const std::int64_t end = std::min(n_tuples, begin + kTupleBlock);
    double sum = 0.0;
    for (std::int64_t t = begin; t < end; ++t) {
      if (remap == nullptr) {
        sample_tuple(rng, scratch, idx.data(), len);
        sum += tuple_term(g.gx, g.gy, idx.data(), p);
      } else {
        long attempts = 0;
        for (;;) {
          sample_tuple(rng, scratch, idx.data(), len);
          bool distinct = true;
          for (int u = 0; u < len && distinct; ++u) {
            mapped[static_cast<std::size_t>(u)] = (*remap)[idx[static_cast<std::size_t>(u)]];
            for (int v = 0; v < u; ++v)
              if (mapped[static_cast<std::size_t>(u)] == mapped[static_cast<std::size_t>(v)]) {
                distinct = false;
                break;
              }
          }
          if (distinct) break;
          if (++attempts > 1000000)
            throw DataError("bootstrap replicate cannot produce a distinct-index tuple");
        }
        sum += tuple_term(g.gx, g.gy, mapped.data(), p);
      }
    }
    block_sums[static_cast<std::size_t>(block)] = sum;
  });

  double total = 0.0;
  for (double s : block_sums) total += s;
  return total / static_cast<double>(n_tuples);
}

}  // namespace

GramPair gram_pair(const ResponseMatrix& x, const ResponseMatrix& y, int threads) {
  if (x.n_stimuli() != y.n_stimuli())
    throw DataError("gram_pair: stimulus counts differ");
  GramPair g;
  g.gx = kernels::row_gram(x.data, threads);
  g.gy = kernels::row_gram(y.data, threads);
  g.units_x = x.n_units();
  g.units_y = y.n_units();
  return g;
}

double eigenmoment(int p, const GramPair& g, const MomentStrategy& strategy,
                   int threads) {
  if (p < 1) throw DataError("eigenmoment: order must be >= 1");
  const std::size_t m = g.n_stimuli();
  if (m < static_cast<std::size_t>(2 * p))
    throw DataError("eigenmoment: need M >= 2p distinct stimuli (M=" +
                    std::to_string(m) + ", p=" + std::to_string(p) + ")");
  if (strategy.kind == MomentStrategy::Kind::exact)
    return eigenmoment_exact(g, p);
  if (strategy.n_tuples < 1) throw DataError("eigenmoment: tuple budget must be >= 1");
  if (tuple_count(m, p) <= static_cast<double>(strategy.n_tuples))
    return eigenmoment_exact(g, p);
  return eigenmoment_mc(g, p, strategy.n_tuples, strategy.seed, nullptr, threads);
}

EigenmomentVector estimate_eigenmoments(const GramPair& g, int order, double kappa,
                                        std::int64_t tuple_budget, std::uint64_t seed,
                                        int threads) {
  if (order < 1) throw DataError("moment order must be >= 1");
  if (!(kappa > 0.0)) throw DataError("rescale factor must be positive");
  EigenmomentVector v;
  v.order = order;
  v.rescale = kappa;
  v.scaled = true;
  v.values.resize(static_cast<std::size_t>(order) + 1);
  v.values[0] = static_cast<double>(g.units_x);
  double kp = 1.0;
  for (int p = 1; p <= order; ++p) {
    kp *= kappa;
    const double w =
        eigenmoment(p, g, MomentStrategy::monte_carlo(tuple_budget, mix_seed(seed, static_cast<std::uint64_t>(p))),
                    threads);
    v.values[static_cast<std::size_t>(p)] = w / kp;
  }
  return v;
}

MomentCovariance moment_covariance_of(const std::vector<std::vector<double>>& draws) {
  if (draws.size() < 2) throw DataError("moment covariance: need at least 2 draws");
  const std::size_t dim = draws.front().size();
  for (const auto& d : draws)
    if (d.size() != dim) throw DataError("moment covariance: ragged draws");
  std::vector<double> mean(dim, 0.0);
  for (const auto& d : draws)
    for (std::size_t j = 0; j < dim; ++j) mean[j] += d[j];
  for (double& v : mean) v /= static_cast<double>(draws.size());
  Matrix a(dim, dim, 0.0);
  for (const auto& d : draws)
    for (std::size_t i = 0; i < dim; ++i)
      for (std::size_t j = 0; j < dim; ++j)
        a(i, j) += (d[i] - mean[i]) * (d[j] - mean[j]);
  a *= 1.0 / static_cast<double>(draws.size() - 1);
  for (std::size_t j = 0; j < dim; ++j) {
    a(0, j) = 0.0;
    a(j, 0) = 0.0;
  }
  MomentCovariance cov;
  cov.a = std::move(a);
  cov.n_boot = draws.size();
  cov.scaled = true;
  return cov;
}

MomentCovariance bootstrap_moment_covariance(const ResponseMatrix& x,
                                             const ResponseMatrix& y, int order,
                                             double kappa, std::size_t n_boot,
                                             std::uint64_t seed,
                                             std::int64_t tuple_budget, int threads) {
  const std::size_t m = x.n_stimuli();
  if (order < 1) throw DataError("moment order must be >= 1");
  if (m < static_cast<std::size_t>(2 * order))
    throw DataError("bootstrap: need M >= 2P stimuli");
  if (n_boot < 2) throw DataError("bootstrap: need n_boot >= 2");
  if (!(kappa > 0.0)) throw DataError("rescale factor must be positive");

  const GramPair g = gram_pair(x, y, threads);
  std::vector<std::vector<double>> draws(n_boot);

  kernels::parallel_for(static_cast<std::int64_t>(n_boot), threads, [&](std::int64_t r) {
    const std::uint64_t rep_seed = mix_seed(seed, static_cast<std::uint64_t>(r));
    Rng rng(mix_seed(rep_seed, 0));
    std::vector<std::uint32_t> ids(m);
    for (std::size_t i = 0; i < m; ++i)
      ids[i] = static_cast<std::uint32_t>(rng.below(m));
    std::vector<std::uint32_t> sorted = ids;
    std::sort(sorted.begin(), sorted.end());
    const std::size_t distinct =
        static_cast<std::size_t>(std::unique(sorted.begin(), sorted.end()) - sorted.begin());
    if (distinct < static_cast<std::size_t>(2 * order))
      throw DataError("bootstrap replicate has fewer than 2P distinct stimuli");

    std::vector<double> w(static_cast<std::size_t>(order) + 1);
    w[0] = static_cast<double>(g.units_x);
    double kp = 1.0;
    for (int p = 1; p <= order; ++p) {
      kp *= kappa;
      const double raw = eigenmoment_mc(g, p, tuple_budget,
                                        mix_seed(rep_seed, static_cast<std::uint64_t>(p)),
                                        &ids, /*threads=*/1);
      w[static_cast<std::size_t>(p)] = raw / kp;
    }
    draws[static_cast<std::size_t>(r)] = std::move(w);
  });

  MomentCovariance cov = moment_covariance_of(draws);
  cov.n_boot = n_boot;
  return cov;
}

double rescale_factor(const CovarianceSet& cov, double margin) {
  if (!(margin >= 1.0)) throw DataError("rescale margin must be >= 1");
  if (cov.sigma_ij.max_abs() > 0.0) {
    const auto s = linalg::singular_values(cov.sigma_ij);
    return margin * s.front() * s.front();
  }
  const double tii = cov.sigma_ii.trace();
  const double tjj = cov.sigma_jj.trace();
  const double denom = static_cast<double>(cov.sigma_ii.rows()) *
                       static_cast<double>(cov.sigma_jj.rows());
  const double fallback = margin * (tii * tjj) / denom;
  if (!(fallback > 0.0))
    throw DataError("rescale factor: all covariances are zero");
  return fallback;
}

double moment_nuclear_norm(const EigenmomentVector& moments,
                           const CoefficientSolution& coeffs) {
  if (!moments.scaled)
    throw DataError("moment_nuclear_norm: moments must be in scaled units");
  if (coeffs.gamma.size() != moments.values.size())
    throw DataError("moment_nuclear_norm: coefficient order mismatch");
  double s = 0.0;
  for (std::size_t p = 0; p < coeffs.gamma.size(); ++p)
    s += coeffs.gamma[p] * moments.values[p];
  return std::sqrt(moments.rescale) * s;
}

EstimateReport moment_cosine_similarity(double norm_estimate, double denom) {
  if (!(denom > 0.0))
    throw DataError("moment cosine similarity: non-positive denominator");
  EstimateReport r;
  r.kind = EstimateKind::moment_cos_similarity;
  r.value = norm_estimate / denom;
  r.value_clipped = std::clamp(r.value, 0.0, 1.0);
  return r;
}

std::pair<double, double> confidence_interval(double estimate,
                                              const CoefficientSolution& coeffs,
                                              std::size_t dims, double kappa,
                                              double alpha,
                                              std::optional<double> denom) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw DataError("alpha must be in (0,1)");
  const double z = normal_critical_value(alpha);
  const double half =
      (z * std::sqrt(std::max(0.0, coeffs.variance)) + static_cast<double>(dims) * coeffs.u) *
      std::sqrt(kappa);
  double low = estimate - half;
  double high = estimate + half;
  if (denom) {
    if (!(*denom > 0.0)) throw DataError("confidence interval: non-positive denominator");
    low /= *denom;
    high /= *denom;
  }
  return {low, high};
}

}  // namespace shapedist
