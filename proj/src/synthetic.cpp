#include "shapedist/synthetic.hpp"

#include <cmath>
#include <string>

#include "shapedist/error.hpp"
#include "shapedist/kernels.hpp"
#include "shapedist/linalg.hpp"

namespace shapedist::synth {

namespace {

std::vector<double> spectrum_weights(std::size_t n, const SpectrumSpec& spec) {
  std::vector<double> w(n, 1.0);
  switch (spec.shape) {
    case SpectrumSpec::Shape::flat:
      break;
    case SpectrumSpec::Shape::linear_decay:
      for (std::size_t k = 0; k < n; ++k)
        w[k] = static_cast<double>(n - k);
      break;
    case SpectrumSpec::Shape::custom: {
      if (spec.custom.size() > n)
        throw DataError("custom spectrum has more entries than dimensions");
      std::fill(w.begin(), w.end(), 0.0);
      for (std::size_t k = 0; k < spec.custom.size(); ++k) {
        if (spec.custom[k] < 0.0)
          throw DataError("custom spectrum entries must be non-negative");
        w[k] = spec.custom[k];
      }
      break;
    }
  }
  return w;
}

}  // namespace

GroundTruthModel make_ground_truth(std::size_t n, double target_cos, double trace_scale,
                                   const SpectrumSpec& spectrum, Rng& rng) {
  if (n < 1) throw DataError("ground truth: dimension must be >= 1");
  if (!(target_cos >= 0.0 && target_cos <= 1.0))
    throw DataError("ground truth: target similarity must be in [0,1]");
  if (!(trace_scale > 0.0)) throw DataError("ground truth: trace scale must be positive");

  const double a = trace_scale / static_cast<double>(n);
  GroundTruthModel model;
  model.n = n;
  model.sigma_ii = Matrix::identity(n) * a;
  model.sigma_jj = Matrix::identity(n) * a;

  double nuclear = 0.0;
  if (target_cos == 0.0) {
    model.sigma_ij = Matrix(n, n, 0.0);
  } else {
    std::vector<double> w = spectrum_weights(n, spectrum);
    double wsum = 0.0, wmax = 0.0;
    for (double v : w) {
      wsum += v;
      wmax = std::max(wmax, v);
    }
    if (!(wsum > 0.0)) throw DataError("spectrum weights sum to zero");
    const double target_nuclear = target_cos * trace_scale;
    const double scale = target_nuclear / wsum;
    // Joint PSD requires the top singular value of sigma_ij to stay at or
    // below trace_scale/n (Schur complement of the equal diagonal blocks).
    if (wmax * scale > a * (1.0 + 1e-12))
      throw InfeasibleError(
          "target similarity " + std::to_string(target_cos) +
          " is infeasible for this spectrum: top cross singular value would "
          "exceed the PSD ceiling");
    const Matrix q1 = linalg::random_orthogonal(n, rng);
    const Matrix q2 = linalg::random_orthogonal(n, rng);
    Matrix q1d = q1;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t k = 0; k < n; ++k) q1d(i, k) *= w[k] * scale;
    model.sigma_ij = kernels::matmul(q1d, q2.transposed());
    for (double v : w) nuclear += v * scale;
  }

  Matrix joint(2 * n, 2 * n, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      joint(i, j) = model.sigma_ii(i, j);
      joint(n + i, n + j) = model.sigma_jj(i, j);
      joint(i, n + j) = model.sigma_ij(i, j);
      joint(n + j, i) = model.sigma_ij(i, j);
    }
  model.joint_factor = linalg::cholesky_lower(joint);
  model.true_nuclear = nuclear;
  model.true_cos = nuclear / trace_scale;
  model.true_sq_procrustes = 2.0 * trace_scale - 2.0 * nuclear;
  return model;
}

SampledResponses sample_responses(const GroundTruthModel& model, std::size_t m,
                                  const NoiseConfig& noise, Rng& rng) {
  if (m < 1) throw DataError("sample_responses: need m >= 1");
  if (noise.replicates != 1 && noise.replicates != 2)
    throw DataError("sample_responses: replicates must be 1 or 2");
  if (noise.noise_std < 0.0) throw DataError("sample_responses: negative noise");

  const std::size_t n = model.n;
  const std::size_t d = 2 * n;
  const bool two = noise.replicates == 2;
  const bool noisy = noise.noise_std > 0.0;

  Matrix x(m, n), y(m, n);
  Matrix x2, y2;
  if (two) {
    x2 = Matrix(m, n);
    y2 = Matrix(m, n);
  }
  std::vector<double> xi(d), signal(d);
  for (std::size_t row = 0; row < m; ++row) {
    for (std::size_t j = 0; j < d; ++j) xi[j] = rng.normal();
    for (std::size_t i = 0; i < d; ++i) {
      double s = 0.0;
      const double* lrow = model.joint_factor.row(i);
      for (std::size_t j = 0; j <= i; ++j) s += lrow[j] * xi[j];
      signal[i] = s;
    }
    for (std::size_t j = 0; j < n; ++j) {
      x(row, j) = signal[j];
      y(row, j) = signal[n + j];
      if (two) {
        x2(row, j) = signal[j];
        y2(row, j) = signal[n + j];
      }
    }
    if (noisy) {
      for (std::size_t j = 0; j < n; ++j) x(row, j) += noise.noise_std * rng.normal();
      if (two)
        for (std::size_t j = 0; j < n; ++j) x2(row, j) += noise.noise_std * rng.normal();
      for (std::size_t j = 0; j < n; ++j) y(row, j) += noise.noise_std * rng.normal();
      if (two)
        for (std::size_t j = 0; j < n; ++j) y2(row, j) += noise.noise_std * rng.normal();
    }
  }

  SampledResponses out;
  out.x = make_response(std::move(x));
  out.y = make_response(std::move(y));
  if (two) {
    out.x_rep = make_response(std::move(x2));
    out.y_rep = make_response(std::move(y2));
  }
  return out;
}

std::pair<ResponseMatrix, ResponseMatrix> rademacher_pair(std::size_t m, std::size_t n,
                                                          double b, Rng& rng) {
  if (m < 1 || n < 1) throw DataError("rademacher_pair: need m, n >= 1");
  if (!(b > 0.0)) throw DataError("rademacher_pair: bound must be positive");
  Matrix x(m, n), y(m, n);
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < n; ++j) x(i, j) = rng.below(2) ? b : -b;
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < n; ++j) y(i, j) = rng.below(2) ? b : -b;
  return {make_response(std::move(x)), make_response(std::move(y))};
}

std::pair<ResponseMatrix, ResponseMatrix> gaussian_pair(std::size_t m, std::size_t n,
                                                        Rng& rng) {
  if (m < 1 || n < 1) throw DataError("gaussian_pair: need m, n >= 1");
  Matrix x(m, n), y(m, n);
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < n; ++j) x(i, j) = rng.normal();
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < n; ++j) y(i, j) = rng.normal();
  return {make_response(std::move(x)), make_response(std::move(y))};
}

}  // namespace shapedist::synth
