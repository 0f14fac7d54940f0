#pragma once

#include <optional>
#include <utility>
#include <vector>

#include "shapedist/estimators.hpp"
#include "shapedist/matrix.hpp"
#include "shapedist/response.hpp"
#include "shapedist/rng.hpp"

namespace shapedist::synth {

// Shape of the cross-covariance singular spectrum.
struct SpectrumSpec {
  enum class Shape { flat, linear_decay, custom };
  Shape shape = Shape::flat;
  std::vector<double> custom;  // used when shape == custom

  static SpectrumSpec flat() { return {}; }
  static SpectrumSpec linear_decay() { return {Shape::linear_decay, {}}; }
  static SpectrumSpec custom_values(std::vector<double> v) {
    return {Shape::custom, std::move(v)};
  }
};

// Synthetic population with known covariance blocks and the exact values of
// every quantity estimated elsewhere in the library.
struct GroundTruthModel {
  std::size_t n = 0;
  Matrix sigma_ii;
  Matrix sigma_jj;
  Matrix sigma_ij;
  Matrix joint_factor;  // 2N x 2N lower-triangular, joint = factor factor^T
  double true_nuclear = 0.0;
  double true_cos = 0.0;
  double true_sq_procrustes = 0.0;

  CovarianceSet covariances() const { return {sigma_ii, sigma_jj, sigma_ij}; }
};

// Flat equal covariances (trace_scale/n) I for both populations; cross-
// covariance Q1 D Q2^T with Haar-random rotations and D shaped by the
// spectrum, scaled to hit the target cosine similarity. Targets that would
// push the top singular value past the PSD ceiling raise InfeasibleError.
GroundTruthModel make_ground_truth(std::size_t n, double target_cos, double trace_scale,
                                   const SpectrumSpec& spectrum, Rng& rng);

struct NoiseConfig {
  double noise_std = 0.0;
  int replicates = 1;  // 2 enables split-trial estimation
};

struct SampledResponses {
  ResponseMatrix x;
  ResponseMatrix y;
  std::optional<ResponseMatrix> x_rep;
  std::optional<ResponseMatrix> y_rep;
};

// m joint Gaussian draws through the model's factor. With replicates = 2 the
// per-stimulus signal row is reused and independent per-replicate noise is
// added (noise independent across networks and replicates).
SampledResponses sample_responses(const GroundTruthModel& model, std::size_t m,
                                  const NoiseConfig& noise, Rng& rng);

// Entries i.i.d. uniform on {-b, +b}; the two matrices are independent.
std::pair<ResponseMatrix, ResponseMatrix> rademacher_pair(std::size_t m, std::size_t n,
                                                          double b, Rng& rng);

// Entries i.i.d. standard normal.
std::pair<ResponseMatrix, ResponseMatrix> gaussian_pair(std::size_t m, std::size_t n,
                                                        Rng& rng);

}  // namespace shapedist::synth
