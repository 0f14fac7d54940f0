#pragma once

#include <cstdint>
#include <random>

namespace shapedist {

// Derives an independent child seed from (seed, stream). splitmix64 finalizer;
// used to give every parallel work unit (trial, replicate, tuple block) its own
// stream so results do not depend on the execution schedule.
inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t z = seed + (stream + 1) * 0x9E3779B97F4A7C15ULL;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

// Seeded generator. Not shareable between threads: split streams via mix_seed.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  double normal() { return normal_(engine_); }
  double uniform() { return uniform_(engine_); }

  // Uniform integer in [0, n).
  std::uint64_t below(std::uint64_t n) {
    return std::uniform_int_distribution<std::uint64_t>(0, n - 1)(engine_);
  }

  std::mt19937_64& engine() { return engine_; }

 private:
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_{0.0, 1.0};
  std::uniform_real_distribution<double> uniform_{0.0, 1.0};
};

// Inverse standard normal CDF (Acklam's rational approximation with one
// Halley refinement; |relative error| < 1e-13 over (0,1)).
double normal_quantile(double p);

// Two-sided critical value: z such that P(|Z| <= z) = 1 - alpha.
double normal_critical_value(double alpha);

}  // namespace shapedist
