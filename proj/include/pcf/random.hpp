#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <string_view>
#include <vector>

#include "pcf/types.hpp"

namespace pcf {

/// Latent-variable families used by the synthetic SCM.
enum class LatentDist { kUniform, kGamma, kExponential, kGaussian };

std::string_view to_string(LatentDist d);
/// Throws std::invalid_argument on an unknown tag.
LatentDist parse_latent_dist(std::string_view tag);

/// Mixes a base seed with stream coordinates (splitmix64 finalizer chain), so
/// that trials and sub-streams get disjoint, reproducible seeds.
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t a, std::uint64_t b = 0);

/// Seeded random stream. The engine output is fixed by the standard; all
/// transforms to real-valued variates are implemented here rather than through
/// <random> distributions, whose algorithms are implementation-defined.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  /// Uniform on [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  /// Uniform integer in [0, bound).
  std::uint64_t below(std::uint64_t bound);

  double normal();
  double exponential() { return -std::log1p(-uniform()); }
  /// Marsaglia-Tsang rejection, shape >= 1, unit scale.
  double gamma(double shape);

  Vector normal_vector(Index n);
  Matrix normal_matrix(Index rows, Index cols);
  std::vector<Index> permutation(Index n);

 private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

/// n i.i.d. draws from `dist`, affinely standardized to population mean 0 and
/// standard deviation 1 (uniform on [-sqrt3, sqrt3]; Exp(1) - 1;
/// (Gamma(2,1) - 2) / sqrt2; standard normal).
Vector sample_latent(LatentDist dist, Index n, Rng& rng);

}  // namespace pcf
