#include "pcf/random.hpp"

#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

namespace pcf {

std::string_view to_string(LatentDist d) {
  switch (d) {
    case LatentDist::kUniform: return "uniform";
    case LatentDist::kGamma: return "gamma";
    case LatentDist::kExponential: return "exponential";
    case LatentDist::kGaussian: return "gaussian";
  }
  return "unknown";
}

LatentDist parse_latent_dist(std::string_view tag) {
  if (tag == "uniform") return LatentDist::kUniform;
  if (tag == "gamma") return LatentDist::kGamma;
  if (tag == "exponential") return LatentDist::kExponential;
  if (tag == "gaussian" || tag == "normal") return LatentDist::kGaussian;
  throw std::invalid_argument("unknown latent distribution '" + std::string(tag) + "'");
}

namespace {
std::uint64_t splitmix(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}
}  // namespace

std::uint64_t derive_seed(std::uint64_t base, std::uint64_t a, std::uint64_t b) {
  return splitmix(splitmix(splitmix(base) ^ a) ^ (b * 0xd1b54a32d192ed03ULL));
}

std::uint64_t Rng::below(std::uint64_t bound) {
  if (bound == 0) throw std::invalid_argument("Rng::below: bound must be positive");
  // Rejection to avoid modulo bias.
  const std::uint64_t limit = bound * (UINT64_MAX / bound);
  std::uint64_t r;
  do {
    r = engine_();
  } while (r >= limit);
  return r % bound;
}

double Rng::normal() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  // Marsaglia polar method.
  double u, v, s;
  do {
    u = 2.0 * uniform() - 1.0;
    v = 2.0 * uniform() - 1.0;
    s = u * u + v * v;
  } while (s >= 1.0 || s == 0.0);
  const double f = std::sqrt(-2.0 * std::log(s) / s);
  spare_ = v * f;
  has_spare_ = true;
  return u * f;
}

double Rng::gamma(double shape) {
  if (!(shape >= 1.0)) throw std::invalid_argument("gamma shape must be >= 1");
  const double d = shape - 1.0 / 3.0;
  const double c = 1.0 / std::sqrt(9.0 * d);
  for (;;) {
    double x, v;
    do {
      x = normal();
      v = 1.0 + c * x;
    } while (v <= 0.0);
    v = v * v * v;
    const double u = uniform();
    if (u < 1.0 - 0.0331 * x * x * x * x) return d * v;
    if (std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return d * v;
  }
}

Vector Rng::normal_vector(Index n) {
  Vector v(n);
  for (Index i = 0; i < n; ++i) v[i] = normal();
  return v;
}

Matrix Rng::normal_matrix(Index rows, Index cols) {
  Matrix m(rows, cols);
  // Row-major fill order keeps draws stable if the storage order ever changes.
  for (Index i = 0; i < rows; ++i)
    for (Index j = 0; j < cols; ++j) m(i, j) = normal();
  return m;
}

std::vector<Index> Rng::permutation(Index n) {
  std::vector<Index> idx(static_cast<std::size_t>(n));
  std::iota(idx.begin(), idx.end(), Index{0});
  for (Index i = n - 1; i > 0; --i) {
    const auto j = static_cast<Index>(below(static_cast<std::uint64_t>(i + 1)));
    std::swap(idx[static_cast<std::size_t>(i)], idx[static_cast<std::size_t>(j)]);
  }
  return idx;
}

Vector sample_latent(LatentDist dist, Index n, Rng& rng) {
  if (n < 1) throw std::invalid_argument("sample_latent: n must be >= 1");
  Vector v(n);
  switch (dist) {
    case LatentDist::kUniform: {
      const double half_width = std::sqrt(3.0);
      for (Index i = 0; i < n; ++i) v[i] = rng.uniform(-half_width, half_width);
      break;
    }
    case LatentDist::kGamma: {
      const double inv_sd = 1.0 / std::sqrt(2.0);
      for (Index i = 0; i < n; ++i) v[i] = (rng.gamma(2.0) - 2.0) * inv_sd;
      break;
    }
    case LatentDist::kExponential:
      for (Index i = 0; i < n; ++i) v[i] = rng.exponential() - 1.0;
      break;
    case LatentDist::kGaussian:
      for (Index i = 0; i < n; ++i) v[i] = rng.normal();
      break;
  }
  return v;
}

}  // namespace pcf
