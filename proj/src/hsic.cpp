#include "pcf/hsic.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace pcf {

KernelSpec KernelSpec::fixed(double sigma) {
  if (!(sigma > 0.0)) throw std::invalid_argument("kernel bandwidth must be positive");
  return KernelSpec{sigma};
}

namespace {

struct PairDistance {
  double dist;
  Index i;
  Index j;
};

void check_inputs(const Vector& x, const Vector& y) {
  if (x.size() != y.size()) throw std::invalid_argument("nhsic: length mismatch");
  if (x.size() < 4) throw InsufficientSamplesError("nhsic: need at least 4 samples");
}

// Double centering H K H without forming H.
Matrix double_center(const Matrix& k) {
  const Vector row_mean = k.rowwise().mean();
  const double grand = row_mean.mean();
  Matrix c = k;
  c.colwise() -= row_mean;
  c.rowwise() -= row_mean.transpose();
  c.array() += grand;
  return c;
}

}  // namespace

GaussianGram gaussian_gram(const Vector& a, const KernelSpec& kernel) {
  const Index n = a.size();
  if (n < 2) throw InsufficientSamplesError("gaussian_gram: need at least 2 samples");
  if (!((a.array() != a[0]).any())) throw DegenerateInputError("nhsic: input has zero variance");

  GaussianGram g;
  if (kernel.uses_median()) {
    std::vector<PairDistance> pairs;
    pairs.reserve(static_cast<std::size_t>(n * (n - 1) / 2));
    for (Index i = 0; i < n; ++i)
      for (Index j = i + 1; j < n; ++j) pairs.push_back({std::abs(a[i] - a[j]), i, j});
    const auto by_dist = [](const PairDistance& l, const PairDistance& r) { return l.dist < r.dist; };
    const std::size_t mid = pairs.size() / 2;
    std::nth_element(pairs.begin(), pairs.begin() + static_cast<std::ptrdiff_t>(mid), pairs.end(), by_dist);
    const PairDistance upper = pairs[mid];
    g.median_pair[0][0] = upper.i;
    g.median_pair[0][1] = upper.j;
    if (pairs.size() % 2 == 1) {
      g.bandwidth = upper.dist;
      g.median_pair_count = 1;
    } else {
      const PairDistance lower =
          *std::max_element(pairs.begin(), pairs.begin() + static_cast<std::ptrdiff_t>(mid), by_dist);
      g.bandwidth = 0.5 * (lower.dist + upper.dist);
      g.median_pair[1][0] = lower.i;
      g.median_pair[1][1] = lower.j;
      g.median_pair_count = 2;
    }
    if (!(g.bandwidth > 0.0))
      throw DegenerateInputError("nhsic: median pairwise distance is zero");
  } else {
    g.bandwidth = kernel.bandwidth;
  }

  const double scale = -0.5 / (g.bandwidth * g.bandwidth);
  g.gram.resize(n, n);
  for (Index j = 0; j < n; ++j) {
    g.gram(j, j) = 1.0;
    for (Index i = j + 1; i < n; ++i) {
      const double d = a[i] - a[j];
      const double v = std::exp(scale * d * d);
      g.gram(i, j) = v;
      g.gram(j, i) = v;
    }
  }
  g.centered = double_center(g.gram);
  g.centered_norm = g.centered.norm();
  return g;
}

double hsic(const Vector& x, const Vector& y, const KernelSpec& kernel) {
  check_inputs(x, y);
  const auto gx = gaussian_gram(x, kernel);
  const auto gy = gaussian_gram(y, kernel);
  const double n = static_cast<double>(x.size());
  return (gx.centered.array() * gy.centered.array()).sum() / (n * n);
}

double nhsic(const GaussianGram& gx, const GaussianGram& gy) {
  if (gx.gram.rows() != gy.gram.rows()) throw std::invalid_argument("nhsic: Gram size mismatch");
  // The 1/n^2 factors cancel in the normalization.
  const double cross = (gx.centered.array() * gy.centered.array()).sum();
  const double denom = gx.centered_norm * gy.centered_norm;
  if (!(denom > 0.0)) throw DegenerateInputError("nhsic: degenerate Gram matrix");
  return std::clamp(cross / denom, 0.0, 1.0);
}

double nhsic(const Vector& x, const Vector& y, const KernelSpec& kernel) {
  check_inputs(x, y);
  return nhsic(gaussian_gram(x, kernel), gaussian_gram(y, kernel));
}

Vector gaussian_gram_backprop(const Vector& a, const GaussianGram& g, const Matrix& bar,
                              const KernelSpec& kernel) {
  const bool median = kernel.uses_median();
  const Index n = a.size();
  const double s2 = g.bandwidth * g.bandwidth;
  const Matrix e = bar.cwiseProduct(g.gram);
  Vector grad = (-2.0 / s2) * (e.rowwise().sum().cwiseProduct(a) - e * a);
  if (median) {
    double d_sigma = 0.0;
    for (Index j = 0; j < n; ++j)
      for (Index i = 0; i < n; ++i) {
        const double d = a[i] - a[j];
        d_sigma += e(i, j) * d * d;
      }
    d_sigma /= s2 * g.bandwidth;
    const double w = g.median_pair_count == 1 ? 1.0 : 0.5;
    for (int k = 0; k < g.median_pair_count; ++k) {
      const Index i = g.median_pair[k][0];
      const Index j = g.median_pair[k][1];
      const double diff = a[i] - a[j];
      const double sign = diff > 0.0 ? 1.0 : (diff < 0.0 ? -1.0 : 0.0);
      grad[i] += w * d_sigma * sign;
      grad[j] -= w * d_sigma * sign;
    }
  }
  return grad;
}

NhsicGrad nhsic_grad(const Vector& x, const Vector& y, const KernelSpec& kernel) {
  check_inputs(x, y);
  const auto gx = gaussian_gram(x, kernel);
  const auto gy = gaussian_gram(y, kernel);
  const double cross = (gx.centered.array() * gy.centered.array()).sum();
  const double nx = gx.centered_norm;
  const double ny = gy.centered_norm;
  if (!(nx > 0.0 && ny > 0.0)) throw DegenerateInputError("nhsic: degenerate Gram matrix");

  NhsicGrad out;
  out.value = cross / (nx * ny);
  // d f / d A = B / (|A||B|) - f A / |A|^2, with A, B the centered Gram matrices.
  const Matrix bar_x = gy.centered / (nx * ny) - (out.value / (nx * nx)) * gx.centered;
  const Matrix bar_y = gx.centered / (nx * ny) - (out.value / (ny * ny)) * gy.centered;
  out.d_x = gaussian_gram_backprop(x, gx, bar_x, kernel);
  out.d_y = gaussian_gram_backprop(y, gy, bar_y, kernel);
  return out;
}

}  // namespace pcf
