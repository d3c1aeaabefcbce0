#pragma once

#include "pcf/types.hpp"

namespace pcf {

/// Gaussian kernel k(a, b) = exp(-(a - b)^2 / (2 sigma^2)) on scalar samples.
/// A non-positive bandwidth selects the median heuristic: sigma is the median
/// of |a_i - a_j| over all pairs i < j.
struct KernelSpec {
  double bandwidth = 0.0;

  static KernelSpec median_heuristic() { return {}; }
  static KernelSpec fixed(double sigma);
  bool uses_median() const { return !(bandwidth > 0.0); }
};

/// Gram matrix of one sample vector together with what its derivative needs.
struct GaussianGram {
  Matrix gram;      ///< K
  Matrix centered;  ///< HKH
  double centered_norm = 0.0;  ///< Frobenius norm of HKH
  double bandwidth = 0.0;
  /// Pair(s) whose distance defines the median bandwidth, and the weight each
  /// contributes (1 for odd pair counts, 1/2 each for even).
  Index median_pair[2][2] = {{0, 0}, {0, 0}};
  int median_pair_count = 0;
};

GaussianGram gaussian_gram(const Vector& a, const KernelSpec& kernel);

/// nHSIC from two precomputed Gram matrices of equal size.
double nhsic(const GaussianGram& gx, const GaussianGram& gy);

/// Pulls d(objective)/d(HKH) back to d(objective)/d(a). `d_centered` must be
/// doubly centered, which holds for any gradient of nHSIC with respect to HKH.
Vector gaussian_gram_backprop(const Vector& a, const GaussianGram& g, const Matrix& d_centered,
                              const KernelSpec& kernel);

/// Biased V-statistic HSIC: tr(K H L H) / n^2.
double hsic(const Vector& x, const Vector& y, const KernelSpec& kernel = {});

/// HSIC(x, y) / sqrt(HSIC(x, x) HSIC(y, y)), in [0, 1]. Requires n >= 4 and
/// nonconstant inputs (DegenerateInputError otherwise).
double nhsic(const Vector& x, const Vector& y, const KernelSpec& kernel = {});

struct NhsicGrad {
  double value = 0.0;
  Vector d_x;
  Vector d_y;
};

/// nHSIC and its exact gradient with respect to both sample vectors. With the
/// median heuristic the bandwidth is differentiated through as well.
NhsicGrad nhsic_grad(const Vector& x, const Vector& y, const KernelSpec& kernel = {});

}  // namespace pcf
