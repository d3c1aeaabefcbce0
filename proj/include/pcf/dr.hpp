#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "pcf/types.hpp"

namespace pcf {

enum class ReductionMethod { kPca, kPls, kIca };

std::string_view to_string(ReductionMethod m);

/// Candidate latent components extracted from a proxy matrix U (n x p).
///
/// z_hat = (U - mean) * weights. For PCA and PLS the weight columns are
/// orthonormal; for ICA they are the unmixing map composed with the whitening
/// transform, and `mixing` holds A with U - mean ~ z_hat * A.
struct ReductionOutput {
  ReductionMethod method = ReductionMethod::kPca;
  Matrix z_hat;    ///< n x k
  Matrix weights;  ///< p x k
  std::optional<Matrix> mixing;  ///< k x p, ICA only
  RowVector mean;                ///< column means removed before projection
  /// PCA: component variances. PLS: singular values of the cross-covariance.
  /// ICA: empty.
  Vector strength;
  bool converged = true;
  int iterations = 0;
  std::vector<std::string> warnings;

  Index components() const { return z_hat.cols(); }
  /// Applies the fitted projection to new proxy rows.
  Matrix transform(const Matrix& u) const;
};

/// Columns scaled to unit sample standard deviation (constant columns are left
/// unscaled). Centering is not applied.
Matrix standardize_columns(const Matrix& u);

/// Principal components: top-k right singular vectors of the centered U,
/// ordered by decreasing explained variance. Each weight column is sign-fixed
/// so its largest-magnitude entry is positive. Components beyond the numerical
/// rank have zero variance and add a warning.
ReductionOutput pca_fit(const Matrix& u, Index k);

/// SVD form of PLS between U and [x, y]: weights are the left singular vectors
/// of the cross-covariance C_{U,[x,y]}, so k <= 2.
ReductionOutput pls_fit(const Matrix& u, const Vector& x, const Vector& y, Index k);

struct IcaOptions {
  int max_iter = 200;
  double tol = 1e-4;
  std::uint64_t seed = 0;
};

/// PCA whitening of the centered U to k dimensions.
struct Whitening {
  Matrix whitened;   ///< n x k, sample covariance I
  Matrix transform;  ///< p x k, whitened = (U - mean) * transform
  RowVector mean;
};

Whitening whiten(const Matrix& u, Index k);

/// Symmetric fixed-point FastICA with the log-cosh contrast (a = 1) on the
/// whitened data. Output components have unit sample variance. Non-convergence
/// is reported through `converged`, not an exception.
ReductionOutput ica_fit(const Matrix& u, Index k, const IcaOptions& opts = {});

}  // namespace pcf
