#pragma once

#include <cstdint>
#include <vector>

#include "pcf/types.hpp"

namespace pcf {

/// Ordinary least squares fit with classical t-test inference.
struct OlsFit {
  Vector coefficients;  ///< intercept first when one was requested
  Vector residuals;
  Vector std_errors;
  Vector t_stats;
  Vector p_values;
  Index dof = 0;
  double sigma2 = 0.0;  ///< RSS / dof
};

/// Least squares of y on `design` (optionally augmented with a leading column
/// of ones). Throws InsufficientSamplesError when n <= d and
/// SingularMatrixError when the design is rank deficient.
OlsFit ols_fit(const Matrix& design, const Vector& y, bool intercept);

/// Regularized incomplete beta I_x(a, b), continued-fraction evaluation.
double regularized_incomplete_beta(double a, double b, double x);

/// Two-sided Student-t tail P(|T_dof| >= |t|).
double t_p_value(double t, double dof);

/// (A^T A + lambda I)^{-1} A^T b.
Vector ridge_solve(const Matrix& a, const Vector& b, double lambda);

struct Fold {
  std::vector<Index> train;
  std::vector<Index> test;
};

/// Seeded permutation of 0..n-1 cut into k folds whose sizes differ by at most
/// one. Every index lands in exactly one test set.
std::vector<Fold> kfold_split(Index n, Index k, std::uint64_t seed);

/// Gathers rows by index.
template <typename Derived>
MatrixX<typename Derived::Scalar> take_rows(const Eigen::MatrixBase<Derived>& m,
                                            const std::vector<Index>& rows) {
  MatrixX<typename Derived::Scalar> out(static_cast<Index>(rows.size()), m.cols());
  for (std::size_t i = 0; i < rows.size(); ++i) out.row(static_cast<Index>(i)) = m.row(rows[i]);
  return out;
}

template <typename Derived>
VectorX<typename Derived::Scalar> take(const Eigen::MatrixBase<Derived>& v,
                                       const std::vector<Index>& idx) {
  VectorX<typename Derived::Scalar> out(static_cast<Index>(idx.size()));
  for (std::size_t i = 0; i < idx.size(); ++i) out[static_cast<Index>(i)] = v[idx[i]];
  return out;
}

/// Median of a copy of the values (mean of the two middle elements for even n).
double median(std::vector<double> values);

}  // namespace pcf
