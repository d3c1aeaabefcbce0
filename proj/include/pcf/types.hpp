#pragma once

#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace pcf {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using RowVector = Eigen::RowVectorXd;
using Index = Eigen::Index;

template <typename Scalar>
using MatrixX = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Scalar>
using VectorX = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

/// A matrix, system or input is numerically singular.
class SingularMatrixError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Rank-deficient design; `columns` names the dependent design columns.
class RankDeficientError : public SingularMatrixError {
 public:
  RankDeficientError(const std::string& what, std::vector<Index> columns)
      : SingularMatrixError(what), columns(std::move(columns)) {}
  std::vector<Index> columns;
};

/// Not enough samples for the requested fit.
class InsufficientSamplesError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// An input has zero variance (or is otherwise constant) where spread is required.
class DegenerateInputError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Column-wise mean removal.
template <typename Derived>
MatrixX<typename Derived::Scalar> centered(const Eigen::MatrixBase<Derived>& m) {
  return m.rowwise() - m.colwise().mean();
}

/// Sample variance with n-1 denominator.
template <typename Derived>
typename Derived::Scalar sample_variance(const Eigen::MatrixBase<Derived>& v) {
  const auto n = v.size();
  if (n < 2) return typename Derived::Scalar(0);
  return (v.array() - v.mean()).square().sum() / typename Derived::Scalar(n - 1);
}

template <typename DerivedA, typename DerivedB>
typename DerivedA::Scalar pearson_correlation(const Eigen::MatrixBase<DerivedA>& a,
                                              const Eigen::MatrixBase<DerivedB>& b) {
  using Scalar = typename DerivedA::Scalar;
  const auto ac = (a.array() - a.mean()).matrix();
  const auto bc = (b.array() - b.mean()).matrix();
  const Scalar denom = std::sqrt(ac.squaredNorm() * bc.squaredNorm());
  if (!(denom > Scalar(0))) throw DegenerateInputError("correlation of a constant vector");
  return ac.dot(bc) / denom;
}

}  // namespace pcf
