#pragma once

#include <optional>
#include <vector>

#include "pcf/types.hpp"

namespace pcf {

struct ComponentScore {
  Index index = 0;
  double p_x = 1.0;  ///< z coefficient in x ~ 1 + z
  double p_y = 1.0;  ///< z coefficient in y ~ 1 + x + z
  double score() const { return p_x + p_y; }
};

enum class SelectionMode { kArgmin, kThreshold };

struct SelectionOutput {
  std::vector<ComponentScore> scores;  ///< ascending by score, ties by index
  std::vector<Index> chosen;
  SelectionMode mode = SelectionMode::kArgmin;
  double tau = 0.0;  ///< threshold mode only
};

/// Default climate-mode threshold on p_x + p_y.
inline constexpr double kDefaultSelectionTau = 0.05;

/// Regression p-values of one candidate. A constant candidate scores
/// p_x = p_y = 1.
ComponentScore score_component(const Vector& z, const Vector& x, const Vector& y, Index index = 0);

/// All candidates scored and sorted; the single minimizer of p_x + p_y is chosen.
SelectionOutput select_confounder(const Matrix& z_hat, const Vector& x, const Vector& y);

/// Every candidate with p_x + p_y <= tau, ascending by score. May be empty.
SelectionOutput select_confounders_threshold(const Matrix& z_hat, const Vector& x, const Vector& y,
                                             double tau = kDefaultSelectionTau);

}  // namespace pcf
