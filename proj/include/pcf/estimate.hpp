#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "pcf/types.hpp"

namespace pcf {

/// Treatment coefficient with a 95% interval.
struct CausalEstimate {
  double alpha_hat = 0.0;
  double std_error = 0.0;
  double ci_lo = 0.0;
  double ci_hi = 0.0;
  std::string adjustment;
};

struct EffectOptions {
  /// Use the Student-t 97.5% quantile for the interval instead of 1.96.
  bool t_quantile = false;
};

/// OLS of y on [1, x, z_adj]; alpha_hat is the x coefficient. `z_adj` may have
/// zero columns. Collinear adjustment columns raise RankDeficientError whose
/// `columns` index into z_adj.
CausalEstimate adjusted_effect(const Vector& x, const Vector& y, const Matrix& z_adj,
                               const EffectOptions& opts = {});

/// adjusted_effect with the first k principal components of U (k = 0 gives
/// the unadjusted slope).
CausalEstimate pca_baseline_effect(const Matrix& u, const Vector& x, const Vector& y, Index k,
                                   const EffectOptions& opts = {});

/// 97.5% quantile of Student-t with `dof` degrees of freedom.
double t_quantile_975(double dof);

// ---------------------------------------------------------------------------
// Elastic net

struct ElasticNetOptions {
  double tol = 1e-7;
  int max_sweeps = 10000;
  bool record_objective = false;
};

struct ElasticNetFit {
  Vector coefficients;  ///< original units
  double intercept = 0.0;
  bool converged = false;
  int sweeps = 0;
  /// Objective of the internally standardized problem after each sweep.
  std::vector<double> objective_trace;
};

/// Cyclic coordinate descent for
///   (1/2n)|y - X b|^2 + lambda [mix |b_pen|_1 + (1 - mix)/2 |b_pen|^2]
/// on centered data with penalized columns scaled to unit (population)
/// standard deviation. The intercept and unpenalized columns are never
/// shrunk. The sufficient statistics are computed once, so one solver can
/// serve a whole lambda path.
class ElasticNetSolver {
 public:
  ElasticNetSolver(const Matrix& x, const Vector& y, std::vector<bool> penalty_mask);

  /// Smallest lambda at which every penalized coefficient is zero.
  double lambda_max(double mix) const;
  /// Warm-starts from the previous solution of this solver.
  ElasticNetFit fit(double lambda, double mix, const ElasticNetOptions& opts = {});
  /// Objective of the standardized problem at standardized coefficients b.
  double objective(const Vector& b_std, double lambda, double mix) const;

  Index features() const { return gram_.rows(); }

 private:
  Matrix gram_;   // X~^T X~ / n
  Vector cross_;  // X~^T y~ / n
  double yy_ = 0.0;
  RowVector mean_;
  Vector scale_;
  double y_mean_ = 0.0;
  std::vector<bool> penalized_;
  Vector beta_;  // standardized, warm start
};

ElasticNetFit elastic_net_fit(const Matrix& x, const Vector& y, double lambda, double mix,
                              const std::vector<bool>& penalty_mask,
                              const ElasticNetOptions& opts = {});

enum class PenalizedMethod { kLasso, kRidge, kElasticNet };

std::string_view to_string(PenalizedMethod m);
PenalizedMethod parse_penalized_method(std::string_view tag);
double mix_for(PenalizedMethod m);

struct CvOptions {
  Index folds = 10;
  int grid_points = 50;
  double lambda_ratio = 1e-4;
  int bootstrap = 200;
  std::uint64_t seed = 0;
};

struct BaselineEstimate {
  CausalEstimate estimate;
  double lambda = 0.0;
  std::vector<double> lambda_grid;
  std::vector<double> cv_mse;
};

/// Regress y on [x, U] with x unpenalized, lambda chosen by k-fold CV over a
/// log-spaced grid from lambda_max down to ratio * lambda_max; the standard
/// error comes from a nonparametric bootstrap at the chosen lambda.
BaselineEstimate cv_regression_baseline(const Matrix& u, const Vector& x, const Vector& y,
                                        PenalizedMethod method, const CvOptions& opts = {});

// ---------------------------------------------------------------------------
// Metrics

struct MetricsRecord {
  std::optional<double> abs_cor;  ///< empty when either vector is constant or absent
  double ae = 0.0;
  std::optional<double> aer;  ///< empty when alpha_true == alpha_baseline
  std::string baseline_tag;
};

/// AbsCor = |corr(z_hat, z_true)|, AE = |alpha_true - alpha_hat|,
/// AER = AE / |alpha_true - alpha_baseline|. Pass an empty z_hat when the
/// method produces no confounder estimate.
MetricsRecord evaluate(const Vector& z_hat, const Vector& z_true, double alpha_hat,
                       double alpha_true, double alpha_baseline, std::string baseline_tag = {});

}  // namespace pcf
