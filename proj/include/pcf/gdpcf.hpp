#pragma once

#include <array>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "pcf/dr.hpp"
#include "pcf/hsic.hpp"
#include "pcf/types.hpp"

namespace pcf {

/// Which residual-based conditional-independence penalty closes the CI sum.
enum class ResidualPenalty {
  /// nHSIC(z_x, y - yhat(x)), yhat(x) the ridge fit of y on x alone.
  kLatentVsTreatmentResidual,
  /// nHSIC(x, y - yhat(z)), yhat(z) the ridge fit of y on [z_x, z_c, z_y].
  kTreatmentVsLatentResidual,
};

/// How the ridge-derived coefficients enter the gradient.
enum class RidgeGradient {
  kThroughSolve,  ///< coefficients are differentiated as functions of v
  kDetached,      ///< coefficients held fixed at their current values
};

struct GdpcfHyper {
  double lambda_ridge = 0.01;
  double gamma = 1.0;  ///< weight of log MSE
  double eta = 1.0;    ///< weight of log CI
  double learning_rate = 0.001;
  int steps = 3000;
  double mse_floor = 1e-12;
  std::uint64_t seed = 0;
  ResidualPenalty residual = ResidualPenalty::kLatentVsTreatmentResidual;
  RidgeGradient ridge_gradient = RidgeGradient::kThroughSolve;
  KernelSpec kernel = KernelSpec::median_heuristic();
  /// ICA components extracted for initialization (one per latent role).
  Index init_components = 3;
  IcaOptions ica{};

  /// floor(max(0.1 n, 25)), capped at n.
  static Index batch_size(Index n);
};

/// Coefficients of x ~ a_x z_x + a_c z_c and y ~ alpha x + b_y z_y + b_c z_c.
struct GdpcfCoefficients {
  double a_x = 0.0;
  double a_c = 0.0;
  double alpha = 0.0;
  double b_y = 0.0;
  double b_c = 0.0;
};

struct GdpcfState {
  Vector v_x;
  Vector v_y;
  Vector v_c;
  GdpcfCoefficients coef;
  std::vector<double> loss_trace;
  bool random_init = false;
  Index steps_taken = 0;
  /// Means removed from the training data; applied again by gdpcf_extract.
  RowVector u_mean;
  double x_mean = 0.0;
  double y_mean = 0.0;
};

/// Rows used for one loss evaluation. The model has no intercepts, so callers
/// pass centered data.
struct GdpcfBatch {
  Matrix u;
  Vector x;
  Vector y;
};

struct GdpcfLossTerms {
  double loss = 0.0;
  double mse = 0.0;
  double ci = 0.0;
  /// nHSIC(z_x,z_y), nHSIC(z_x,z_c), nHSIC(z_y,z_c), nHSIC(z_y,x), residual term.
  std::array<double, 5> nhsic{};
  GdpcfCoefficients coef;
};

struct GdpcfGradient {
  Vector d_v_x;
  Vector d_v_y;
  Vector d_v_c;
  GdpcfLossTerms terms;
};

class GdpcfDivergenceError : public std::runtime_error {
 public:
  GdpcfDivergenceError(const std::string& what, Index step) : std::runtime_error(what), step(step) {}
  Index step;
};

/// ICA-based starting point: the ICA component chosen by p-value selection
/// becomes v_c; of the other two, the one relatively more predictive of x
/// (lower log p_x - log p_y) becomes v_x and the other v_y. Falls back to
/// N(0, 0.01^2) vectors, flagged `random_init`, when ICA does not converge.
GdpcfState gdpcf_init(const Matrix& u, const Vector& x, const Vector& y, const GdpcfHyper& hyper = {});

/// Ridge closed forms for the current projections on a batch.
GdpcfCoefficients gdpcf_coefficients(const GdpcfState& state, const GdpcfBatch& batch,
                                     const GdpcfHyper& hyper);

/// gamma log max(MSE, floor) + eta log max(CI, floor), with every term exposed.
GdpcfLossTerms gdpcf_loss_terms(const GdpcfState& state, const GdpcfBatch& batch, const GdpcfHyper& hyper);
double gdpcf_loss(const GdpcfState& state, const GdpcfBatch& batch, const GdpcfHyper& hyper);

/// Analytic gradient of gdpcf_loss with respect to (v_x, v_y, v_c).
GdpcfGradient gdpcf_gradient(const GdpcfState& state, const GdpcfBatch& batch, const GdpcfHyper& hyper);

/// Mini-batch SGD from gdpcf_init. Batches are drawn without replacement and
/// reshuffled each epoch. The returned coefficients are refitted on the full
/// centered data. Throws GdpcfDivergenceError on a non-finite loss.
GdpcfState gdpcf_train(const Matrix& u, const Vector& x, const Vector& y, const GdpcfHyper& hyper = {});

/// Continues training from an explicit initial state.
GdpcfState gdpcf_train_from(GdpcfState state, const Matrix& u, const Vector& x, const Vector& y,
                            const GdpcfHyper& hyper);

/// Confounder estimate (U - u_mean) v_c.
Vector gdpcf_extract(const GdpcfState& state, const Matrix& u);

/// Finite-difference check of gdpcf_gradient on random coordinates.
struct GradCheckReport {
  double max_rel_error = 0.0;
  int coordinates = 0;
  std::vector<double> analytic;
  std::vector<double> numeric;
};

GradCheckReport gdpcf_gradcheck(const GdpcfState& state, const GdpcfBatch& batch, const GdpcfHyper& hyper,
                                int coordinates, double h, std::uint64_t seed);

}  // namespace pcf
