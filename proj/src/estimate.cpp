#include "pcf/estimate.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "pcf/dr.hpp"
#include "pcf/random.hpp"
#include "pcf/stats.hpp"

namespace pcf {

namespace {
constexpr double kZ975 = 1.96;
}

double t_quantile_975(double dof) {
  if (!(dof > 0.0)) throw std::invalid_argument("t_quantile_975: dof must be positive");
  double lo = 0.0;
  double hi = 1.0;
  while (t_p_value(hi, dof) > 0.05) hi *= 2.0;
  for (int i = 0; i < 200 && hi - lo > 1e-13 * hi; ++i) {
    const double mid = 0.5 * (lo + hi);
    (t_p_value(mid, dof) > 0.05 ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

CausalEstimate adjusted_effect(const Vector& x, const Vector& y, const Matrix& z_adj,
                               const EffectOptions& opts) {
  const Index n = x.size();
  if (y.size() != n || (z_adj.cols() > 0 && z_adj.rows() != n))
    throw std::invalid_argument("adjusted_effect: length mismatch");
  if (n <= z_adj.cols() + 2) {
    std::ostringstream msg;
    msg << "adjusted_effect: n=" << n << " too small for " << z_adj.cols() << " adjustment columns";
    throw InsufficientSamplesError(msg.str());
  }
  Matrix design(n, 1 + z_adj.cols());
  design.col(0) = x;
  if (z_adj.cols() > 0) design.rightCols(z_adj.cols()) = z_adj;

  OlsFit fit;
  try {
    fit = ols_fit(design, y, true);
  } catch (const RankDeficientError& e) {
    std::vector<Index> offending;
    std::ostringstream msg;
    msg << "adjusted_effect: collinear adjustment set; dependent columns:";
    for (Index c : e.columns) {
      // Design column 0 is x, -1 the intercept; report adjustment-set indices.
      if (c >= 1) {
        offending.push_back(c - 1);
        msg << " z[" << (c - 1) << "]";
      } else {
        msg << (c == 0 ? " x" : " intercept");
      }
    }
    throw RankDeficientError(msg.str(), std::move(offending));
  }

  CausalEstimate est;
  est.alpha_hat = fit.coefficients[1];
  est.std_error = fit.std_errors[1];
  const double q = opts.t_quantile ? t_quantile_975(static_cast<double>(fit.dof)) : kZ975;
  est.ci_lo = est.alpha_hat - q * est.std_error;
  est.ci_hi = est.alpha_hat + q * est.std_error;
  std::ostringstream adj;
  adj << "intercept + x + " << z_adj.cols() << " adjustment column(s)";
  est.adjustment = adj.str();
  return est;
}

CausalEstimate pca_baseline_effect(const Matrix& u, const Vector& x, const Vector& y, Index k,
                                   const EffectOptions& opts) {
  if (k == 0) {
    auto est = adjusted_effect(x, y, Matrix(x.size(), 0), opts);
    est.adjustment = "unadjusted";
    return est;
  }
  const auto pcs = pca_fit(u, k);
  auto est = adjusted_effect(x, y, pcs.z_hat, opts);
  est.adjustment = "first " + std::to_string(k) + " principal components of U";
  return est;
}

// ---------------------------------------------------------------------------

ElasticNetSolver::ElasticNetSolver(const Matrix& x, const Vector& y, std::vector<bool> penalty_mask)
    : penalized_(std::move(penalty_mask)) {
  const Index n = x.rows();
  const Index p = x.cols();
  if (y.size() != n) throw std::invalid_argument("elastic net: X and y row counts differ");
  if (static_cast<Index>(penalized_.size()) != p)
    throw std::invalid_argument("elastic net: penalty mask length must equal column count");
  if (n < 2) throw InsufficientSamplesError("elastic net: need at least 2 samples");

  mean_ = x.colwise().mean();
  y_mean_ = y.mean();
  Matrix xs = x.rowwise() - mean_;
  scale_ = Vector::Ones(p);
  for (Index j = 0; j < p; ++j) {
    if (!penalized_[static_cast<std::size_t>(j)]) continue;
    const double sd = std::sqrt(xs.col(j).squaredNorm() / static_cast<double>(n));
    scale_[j] = sd;
    if (sd > 0.0) xs.col(j) /= sd;
  }
  const Vector yc = y.array() - y_mean_;
  const double inv_n = 1.0 / static_cast<double>(n);
  gram_.noalias() = xs.transpose() * xs * inv_n;
  cross_ = xs.transpose() * yc * inv_n;
  yy_ = yc.squaredNorm() * inv_n;
  beta_ = Vector::Zero(p);
}

double ElasticNetSolver::lambda_max(double mix) const {
  const Index p = features();
  std::vector<Index> free_cols;
  for (Index j = 0; j < p; ++j)
    if (!penalized_[static_cast<std::size_t>(j)] && gram_(j, j) > 0.0) free_cols.push_back(j);
  Vector grad = cross_;
  if (!free_cols.empty()) {
    const Index f = static_cast<Index>(free_cols.size());
    Matrix g_ff(f, f);
    Vector c_f(f);
    for (Index a = 0; a < f; ++a) {
      c_f[a] = cross_[free_cols[a]];
      for (Index b = 0; b < f; ++b) g_ff(a, b) = gram_(free_cols[a], free_cols[b]);
    }
    const Vector b_f = g_ff.ldlt().solve(c_f);
    for (Index a = 0; a < f; ++a) grad -= gram_.col(free_cols[a]) * b_f[a];
  }
  double m = 0.0;
  for (Index j = 0; j < p; ++j)
    if (penalized_[static_cast<std::size_t>(j)]) m = std::max(m, std::abs(grad[j]));
  return m / std::max(mix, 1e-3);
}

double ElasticNetSolver::objective(const Vector& b, double lambda, double mix) const {
  double pen = 0.0;
  for (Index j = 0; j < b.size(); ++j)
    if (penalized_[static_cast<std::size_t>(j)])
      pen += mix * std::abs(b[j]) + 0.5 * (1.0 - mix) * b[j] * b[j];
  const double quad = yy_ - 2.0 * cross_.dot(b) + b.dot(gram_ * b);
  return 0.5 * quad + lambda * pen;
}

ElasticNetFit ElasticNetSolver::fit(double lambda, double mix, const ElasticNetOptions& opts) {
  if (!(lambda >= 0.0)) throw std::invalid_argument("elastic net: lambda must be >= 0");
  if (!(mix >= 0.0 && mix <= 1.0)) throw std::invalid_argument("elastic net: mix must lie in [0,1]");
  const Index p = features();
  const double l1 = lambda * mix;
  const double l2 = lambda * (1.0 - mix);

  ElasticNetFit out;
  Vector grad = cross_ - gram_ * beta_;  // X~^T r / n

  auto sweep = [&](bool active_only) {
    double max_delta = 0.0;
    for (Index j = 0; j < p; ++j) {
      const double gjj = gram_(j, j);
      if (!(gjj > 0.0)) continue;
      const bool pen = penalized_[static_cast<std::size_t>(j)];
      if (active_only && pen && beta_[j] == 0.0) continue;
      const double rho = grad[j] + gjj * beta_[j];
      double next;
      if (pen) {
        const double shrunk = std::abs(rho) > l1 ? std::copysign(std::abs(rho) - l1, rho) : 0.0;
        next = shrunk / (gjj + l2);
      } else {
        next = rho / gjj;
      }
      const double delta = next - beta_[j];
      if (delta != 0.0) {
        grad.noalias() -= gram_.col(j) * delta;
        beta_[j] = next;
        max_delta = std::max(max_delta, std::abs(delta));
      }
    }
    ++out.sweeps;
    if (opts.record_objective) out.objective_trace.push_back(objective(beta_, lambda, mix));
    return max_delta;
  };

  while (out.sweeps < opts.max_sweeps) {
    grad = cross_ - gram_ * beta_;
    if (sweep(false) < opts.tol) {
      out.converged = true;
      break;
    }
    while (out.sweeps < opts.max_sweeps && sweep(true) >= opts.tol) {
    }
  }

  out.coefficients.resize(p);
  for (Index j = 0; j < p; ++j) out.coefficients[j] = scale_[j] > 0.0 ? beta_[j] / scale_[j] : 0.0;
  out.intercept = y_mean_ - mean_.dot(out.coefficients);
  return out;
}

ElasticNetFit elastic_net_fit(const Matrix& x, const Vector& y, double lambda, double mix,
                              const std::vector<bool>& penalty_mask, const ElasticNetOptions& opts) {
  ElasticNetSolver solver(x, y, penalty_mask);
  return solver.fit(lambda, mix, opts);
}

std::string_view to_string(PenalizedMethod m) {
  switch (m) {
    case PenalizedMethod::kLasso: return "lasso";
    case PenalizedMethod::kRidge: return "ridge";
    case PenalizedMethod::kElasticNet: return "enet";
  }
  return "unknown";
}

PenalizedMethod parse_penalized_method(std::string_view tag) {
  if (tag == "lasso") return PenalizedMethod::kLasso;
  if (tag == "ridge") return PenalizedMethod::kRidge;
  if (tag == "enet" || tag == "elastic-net") return PenalizedMethod::kElasticNet;
  throw std::invalid_argument("unknown penalized method '" + std::string(tag) + "'");
}

double mix_for(PenalizedMethod m) {
  switch (m) {
    case PenalizedMethod::kLasso: return 1.0;
    case PenalizedMethod::kRidge: return 0.0;
    case PenalizedMethod::kElasticNet: return 0.5;
  }
  return 0.5;
}

BaselineEstimate cv_regression_baseline(const Matrix& u, const Vector& x, const Vector& y,
                                        PenalizedMethod method, const CvOptions& opts) {
  const Index n = u.rows();
  if (x.size() != n || y.size() != n) throw std::invalid_argument("cv baseline: length mismatch");
  if (n < opts.folds) throw InsufficientSamplesError("cv baseline: need n >= folds");
  if (opts.grid_points < 1) throw std::invalid_argument("cv baseline: empty lambda grid");

  Matrix design(n, 1 + u.cols());
  design.col(0) = x;
  design.rightCols(u.cols()) = u;
  std::vector<bool> mask(static_cast<std::size_t>(design.cols()), true);
  mask[0] = false;
  const double mix = mix_for(method);

  BaselineEstimate out;
  ElasticNetSolver full(design, y, mask);
  const double lmax = full.lambda_max(mix);
  out.lambda_grid.resize(static_cast<std::size_t>(opts.grid_points));
  for (int i = 0; i < opts.grid_points; ++i) {
    const double t = opts.grid_points == 1 ? 0.0 : static_cast<double>(i) / (opts.grid_points - 1);
    out.lambda_grid[static_cast<std::size_t>(i)] = lmax * std::pow(opts.lambda_ratio, t);
  }

  std::vector<double> sse(out.lambda_grid.size(), 0.0);
  for (const auto& fold : kfold_split(n, opts.folds, derive_seed(opts.seed, 1))) {
    ElasticNetSolver solver(take_rows(design, fold.train), take(y, fold.train), mask);
    const Matrix x_test = take_rows(design, fold.test);
    const Vector y_test = take(y, fold.test);
    for (std::size_t l = 0; l < out.lambda_grid.size(); ++l) {
      const auto f = solver.fit(out.lambda_grid[l], mix);
      sse[l] += ((y_test - x_test * f.coefficients).array() - f.intercept).square().sum();
    }
  }
  std::size_t best = 0;
  for (std::size_t l = 0; l < sse.size(); ++l) {
    out.cv_mse.push_back(sse[l] / static_cast<double>(n));
    if (sse[l] < sse[best]) best = l;
  }
  out.lambda = out.lambda_grid[best];

  ElasticNetFit refit;
  for (std::size_t l = 0; l <= best; ++l) refit = full.fit(out.lambda_grid[l], mix);
  out.estimate.alpha_hat = refit.coefficients[0];

  Rng rng(derive_seed(opts.seed, 2));
  std::vector<double> boot;
  boot.reserve(static_cast<std::size_t>(opts.bootstrap));
  std::vector<Index> rows(static_cast<std::size_t>(n));
  for (int b = 0; b < opts.bootstrap; ++b) {
    for (auto& r : rows) r = static_cast<Index>(rng.below(static_cast<std::uint64_t>(n)));
    ElasticNetSolver solver(take_rows(design, rows), take(y, rows), mask);
    // Walk a short path to the chosen lambda for a warm start.
    ElasticNetFit f;
    for (std::size_t l = 0; l <= best; l += std::max<std::size_t>(1, best / 5)) f = solver.fit(out.lambda_grid[l], mix);
    f = solver.fit(out.lambda, mix);
    boot.push_back(f.coefficients[0]);
  }
  double se = 0.0;
  if (boot.size() > 1) {
    double mean = 0.0;
    for (double v : boot) mean += v;
    mean /= static_cast<double>(boot.size());
    for (double v : boot) se += (v - mean) * (v - mean);
    se = std::sqrt(se / static_cast<double>(boot.size() - 1));
  }
  out.estimate.std_error = se;
  out.estimate.ci_lo = out.estimate.alpha_hat - kZ975 * se;
  out.estimate.ci_hi = out.estimate.alpha_hat + kZ975 * se;
  out.estimate.adjustment = std::string(to_string(method)) + " on [x, U], x unpenalized";
  return out;
}

// ---------------------------------------------------------------------------

MetricsRecord evaluate(const Vector& z_hat, const Vector& z_true, double alpha_hat, double alpha_true,
                       double alpha_baseline, std::string baseline_tag) {
  MetricsRecord m;
  m.baseline_tag = std::move(baseline_tag);
  if (z_hat.size() > 0 && z_true.size() > 0) {
    if (z_hat.size() != z_true.size()) throw std::invalid_argument("evaluate: length mismatch");
    try {
      m.abs_cor = std::min(1.0, std::abs(pearson_correlation(z_hat, z_true)));
    } catch (const DegenerateInputError&) {
      m.abs_cor.reset();
    }
  }
  m.ae = std::abs(alpha_true - alpha_hat);
  const double denom = std::abs(alpha_true - alpha_baseline);
  if (denom > 0.0 && std::isfinite(denom)) m.aer = m.ae / denom;
  return m;
}

}  // namespace pcf
