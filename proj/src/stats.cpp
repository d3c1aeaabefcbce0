#include "pcf/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "pcf/random.hpp"

namespace pcf {

OlsFit ols_fit(const Matrix& design, const Vector& y, bool intercept) {
  const Index n = design.rows();
  if (y.size() != n) throw std::invalid_argument("ols_fit: design and response row counts differ");
  const Index d = design.cols() + (intercept ? 1 : 0);
  if (n <= d) {
    std::ostringstream msg;
    msg << "ols_fit: need more samples than coefficients (n=" << n << ", d=" << d << ")";
    throw InsufficientSamplesError(msg.str());
  }

  Matrix x(n, d);
  if (intercept) {
    x.col(0).setOnes();
    x.rightCols(design.cols()) = design;
  } else {
    x = design;
  }

  Eigen::ColPivHouseholderQR<Matrix> qr(x);
  if (qr.rank() < d) {
    std::ostringstream msg;
    msg << "ols_fit: design is rank deficient (rank " << qr.rank() << " < " << d
        << "); dependent design columns:";
    const auto& perm = qr.colsPermutation().indices();
    std::vector<Index> dependent;
    for (Index i = qr.rank(); i < d; ++i) {
      dependent.push_back(perm[i] - (intercept ? 1 : 0));
      msg << ' ' << dependent.back();
    }
    if (intercept) msg << " (intercept is column -1)";
    throw RankDeficientError(msg.str(), std::move(dependent));
  }

  OlsFit fit;
  fit.coefficients = qr.solve(y);
  fit.residuals = y - x * fit.coefficients;
  fit.dof = n - d;
  fit.sigma2 = fit.residuals.squaredNorm() / static_cast<double>(fit.dof);

  // (X^T X)^{-1} = P R^{-1} R^{-T} P^T.
  const Matrix r = qr.matrixR().topLeftCorner(d, d).template triangularView<Eigen::Upper>();
  const Matrix r_inv =
      r.template triangularView<Eigen::Upper>().solve(Matrix::Identity(d, d));
  const Matrix cov_perm = r_inv * r_inv.transpose();
  const auto& perm = qr.colsPermutation().indices();
  fit.std_errors.resize(d);
  for (Index i = 0; i < d; ++i)
    fit.std_errors[perm[i]] = std::sqrt(fit.sigma2 * cov_perm(i, i));

  fit.t_stats.resize(d);
  fit.p_values.resize(d);
  for (Index j = 0; j < d; ++j) {
    const double se = fit.std_errors[j];
    double t;
    if (se > 0.0) {
      t = fit.coefficients[j] / se;
    } else {
      // Exact fit: any nonzero coefficient is infinitely significant.
      t = fit.coefficients[j] == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
    }
    fit.t_stats[j] = t;
    fit.p_values[j] = t_p_value(t, static_cast<double>(fit.dof));
  }
  return fit;
}

namespace {

// Continued fraction for I_x(a, b), modified Lentz.
double beta_continued_fraction(double a, double b, double x) {
  constexpr double kTiny = 1e-300;
  constexpr double kEps = 1e-16;
  constexpr int kMaxIter = 20000;
  const double qab = a + b;
  const double qap = a + 1.0;
  const double qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::abs(d) < kTiny) d = kTiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= kMaxIter; ++m) {
    const double m2 = 2.0 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::abs(del - 1.0) < kEps) return h;
  }
  return h;
}

// I_x(a, b) given both x and y = 1 - x, so callers can pass a y computed
// without cancellation.
double incomplete_beta(double a, double b, double x, double y) {
  if (x <= 0.0) return 0.0;
  if (y <= 0.0) return 1.0;
  const double log_front = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) +
                           a * std::log(x) + b * std::log(y);
  const double front = std::exp(log_front);
  if (x < (a + 1.0) / (a + b + 2.0)) return front * beta_continued_fraction(a, b, x) / a;
  return 1.0 - front * beta_continued_fraction(b, a, y) / b;
}

}  // namespace

double regularized_incomplete_beta(double a, double b, double x) {
  if (!(a > 0.0 && b > 0.0)) throw std::invalid_argument("incomplete beta: a, b must be > 0");
  if (!(x >= 0.0 && x <= 1.0)) throw std::invalid_argument("incomplete beta: x outside [0,1]");
  return incomplete_beta(a, b, x, 1.0 - x);
}

double t_p_value(double t, double dof) {
  if (!(dof > 0.0)) throw std::invalid_argument("t_p_value: dof must be positive");
  if (std::isnan(t)) throw std::invalid_argument("t_p_value: t is NaN");
  if (std::isinf(t)) return 0.0;
  const double t2 = t * t;
  if (t2 == 0.0) return 1.0;
  // P(|T| >= |t|) = I_{dof/(dof+t^2)}(dof/2, 1/2).
  const double denom = dof + t2;
  const double p = incomplete_beta(0.5 * dof, 0.5, dof / denom, t2 / denom);
  return std::clamp(p, 0.0, 1.0);
}

Vector ridge_solve(const Matrix& a, const Vector& b, double lambda) {
  if (a.rows() != b.size()) throw std::invalid_argument("ridge_solve: row count mismatch");
  if (!(lambda >= 0.0)) throw std::invalid_argument("ridge_solve: lambda must be >= 0");
  Matrix gram = a.transpose() * a;
  gram.diagonal().array() += lambda;
  Eigen::LDLT<Matrix> ldlt(gram);
  if (ldlt.info() != Eigen::Success || !(ldlt.rcond() > 1e-14))
    throw SingularMatrixError("ridge_solve: A^T A + lambda I is singular");
  return ldlt.solve(a.transpose() * b);
}

std::vector<Fold> kfold_split(Index n, Index k, std::uint64_t seed) {
  if (k < 2) throw std::invalid_argument("kfold_split: need k >= 2");
  if (n < k) throw InsufficientSamplesError("kfold_split: need n >= k");
  Rng rng(seed);
  const auto perm = rng.permutation(n);
  std::vector<Fold> folds(static_cast<std::size_t>(k));
  std::vector<Index> fold_of(static_cast<std::size_t>(n));
  const Index base = n / k;
  const Index extra = n % k;
  Index pos = 0;
  for (Index f = 0; f < k; ++f) {
    const Index size = base + (f < extra ? 1 : 0);
    for (Index i = 0; i < size; ++i) fold_of[static_cast<std::size_t>(perm[static_cast<std::size_t>(pos + i)])] = f;
    pos += size;
  }
  for (Index i = 0; i < n; ++i) {
    const auto f = static_cast<std::size_t>(fold_of[static_cast<std::size_t>(i)]);
    for (std::size_t g = 0; g < folds.size(); ++g) {
      if (g == f) folds[g].test.push_back(i);
      else folds[g].train.push_back(i);
    }
  }
  return folds;
}

double median(std::vector<double> values) {
  if (values.empty()) throw std::invalid_argument("median of an empty set");
  const std::size_t mid = values.size() / 2;
  std::nth_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(mid), values.end());
  const double upper = values[mid];
  if (values.size() % 2 == 1) return upper;
  const double lower = *std::max_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(mid));
  return 0.5 * (lower + upper);
}

}  // namespace pcf
