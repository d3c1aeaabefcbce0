#include "pcf/dr.hpp"

#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "pcf/random.hpp"

namespace pcf {

std::string_view to_string(ReductionMethod m) {
  switch (m) {
    case ReductionMethod::kPca: return "pca";
    case ReductionMethod::kPls: return "pls";
    case ReductionMethod::kIca: return "ica";
  }
  return "unknown";
}

Matrix ReductionOutput::transform(const Matrix& u) const {
  if (u.cols() != weights.rows()) throw std::invalid_argument("transform: proxy dimension mismatch");
  return (u.rowwise() - mean) * weights;
}

Matrix standardize_columns(const Matrix& u) {
  Matrix out = u;
  for (Index j = 0; j < u.cols(); ++j) {
    const double sd = std::sqrt(sample_variance(u.col(j)));
    if (sd > 0.0) out.col(j) /= sd;
  }
  return out;
}

namespace {

// Flip column j (and the matching mixing row) so the largest-magnitude weight
// entry is positive.
void fix_signs(ReductionOutput& out) {
  for (Index j = 0; j < out.weights.cols(); ++j) {
    Index arg = 0;
    out.weights.col(j).cwiseAbs().maxCoeff(&arg);
    if (out.weights(arg, j) < 0.0) {
      out.weights.col(j) *= -1.0;
      out.z_hat.col(j) *= -1.0;
      if (out.mixing) out.mixing->row(j) *= -1.0;
    }
  }
}

void check_rank_request(const Matrix& u, Index k, const char* who) {
  if (u.rows() < 2) throw InsufficientSamplesError(std::string(who) + ": need at least 2 rows");
  if (k < 1) throw std::invalid_argument(std::string(who) + ": k must be >= 1");
  if (k > std::min(u.rows(), u.cols())) {
    std::ostringstream msg;
    msg << who << ": k=" << k << " exceeds min(n, p)=" << std::min(u.rows(), u.cols());
    throw std::invalid_argument(msg.str());
  }
}

// (W W^T)^{-1/2} W
Matrix symmetric_decorrelation(const Matrix& w) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(w * w.transpose());
  const Vector inv_sqrt = es.eigenvalues().cwiseMax(std::numeric_limits<double>::min()).cwiseSqrt().cwiseInverse();
  return es.eigenvectors() * inv_sqrt.asDiagonal() * es.eigenvectors().transpose() * w;
}

}  // namespace

ReductionOutput pca_fit(const Matrix& u, Index k) {
  check_rank_request(u, k, "pca_fit");
  ReductionOutput out;
  out.method = ReductionMethod::kPca;
  out.mean = u.colwise().mean();
  const Matrix uc = u.rowwise() - out.mean;

  Eigen::BDCSVD<Matrix> svd(uc, Eigen::ComputeThinV);
  const Vector& s = svd.singularValues();
  out.weights = svd.matrixV().leftCols(k);
  out.z_hat = uc * out.weights;
  out.strength = s.head(k).array().square() / static_cast<double>(u.rows() - 1);

  const double tol = s.size() > 0 ? s[0] * static_cast<double>(std::max(u.rows(), u.cols())) *
                                        std::numeric_limits<double>::epsilon()
                                  : 0.0;
  Index rank = 0;
  while (rank < s.size() && s[rank] > tol) ++rank;
  if (k > rank) {
    std::ostringstream msg;
    msg << "pca_fit: requested " << k << " components but centered proxies have rank " << rank
        << "; surplus components carry zero variance";
    out.warnings.push_back(msg.str());
  }
  fix_signs(out);
  return out;
}

ReductionOutput pls_fit(const Matrix& u, const Vector& x, const Vector& y, Index k) {
  if (x.size() != u.rows() || y.size() != u.rows())
    throw std::invalid_argument("pls_fit: x, y and U must have matching rows");
  if (k > 2)
    throw std::invalid_argument("pls_fit: the cross-covariance with [x, y] has at most 2 directions; k must be <= 2");
  check_rank_request(u, k, "pls_fit");

  ReductionOutput out;
  out.method = ReductionMethod::kPls;
  out.mean = u.colwise().mean();
  const Matrix uc = u.rowwise() - out.mean;
  Matrix targets(u.rows(), 2);
  targets.col(0) = x.array() - x.mean();
  targets.col(1) = y.array() - y.mean();
  const Matrix cross = uc.transpose() * targets / static_cast<double>(u.rows() - 1);

  Eigen::JacobiSVD<Matrix> svd(cross, Eigen::ComputeThinU);
  out.weights = svd.matrixU().leftCols(k);
  out.strength = svd.singularValues().head(k);
  out.z_hat = uc * out.weights;
  fix_signs(out);
  return out;
}

Whitening whiten(const Matrix& u, Index k) {
  check_rank_request(u, k, "whiten");
  Whitening w;
  w.mean = u.colwise().mean();
  const Matrix uc = u.rowwise() - w.mean;
  Eigen::BDCSVD<Matrix> svd(uc, Eigen::ComputeThinV);
  const Vector& s = svd.singularValues();
  if (!(s[k - 1] > s[0] * 1e-10)) {
    std::ostringstream msg;
    msg << "whiten: only " << (s.array() > s[0] * 1e-10).count()
        << " non-degenerate directions available for k=" << k << " (too few samples?)";
    throw InsufficientSamplesError(msg.str());
  }
  const double root_dof = std::sqrt(static_cast<double>(u.rows() - 1));
  w.transform = svd.matrixV().leftCols(k) * (root_dof * s.head(k).cwiseInverse()).asDiagonal();
  w.whitened = uc * w.transform;
  return w;
}

ReductionOutput ica_fit(const Matrix& u, Index k, const IcaOptions& opts) {
  const Whitening white = whiten(u, k);
  const Matrix& xw = white.whitened;  // n x k
  const double n = static_cast<double>(u.rows());

  Rng rng(opts.seed);
  Matrix w = symmetric_decorrelation(rng.normal_matrix(k, k));

  ReductionOutput out;
  out.method = ReductionMethod::kIca;
  out.converged = false;
  for (int it = 1; it <= opts.max_iter; ++it) {
    const Matrix wx = xw * w.transpose();  // n x k
    const Matrix g = wx.array().tanh().matrix();
    const Vector g_prime_mean = (1.0 - g.array().square()).colwise().mean().transpose();
    const Matrix w_next =
        symmetric_decorrelation(g.transpose() * xw / n - g_prime_mean.asDiagonal() * w);
    const double lim = ((w_next * w.transpose()).diagonal().cwiseAbs().array() - 1.0).abs().maxCoeff();
    w = w_next;
    out.iterations = it;
    if (lim < opts.tol) {
      out.converged = true;
      break;
    }
  }

  out.mean = white.mean;
  out.weights = white.transform * w.transpose();
  out.z_hat = xw * w.transpose();
  const Matrix uc = u.rowwise() - white.mean;
  // Least-squares mixing: z_hat has identity sample covariance.
  out.mixing = out.z_hat.transpose() * uc / (n - 1.0);
  if (!out.converged) {
    std::ostringstream msg;
    msg << "ica_fit: no convergence within " << opts.max_iter << " iterations";
    out.warnings.push_back(msg.str());
  }
  fix_signs(out);
  return out;
}

}  // namespace pcf
