#include "pcf/gdpcf.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "pcf/random.hpp"
#include "pcf/select.hpp"
#include "pcf/stats.hpp"

namespace pcf {

Index GdpcfHyper::batch_size(Index n) {
  const auto rule = static_cast<Index>(std::floor(std::max(0.1 * static_cast<double>(n), 25.0)));
  return std::min(rule, n);
}

namespace {

struct RidgeFit {
  Matrix a;
  Vector coef;
  Vector pred;
};

RidgeFit ridge_forward(Matrix a, const Vector& b, double lambda) {
  RidgeFit f;
  f.coef = ridge_solve(a, b, lambda);
  f.pred = a * f.coef;
  f.a = std::move(a);
  return f;
}

// d(objective)/dA for pred = A (A^T A + lambda I)^{-1} A^T b given
// d(objective)/d(pred). With gamma the coefficients and w = M^{-1} A^T g:
//   dA = g gamma^T + b w^T - A (w gamma^T + gamma w^T).
Matrix ridge_backward(const RidgeFit& f, const Vector& b, const Vector& d_pred, double lambda,
                      RidgeGradient mode) {
  Matrix d_a = d_pred * f.coef.transpose();
  if (mode == RidgeGradient::kDetached) return d_a;
  Matrix m = f.a.transpose() * f.a;
  m.diagonal().array() += lambda;
  const Vector w = m.ldlt().solve(f.a.transpose() * d_pred);
  d_a += b * w.transpose();
  d_a -= f.a * (w * f.coef.transpose() + f.coef * w.transpose());
  return d_a;
}

Matrix columns(std::initializer_list<const Vector*> cols) {
  Matrix m((*cols.begin())->size(), static_cast<Index>(cols.size()));
  Index j = 0;
  for (const Vector* c : cols) m.col(j++) = *c;
  return m;
}

struct Forward {
  Vector z_x, z_y, z_c;
  RidgeFit x_model;  // x ~ [z_x, z_c]
  RidgeFit y_model;  // y ~ [x, z_y, z_c]
  RidgeFit resid_model;  // residual regression
  Vector residual;
  GaussianGram g_zx, g_zy, g_zc, g_x, g_r;
  GdpcfLossTerms terms;
};

void check_batch(const GdpcfState& s, const GdpcfBatch& b) {
  const Index m = b.u.rows();
  if (b.x.size() != m || b.y.size() != m) throw std::invalid_argument("gdpcf: batch length mismatch");
  if (m < 4) throw InsufficientSamplesError("gdpcf: batch needs at least 4 rows");
  const Index p = b.u.cols();
  if (s.v_x.size() != p || s.v_y.size() != p || s.v_c.size() != p)
    throw std::invalid_argument("gdpcf: projection length does not match proxy dimension");
}

Forward forward(const GdpcfState& s, const GdpcfBatch& b, const GdpcfHyper& h) {
  check_batch(s, b);
  const double m = static_cast<double>(b.u.rows());
  Forward f;
  f.z_x = b.u * s.v_x;
  f.z_y = b.u * s.v_y;
  f.z_c = b.u * s.v_c;

  f.x_model = ridge_forward(columns({&f.z_x, &f.z_c}), b.x, h.lambda_ridge);
  f.y_model = ridge_forward(columns({&b.x, &f.z_y, &f.z_c}), b.y, h.lambda_ridge);
  if (h.residual == ResidualPenalty::kLatentVsTreatmentResidual) {
    f.resid_model = ridge_forward(columns({&b.x}), b.y, h.lambda_ridge);
  } else {
    f.resid_model = ridge_forward(columns({&f.z_x, &f.z_c, &f.z_y}), b.y, h.lambda_ridge);
  }
  f.residual = b.y - f.resid_model.pred;

  auto& t = f.terms;
  t.coef = {f.x_model.coef[0], f.x_model.coef[1], f.y_model.coef[0], f.y_model.coef[1], f.y_model.coef[2]};
  t.mse = ((b.y - f.y_model.pred).squaredNorm() + (b.x - f.x_model.pred).squaredNorm()) / m;

  f.g_zx = gaussian_gram(f.z_x, h.kernel);
  f.g_zy = gaussian_gram(f.z_y, h.kernel);
  f.g_zc = gaussian_gram(f.z_c, h.kernel);
  f.g_x = gaussian_gram(b.x, h.kernel);
  f.g_r = gaussian_gram(f.residual, h.kernel);
  t.nhsic[0] = nhsic(f.g_zx, f.g_zy);
  t.nhsic[1] = nhsic(f.g_zx, f.g_zc);
  t.nhsic[2] = nhsic(f.g_zy, f.g_zc);
  t.nhsic[3] = nhsic(f.g_zy, f.g_x);
  t.nhsic[4] = h.residual == ResidualPenalty::kLatentVsTreatmentResidual ? nhsic(f.g_zx, f.g_r)
                                                                         : nhsic(f.g_x, f.g_r);
  t.ci = 0.0;
  for (double v : t.nhsic) t.ci += v;

  double loss = 0.0;
  if (h.gamma != 0.0) loss += h.gamma * std::log(std::max(t.mse, h.mse_floor));
  if (h.eta != 0.0) loss += h.eta * std::log(std::max(t.ci, h.mse_floor));
  t.loss = loss;
  return f;
}

// Accumulates d(nHSIC(a, b))/d(HKH_a) and /d(HKH_b), scaled by `weight`.
void accumulate_pair(const GaussianGram& ga, const GaussianGram& gb, double weight, Matrix* bar_a,
                     Matrix* bar_b) {
  const double na = ga.centered_norm;
  const double nb = gb.centered_norm;
  const double value = (ga.centered.array() * gb.centered.array()).sum() / (na * nb);
  if (bar_a) *bar_a += weight * (gb.centered / (na * nb) - (value / (na * na)) * ga.centered);
  if (bar_b) *bar_b += weight * (ga.centered / (na * nb) - (value / (nb * nb)) * gb.centered);
}

}  // namespace

GdpcfCoefficients gdpcf_coefficients(const GdpcfState& state, const GdpcfBatch& batch,
                                     const GdpcfHyper& hyper) {
  check_batch(state, batch);
  const Vector z_x = batch.u * state.v_x;
  const Vector z_y = batch.u * state.v_y;
  const Vector z_c = batch.u * state.v_c;
  const Vector gx = ridge_solve(columns({&z_x, &z_c}), batch.x, hyper.lambda_ridge);
  const Vector gy = ridge_solve(columns({&batch.x, &z_y, &z_c}), batch.y, hyper.lambda_ridge);
  return {gx[0], gx[1], gy[0], gy[1], gy[2]};
}

GdpcfLossTerms gdpcf_loss_terms(const GdpcfState& state, const GdpcfBatch& batch, const GdpcfHyper& hyper) {
  return forward(state, batch, hyper).terms;
}

double gdpcf_loss(const GdpcfState& state, const GdpcfBatch& batch, const GdpcfHyper& hyper) {
  return gdpcf_loss_terms(state, batch, hyper).loss;
}

GdpcfGradient gdpcf_gradient(const GdpcfState& state, const GdpcfBatch& batch, const GdpcfHyper& hyper) {
  Forward f = forward(state, batch, hyper);
  const auto& t = f.terms;
  const Index m = batch.u.rows();
  const double inv_m = 1.0 / static_cast<double>(m);

  const double d_mse = (hyper.gamma != 0.0 && t.mse > hyper.mse_floor) ? hyper.gamma / t.mse : 0.0;
  const double d_ci = (hyper.eta != 0.0 && t.ci > hyper.mse_floor) ? hyper.eta / t.ci : 0.0;

  Vector d_zx = Vector::Zero(m);
  Vector d_zy = Vector::Zero(m);
  Vector d_zc = Vector::Zero(m);

  if (d_mse != 0.0) {
    const Vector d_xhat = (-2.0 * d_mse * inv_m) * (batch.x - f.x_model.pred);
    const Vector d_yhat = (-2.0 * d_mse * inv_m) * (batch.y - f.y_model.pred);
    const Matrix d_a1 = ridge_backward(f.x_model, batch.x, d_xhat, hyper.lambda_ridge, hyper.ridge_gradient);
    const Matrix d_a2 = ridge_backward(f.y_model, batch.y, d_yhat, hyper.lambda_ridge, hyper.ridge_gradient);
    d_zx += d_a1.col(0);
    d_zc += d_a1.col(1);
    d_zy += d_a2.col(1);
    d_zc += d_a2.col(2);
  }

  if (d_ci != 0.0) {
    Matrix bar_zx = Matrix::Zero(m, m);
    Matrix bar_zy = Matrix::Zero(m, m);
    Matrix bar_zc = Matrix::Zero(m, m);
    Matrix bar_r = Matrix::Zero(m, m);
    accumulate_pair(f.g_zx, f.g_zy, d_ci, &bar_zx, &bar_zy);
    accumulate_pair(f.g_zx, f.g_zc, d_ci, &bar_zx, &bar_zc);
    accumulate_pair(f.g_zy, f.g_zc, d_ci, &bar_zy, &bar_zc);
    accumulate_pair(f.g_zy, f.g_x, d_ci, &bar_zy, nullptr);
    const bool latent_residual = hyper.residual == ResidualPenalty::kLatentVsTreatmentResidual;
    if (latent_residual) {
      accumulate_pair(f.g_zx, f.g_r, d_ci, &bar_zx, nullptr);
    } else {
      accumulate_pair(f.g_x, f.g_r, d_ci, nullptr, &bar_r);
    }
    d_zx += gaussian_gram_backprop(f.z_x, f.g_zx, bar_zx, hyper.kernel);
    d_zy += gaussian_gram_backprop(f.z_y, f.g_zy, bar_zy, hyper.kernel);
    d_zc += gaussian_gram_backprop(f.z_c, f.g_zc, bar_zc, hyper.kernel);
    if (!latent_residual) {
      // residual = y - pred([z_x, z_c, z_y])
      const Vector d_pred = -gaussian_gram_backprop(f.residual, f.g_r, bar_r, hyper.kernel);
      const Matrix d_a3 =
          ridge_backward(f.resid_model, batch.y, d_pred, hyper.lambda_ridge, hyper.ridge_gradient);
      d_zx += d_a3.col(0);
      d_zc += d_a3.col(1);
      d_zy += d_a3.col(2);
    }
  }

  GdpcfGradient g;
  g.d_v_x = batch.u.transpose() * d_zx;
  g.d_v_y = batch.u.transpose() * d_zy;
  g.d_v_c = batch.u.transpose() * d_zc;
  g.terms = t;
  return g;
}

GdpcfState gdpcf_init(const Matrix& u, const Vector& x, const Vector& y, const GdpcfHyper& hyper) {
  const Index n = u.rows();
  if (x.size() != n || y.size() != n) throw std::invalid_argument("gdpcf_init: length mismatch");
  if (n < 25) throw InsufficientSamplesError("gdpcf_init: need n >= 25");
  if (hyper.init_components < 3) throw std::invalid_argument("gdpcf_init: need at least 3 components");

  GdpcfState s;
  s.u_mean = u.colwise().mean();
  s.x_mean = x.mean();
  s.y_mean = y.mean();
  const Matrix uc = u.rowwise() - s.u_mean;
  const Vector xc = x.array() - s.x_mean;
  const Vector yc = y.array() - s.y_mean;

  IcaOptions ica = hyper.ica;
  ica.seed = derive_seed(hyper.seed, 0x1ca);
  ReductionOutput red;
  bool ok = false;
  try {
    red = ica_fit(uc, std::min<Index>(hyper.init_components, std::min(n - 1, u.cols())), ica);
    ok = red.converged && red.components() >= 3;
  } catch (const InsufficientSamplesError&) {
    ok = false;
  }

  if (ok) {
    const auto sel = select_confounder(red.z_hat, xc, yc);
    const Index c = sel.chosen.front();
    // Remaining candidates ranked by how much more they predict x than y.
    std::vector<std::pair<double, Index>> rest;
    for (const auto& sc : sel.scores) {
      if (sc.index == c) continue;
      const double lean = std::log(std::max(sc.p_x, 1e-300)) - std::log(std::max(sc.p_y, 1e-300));
      rest.emplace_back(lean, sc.index);
    }
    std::stable_sort(rest.begin(), rest.end(),
                     [](const auto& a, const auto& b) { return a.first < b.first; });
    s.v_c = red.weights.col(c);
    s.v_x = red.weights.col(rest.front().second);
    s.v_y = red.weights.col(rest.back().second);
  } else {
    Rng rng(derive_seed(hyper.seed, 0xfa11));
    s.v_x = 0.01 * rng.normal_vector(u.cols());
    s.v_y = 0.01 * rng.normal_vector(u.cols());
    s.v_c = 0.01 * rng.normal_vector(u.cols());
    s.random_init = true;
  }
  s.coef = gdpcf_coefficients(s, GdpcfBatch{uc, xc, yc}, hyper);
  return s;
}

GdpcfState gdpcf_train_from(GdpcfState s, const Matrix& u, const Vector& x, const Vector& y,
                            const GdpcfHyper& hyper) {
  const Index n = u.rows();
  if (x.size() != n || y.size() != n) throw std::invalid_argument("gdpcf_train: length mismatch");
  if (n < 25) throw InsufficientSamplesError("gdpcf_train: need n >= 25");
  if (hyper.steps < 0) throw std::invalid_argument("gdpcf_train: steps must be >= 0");
  if (hyper.steps == 0) return s;

  const Matrix uc = u.rowwise() - s.u_mean;
  const Vector xc = x.array() - s.x_mean;
  const Vector yc = y.array() - s.y_mean;
  const Index m = GdpcfHyper::batch_size(n);

  Rng rng(derive_seed(hyper.seed, 0xba7c));
  std::vector<Index> order = rng.permutation(n);
  Index pos = 0;
  std::vector<Index> rows(static_cast<std::size_t>(m));
  GdpcfBatch batch;
  s.loss_trace.reserve(s.loss_trace.size() + static_cast<std::size_t>(hyper.steps));
  for (int step = 0; step < hyper.steps; ++step) {
    if (pos + m > n) {
      order = rng.permutation(n);
      pos = 0;
    }
    std::copy(order.begin() + pos, order.begin() + pos + m, rows.begin());
    pos += m;
    batch.u = take_rows(uc, rows);
    batch.x = take(xc, rows);
    batch.y = take(yc, rows);

    const GdpcfGradient g = gdpcf_gradient(s, batch, hyper);
    if (!std::isfinite(g.terms.loss) || !g.d_v_x.allFinite() || !g.d_v_y.allFinite() ||
        !g.d_v_c.allFinite()) {
      std::ostringstream msg;
      msg << "gdpcf_train: non-finite loss or gradient at step " << step;
      throw GdpcfDivergenceError(msg.str(), step);
    }
    s.loss_trace.push_back(g.terms.loss);
    s.v_x -= hyper.learning_rate * g.d_v_x;
    s.v_y -= hyper.learning_rate * g.d_v_y;
    s.v_c -= hyper.learning_rate * g.d_v_c;
    if (!s.v_x.allFinite() || !s.v_y.allFinite() || !s.v_c.allFinite()) {
      std::ostringstream msg;
      msg << "gdpcf_train: non-finite projection after step " << step;
      throw GdpcfDivergenceError(msg.str(), step);
    }
    ++s.steps_taken;
  }
  s.coef = gdpcf_coefficients(s, GdpcfBatch{uc, xc, yc}, hyper);
  return s;
}

GdpcfState gdpcf_train(const Matrix& u, const Vector& x, const Vector& y, const GdpcfHyper& hyper) {
  return gdpcf_train_from(gdpcf_init(u, x, y, hyper), u, x, y, hyper);
}

Vector gdpcf_extract(const GdpcfState& state, const Matrix& u) {
  if (u.cols() != state.v_c.size())
    throw std::invalid_argument("gdpcf_extract: proxy dimension does not match v_c");
  if (state.u_mean.size() == u.cols()) return (u.rowwise() - state.u_mean) * state.v_c;
  return centered(u) * state.v_c;
}

GradCheckReport gdpcf_gradcheck(const GdpcfState& state, const GdpcfBatch& batch, const GdpcfHyper& hyper,
                                int coordinates, double h, std::uint64_t seed) {
  const GdpcfGradient g = gdpcf_gradient(state, batch, hyper);
  const Index p = state.v_x.size();
  const Index total = 3 * p;
  Rng rng(seed);
  GradCheckReport rep;
  rep.coordinates = coordinates;
  for (int c = 0; c < coordinates; ++c) {
    const auto idx = static_cast<Index>(rng.below(static_cast<std::uint64_t>(total)));
    const Index block = idx / p;
    const Index j = idx % p;
    auto perturbed = [&](double delta) {
      GdpcfState s = state;
      Vector& v = block == 0 ? s.v_x : (block == 1 ? s.v_y : s.v_c);
      v[j] += delta;
      return gdpcf_loss(s, batch, hyper);
    };
    const double numeric = (perturbed(h) - perturbed(-h)) / (2.0 * h);
    const Vector& gv = block == 0 ? g.d_v_x : (block == 1 ? g.d_v_y : g.d_v_c);
    const double analytic = gv[j];
    const double denom = std::max({std::abs(analytic), std::abs(numeric), 1e-8});
    rep.max_rel_error = std::max(rep.max_rel_error, std::abs(analytic - numeric) / denom);
    rep.analytic.push_back(analytic);
    rep.numeric.push_back(numeric);
  }
  return rep;
}

}  // namespace pcf
