#include "pcf/synth.hpp"

#include <sstream>
#include <stdexcept>

namespace pcf {

void ScmConfig::validate() const {
  std::ostringstream msg;
  if (n < 1) msg << "n must be >= 1; ";
  if (p < 1) msg << "p must be >= 1; ";
  if (d_x < 0 || d_y < 0 || d_c < 1) msg << "need d_x, d_y >= 0 and d_c >= 1; ";
  if (d_x + d_c + d_y > k) msg << "d_x + d_c + d_y exceeds k; ";
  const auto err = msg.str();
  if (!err.empty()) throw std::invalid_argument("ScmConfig: " + err.substr(0, err.size() - 2));
}

std::vector<std::string> ScmConfig::warnings() const {
  std::vector<std::string> w;
  if (p < k) w.push_back("p < k: proxies cannot span the latent space");
  return w;
}

namespace {

constexpr double kCoefLo = 0.5;
constexpr double kCoefHi = 1.5;

Vector uniform_coefficients(Index count, Rng& rng) {
  Vector v(count);
  for (Index i = 0; i < count; ++i) v[i] = rng.uniform(kCoefLo, kCoefHi);
  return v;
}

// Draws everything except W and N_u; the draw order is part of the
// reproducibility contract.
ScmDraw draw_structural(const ScmConfig& cfg, Rng& rng) {
  ScmDraw d;
  d.config = cfg;
  d.z.resize(cfg.n, cfg.k);
  for (Index j = 0; j < cfg.k; ++j) d.z.col(j) = sample_latent(cfg.dist, cfg.n, rng);
  d.z_c = d.z.col(cfg.confounder_column());

  d.a_x = uniform_coefficients(cfg.d_x, rng);
  d.c_x = uniform_coefficients(cfg.d_c, rng);
  d.alpha = rng.uniform(kCoefLo, kCoefHi);
  d.c_y = uniform_coefficients(cfg.d_c, rng);
  d.a_y = uniform_coefficients(cfg.d_y, rng);

  d.noise_x = rng.normal_vector(cfg.n);
  d.noise_y = rng.normal_vector(cfg.n);

  d.x = d.z_x() * d.a_x + d.z_conf() * d.c_x + d.noise_x;
  d.y = d.alpha * d.x + d.z_conf() * d.c_y + d.z_y() * d.a_y + d.noise_y;
  return d;
}

}  // namespace

ScmDraw generate_scm(const ScmConfig& cfg) {
  cfg.validate();
  Rng rng(cfg.seed);
  ScmDraw d = draw_structural(cfg, rng);
  d.w = rng.normal_matrix(cfg.k, cfg.p);
  d.noise_u = cfg.proxy_noise ? rng.normal_matrix(cfg.n, cfg.p) : Matrix::Zero(cfg.n, cfg.p);
  d.u = d.z * d.w + d.noise_u;
  return d;
}

ScmDraw generate_noiseless(const ScmConfig& cfg) {
  cfg.validate();
  if (cfg.p < cfg.k) throw std::invalid_argument("generate_noiseless: need p >= k");
  Rng rng(cfg.seed);
  ScmDraw d = draw_structural(cfg, rng);
  d.config.proxy_noise = false;
  constexpr int kMaxAttempts = 10;
  for (int attempt = 0; attempt < kMaxAttempts; ++attempt) {
    Matrix w = rng.normal_matrix(cfg.k, cfg.p);
    Eigen::JacobiSVD<Matrix> svd(w);
    const Vector& s = svd.singularValues();
    if (s[cfg.k - 1] > 1e-10 * s[0]) {
      d.w = std::move(w);
      d.noise_u = Matrix::Zero(cfg.n, cfg.p);
      d.u = centered(d.z * d.w);
      return d;
    }
  }
  throw std::runtime_error("generate_noiseless: could not draw a full-rank W in 10 attempts");
}

}  // namespace pcf
