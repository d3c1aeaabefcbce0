#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "pcf/random.hpp"
#include "pcf/types.hpp"

namespace pcf {

/// Linear SCM configuration. Latent columns are laid out as
/// [Z_x (d_x) | Z_c (d_c) | Z_y (d_y) | Z_n (rest)].
struct ScmConfig {
  Index n = 500;
  Index p = 100;
  Index k = 20;
  Index d_x = 6;
  Index d_c = 1;
  Index d_y = 6;
  LatentDist dist = LatentDist::kExponential;
  bool proxy_noise = true;
  std::uint64_t seed = 0;

  Index d_n() const { return k - d_x - d_c - d_y; }
  Index confounder_column() const { return d_x; }
  /// Throws std::invalid_argument on inconsistent dimensions.
  void validate() const;
  /// Non-fatal notes (p < k leaves the identifiable regime).
  std::vector<std::string> warnings() const;
};

/// One draw of the SCM
///   U = Z W + N_u
///   x = Z_x a_x + Z_c c_x + N_x
///   y = alpha x + Z_c c_y + Z_y a_y + N_y
/// c_x and c_y are the confounder's coefficients into x and y.
struct ScmDraw {
  Matrix u;
  Vector x;
  Vector y;
  Matrix z;
  Vector z_c;  ///< first confounder column
  Matrix w;    ///< k x p
  double alpha = 0.0;
  Vector a_x;  ///< d_x
  Vector c_x;  ///< d_c
  Vector c_y;  ///< d_c
  Vector a_y;  ///< d_y
  Matrix noise_u;
  Vector noise_x;
  Vector noise_y;
  ScmConfig config;

  auto z_x() const { return z.middleCols(0, config.d_x); }
  auto z_conf() const { return z.middleCols(config.d_x, config.d_c); }
  auto z_y() const { return z.middleCols(config.d_x + config.d_c, config.d_y); }
};

ScmDraw generate_scm(const ScmConfig& cfg);

/// Noise-free proxies with rank(W) = k and U column-centered. Needs p >= k.
ScmDraw generate_noiseless(const ScmConfig& cfg);

}  // namespace pcf
