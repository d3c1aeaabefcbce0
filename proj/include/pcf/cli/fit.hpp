#pragma once

#include <cstdint>
#include <string>

#include <json.hpp>

#include "pcf/cli/dataset_csv.hpp"
#include "pcf/select.hpp"

namespace pcf::cli {

struct FitOptions {
  std::string method = "ica-pcf";  ///< pca-pcf | pls-pcf | ica-pcf | gd-pcf
  Index k = 10;
  double tau = kDefaultSelectionTau;
  bool standardize = false;  ///< scale proxy columns to unit variance first
  bool t_quantile = false;
  std::uint64_t seed = 0;
  int gd_steps = 3000;
};

/// Reduction, selection in both regression orientations, adjusted estimates
/// and reference-series variance explained, as one JSON document.
///  x_to_y: p_x from x ~ 1 + z, p_y from y ~ 1 + x + z, effect of x on y.
///  y_to_x: the same with x and y exchanged.
/// Throws std::invalid_argument on a bad k and InsufficientSamplesError when
/// n is too small for the requested fit.
nlohmann::json run_fit(const Dataset& data, const FitOptions& opts);

}  // namespace pcf::cli
