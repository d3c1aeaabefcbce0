#pragma once

#include <cstdint>
#include <string>

#include "pcf/gdpcf.hpp"

namespace pcf::cli {

struct GradcheckOptions {
  std::uint64_t seed = 0;
  Index n = 30;
  Index p = 10;
  int coordinates = 20;
  double step = 1e-5;
  double tolerance = 1e-4;
  ResidualPenalty residual = ResidualPenalty::kLatentVsTreatmentResidual;
};

struct GradcheckOutcome {
  GradCheckReport report;
  bool random_init = false;
  bool passed = false;
  std::string text;  ///< one line, identical for identical options
};

/// Draws an SCM fixture, starts from the usual initialization (or a small
/// random state when n < 25) and compares the analytic gradient of the full
/// batch loss with central differences.
GradcheckOutcome run_gradcheck(const GradcheckOptions& opts);

}  // namespace pcf::cli
