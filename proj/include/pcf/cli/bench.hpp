#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include <json.hpp>

#include "pcf/cli/experiment.hpp"

namespace pcf::cli {

struct TrialFailure {
  std::string method;
  std::string dist;
  Index n = 0;
  int trial = 0;
  std::string message;
};

struct TrialResult {
  std::vector<ResultRow> rows;  ///< one per method, in spec order
  std::vector<TrialFailure> failures;
};

/// One (dist, n, trial) cell of the grid. Method failures become NA rows.
TrialResult run_trial(const ExperimentSpec& spec, LatentDist dist, Index n, int trial);

struct BenchResult {
  std::vector<ResultRow> rows;  ///< per-trial rows followed by medians, per (dist, n) block
  std::vector<TrialFailure> failures;
  nlohmann::json summary;
};

/// Runs the whole grid on a pool of `workers` threads (0 = worker_count()).
BenchResult run_benchmark(const ExperimentSpec& spec, std::size_t workers = 0);

/// Output paths derived from spec.output: "<stem>.csv" and "<stem>.json".
std::string results_csv_path(const ExperimentSpec& spec);
std::string summary_json_path(const ExperimentSpec& spec);

void write_benchmark(const ExperimentSpec& spec, const BenchResult& result);

}  // namespace pcf::cli
