#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "pcf/random.hpp"
#include "pcf/types.hpp"

namespace pcf::cli {

enum class BenchMethod { kPcaPcf, kPlsPcf, kIcaPcf, kGdPcf, kOracle, kLasso, kRidge, kElasticNet };
enum class AerBaseline { kPcaK, kElasticNet };

std::string_view to_string(BenchMethod m);
BenchMethod parse_bench_method(std::string_view tag);
std::string_view to_string(AerBaseline b);
AerBaseline parse_aer_baseline(std::string_view tag);

/// Every method, in the order rows are emitted.
const std::vector<BenchMethod>& all_bench_methods();

struct ExperimentSpec {
  std::vector<BenchMethod> methods = all_bench_methods();
  std::vector<Index> sizes = {10, 50, 100, 500, 1000};
  int trials = 30;
  std::vector<LatentDist> dists = {LatentDist::kExponential};
  Index p = 100;
  Index k = 20;
  Index d_x = 6;
  Index d_c = 1;
  Index d_y = 6;
  bool proxy_noise = true;
  AerBaseline aer_baseline = AerBaseline::kPcaK;
  std::uint64_t seed = 0;
  int gd_steps = 3000;
  bool record_timing = false;
  std::string output = "pcf_bench";  ///< writes <output>.csv and <output>.json

  /// Throws std::invalid_argument.
  void validate() const;
  /// Paper scale: p = 1000, 100 trials.
  void apply_paper_scale();
};

/// Fields present in `j` override the defaults; unknown keys are rejected and
/// the result is validated.
ExperimentSpec spec_from_json(const nlohmann::json& j, ExperimentSpec base = {});
nlohmann::json spec_to_json(const ExperimentSpec& spec);

/// Seed of one trial's SCM draw and of every method run on it.
std::uint64_t trial_seed(const ExperimentSpec& spec, LatentDist dist, Index n, int trial);

inline constexpr std::string_view kMedianTag = "median";

struct ResultRow {
  std::string method;
  std::string dist;
  Index n = 0;
  std::string trial;  ///< trial number, or "median"
  std::optional<double> abs_cor;
  std::optional<double> ae;
  std::optional<double> aer;
  std::optional<double> alpha_hat;
  std::optional<double> runtime_ms;
  std::optional<std::uint64_t> seed;

  bool is_aggregate() const { return trial == kMedianTag; }
  bool operator==(const ResultRow& o) const;
};

inline constexpr std::string_view kResultHeader = "method,dist,n,trial,abs_cor,ae,aer,alpha_hat,runtime_ms,seed";

void write_results(std::ostream& out, const std::vector<ResultRow>& rows);
/// Inverse of write_results; throws std::runtime_error with a line number.
std::vector<ResultRow> read_results(std::istream& in);

/// Median of each metric over non-NA values (NA when none).
ResultRow median_row(const std::vector<const ResultRow*>& trials);

/// Appends median rows for each (dist, n, method) block of per-trial rows,
/// each block directly after its trials.
std::vector<ResultRow> with_medians(const std::vector<ResultRow>& trial_rows);

}  // namespace pcf::cli
