#include "pcf/cli/bench.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <functional>
#include <limits>
#include <optional>
#include <sstream>

#include "pcf/cli/dataset_csv.hpp"
#include "pcf/dr.hpp"
#include "pcf/estimate.hpp"
#include "pcf/gdpcf.hpp"
#include "pcf/parallel.hpp"
#include "pcf/select.hpp"
#include "pcf/synth.hpp"

#ifndef PCF_VERSION
#define PCF_VERSION "unknown"
#endif

namespace pcf::cli {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// Sub-stream tags of a trial seed.
enum : std::uint64_t { kStreamIca = 3, kStreamGd = 4, kStreamCv = 5 };

struct MethodOutput {
  Vector z_hat;  // empty when the method yields no confounder estimate
  double alpha_hat = kNaN;
};

MethodOutput adjust_with(const Vector& z, const ScmDraw& d) {
  MethodOutput out;
  out.z_hat = z;
  out.alpha_hat = adjusted_effect(d.x, d.y, z).alpha_hat;
  return out;
}

MethodOutput pcf_from(const ReductionOutput& red, const ScmDraw& d) {
  const auto sel = select_confounder(red.z_hat, d.x, d.y);
  return adjust_with(red.z_hat.col(sel.chosen.front()), d);
}

Index capped(Index k, Index limit) { return std::max<Index>(1, std::min(k, limit)); }

class TrialRunner {
 public:
  TrialRunner(const ExperimentSpec& spec, const ScmDraw& draw, std::uint64_t seed)
      : spec_(spec), d_(draw), seed_(seed) {}

  double baseline_alpha() {
    if (spec_.aer_baseline == AerBaseline::kElasticNet) return penalized(PenalizedMethod::kElasticNet).alpha_hat;
    const Index n = d_.x.size();
    const Index k = std::min({spec_.k, d_.u.cols(), n - 3});
    if (k < 1) throw InsufficientSamplesError("pca-k baseline: too few samples");
    return pca_baseline_effect(d_.u, d_.x, d_.y, k).alpha_hat;
  }

  MethodOutput run(BenchMethod m) {
    const Index n = d_.x.size();
    const Index p = d_.u.cols();
    switch (m) {
      case BenchMethod::kOracle:
        return adjust_with(d_.z_c, d_);
      case BenchMethod::kPcaPcf:
        return pcf_from(pca_fit(d_.u, capped(spec_.k, std::min(n - 1, p))), d_);
      case BenchMethod::kPlsPcf: {
        if (n < spec_.k) {
          std::ostringstream msg;
          msg << "pls-pcf: n = " << n << " is below the latent dimension k = " << spec_.k;
          throw InsufficientSamplesError(msg.str());
        }
        return pcf_from(pls_fit(d_.u, d_.x, d_.y, std::min<Index>(2, std::min(spec_.k, p))), d_);
      }
      case BenchMethod::kIcaPcf: {
        IcaOptions opts;
        opts.seed = derive_seed(seed_, kStreamIca);
        return pcf_from(ica_fit(d_.u, capped(spec_.k, std::min(n - 1, p)), opts), d_);
      }
      case BenchMethod::kGdPcf: {
        GdpcfHyper hyper;
        hyper.seed = derive_seed(seed_, kStreamGd);
        hyper.steps = spec_.gd_steps;
        const auto state = gdpcf_train(d_.u, d_.x, d_.y, hyper);
        return adjust_with(gdpcf_extract(state, d_.u), d_);
      }
      case BenchMethod::kLasso:
        return {Vector(), penalized(PenalizedMethod::kLasso).alpha_hat};
      case BenchMethod::kRidge:
        return {Vector(), penalized(PenalizedMethod::kRidge).alpha_hat};
      case BenchMethod::kElasticNet:
        return {Vector(), penalized(PenalizedMethod::kElasticNet).alpha_hat};
    }
    throw std::logic_error("unhandled method");
  }

 private:
  const CausalEstimate& penalized(PenalizedMethod pm) {
    auto& slot = cache_[static_cast<int>(pm)];
    if (!slot) {
      CvOptions cv;
      cv.seed = derive_seed(seed_, kStreamCv, static_cast<std::uint64_t>(pm));
      slot = cv_regression_baseline(d_.u, d_.x, d_.y, pm, cv).estimate;
    }
    return *slot;
  }

  const ExperimentSpec& spec_;
  const ScmDraw& d_;
  std::uint64_t seed_;
  std::optional<CausalEstimate> cache_[3];
};

}  // namespace

TrialResult run_trial(const ExperimentSpec& spec, LatentDist dist, Index n, int trial) {
  TrialResult out;
  const std::uint64_t seed = trial_seed(spec, dist, n, trial);
  const std::string dist_tag(to_string(dist));

  ScmConfig cfg;
  cfg.n = n;
  cfg.p = spec.p;
  cfg.k = spec.k;
  cfg.d_x = spec.d_x;
  cfg.d_c = spec.d_c;
  cfg.d_y = spec.d_y;
  cfg.dist = dist;
  cfg.proxy_noise = spec.proxy_noise;
  cfg.seed = seed;

  auto blank_row = [&](BenchMethod m) {
    ResultRow r;
    r.method = std::string(to_string(m));
    r.dist = dist_tag;
    r.n = n;
    r.trial = std::to_string(trial);
    r.seed = seed;
    return r;
  };
  auto fail = [&](const std::string& method, const std::string& what) {
    out.failures.push_back({method, dist_tag, n, trial, what});
  };

  std::optional<ScmDraw> draw;
  try {
    draw = generate_scm(cfg);
  } catch (const std::exception& e) {
    for (auto m : spec.methods) {
      out.rows.push_back(blank_row(m));
      fail(std::string(to_string(m)), std::string("scm: ") + e.what());
    }
    return out;
  }

  TrialRunner runner(spec, *draw, seed);
  double alpha_0 = kNaN;
  try {
    alpha_0 = runner.baseline_alpha();
  } catch (const std::exception& e) {
    fail(std::string(to_string(spec.aer_baseline)), std::string("AER baseline: ") + e.what());
  }

  for (auto m : spec.methods) {
    ResultRow row = blank_row(m);
    const auto t0 = std::chrono::steady_clock::now();
    try {
      const MethodOutput mo = runner.run(m);
      const auto metrics = evaluate(mo.z_hat, draw->z_c, mo.alpha_hat, draw->alpha, alpha_0,
                                    std::string(to_string(spec.aer_baseline)));
      row.abs_cor = metrics.abs_cor;
      row.ae = metrics.ae;
      if (std::isfinite(alpha_0)) row.aer = metrics.aer;
      row.alpha_hat = mo.alpha_hat;
    } catch (const std::exception& e) {
      fail(row.method, e.what());
    }
    if (spec.record_timing)
      row.runtime_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
    out.rows.push_back(std::move(row));
  }
  return out;
}

BenchResult run_benchmark(const ExperimentSpec& spec, std::size_t workers) {
  spec.validate();
  struct Cell {
    LatentDist dist;
    Index n;
    int trial;
  };
  std::vector<Cell> cells;
  for (auto dist : spec.dists)
    for (Index n : spec.sizes)
      for (int t = 0; t < spec.trials; ++t) cells.push_back({dist, n, t});

  std::vector<TrialResult> results(cells.size());
  parallel_for(
      cells.size(), [&](std::size_t i) { results[i] = run_trial(spec, cells[i].dist, cells[i].n, cells[i].trial); },
      workers);

  BenchResult out;
  std::vector<ResultRow> trial_rows;
  nlohmann::json seeds = nlohmann::json::array();
  for (std::size_t i = 0; i < cells.size(); ++i) {
    for (auto& r : results[i].rows) trial_rows.push_back(std::move(r));
    for (auto& f : results[i].failures) out.failures.push_back(std::move(f));
    seeds.push_back({{"dist", std::string(to_string(cells[i].dist))},
                     {"n", cells[i].n},
                     {"trial", cells[i].trial},
                     {"seed", trial_seed(spec, cells[i].dist, cells[i].n, cells[i].trial)}});
  }
  out.rows = with_medians(trial_rows);

  auto opt_json = [](const std::optional<double>& v) -> nlohmann::json {
    return v ? nlohmann::json(*v) : nlohmann::json(nullptr);
  };
  nlohmann::json medians = nlohmann::json::array();
  for (const auto& r : out.rows) {
    if (!r.is_aggregate()) continue;
    medians.push_back({{"method", r.method},
                       {"dist", r.dist},
                       {"n", r.n},
                       {"abs_cor", opt_json(r.abs_cor)},
                       {"ae", opt_json(r.ae)},
                       {"aer", opt_json(r.aer)},
                       {"alpha_hat", opt_json(r.alpha_hat)}});
  }
  nlohmann::json failures = nlohmann::json::array();
  for (const auto& f : out.failures)
    failures.push_back(
        {{"method", f.method}, {"dist", f.dist}, {"n", f.n}, {"trial", f.trial}, {"message", f.message}});

  out.summary = {{"version", PCF_VERSION},
                 {"config", spec_to_json(spec)},
                 {"seeds", {{"base", spec.seed}, {"trials", seeds}}},
                 {"medians", medians},
                 {"failures", failures},
                 {"rows", out.rows.size()}};
  return out;
}

namespace {

std::string output_stem(const std::string& output) {
  for (const char* ext : {".csv", ".json"}) {
    const std::string e(ext);
    if (output.size() > e.size() && output.compare(output.size() - e.size(), e.size(), e) == 0)
      return output.substr(0, output.size() - e.size());
  }
  return output;
}

}  // namespace

std::string results_csv_path(const ExperimentSpec& spec) { return output_stem(spec.output) + ".csv"; }
std::string summary_json_path(const ExperimentSpec& spec) { return output_stem(spec.output) + ".json"; }

void write_benchmark(const ExperimentSpec& spec, const BenchResult& result) {
  const auto csv_path = results_csv_path(spec);
  std::ofstream csv(csv_path);
  if (!csv) throw std::runtime_error("cannot write '" + csv_path + "'");
  write_results(csv, result.rows);

  const auto json_path = summary_json_path(spec);
  std::ofstream js(json_path);
  if (!js) throw std::runtime_error("cannot write '" + json_path + "'");
  js << result.summary.dump(2) << '\n';
}

}  // namespace pcf::cli
