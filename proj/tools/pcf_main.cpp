#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "pcf/cli/bench.hpp"
#include "pcf/cli/dataset_csv.hpp"
#include "pcf/cli/experiment.hpp"
#include "pcf/cli/fit.hpp"
#include "pcf/cli/gradcheck.hpp"
#include "pcf/synth.hpp"

namespace {

std::vector<std::string> split_list(const std::vector<std::string>& items) {
  std::vector<std::string> out;
  for (const auto& item : items) {
    std::stringstream ss(item);
    std::string tok;
    while (std::getline(ss, tok, ','))
      if (!tok.empty()) out.push_back(tok);
  }
  return out;
}

struct BenchArgs {
  std::string config;
  std::vector<std::string> methods;
  std::vector<pcf::Index> sizes;
  int trials = 0;
  std::vector<std::string> dists;
  pcf::Index p = 0;
  pcf::Index k = 0;
  bool no_proxy_noise = false;
  std::string aer_baseline;
  std::uint64_t seed = 0;
  int gd_steps = 0;
  std::string output;
  bool paper_scale = false;
  bool record_timing = false;
  std::size_t threads = 0;
};

int run_bench(const BenchArgs& a, CLI::App& cmd) {
  using namespace pcf::cli;
  ExperimentSpec spec;
  if (a.paper_scale) spec.apply_paper_scale();
  if (!a.config.empty()) {
    std::ifstream in(a.config);
    if (!in) throw std::runtime_error("cannot open config '" + a.config + "'");
    nlohmann::json j;
    try {
      in >> j;
    } catch (const nlohmann::json::exception& e) {
      throw std::runtime_error("config '" + a.config + "': " + e.what());
    }
    spec = spec_from_json(j, spec);
  }
  auto given = [&cmd](const char* name) { return cmd.get_option(name)->count() > 0; };
  if (given("--methods")) {
    spec.methods.clear();
    for (const auto& m : split_list(a.methods)) spec.methods.push_back(parse_bench_method(m));
  }
  if (given("--sizes")) spec.sizes = a.sizes;
  if (given("--trials")) spec.trials = a.trials;
  if (given("--dists")) {
    spec.dists.clear();
    for (const auto& d : split_list(a.dists)) spec.dists.push_back(pcf::parse_latent_dist(d));
  }
  if (given("--p")) spec.p = a.p;
  if (given("--k")) spec.k = a.k;
  if (a.no_proxy_noise) spec.proxy_noise = false;
  if (given("--aer-baseline")) spec.aer_baseline = parse_aer_baseline(a.aer_baseline);
  if (given("--seed")) spec.seed = a.seed;
  if (given("--gd-steps")) spec.gd_steps = a.gd_steps;
  if (given("--output")) spec.output = a.output;
  if (a.record_timing) spec.record_timing = true;
  spec.validate();

  const auto result = run_benchmark(spec, a.threads);
  write_benchmark(spec, result);
  std::size_t trial_rows = 0;
  for (const auto& r : result.rows) trial_rows += !r.is_aggregate();
  std::cerr << "wrote " << results_csv_path(spec) << " (" << trial_rows << " trial rows, "
            << result.rows.size() - trial_rows << " median rows, " << result.failures.size()
            << " method failures) and " << summary_json_path(spec) << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Proxy confounder factorization: latent confounder recovery and adjusted effects"};
  app.set_version_flag("--version", std::string(PCF_VERSION));
  app.require_subcommand(1);

  BenchArgs bench;
  auto* cmd_bench = app.add_subcommand("bench", "Run the synthetic benchmark grid");
  cmd_bench->add_option("--config", bench.config, "JSON experiment spec (flags override it)")->check(CLI::ExistingFile);
  cmd_bench->add_option("--methods", bench.methods, "pca-pcf,pls-pcf,ica-pcf,gd-pcf,oracle,lasso,ridge,enet")
      ->delimiter(',');
  cmd_bench->add_option("--sizes", bench.sizes, "Sample sizes")->delimiter(',');
  cmd_bench->add_option("--trials", bench.trials, "Trials per cell")->check(CLI::PositiveNumber);
  cmd_bench->add_option("--dists", bench.dists, "uniform,gamma,exponential,gaussian")->delimiter(',');
  cmd_bench->add_option("--p", bench.p, "Proxy dimension")->check(CLI::PositiveNumber);
  cmd_bench->add_option("--k", bench.k, "Latent dimension")->check(CLI::PositiveNumber);
  cmd_bench->add_flag("--no-proxy-noise", bench.no_proxy_noise, "Noise-free proxies");
  cmd_bench->add_option("--aer-baseline", bench.aer_baseline, "pca-k or enet");
  cmd_bench->add_option("--seed", bench.seed, "Base seed");
  cmd_bench->add_option("--gd-steps", bench.gd_steps, "GD-PCF optimizer steps")->check(CLI::NonNegativeNumber);
  cmd_bench->add_option("--output", bench.output, "Output stem; writes <stem>.csv and <stem>.json");
  cmd_bench->add_flag("--paper-scale", bench.paper_scale, "p = 1000 and 100 trials");
  cmd_bench->add_flag("--record-timing", bench.record_timing, "Fill runtime_ms (output is then not reproducible)");
  cmd_bench->add_option("--threads", bench.threads, "Worker threads (default PCF_THREADS or all cores)");

  std::string fit_input, fit_output;
  pcf::cli::FitOptions fit;
  auto* cmd_fit = app.add_subcommand("fit", "Fit PCF on a dataset CSV and print a JSON report");
  cmd_fit->add_option("dataset", fit_input, "CSV with x, y, u_0..u_{p-1} [, z_c_true, ref_*]")->required();
  cmd_fit->add_option("--method", fit.method, "pca-pcf, pls-pcf, ica-pcf or gd-pcf")->capture_default_str();
  cmd_fit->add_option("--k", fit.k, "Components to extract")->capture_default_str();
  cmd_fit->add_option("--tau", fit.tau, "Threshold on p_x + p_y")->capture_default_str();
  cmd_fit->add_flag("--standardize", fit.standardize, "Scale proxies to unit variance before reduction");
  cmd_fit->add_flag("--t-interval", fit.t_quantile, "Student-t interval instead of 1.96 SE");
  cmd_fit->add_option("--seed", fit.seed, "Seed for ICA and GD-PCF")->capture_default_str();
  cmd_fit->add_option("--gd-steps", fit.gd_steps, "GD-PCF optimizer steps")->capture_default_str();
  cmd_fit->add_option("-o,--output", fit_output, "Write the report here instead of stdout");

  pcf::cli::GradcheckOptions gc;
  bool gc_alt = false;
  auto* cmd_gc = app.add_subcommand("gradcheck", "Finite-difference check of the GD-PCF gradient");
  cmd_gc->add_option("--seed", gc.seed, "Fixture and coordinate seed")->capture_default_str();
  cmd_gc->add_option("--n", gc.n, "Samples in the fixture")->capture_default_str();
  cmd_gc->add_option("--p", gc.p, "Proxy dimension")->capture_default_str();
  cmd_gc->add_option("--coordinates", gc.coordinates, "Random coordinates compared")->capture_default_str();
  cmd_gc->add_option("--step", gc.step, "Central difference step")->capture_default_str();
  cmd_gc->add_option("--tol", gc.tolerance, "Pass threshold on the relative error")->capture_default_str();
  cmd_gc->add_flag("--treatment-residual", gc_alt, "Penalize nHSIC(x, y - yhat(z)) instead");

  pcf::ScmConfig scm;
  std::string synth_dist = "exponential", synth_out;
  bool synth_noiseless = false;
  auto* cmd_synth = app.add_subcommand("synth", "Write one synthetic SCM draw as a dataset CSV");
  cmd_synth->add_option("--n", scm.n, "Samples")->capture_default_str();
  cmd_synth->add_option("--p", scm.p, "Proxy dimension")->capture_default_str();
  cmd_synth->add_option("--k", scm.k, "Latent dimension")->capture_default_str();
  cmd_synth->add_option("--dist", synth_dist, "uniform, gamma, exponential or gaussian")->capture_default_str();
  cmd_synth->add_option("--seed", scm.seed, "Draw seed")->capture_default_str();
  cmd_synth->add_flag("--no-proxy-noise", synth_noiseless, "Noise-free proxies");
  cmd_synth->add_option("-o,--output", synth_out, "Output CSV")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (cmd_bench->parsed()) return run_bench(bench, *cmd_bench);

    if (cmd_fit->parsed()) {
      const auto data = pcf::cli::read_dataset_file(fit_input);
      const auto report = pcf::cli::run_fit(data, fit);
      if (fit_output.empty()) {
        std::cout << report.dump(2) << '\n';
      } else {
        std::ofstream out(fit_output);
        if (!out) throw std::runtime_error("cannot write '" + fit_output + "'");
        out << report.dump(2) << '\n';
      }
      return 0;
    }

    if (cmd_gc->parsed()) {
      if (gc_alt) gc.residual = pcf::ResidualPenalty::kTreatmentVsLatentResidual;
      const auto outcome = pcf::cli::run_gradcheck(gc);
      std::cout << outcome.text << '\n';
      return outcome.passed ? 0 : 1;
    }

    if (cmd_synth->parsed()) {
      scm.dist = pcf::parse_latent_dist(synth_dist);
      scm.proxy_noise = !synth_noiseless;
      for (const auto& w : scm.warnings()) std::cerr << "warning: " << w << '\n';
      pcf::cli::write_dataset_file(synth_out, pcf::cli::dataset_from_draw(pcf::generate_scm(scm)));
      return 0;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
