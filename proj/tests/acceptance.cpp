// Acceptance run: one PASS/FAIL line per criterion, nonzero exit on any FAIL.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "pcf/cli/bench.hpp"
#include "pcf/cli/experiment.hpp"
#include "pcf/cli/gradcheck.hpp"
#include "pcf/estimate.hpp"
#include "pcf/gdpcf.hpp"
#include "pcf/hsic.hpp"
#include "pcf/random.hpp"
#include "pcf/select.hpp"
#include "pcf/stats.hpp"
#include "pcf/synth.hpp"

using namespace pcf;
using namespace pcf::cli;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

using Clock = std::chrono::steady_clock;

int failures = 0;

void run(int id, const char* name, double time_limit_s, const std::function<Outcome()>& body) {
  const auto t0 = Clock::now();
  Outcome o;
  try {
    o = body();
  } catch (const std::exception& e) {
    o = {false, std::string("exception: ") + e.what()};
  }
  const double secs = std::chrono::duration<double>(Clock::now() - t0).count();
  std::ostringstream line;
  line << o.detail << "; " << std::fixed;
  line.precision(1);
  line << secs << " s";
  if (time_limit_s > 0) {
    line << " (limit " << time_limit_s << " s)";
    if (secs >= time_limit_s) o.pass = false;
  }
  if (!o.pass) ++failures;
  std::printf("%s [%d] %s: %s\n", o.pass ? "PASS" : "FAIL", id, name, line.str().c_str());
  std::fflush(stdout);
}

std::string num(double v, int digits = 4) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*g", digits, v);
  return buf;
}

// Median of one metric across the per-trial rows of (method, n).
double median_of(const std::vector<ResultRow>& rows, const std::string& method, Index n,
                 std::optional<double> ResultRow::*field) {
  std::vector<double> v;
  for (const auto& r : rows)
    if (!r.is_aggregate() && r.method == method && r.n == n && (r.*field)) v.push_back(*(r.*field));
  if (v.empty()) return NAN;
  return median(v);
}

Outcome pca_equality() {
  double worst = 0.0;
  for (std::uint64_t s = 0; s < 20; ++s) {
    ScmConfig cfg;
    cfg.n = 500;
    cfg.p = 100;
    cfg.seed = derive_seed(0xa1, s);
    const auto d = generate_noiseless(cfg);
    const double a = pca_baseline_effect(d.u, d.x, d.y, 20).alpha_hat;
    const double b = adjusted_effect(d.x, d.y, d.z).alpha_hat;
    worst = std::max(worst, std::abs(a - b));
  }
  return {worst < 1e-8, "max |pca-k - full Z| = " + num(worst, 3) + " (< 1e-8) over 20 draws"};
}

Outcome ica_trend() {
  ExperimentSpec s;
  s.methods = {BenchMethod::kOracle, BenchMethod::kIcaPcf};
  s.sizes = {500, 1000};
  s.trials = 30;
  s.p = 100;
  s.seed = 0xa2;
  const auto res = run_benchmark(s);
  const double c500 = median_of(res.rows, "ica-pcf", 500, &ResultRow::abs_cor);
  const double c1000 = median_of(res.rows, "ica-pcf", 1000, &ResultRow::abs_cor);
  const double ae_ica = median_of(res.rows, "ica-pcf", 1000, &ResultRow::ae);
  const double ae_oracle = median_of(res.rows, "oracle", 1000, &ResultRow::ae);
  const bool ok = c500 >= 0.65 && c1000 >= 0.90 && ae_ica <= 2.0 * ae_oracle;
  return {ok, "median AbsCor n=500 " + num(c500) + " (>= 0.65), n=1000 " + num(c1000) +
                  " (>= 0.90); median AE ica " + num(ae_ica) + " vs 2 x oracle " + num(2.0 * ae_oracle)};
}

Outcome gaussian_nonidentifiability() {
  ExperimentSpec s;
  s.methods = {BenchMethod::kIcaPcf, BenchMethod::kPlsPcf};
  s.sizes = {1000};
  s.trials = 30;
  s.dists = {LatentDist::kGaussian};
  s.seed = 0xa3;
  const auto res = run_benchmark(s);
  const double ica = median_of(res.rows, "ica-pcf", 1000, &ResultRow::abs_cor);
  const double pls = median_of(res.rows, "pls-pcf", 1000, &ResultRow::abs_cor);
  return {ica <= pls + 0.1, "median AbsCor ica " + num(ica) + " <= pls " + num(pls) + " + 0.1"};
}

Outcome selection_consistency() {
  auto rate = [](Index n) {
    int hits = 0;
    for (std::uint64_t t = 0; t < 100; ++t) {
      ScmConfig cfg;
      cfg.n = n;
      cfg.p = 5;
      cfg.seed = derive_seed(0xa4, static_cast<std::uint64_t>(n), t);
      const auto d = generate_scm(cfg);
      const auto sel = select_confounder(d.z, d.x, d.y);
      hits += sel.chosen.front() == cfg.confounder_column();
    }
    return hits;
  };
  const int r500 = rate(500), r2000 = rate(2000);
  return {r500 >= 80 && r2000 >= 95, "correct selections n=500 " + std::to_string(r500) +
                                         "/100 (>= 80), n=2000 " + std::to_string(r2000) + "/100 (>= 95)"};
}

Outcome gradient_check() {
  double worst = 0.0;
  std::string inits;
  for (std::uint64_t s = 0; s < 5; ++s) {
    GradcheckOptions o;
    o.seed = s;
    const auto r = run_gradcheck(o);
    worst = std::max(worst, r.report.max_rel_error);
    inits += r.random_init ? 'r' : 'i';
  }
  return {worst < 1e-4, "max relative error " + num(worst, 3) + " (< 1e-4), n=30 p=10 h=1e-5, 20 coordinates, seeds 0-4 (init " +
                            inits + ")"};
}

Outcome gd_vs_ica() {
  int wins = 0;
  for (std::uint64_t t = 0; t < 100; ++t) {
    ScmConfig cfg;
    cfg.n = 500;
    cfg.p = 50;
    cfg.seed = derive_seed(0xa6, t);
    const auto d = generate_scm(cfg);
    GdpcfHyper h;
    h.seed = derive_seed(0xa7, t);
    const auto init = gdpcf_init(d.u, d.x, d.y, h);
    const auto trained = gdpcf_train_from(init, d.u, d.x, d.y, h);
    const double before = std::abs(pearson_correlation(gdpcf_extract(init, d.u), d.z_c));
    const double after = std::abs(pearson_correlation(gdpcf_extract(trained, d.u), d.z_c));
    wins += after >= before;
  }
  return {wins >= 60, "GD-PCF >= ICA init in " + std::to_string(wins) + "/100 seeds (>= 60)"};
}

Outcome nhsic_suite() {
  Rng rng(0xa8);
  double self_err = 0.0, sym_err = 0.0;
  for (int t = 0; t < 20; ++t) {
    const Vector x = rng.normal_vector(100);
    const Vector y = (x.array().square() + rng.normal_vector(100).array()).matrix();
    self_err = std::max(self_err, std::abs(nhsic(x, x) - 1.0));
    sym_err = std::max(sym_err, std::abs(nhsic(x, y) - nhsic(y, x)));
  }
  int below = 0;
  const Index n = 300;
  for (int t = 0; t < 100; ++t) {
    const Vector x = rng.normal_vector(n), y = rng.normal_vector(n);
    const auto gx = gaussian_gram(x, KernelSpec::median_heuristic());
    const auto gy = gaussian_gram(y, KernelSpec::median_heuristic());
    const double stat = nhsic(gx, gy);
    // Permuting y permutes rows and columns of its centered Gram.
    std::vector<double> null;
    for (int b = 0; b < 100; ++b) {
      const auto perm = rng.permutation(n);
      double cross = 0.0;
      for (Index j = 0; j < n; ++j) {
        const Index pj = perm[static_cast<std::size_t>(j)];
        for (Index i = 0; i < n; ++i) cross += gx.centered(i, j) * gy.centered(perm[static_cast<std::size_t>(i)], pj);
      }
      null.push_back(cross / (gx.centered_norm * gy.centered_norm));
    }
    std::sort(null.begin(), null.end());
    below += stat < null[94];
  }
  const bool ok = self_err <= 1e-10 && sym_err <= 1e-12 && below >= 90;
  return {ok, "|nhsic(x,x) - 1| " + num(self_err, 2) + " (<= 1e-10), asymmetry " + num(sym_err, 2) +
                  " (<= 1e-12), below permutation q95 " + std::to_string(below) + "/100 (>= 90)"};
}

Outcome elastic_net_checks() {
  Rng rng(0xa9);
  const std::vector<bool> all6(6, true);

  const Matrix x = rng.normal_matrix(80, 6) * 2.0 + Matrix::Constant(80, 6, 0.7);
  const Vector y = x * rng.normal_vector(6) + rng.normal_vector(80);
  const auto ols = ols_fit(x, y, true);
  double ols_err = 0.0;
  for (double mix : {1.0, 0.5, 0.0}) {
    const auto f = elastic_net_fit(x, y, 0.0, mix, all6);
    ols_err = std::max(ols_err, (f.coefficients - ols.coefficients.tail(6)).cwiseAbs().maxCoeff());
    ols_err = std::max(ols_err, std::abs(f.intercept - ols.coefficients[0]));
  }

  ElasticNetSolver solver(x, y, all6);
  const double lmax = solver.lambda_max(1.0);
  const auto dead = solver.fit(lmax * 1.0001, 1.0);
  const bool zeros = (dead.coefficients.array() == 0.0).all();
  const auto alive = elastic_net_fit(x, y, lmax * 0.5, 1.0, all6);
  const bool some = (alive.coefficients.array() != 0.0).any() && (alive.coefficients.array() == 0.0).any();

  Vector f1 = rng.normal_vector(70);
  f1 = (f1.array() - f1.mean()).matrix();
  f1 /= std::sqrt(f1.squaredNorm() / 70.0);
  const Vector y1 = (0.6 * f1 + rng.normal_vector(70)).eval();
  const double rho = f1.dot((y1.array() - y1.mean()).matrix()) / 70.0;
  double soft_err = 0.0;
  for (double lambda : {0.01, 0.2, 1.0})
    for (double mix : {1.0, 0.5, 0.0}) {
      const double t = lambda * mix;
      const double s = rho > t ? rho - t : (rho < -t ? rho + t : 0.0);
      soft_err = std::max(soft_err, std::abs(elastic_net_fit(f1, y1, lambda, mix, {true}).coefficients[0] -
                                             s / (1.0 + lambda * (1.0 - mix))));
    }

  Matrix xm = rng.normal_matrix(150, 20);
  xm.col(5) = 0.95 * xm.col(4) + 0.05 * xm.col(5);
  const Vector ym = xm * rng.normal_vector(20) + rng.normal_vector(150);
  ElasticNetOptions opts;
  opts.record_objective = true;
  bool monotone = true;
  std::size_t sweeps = 0;
  for (double mix : {1.0, 0.5, 0.0}) {
    const auto f = elastic_net_fit(xm, ym, 0.02, mix, std::vector<bool>(20, true), opts);
    sweeps += f.objective_trace.size();
    for (std::size_t i = 1; i < f.objective_trace.size(); ++i)
      monotone &= f.objective_trace[i] <= f.objective_trace[i - 1] + 1e-14 * std::abs(f.objective_trace[i - 1]);
  }

  const bool ok = ols_err < 1e-6 && zeros && some && soft_err < 1e-8 && monotone && sweeps > 3;
  return {ok, "OLS gap " + num(ols_err, 2) + " (< 1e-6), dead zone exact zeros " + (zeros && some ? "yes" : "no") +
                  ", soft-threshold gap " + num(soft_err, 2) + " (< 1e-8), objective monotone over " +
                  std::to_string(sweeps) + " sweeps " + (monotone ? "yes" : "no")};
}

Outcome aer_direction() {
  ExperimentSpec s;
  s.methods = {BenchMethod::kIcaPcf};
  s.sizes = {1000};
  s.trials = 30;
  s.dists = {LatentDist::kUniform};
  s.aer_baseline = AerBaseline::kElasticNet;
  s.seed = 0xaa;
  const auto res = run_benchmark(s);
  const double aer = median_of(res.rows, "ica-pcf", 1000, &ResultRow::aer);
  return {aer <= 1.2, "median AER(ica-pcf vs enet) " + num(aer) + " (<= 1.2)"};
}

Outcome determinism() {
  ExperimentSpec s;
  s.sizes = {10, 50, 100};
  s.trials = 3;
  s.p = 30;
  s.gd_steps = 100;
  s.seed = 0xab;
  auto csv = [&s](std::size_t workers) {
    std::ostringstream out;
    write_results(out, run_benchmark(s, workers).rows);
    return out.str();
  };
  const std::string a = csv(1), b = csv(1), c = csv(4);
  const bool ok = !a.empty() && a == b && a == c;
  return {ok, std::string("all-method grid rerun ") + (a == b ? "identical" : "differs") + ", 4 workers " +
                  (a == c ? "identical" : "differs") + " (" + std::to_string(a.size()) + " bytes)"};
}

}  // namespace

int main() {
  run(1, "PCA adjustment equality", 10, pca_equality);
  run(2, "ICA-PCF trend", 180, ica_trend);
  run(3, "Gaussian non-identifiability", 0, gaussian_nonidentifiability);
  run(4, "selection consistency", 60, selection_consistency);
  run(5, "GD-PCF gradient check", 5, gradient_check);
  run(6, "GD-PCF vs ICA init", 600, gd_vs_ica);
  run(7, "nHSIC suite", 0, nhsic_suite);
  run(8, "elastic-net correctness", 0, elastic_net_checks);
  run(9, "baseline AER direction", 300, aer_direction);
  run(10, "determinism", 0, determinism);
  std::printf("%s: %d criteria failed\n", failures ? "FAIL" : "PASS", failures);
  return failures ? 1 : 0;
}
