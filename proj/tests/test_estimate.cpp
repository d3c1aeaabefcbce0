#include <doctest.h>

#include <cmath>
#include <vector>

#include "pcf/estimate.hpp"
#include "pcf/random.hpp"
#include "pcf/stats.hpp"
#include "pcf/synth.hpp"

using namespace pcf;

namespace {

// Mean zero, population standard deviation one.
Vector standardized(const Vector& v) {
  const Vector c = (v.array() - v.mean()).matrix();
  return c / std::sqrt(c.squaredNorm() / static_cast<double>(c.size()));
}

double soft(double v, double t) { return v > t ? v - t : (v < -t ? v + t : 0.0); }

ScmDraw draw(Index n, Index p, std::uint64_t seed) {
  ScmConfig cfg;
  cfg.n = n;
  cfg.p = p;
  cfg.seed = seed;
  return generate_scm(cfg);
}

}  // namespace

TEST_CASE("exact fit gives the slope with vanishing standard error") {
  Vector x(6);
  x << 0.5, -1, 2, 3, 4.5, -2;
  const Vector y = 2.0 * x;
  const auto e = adjusted_effect(x, y, Matrix(6, 0));
  CHECK(e.alpha_hat == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(e.std_error < 1e-10);
}

TEST_CASE("adjusting for the true confounder is unbiased at large n") {
  const auto d = draw(10000, 5, 1);
  const auto e = adjusted_effect(d.x, d.y, d.z_c);
  CHECK(std::abs(e.alpha_hat - d.alpha) < 3.0 * e.std_error);
}

TEST_CASE("alpha_hat is invariant to recombining the adjustment set") {
  const auto d = draw(400, 5, 2);
  const auto base = adjusted_effect(d.x, d.y, d.z_c);
  CHECK(std::abs(adjusted_effect(d.x, d.y, Vector(5.0 * d.z_c)).alpha_hat - base.alpha_hat) < 1e-10);

  const Matrix z = d.z.leftCols(8);
  Rng rng(3);
  Matrix mix = rng.normal_matrix(8, 8) + 3.0 * Matrix::Identity(8, 8);
  const auto a = adjusted_effect(d.x, d.y, z);
  const auto b = adjusted_effect(d.x, d.y, Matrix(z * mix));
  CHECK(std::abs(a.alpha_hat - b.alpha_hat) < 1e-10);
  CHECK(std::abs(a.std_error - b.std_error) < 1e-10);
}

TEST_CASE("interval construction") {
  const auto d = draw(200, 5, 4);
  const auto e = adjusted_effect(d.x, d.y, d.z_c);
  CHECK(e.ci_lo <= e.alpha_hat);
  CHECK(e.alpha_hat <= e.ci_hi);
  CHECK(std::abs((e.ci_hi - e.ci_lo) - 2.0 * 1.96 * e.std_error) < 1e-9);
  EffectOptions t;
  t.t_quantile = true;
  const auto et = adjusted_effect(d.x, d.y, d.z_c, t);
  CHECK(std::abs((et.ci_hi - et.ci_lo) - 2.0 * t_quantile_975(197.0) * et.std_error) < 1e-9);
  CHECK(et.ci_hi - et.ci_lo > e.ci_hi - e.ci_lo);
  CHECK(!e.adjustment.empty());
}

TEST_CASE("t quantiles") {
  CHECK(t_quantile_975(1.0) == doctest::Approx(12.706204736174698).epsilon(1e-10));
  CHECK(t_quantile_975(10.0) == doctest::Approx(2.2281388519649385).epsilon(1e-10));
  CHECK(t_quantile_975(1e6) == doctest::Approx(1.959966).epsilon(1e-5));
  CHECK_THROWS_AS(t_quantile_975(0.0), std::invalid_argument);
}

TEST_CASE("adjusted_effect errors") {
  const auto d = draw(50, 5, 5);
  Matrix z(50, 3);
  z.col(0) = d.z.col(0);
  z.col(1) = d.z.col(1);
  z.col(2) = d.z.col(0) - 2.0 * d.z.col(1);
  try {
    adjusted_effect(d.x, d.y, z);
    FAIL("expected RankDeficientError");
  } catch (const RankDeficientError& e) {
    REQUIRE(!e.columns.empty());
    for (Index c : e.columns) {
      CHECK(c >= 0);
      CHECK(c < 3);
    }
    CHECK(std::string(e.what()).find("z[") != std::string::npos);
  }
  CHECK_THROWS_AS(adjusted_effect(d.x.head(5), d.y.head(5), d.z.topRows(5).leftCols(3)), InsufficientSamplesError);
  CHECK_THROWS_AS(adjusted_effect(d.x, d.y.head(49), Matrix(50, 0)), std::invalid_argument);
}

TEST_CASE("pca baseline matches the full-Z oracle on noiseless proxies") {
  ScmConfig cfg;
  cfg.n = 300;
  cfg.p = 40;
  cfg.seed = 6;
  const auto d = generate_noiseless(cfg);
  const double oracle = adjusted_effect(d.x, d.y, d.z).alpha_hat;
  CHECK(std::abs(pca_baseline_effect(d.u, d.x, d.y, 20).alpha_hat - oracle) < 1e-8);

  const auto k0 = pca_baseline_effect(d.u, d.x, d.y, 0);
  CHECK(k0.alpha_hat == adjusted_effect(d.x, d.y, Matrix(300, 0)).alpha_hat);
  CHECK(k0.adjustment == "unadjusted");
}

TEST_CASE("elastic net at lambda zero reproduces OLS") {
  Rng rng(7);
  const Matrix x = rng.normal_matrix(80, 6) * 3.0 + Matrix::Constant(80, 6, 1.5);
  const Vector y = x * rng.normal_vector(6) + rng.normal_vector(80);
  const auto ols = ols_fit(x, y, true);
  for (double mix : {0.0, 0.5, 1.0}) {
    const auto f = elastic_net_fit(x, y, 0.0, mix, std::vector<bool>(6, true));
    CHECK(f.converged);
    CHECK(std::abs(f.intercept - ols.coefficients[0]) < 1e-6);
    CHECK((f.coefficients - ols.coefficients.tail(6)).cwiseAbs().maxCoeff() < 1e-6);
  }
}

TEST_CASE("lasso dead zone yields exact zeros") {
  Rng rng(8);
  Matrix x(100, 5);
  for (Index j = 0; j < 5; ++j) x.col(j) = standardized(rng.normal_vector(100));
  const Vector y = x.col(1) * 2.0 + rng.normal_vector(100);
  const Vector yc = (y.array() - y.mean()).matrix();
  const double bound = (x.transpose() * yc).cwiseAbs().maxCoeff() / 100.0;
  ElasticNetSolver solver(x, y, std::vector<bool>(5, true));
  CHECK(solver.lambda_max(1.0) == doctest::Approx(bound).epsilon(1e-12));
  const auto f = solver.fit(bound, 1.0);
  CHECK((f.coefficients.array() == 0.0).all());
  CHECK(f.intercept == doctest::Approx(y.mean()));
  const auto g = solver.fit(0.9 * bound, 1.0);
  CHECK((g.coefficients.array() != 0.0).any());
}

TEST_CASE("single standardized feature has the soft-threshold solution") {
  Rng rng(9);
  const Vector x = standardized(rng.normal_vector(60));
  const Vector y = (0.8 * x + rng.normal_vector(60)).eval();
  const double rho = x.dot((y.array() - y.mean()).matrix()) / 60.0;
  for (double lambda : {0.0, 0.05, 0.3, 2.0}) {
    for (double mix : {1.0, 0.5, 0.0}) {
      const auto f = elastic_net_fit(x, y, lambda, mix, {true});
      const double expected = soft(rho, lambda * mix) / (1.0 + lambda * (1.0 - mix));
      CHECK(std::abs(f.coefficients[0] - expected) < 1e-8);
    }
  }
}

TEST_CASE("elastic net objective never increases across sweeps") {
  Rng rng(10);
  const Matrix base = rng.normal_matrix(120, 15);
  Matrix x = base;
  x.col(3) = base.col(2) * 0.9 + 0.1 * base.col(3);
  const Vector y = x * rng.normal_vector(15) + rng.normal_vector(120);
  ElasticNetOptions opts;
  opts.record_objective = true;
  for (double mix : {1.0, 0.5, 0.0}) {
    const auto f = elastic_net_fit(x, y, 0.05, mix, std::vector<bool>(15, true), opts);
    REQUIRE(f.objective_trace.size() >= 2);
    for (std::size_t i = 1; i < f.objective_trace.size(); ++i)
      CHECK(f.objective_trace[i] <= f.objective_trace[i - 1] + 1e-14 * std::abs(f.objective_trace[i - 1]));
  }
}

TEST_CASE("unpenalized columns are never shrunk") {
  Rng rng(11);
  const Vector t = rng.normal_vector(90);
  Matrix x(90, 4);
  x.col(0) = t;
  x.rightCols(3) = rng.normal_matrix(90, 3);
  const Vector y = (1.7 * t + rng.normal_vector(90)).eval();
  std::vector<bool> mask = {false, true, true, true};
  const auto f = elastic_net_fit(x, y, 1e6, 1.0, mask);
  CHECK(f.coefficients.tail(3).cwiseAbs().maxCoeff() == 0.0);
  CHECK(f.coefficients[0] == doctest::Approx(ols_fit(t, y, true).coefficients[1]).epsilon(1e-10));
}

TEST_CASE("elastic net flags non-convergence and validates inputs") {
  Rng rng(12);
  const Matrix x = rng.normal_matrix(50, 10);
  const Vector y = rng.normal_vector(50);
  ElasticNetOptions opts;
  opts.max_sweeps = 1;
  opts.tol = 1e-300;
  const auto f = elastic_net_fit(x, y, 1e-4, 0.5, std::vector<bool>(10, true), opts);
  CHECK_FALSE(f.converged);
  CHECK(f.sweeps == 1);
  CHECK_THROWS_AS(elastic_net_fit(x, y, -1.0, 0.5, std::vector<bool>(10, true)), std::invalid_argument);
  CHECK_THROWS_AS(elastic_net_fit(x, y, 1.0, 1.5, std::vector<bool>(10, true)), std::invalid_argument);
  CHECK_THROWS_AS(elastic_net_fit(x, y, 1.0, 0.5, std::vector<bool>(9, true)), std::invalid_argument);
  CHECK_THROWS_AS(elastic_net_fit(x, y.head(10), 1.0, 0.5, std::vector<bool>(10, true)), std::invalid_argument);
}

TEST_CASE("penalized method tags") {
  CHECK(mix_for(PenalizedMethod::kLasso) == 1.0);
  CHECK(mix_for(PenalizedMethod::kRidge) == 0.0);
  CHECK(mix_for(PenalizedMethod::kElasticNet) == 0.5);
  for (auto m : {PenalizedMethod::kLasso, PenalizedMethod::kRidge, PenalizedMethod::kElasticNet})
    CHECK(parse_penalized_method(to_string(m)) == m);
  CHECK_THROWS_AS(parse_penalized_method("lars"), std::invalid_argument);
}

TEST_CASE("cv baseline on pure-noise proxies tracks the unadjusted slope") {
  Rng rng(13);
  const Index n = 200;
  const Vector x = rng.normal_vector(n);
  const Vector y = (3.0 * x + rng.normal_vector(n)).eval();
  const Matrix u = rng.normal_matrix(n, 20);
  CvOptions cv;
  cv.seed = 14;
  const auto b = cv_regression_baseline(u, x, y, PenalizedMethod::kElasticNet, cv);
  const double ols = adjusted_effect(x, y, Matrix(n, 0)).alpha_hat;
  CHECK(b.estimate.ci_lo <= ols);
  CHECK(ols <= b.estimate.ci_hi);
  CHECK(b.estimate.std_error > 0.0);
  CHECK(b.lambda_grid.size() == 50);
  CHECK(b.lambda_grid.back() == doctest::Approx(1e-4 * b.lambda_grid.front()));
  CHECK(b.cv_mse.size() == 50);

  const auto again = cv_regression_baseline(u, x, y, PenalizedMethod::kElasticNet, cv);
  CHECK(again.estimate.alpha_hat == b.estimate.alpha_hat);
  CHECK(again.estimate.std_error == b.estimate.std_error);
}

TEST_CASE("cv baseline accepts leave-one-out and rejects n < folds") {
  Rng rng(15);
  const Vector x = rng.normal_vector(12);
  const Vector y = (x + rng.normal_vector(12)).eval();
  const Matrix u = rng.normal_matrix(12, 4);
  CvOptions cv;
  cv.folds = 12;
  cv.bootstrap = 20;
  CHECK_NOTHROW(cv_regression_baseline(u, x, y, PenalizedMethod::kLasso, cv));
  cv.folds = 13;
  CHECK_THROWS_AS(cv_regression_baseline(u, x, y, PenalizedMethod::kLasso, cv), InsufficientSamplesError);
}

TEST_CASE("evaluate metrics") {
  Rng rng(16);
  const Vector z = rng.normal_vector(30);
  const auto m = evaluate(Vector(-3.0 * z), z, 1.2, 1.0, 1.5, "pca-k");
  REQUIRE(m.abs_cor.has_value());
  CHECK(*m.abs_cor == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(m.ae == doctest::Approx(0.2));
  CHECK(*m.aer == doctest::Approx(0.4));
  CHECK(m.baseline_tag == "pca-k");

  const auto exact = evaluate(z, z, 1.0, 1.0, 2.0);
  CHECK(exact.ae == 0.0);
  CHECK(*exact.aer == 0.0);
  CHECK(*evaluate(z, z, 2.0, 1.0, 2.0).aer == doctest::Approx(1.0));
  CHECK_FALSE(evaluate(z, z, 2.0, 1.0, 1.0).aer.has_value());
  CHECK_FALSE(evaluate(Vector::Constant(30, 1.0), z, 1.0, 1.0, 2.0).abs_cor.has_value());
  CHECK_FALSE(evaluate(Vector(), z, 1.0, 1.0, 2.0).abs_cor.has_value());
  CHECK_THROWS_AS(evaluate(z.head(5), z, 1.0, 1.0, 2.0), std::invalid_argument);

  const Vector w = (z + rng.normal_vector(30)).eval();
  const double c = *evaluate(w, z, 0, 0, 1).abs_cor;
  CHECK(c >= 0.0);
  CHECK(c <= 1.0);
  CHECK(*evaluate(Vector(-w), Vector(-z), 0, 0, 1).abs_cor == doctest::Approx(c).epsilon(1e-14));
}
