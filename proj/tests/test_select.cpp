#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "pcf/random.hpp"
#include "pcf/select.hpp"
#include "pcf/synth.hpp"

using namespace pcf;

namespace {

double ks_uniform_distance(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const double n = static_cast<double>(v.size());
  double d = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    d = std::max(d, (static_cast<double>(i) + 1.0) / n - v[i]);
    d = std::max(d, v[i] - static_cast<double>(i) / n);
  }
  return d;
}

ScmDraw strong_confounding_draw(Index n, std::uint64_t seed) {
  ScmConfig cfg;
  cfg.n = n;
  cfg.p = 30;
  cfg.seed = seed;
  return generate_scm(cfg);
}

}  // namespace

TEST_CASE("a perfect predictor of x has a vanishing p_x") {
  Rng rng(1);
  const Vector x = rng.normal_vector(100);
  const Vector y = (2.0 * x + 0.1 * rng.normal_vector(100)).eval();
  const auto s = score_component(x, x, y, 3);
  CHECK(s.p_x < 1e-10);
  CHECK(s.index == 3);
  CHECK(s.score() == doctest::Approx(s.p_x + s.p_y));
}

TEST_CASE("p_x of independent noise is uniform under the null") {
  Rng rng(2);
  std::vector<double> px, py;
  for (int t = 0; t < 1000; ++t) {
    const Vector x = rng.normal_vector(50);
    const Vector y = (x + rng.normal_vector(50)).eval();
    const Vector z = rng.normal_vector(50);
    const auto s = score_component(z, x, y);
    px.push_back(s.p_x);
    py.push_back(s.p_y);
  }
  CHECK(ks_uniform_distance(px) < 0.05);
  CHECK(ks_uniform_distance(py) < 0.05);
}

TEST_CASE("the true confounder outscores noise candidates") {
  int wins = 0;
  for (int t = 0; t < 100; ++t) {
    const auto d = strong_confounding_draw(500, derive_seed(3, t));
    Rng rng(derive_seed(4, t));
    const double zc = score_component(d.z_c, d.x, d.y).score();
    bool best = true;
    for (int j = 0; j < 19 && best; ++j) best = zc < score_component(rng.normal_vector(500), d.x, d.y).score();
    wins += best;
  }
  CHECK(wins >= 95);
}

TEST_CASE("select_confounder finds the planted confounder column") {
  const auto d = strong_confounding_draw(500, 5);
  Rng rng(6);
  Matrix z = rng.normal_matrix(500, 20);
  z.col(13) = d.z_c;
  const auto sel = select_confounder(z, d.x, d.y);
  REQUIRE(sel.chosen.size() == 1);
  CHECK(sel.chosen.front() == 13);
  CHECK(sel.mode == SelectionMode::kArgmin);
  CHECK(sel.scores.size() == 20);
  for (std::size_t i = 1; i < sel.scores.size(); ++i) CHECK(sel.scores[i - 1].score() <= sel.scores[i].score());
}

TEST_CASE("argmin edge cases") {
  Rng rng(7);
  const Vector x = rng.normal_vector(40);
  const Vector y = rng.normal_vector(40);
  CHECK(select_confounder(rng.normal_matrix(40, 1), x, y).chosen == std::vector<Index>{0});

  Matrix dup = rng.normal_matrix(40, 4);
  dup.col(1) = (x + 0.1 * rng.normal_vector(40)).eval();
  dup.col(3) = dup.col(1);
  CHECK(select_confounder(dup, x, y).chosen.front() == 1);

  CHECK_THROWS_AS(select_confounder(Matrix(40, 0), x, y), std::invalid_argument);
}

TEST_CASE("constant candidates score one on both tests") {
  Rng rng(8);
  const Vector x = rng.normal_vector(30), y = rng.normal_vector(30);
  const auto s = score_component(Vector::Constant(30, 2.5), x, y);
  CHECK(s.p_x == 1.0);
  CHECK(s.p_y == 1.0);
  CHECK_THROWS_AS(score_component(x.head(3), x.head(3), y.head(3)), InsufficientSamplesError);
  Vector bad = x;
  bad[4] = NAN;
  CHECK_THROWS_AS(score_component(bad, x, y), std::invalid_argument);
}

TEST_CASE("scores are invariant to rescaling a candidate") {
  const auto d = strong_confounding_draw(200, 9);
  Rng rng(10);
  const Vector z = (d.z_c + rng.normal_vector(200)).eval();
  const auto a = score_component(z, d.x, d.y);
  for (double c : {-7.0, 1e-3, 1e4}) {
    const auto b = score_component(Vector(c * z), d.x, d.y);
    CHECK(std::abs(a.p_x - b.p_x) < 1e-8);
    CHECK(std::abs(a.p_y - b.p_y) < 1e-8);
  }
}

TEST_CASE("threshold mode") {
  const auto d = strong_confounding_draw(300, 11);
  Rng rng(12);
  const Matrix z = rng.normal_matrix(300, 6);
  const auto all = select_confounders_threshold(z, d.x, d.y, 2.0);
  CHECK(all.chosen.size() == 6);
  CHECK(all.mode == SelectionMode::kThreshold);
  CHECK(all.tau == 2.0);
  for (std::size_t i = 0; i < all.chosen.size(); ++i) CHECK(all.chosen[i] == all.scores[i].index);

  CHECK_THROWS_AS(select_confounders_threshold(z, d.x, d.y, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(select_confounders_threshold(z, d.x, d.y, 2.5), std::invalid_argument);
  CHECK(kDefaultSelectionTau == 0.05);

  int empty = 0;
  for (int t = 0; t < 100; ++t) {
    Rng r(derive_seed(13, t));
    const Vector x = r.normal_vector(100);
    const Vector y = (x + r.normal_vector(100)).eval();
    empty += select_confounders_threshold(r.normal_matrix(100, 10), x, y, 1e-9).chosen.empty();
  }
  CHECK(empty == 100);

  Matrix planted = z;
  planted.col(2) = d.z_c;
  const auto thr = select_confounders_threshold(planted, d.x, d.y);
  REQUIRE(!thr.chosen.empty());
  CHECK(thr.chosen.front() == 2);
  for (const auto& s : thr.scores)
    if (std::find(thr.chosen.begin(), thr.chosen.end(), s.index) != thr.chosen.end()) CHECK(s.score() <= 0.05);
}
