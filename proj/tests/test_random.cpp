#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <set>

#include "pcf/random.hpp"

using namespace pcf;

namespace {

struct Moments {
  double mean = 0.0;
  double var = 0.0;
};

Moments moments(const Vector& v) {
  const double m = v.mean();
  return {m, (v.array() - m).square().mean()};
}

}  // namespace

TEST_CASE("identical seeds replay the same stream") {
  Rng a(42), b(42), c(43);
  bool differs = false;
  for (int i = 0; i < 100; ++i) {
    const double va = a.normal();
    CHECK(va == b.normal());
    differs |= va != c.normal();
  }
  CHECK(differs);
}

TEST_CASE("derive_seed separates streams") {
  std::set<std::uint64_t> seen;
  for (std::uint64_t a = 0; a < 50; ++a)
    for (std::uint64_t b = 0; b < 50; ++b) seen.insert(derive_seed(7, a, b));
  CHECK(seen.size() == 2500);
  CHECK(derive_seed(7, 1, 2) == derive_seed(7, 1, 2));
  CHECK(derive_seed(7, 1, 2) != derive_seed(8, 1, 2));
  CHECK(derive_seed(0, 1, 0) != derive_seed(0, 0, 1));
}

TEST_CASE("uniform draws stay in [0, 1) and [lo, hi)") {
  Rng rng(1);
  double lo = 1.0, hi = 0.0, sum = 0.0;
  const int n = 100000;
  for (int i = 0; i < n; ++i) {
    const double u = rng.uniform();
    lo = std::min(lo, u);
    hi = std::max(hi, u);
    sum += u;
    const double w = rng.uniform(0.5, 1.5);
    REQUIRE(w >= 0.5);
    REQUIRE(w < 1.5);
  }
  CHECK(lo >= 0.0);
  CHECK(hi < 1.0);
  CHECK(sum / n == doctest::Approx(0.5).epsilon(0.01));
}

TEST_CASE("below is unbiased over a small range and rejects zero") {
  Rng rng(3);
  int counts[3] = {0, 0, 0};
  for (int i = 0; i < 30000; ++i) ++counts[rng.below(3)];
  for (int c : counts) CHECK(std::abs(c - 10000) < 400);
  CHECK_THROWS_AS(rng.below(0), std::invalid_argument);
  CHECK(rng.below(1) == 0);
}

TEST_CASE("normal, exponential and gamma match their first two moments") {
  Rng rng(5);
  const Index n = 200000;
  Vector g(n), e(n), ga(n);
  for (Index i = 0; i < n; ++i) {
    g[i] = rng.normal();
    e[i] = rng.exponential();
    ga[i] = rng.gamma(2.0);
  }
  const auto mg = moments(g), me = moments(e), mga = moments(ga);
  CHECK(std::abs(mg.mean) < 0.01);
  CHECK(mg.var == doctest::Approx(1.0).epsilon(0.02));
  CHECK(me.mean == doctest::Approx(1.0).epsilon(0.02));
  CHECK(me.var == doctest::Approx(1.0).epsilon(0.03));
  CHECK(mga.mean == doctest::Approx(2.0).epsilon(0.02));
  CHECK(mga.var == doctest::Approx(2.0).epsilon(0.03));
  CHECK(e.minCoeff() >= 0.0);
  CHECK(ga.minCoeff() > 0.0);
}

TEST_CASE("sample_latent standardizes every family") {
  for (auto dist : {LatentDist::kUniform, LatentDist::kGamma, LatentDist::kExponential, LatentDist::kGaussian}) {
    CAPTURE(to_string(dist));
    Rng rng(11);
    const Vector v = sample_latent(dist, 200000, rng);
    const auto m = moments(v);
    CHECK(std::abs(m.mean) < 0.01);
    CHECK(m.var == doctest::Approx(1.0).epsilon(0.02));
  }
  Rng rng(2);
  const Vector u = sample_latent(LatentDist::kUniform, 10000, rng);
  CHECK(u.cwiseAbs().maxCoeff() <= std::sqrt(3.0));
  const Vector e = sample_latent(LatentDist::kExponential, 10000, rng);
  CHECK(e.minCoeff() >= -1.0);
}

TEST_CASE("latent distribution tags round-trip") {
  for (auto dist : {LatentDist::kUniform, LatentDist::kGamma, LatentDist::kExponential, LatentDist::kGaussian})
    CHECK(parse_latent_dist(to_string(dist)) == dist);
  CHECK(parse_latent_dist("normal") == LatentDist::kGaussian);
  CHECK_THROWS_AS(parse_latent_dist("cauchy"), std::invalid_argument);
}

TEST_CASE("permutation is a bijection") {
  Rng rng(9);
  auto p = rng.permutation(257);
  std::sort(p.begin(), p.end());
  for (Index i = 0; i < 257; ++i) CHECK(p[static_cast<std::size_t>(i)] == i);
  CHECK(rng.permutation(0).empty());
}

TEST_CASE("normal_matrix has the requested shape") {
  Rng rng(4);
  const Matrix m = rng.normal_matrix(3, 5);
  CHECK(m.rows() == 3);
  CHECK(m.cols() == 5);
  CHECK(m.allFinite());
}

TEST_CASE("latent sampling spec points") {
  Rng a(21), b(21);
  const Vector g = sample_latent(LatentDist::kGaussian, 100000, a);
  const double sd = std::sqrt((g.array() - g.mean()).square().sum() / (g.size() - 1));
  CHECK(sd >= 0.99);
  CHECK(sd <= 1.01);
  const Vector g2 = sample_latent(LatentDist::kGaussian, 100000, b);
  CHECK((g.array() == g2.array()).all());

  Rng c(22);
  const Vector e = sample_latent(LatentDist::kExponential, 100000, c);
  const double m = e.mean();
  const double m2 = (e.array() - m).square().mean();
  const double m3 = (e.array() - m).cube().mean();
  CHECK(std::abs(m3 / std::pow(m2, 1.5) - 2.0) < 0.1);
}
