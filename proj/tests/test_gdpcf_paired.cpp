#include <doctest.h>

#include <cmath>

#include "pcf/gdpcf.hpp"
#include "pcf/random.hpp"
#include "pcf/stats.hpp"
#include "pcf/synth.hpp"

using namespace pcf;

TEST_CASE("trained confounder beats its ICA starting point") {
  int wins = 0;
  for (std::uint64_t t = 0; t < 100; ++t) {
    ScmConfig cfg;
    cfg.n = 1000;
    cfg.p = 100;
    cfg.seed = derive_seed(0x9d, t);
    const auto d = generate_scm(cfg);
    GdpcfHyper h;
    h.seed = derive_seed(0x9e, t);
    const auto init = gdpcf_init(d.u, d.x, d.y, h);
    const auto trained = gdpcf_train_from(init, d.u, d.x, d.y, h);
    const double before = std::abs(pearson_correlation(gdpcf_extract(init, d.u), d.z_c));
    const double after = std::abs(pearson_correlation(gdpcf_extract(trained, d.u), d.z_c));
    wins += after >= before;
  }
  MESSAGE("wins = " << wins << " / 100");
  CHECK(wins >= 60);
}
