#include "pcf/cli/gradcheck.hpp"

#include <cmath>
#include <cstdio>

#include "pcf/synth.hpp"

namespace pcf::cli {

GradcheckOutcome run_gradcheck(const GradcheckOptions& opts) {
  if (opts.n < 4) throw InsufficientSamplesError("gradcheck: n must be >= 4");
  if (opts.p < 1) throw std::invalid_argument("gradcheck: p must be >= 1");
  if (opts.coordinates < 1) throw std::invalid_argument("gradcheck: need at least one coordinate");
  if (!(opts.step > 0.0)) throw std::invalid_argument("gradcheck: step must be positive");

  ScmConfig cfg;
  cfg.n = opts.n;
  cfg.p = opts.p;
  cfg.seed = opts.seed;
  const auto draw = generate_scm(cfg);

  GdpcfHyper hyper;
  hyper.seed = opts.seed;
  hyper.residual = opts.residual;

  GdpcfState state;
  if (opts.n >= 25) {
    state = gdpcf_init(draw.u, draw.x, draw.y, hyper);
  } else {
    Rng rng(derive_seed(opts.seed, 0xfa11));
    state.v_x = 0.1 * rng.normal_vector(opts.p);
    state.v_y = 0.1 * rng.normal_vector(opts.p);
    state.v_c = 0.1 * rng.normal_vector(opts.p);
    state.random_init = true;
  }
  const GdpcfBatch batch{centered(draw.u), draw.x.array() - draw.x.mean(), draw.y.array() - draw.y.mean()};

  GradcheckOutcome out;
  out.report = gdpcf_gradcheck(state, batch, hyper, opts.coordinates, opts.step, derive_seed(opts.seed, 0x9c));
  out.random_init = state.random_init;
  out.passed = std::isfinite(out.report.max_rel_error) && out.report.max_rel_error < opts.tolerance;

  char buf[256];
  std::snprintf(buf, sizeof(buf),
                "gradcheck seed=%llu n=%lld p=%lld coordinates=%d h=%g init=%s max_rel_error=%.6e tol=%g %s",
                static_cast<unsigned long long>(opts.seed), static_cast<long long>(opts.n),
                static_cast<long long>(opts.p), opts.coordinates, opts.step, out.random_init ? "random" : "ica",
                out.report.max_rel_error, opts.tolerance, out.passed ? "PASS" : "FAIL");
  out.text = buf;
  return out;
}

}  // namespace pcf::cli
