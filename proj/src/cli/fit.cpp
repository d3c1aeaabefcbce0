#include "pcf/cli/fit.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <sstream>

#include "pcf/dr.hpp"
#include "pcf/estimate.hpp"
#include "pcf/gdpcf.hpp"
#include "pcf/stats.hpp"

namespace pcf::cli {

namespace {

using nlohmann::json;

json to_json(const Vector& v) {
  json a = json::array();
  for (Index i = 0; i < v.size(); ++i) a.push_back(v[i]);
  return a;
}

json to_json(const CausalEstimate& e) {
  return {{"alpha_hat", e.alpha_hat},
          {"std_error", e.std_error},
          {"ci_lo", e.ci_lo},
          {"ci_hi", e.ci_hi},
          {"adjustment", e.adjustment}};
}

std::string component_name(Index j) { return "z_" + std::to_string(j); }

Matrix columns(const Matrix& z, const std::vector<Index>& idx) {
  Matrix out(z.rows(), static_cast<Index>(idx.size()));
  for (std::size_t c = 0; c < idx.size(); ++c) out.col(static_cast<Index>(c)) = z.col(idx[c]);
  return out;
}

struct Orientation {
  const char* name;
  const Vector& cause;
  const Vector& effect;
};

double r_squared(const Vector& target, const Matrix& z) {
  const double sst = (target.array() - target.mean()).square().sum();
  if (!(sst > 0.0)) return std::numeric_limits<double>::quiet_NaN();
  const auto fit = ols_fit(z, target, true);
  return 1.0 - fit.residuals.squaredNorm() / sst;
}

}  // namespace

json run_fit(const Dataset& data, const FitOptions& opts) {
  const Index n = data.samples();
  const Index p = data.proxies();
  const bool gd = opts.method == "gd-pcf" || opts.method == "gd";
  std::string method = opts.method;
  if (method == "pca" || method == "pls" || method == "ica" || method == "gd") method += "-pcf";
  if (method != "pca-pcf" && method != "pls-pcf" && method != "ica-pcf" && method != "gd-pcf")
    throw std::invalid_argument("fit: unknown method '" + opts.method + "' (expected pca-pcf, pls-pcf, ica-pcf, gd-pcf)");

  if (!gd) {
    if (opts.k < 1) throw std::invalid_argument("fit: k must be >= 1");
    if (opts.k > p) {
      std::ostringstream msg;
      msg << "fit: dimension error: k = " << opts.k << " exceeds the " << p << " proxy column"
          << (p == 1 ? "" : "s");
      throw std::invalid_argument(msg.str());
    }
    if (method == "pls-pcf" && opts.k > 2)
      throw std::invalid_argument("fit: dimension error: pls-pcf yields at most 2 components, k = " +
                                  std::to_string(opts.k));
    if (n < opts.k + 3) {
      std::ostringstream msg;
      msg << "fit: n = " << n << " rows is below the minimum k + 3 = " << opts.k + 3;
      throw InsufficientSamplesError(msg.str());
    }
  } else if (n < 25) {
    throw InsufficientSamplesError("fit: gd-pcf needs at least 25 rows, got " + std::to_string(n));
  }

  const Matrix u = opts.standardize ? standardize_columns(data.u) : data.u;

  json report;
  report["method"] = method;
  report["n"] = n;
  report["p"] = p;
  report["standardized"] = opts.standardize;
  report["seed"] = opts.seed;

  Matrix z_hat;
  Matrix weights;
  json warnings = json::array();
  if (gd) {
    GdpcfHyper hyper;
    hyper.seed = opts.seed;
    hyper.steps = opts.gd_steps;
    const auto state = gdpcf_train(u, data.x, data.y, hyper);
    z_hat = gdpcf_extract(state, u);
    weights = state.v_c;
    report["k"] = 1;
    report["converged"] = true;
    report["random_init"] = state.random_init;
    report["final_loss"] = state.loss_trace.empty() ? json(nullptr) : json(state.loss_trace.back());
    report["coefficients"] = {{"a_x", state.coef.a_x},
                              {"a_c", state.coef.a_c},
                              {"alpha", state.coef.alpha},
                              {"b_y", state.coef.b_y},
                              {"b_c", state.coef.b_c}};
  } else {
    ReductionOutput red;
    if (method == "pca-pcf") {
      red = pca_fit(u, opts.k);
    } else if (method == "pls-pcf") {
      red = pls_fit(u, data.x, data.y, opts.k);
    } else {
      IcaOptions ica;
      ica.seed = opts.seed;
      red = ica_fit(u, opts.k, ica);
    }
    z_hat = red.z_hat;
    weights = red.weights;
    for (const auto& w : red.warnings) warnings.push_back(w);
    report["k"] = opts.k;
    report["converged"] = red.converged;
    report["iterations"] = red.iterations;
  }
  report["warnings"] = warnings;

  EffectOptions eff;
  eff.t_quantile = opts.t_quantile;

  const Orientation orientations[] = {{"x_to_y", data.x, data.y}, {"y_to_x", data.y, data.x}};
  json components = json::array();
  for (Index j = 0; j < z_hat.cols(); ++j) components.push_back({{"index", j}, {"name", component_name(j)}});

  std::set<Index> reported;
  json selection, estimates;
  Index primary = 0;
  std::vector<Index> primary_set;
  for (const auto& o : orientations) {
    const auto arg = select_confounder(z_hat, o.cause, o.effect);
    const auto thr = select_confounders_threshold(z_hat, o.cause, o.effect, opts.tau);
    for (const auto& s : arg.scores)
      components[static_cast<std::size_t>(s.index)][o.name] = {{"p_x", s.p_x}, {"p_y", s.p_y}, {"score", s.score()}};

    const Index best = arg.chosen.front();
    reported.insert(best);
    reported.insert(thr.chosen.begin(), thr.chosen.end());
    selection[o.name] = {{"argmin", best}, {"threshold", thr.chosen}, {"tau", opts.tau}};

    json est;
    est["argmin"] = to_json(adjusted_effect(o.cause, o.effect, z_hat.col(best), eff));
    est["threshold"] = to_json(adjusted_effect(o.cause, o.effect, columns(z_hat, thr.chosen), eff));
    est["unadjusted"] = to_json(adjusted_effect(o.cause, o.effect, Matrix(n, 0), eff));
    estimates[o.name] = est;
    if (std::string(o.name) == "x_to_y") {
      primary = best;
      primary_set = thr.chosen.empty() ? std::vector<Index>{best} : thr.chosen;
    }
  }
  report["components"] = components;
  report["selection"] = selection;
  report["estimates"] = estimates;

  json series, proj;
  for (Index j : reported) {
    series[component_name(j)] = to_json(z_hat.col(j));
    proj[component_name(j)] = to_json(weights.col(j));
  }
  report["chosen"] = std::vector<Index>(reported.begin(), reported.end());
  report["series"] = series;
  report["weights"] = proj;

  if (data.z_c_true) {
    const auto m = evaluate(z_hat.col(primary), *data.z_c_true, 0.0, 0.0, 0.0);
    report["abs_cor"] = m.abs_cor ? json(*m.abs_cor) : json(nullptr);
    json per = json::object();
    for (Index j = 0; j < z_hat.cols(); ++j) {
      const auto mj = evaluate(z_hat.col(j), *data.z_c_true, 0.0, 0.0, 0.0);
      per[component_name(j)] = mj.abs_cor ? json(*mj.abs_cor) : json(nullptr);
    }
    report["abs_cor_components"] = per;
  }

  if (data.refs.cols() > 0) {
    json refs = json::array();
    const Matrix zs = columns(z_hat, primary_set);
    for (Index r = 0; r < data.refs.cols(); ++r) {
      const double r2 = r_squared(data.refs.col(r), zs);
      refs.push_back({{"name", data.ref_names[static_cast<std::size_t>(r)]},
                      {"components", primary_set},
                      {"variance_explained", std::isfinite(r2) ? json(r2) : json(nullptr)}});
    }
    report["reference"] = refs;
  }
  return report;
}

}  // namespace pcf::cli
