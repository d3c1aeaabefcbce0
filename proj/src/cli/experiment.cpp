#include "pcf/cli/experiment.hpp"

#include <algorithm>
#include <charconv>
#include <istream>
#include <map>
#include <ostream>
#include <set>
#include <stdexcept>

#include "pcf/cli/dataset_csv.hpp"

namespace pcf::cli {

namespace {

struct MethodName {
  BenchMethod method;
  std::string_view tag;
};

constexpr MethodName kMethodNames[] = {
    {BenchMethod::kOracle, "oracle"},   {BenchMethod::kPcaPcf, "pca-pcf"}, {BenchMethod::kPlsPcf, "pls-pcf"},
    {BenchMethod::kIcaPcf, "ica-pcf"},  {BenchMethod::kGdPcf, "gd-pcf"},   {BenchMethod::kLasso, "lasso"},
    {BenchMethod::kRidge, "ridge"},     {BenchMethod::kElasticNet, "enet"},
};

std::uint64_t parse_u64(const std::string& s) {
  std::uint64_t v = 0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size())
    throw std::invalid_argument("not an unsigned integer: '" + s + "'");
  return v;
}

std::string opt_text(const std::optional<double>& v) { return v ? format_double(*v) : std::string("NA"); }

std::optional<double> opt_parse(const std::string& s) {
  const double v = parse_double(s);
  if (std::isnan(v)) return std::nullopt;
  return v;
}

}  // namespace

std::string_view to_string(BenchMethod m) {
  for (const auto& mn : kMethodNames)
    if (mn.method == m) return mn.tag;
  return "unknown";
}

BenchMethod parse_bench_method(std::string_view tag) {
  for (const auto& mn : kMethodNames)
    if (mn.tag == tag) return mn.method;
  throw std::invalid_argument("unknown method '" + std::string(tag) +
                              "' (expected pca-pcf, pls-pcf, ica-pcf, gd-pcf, oracle, lasso, ridge, enet)");
}

std::string_view to_string(AerBaseline b) { return b == AerBaseline::kPcaK ? "pca-k" : "enet"; }

AerBaseline parse_aer_baseline(std::string_view tag) {
  if (tag == "pca-k") return AerBaseline::kPcaK;
  if (tag == "enet") return AerBaseline::kElasticNet;
  throw std::invalid_argument("unknown AER baseline '" + std::string(tag) + "' (expected pca-k or enet)");
}

const std::vector<BenchMethod>& all_bench_methods() {
  static const std::vector<BenchMethod> all = [] {
    std::vector<BenchMethod> v;
    for (const auto& mn : kMethodNames) v.push_back(mn.method);
    return v;
  }();
  return all;
}

void ExperimentSpec::validate() const {
  if (methods.empty()) throw std::invalid_argument("spec: no methods selected");
  if (sizes.empty()) throw std::invalid_argument("spec: no sample sizes");
  for (Index n : sizes)
    if (n <= 0) throw std::invalid_argument("spec: sample sizes must be positive");
  if (trials < 1) throw std::invalid_argument("spec: trials must be >= 1");
  if (dists.empty()) throw std::invalid_argument("spec: no latent distributions");
  if (gd_steps < 0) throw std::invalid_argument("spec: gd_steps must be >= 0");
  std::set<BenchMethod> seen;
  for (auto m : methods)
    if (!seen.insert(m).second)
      throw std::invalid_argument("spec: method '" + std::string(to_string(m)) + "' listed twice");
  if (p < 1) throw std::invalid_argument("spec: p must be >= 1");
  if (d_x < 0 || d_y < 0 || d_c < 1 || d_x + d_c + d_y > k)
    throw std::invalid_argument("spec: require d_c >= 1 and d_x + d_c + d_y <= k");
  if (output.empty()) throw std::invalid_argument("spec: empty output path");
}

void ExperimentSpec::apply_paper_scale() {
  p = 1000;
  trials = 100;
}

ExperimentSpec spec_from_json(const nlohmann::json& j, ExperimentSpec s) {
  if (!j.is_object()) throw std::invalid_argument("spec: top level must be a JSON object");
  static const std::set<std::string> known = {"methods", "sizes",  "trials", "dists",        "dist",
                                              "p",       "k",      "d_x",    "d_c",          "d_y",
                                              "scm",     "seed",   "output", "aer_baseline", "proxy_noise",
                                              "gd_steps", "record_timing", "paper_scale"};
  for (const auto& [key, _] : j.items())
    if (!known.count(key)) throw std::invalid_argument("spec: unknown key '" + key + "'");

  try {
    if (j.value("paper_scale", false)) s.apply_paper_scale();
    if (j.contains("methods")) {
      s.methods.clear();
      for (const auto& m : j.at("methods")) s.methods.push_back(parse_bench_method(m.get<std::string>()));
    }
    if (j.contains("sizes")) s.sizes = j.at("sizes").get<std::vector<Index>>();
    if (j.contains("trials")) s.trials = j.at("trials").get<int>();
    if (j.contains("dist")) s.dists = {parse_latent_dist(j.at("dist").get<std::string>())};
    if (j.contains("dists")) {
      s.dists.clear();
      for (const auto& d : j.at("dists")) s.dists.push_back(parse_latent_dist(d.get<std::string>()));
    }
    // Flat keys and a nested "scm" block are both accepted; the nested block wins.
    auto scm_fields = [&s](const nlohmann::json& o) {
      if (o.contains("p")) s.p = o.at("p").get<Index>();
      if (o.contains("k")) s.k = o.at("k").get<Index>();
      if (o.contains("d_x")) s.d_x = o.at("d_x").get<Index>();
      if (o.contains("d_c")) s.d_c = o.at("d_c").get<Index>();
      if (o.contains("d_y")) s.d_y = o.at("d_y").get<Index>();
      if (o.contains("proxy_noise")) s.proxy_noise = o.at("proxy_noise").get<bool>();
    };
    scm_fields(j);
    if (j.contains("scm")) {
      const auto& scm = j.at("scm");
      for (const auto& [key, _] : scm.items())
        if (key != "p" && key != "k" && key != "d_x" && key != "d_c" && key != "d_y" && key != "proxy_noise")
          throw std::invalid_argument("spec: unknown scm key '" + key + "'");
      scm_fields(scm);
    }
    if (j.contains("seed")) s.seed = j.at("seed").get<std::uint64_t>();
    if (j.contains("output")) s.output = j.at("output").get<std::string>();
    if (j.contains("aer_baseline")) s.aer_baseline = parse_aer_baseline(j.at("aer_baseline").get<std::string>());
    if (j.contains("gd_steps")) s.gd_steps = j.at("gd_steps").get<int>();
    if (j.contains("record_timing")) s.record_timing = j.at("record_timing").get<bool>();
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument(std::string("spec: ") + e.what());
  }
  s.validate();
  return s;
}

nlohmann::json spec_to_json(const ExperimentSpec& s) {
  nlohmann::json j;
  auto& methods = j["methods"] = nlohmann::json::array();
  for (auto m : s.methods) methods.push_back(std::string(to_string(m)));
  j["sizes"] = s.sizes;
  j["trials"] = s.trials;
  auto& dists = j["dists"] = nlohmann::json::array();
  for (auto d : s.dists) dists.push_back(std::string(to_string(d)));
  j["scm"] = {{"p", s.p}, {"k", s.k}, {"d_x", s.d_x}, {"d_c", s.d_c}, {"d_y", s.d_y}, {"proxy_noise", s.proxy_noise}};
  j["aer_baseline"] = std::string(to_string(s.aer_baseline));
  j["seed"] = s.seed;
  j["gd_steps"] = s.gd_steps;
  j["record_timing"] = s.record_timing;
  j["output"] = s.output;
  return j;
}

std::uint64_t trial_seed(const ExperimentSpec& spec, LatentDist dist, Index n, int trial) {
  const auto stream = derive_seed(spec.seed, static_cast<std::uint64_t>(dist) + 1, static_cast<std::uint64_t>(n));
  return derive_seed(stream, static_cast<std::uint64_t>(trial));
}

bool ResultRow::operator==(const ResultRow& o) const {
  auto same = [](const std::optional<double>& a, const std::optional<double>& b) {
    if (a.has_value() != b.has_value()) return false;
    return !a || *a == *b;
  };
  return method == o.method && dist == o.dist && n == o.n && trial == o.trial && same(abs_cor, o.abs_cor) &&
         same(ae, o.ae) && same(aer, o.aer) && same(alpha_hat, o.alpha_hat) && same(runtime_ms, o.runtime_ms) &&
         seed == o.seed;
}

void write_results(std::ostream& out, const std::vector<ResultRow>& rows) {
  out << kResultHeader << '\n';
  for (const auto& r : rows) {
    out << r.method << ',' << r.dist << ',' << r.n << ',' << r.trial << ',' << opt_text(r.abs_cor) << ','
        << opt_text(r.ae) << ',' << opt_text(r.aer) << ',' << opt_text(r.alpha_hat) << ','
        << opt_text(r.runtime_ms) << ',';
    if (r.seed)
      out << *r.seed;
    else
      out << "NA";
    out << '\n';
  }
}

std::vector<ResultRow> read_results(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("results: empty input");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != kResultHeader) throw std::runtime_error("results: line 1: unexpected header '" + line + "'");
  std::vector<ResultRow> rows;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto f = split_csv_line(line);
    if (f.size() != 10)
      throw std::runtime_error("results: line " + std::to_string(line_no) + ": expected 10 fields, got " +
                               std::to_string(f.size()));
    try {
      ResultRow r;
      r.method = f[0];
      r.dist = f[1];
      r.n = static_cast<Index>(parse_u64(f[2]));
      r.trial = f[3];
      r.abs_cor = opt_parse(f[4]);
      r.ae = opt_parse(f[5]);
      r.aer = opt_parse(f[6]);
      r.alpha_hat = opt_parse(f[7]);
      r.runtime_ms = opt_parse(f[8]);
      if (f[9] != "NA") r.seed = parse_u64(f[9]);
      rows.push_back(std::move(r));
    } catch (const std::invalid_argument& e) {
      throw std::runtime_error("results: line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return rows;
}

namespace {

std::optional<double> median_of(std::vector<double> v) {
  if (v.empty()) return std::nullopt;
  std::sort(v.begin(), v.end());
  const std::size_t m = v.size() / 2;
  if (v.size() % 2 == 1) return v[m];
  return 0.5 * (v[m - 1] + v[m]);
}

}  // namespace

ResultRow median_row(const std::vector<const ResultRow*>& trials) {
  if (trials.empty()) throw std::invalid_argument("median_row: no rows");
  ResultRow out;
  out.method = trials.front()->method;
  out.dist = trials.front()->dist;
  out.n = trials.front()->n;
  out.trial = std::string(kMedianTag);
  auto column = [&](std::optional<double> ResultRow::*field) {
    std::vector<double> v;
    for (const auto* r : trials)
      if (r->*field) v.push_back(*(r->*field));
    return median_of(std::move(v));
  };
  out.abs_cor = column(&ResultRow::abs_cor);
  out.ae = column(&ResultRow::ae);
  out.aer = column(&ResultRow::aer);
  out.alpha_hat = column(&ResultRow::alpha_hat);
  out.runtime_ms = column(&ResultRow::runtime_ms);
  return out;
}

std::vector<ResultRow> with_medians(const std::vector<ResultRow>& trial_rows) {
  std::vector<ResultRow> out;
  std::size_t block_start = 0;
  while (block_start < trial_rows.size()) {
    const auto& head = trial_rows[block_start];
    std::size_t block_end = block_start;
    while (block_end < trial_rows.size() && trial_rows[block_end].dist == head.dist &&
           trial_rows[block_end].n == head.n)
      ++block_end;

    std::vector<std::string> order;
    std::map<std::string, std::vector<const ResultRow*>> by_method;
    for (std::size_t i = block_start; i < block_end; ++i) {
      const auto& r = trial_rows[i];
      out.push_back(r);
      auto [it, fresh] = by_method.try_emplace(r.method);
      if (fresh) order.push_back(r.method);
      it->second.push_back(&r);
    }
    for (const auto& m : order) out.push_back(median_row(by_method[m]));
    block_start = block_end;
  }
  return out;
}

}  // namespace pcf::cli
