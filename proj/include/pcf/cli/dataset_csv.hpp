#pragma once

#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "pcf/synth.hpp"
#include "pcf/types.hpp"

namespace pcf::cli {

/// Observational dataset: treatment x, outcome y, proxies U, plus optional
/// ground-truth confounder and reference series.
struct Dataset {
  Vector x;
  Vector y;
  Matrix u;
  std::optional<Vector> z_c_true;
  Matrix refs;  ///< n x r, r may be 0
  std::vector<std::string> ref_names;

  Index samples() const { return x.size(); }
  Index proxies() const { return u.cols(); }
};

/// Schema or parse failure; `line` is 1-based (0 when not tied to a line).
class DatasetError : public std::runtime_error {
 public:
  DatasetError(const std::string& what, std::size_t line) : std::runtime_error(what), line(line) {}
  std::size_t line;
};

/// Header row with required `x`, `y` and `u_0 .. u_{p-1}`; optional
/// `z_c_true` and `ref_*` columns. Column order is free; unknown columns are
/// rejected. Values use '.' as decimal separator.
Dataset read_dataset(std::istream& in);
Dataset read_dataset_file(const std::string& path);

/// Columns x, y, u_0.., then z_c_true and ref_* when present. Round-trips
/// exactly through read_dataset.
void write_dataset(std::ostream& out, const Dataset& d);
void write_dataset_file(const std::string& path, const Dataset& d);

Dataset dataset_from_draw(const ScmDraw& draw);

/// Shortest decimal text that parses back to the same double ("NA" for NaN).
std::string format_double(double v);
/// Locale-independent parse of one CSV field; throws std::invalid_argument.
double parse_double(const std::string& field);

/// Splits one CSV line on commas (no quoting).
std::vector<std::string> split_csv_line(const std::string& line);

}  // namespace pcf::cli
