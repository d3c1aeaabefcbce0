#include "pcf/cli/dataset_csv.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <limits>
#include <map>
#include <ostream>
#include <sstream>

namespace pcf::cli {

std::string format_double(double v) {
  if (std::isnan(v)) return "NA";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

double parse_double(const std::string& field) {
  std::size_t b = 0;
  std::size_t e = field.size();
  while (b < e && (field[b] == ' ' || field[b] == '\t')) ++b;
  while (e > b && (field[e - 1] == ' ' || field[e - 1] == '\t' || field[e - 1] == '\r')) --e;
  if (b == e) throw std::invalid_argument("empty field");
  if (field.compare(b, e - b, "NA") == 0) return std::numeric_limits<double>::quiet_NaN();
  const char* first = field.data() + b;
  if (*first == '+') ++first;
  double v = 0.0;
  const auto res = std::from_chars(first, field.data() + e, v);
  if (res.ec != std::errc() || res.ptr != field.data() + e)
    throw std::invalid_argument("not a number: '" + field.substr(b, e - b) + "'");
  return v;
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else if (c != '\r' && c != '\n') {
      cur.push_back(c);
    }
  }
  out.push_back(cur);
  return out;
}

namespace {

std::string trim(const std::string& s) {
  std::size_t b = 0, e = s.size();
  while (b < e && (s[b] == ' ' || s[b] == '\t')) ++b;
  while (e > b && (s[e - 1] == ' ' || s[e - 1] == '\t')) --e;
  return s.substr(b, e - b);
}

bool parse_index_suffix(const std::string& name, const std::string& prefix, Index& out) {
  if (name.size() <= prefix.size() || name.compare(0, prefix.size(), prefix) != 0) return false;
  Index v = 0;
  const char* first = name.data() + prefix.size();
  const char* last = name.data() + name.size();
  const auto res = std::from_chars(first, last, v);
  if (res.ec != std::errc() || res.ptr != last) return false;
  out = v;
  return true;
}

}  // namespace

Dataset read_dataset(std::istream& in) {
  std::string line;
  std::size_t line_no = 0;
  // Skip a UTF-8 BOM on the header.
  if (!std::getline(in, line)) throw DatasetError("dataset: empty input (missing header row)", 1);
  ++line_no;
  if (line.size() >= 3 && static_cast<unsigned char>(line[0]) == 0xEF &&
      static_cast<unsigned char>(line[1]) == 0xBB && static_cast<unsigned char>(line[2]) == 0xBF)
    line.erase(0, 3);

  const auto header = split_csv_line(line);
  Index x_col = -1, y_col = -1, zc_col = -1;
  std::map<Index, Index> u_cols;
  std::vector<std::pair<std::string, Index>> ref_cols;
  for (std::size_t c = 0; c < header.size(); ++c) {
    const std::string name = trim(header[c]);
    const auto col = static_cast<Index>(c);
    Index idx = 0;
    auto dup = [&](const std::string& what) {
      return DatasetError("dataset: duplicate column '" + what + "' in header", 1);
    };
    if (name == "x") {
      if (x_col >= 0) throw dup(name);
      x_col = col;
    } else if (name == "y") {
      if (y_col >= 0) throw dup(name);
      y_col = col;
    } else if (name == "z_c_true") {
      if (zc_col >= 0) throw dup(name);
      zc_col = col;
    } else if (parse_index_suffix(name, "u_", idx)) {
      if (!u_cols.emplace(idx, col).second) throw dup(name);
    } else if (name.rfind("ref_", 0) == 0 && name.size() > 4) {
      ref_cols.emplace_back(name, col);
    } else {
      throw DatasetError("dataset: unknown column '" + name + "' in header", 1);
    }
  }
  if (x_col < 0) throw DatasetError("dataset: missing required column 'x'", 1);
  if (y_col < 0) throw DatasetError("dataset: missing required column 'y'", 1);
  if (u_cols.empty()) throw DatasetError("dataset: no proxy columns (u_0 ...)", 1);
  const auto p = static_cast<Index>(u_cols.size());
  for (Index j = 0; j < p; ++j)
    if (!u_cols.count(j))
      throw DatasetError("dataset: proxy columns must be u_0 .. u_" + std::to_string(p - 1) +
                             "; missing 'u_" + std::to_string(j) + "'",
                         1);

  std::vector<std::vector<double>> rows;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty() || trim(line) == "\r") continue;
    const auto fields = split_csv_line(line);
    if (fields.size() != header.size()) {
      std::ostringstream msg;
      msg << "dataset: line " << line_no << " has " << fields.size() << " fields, header has "
          << header.size();
      throw DatasetError(msg.str(), line_no);
    }
    std::vector<double> row(fields.size());
    for (std::size_t c = 0; c < fields.size(); ++c) {
      try {
        row[c] = parse_double(fields[c]);
      } catch (const std::invalid_argument& e) {
        std::ostringstream msg;
        msg << "dataset: line " << line_no << ", column '" << trim(header[c]) << "': " << e.what();
        throw DatasetError(msg.str(), line_no);
      }
      if (!std::isfinite(row[c])) {
        std::ostringstream msg;
        msg << "dataset: line " << line_no << ", column '" << trim(header[c]) << "': non-finite value";
        throw DatasetError(msg.str(), line_no);
      }
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw DatasetError("dataset: no data rows", line_no);

  const auto n = static_cast<Index>(rows.size());
  Dataset d;
  d.x.resize(n);
  d.y.resize(n);
  d.u.resize(n, p);
  if (zc_col >= 0) d.z_c_true = Vector(n);
  d.refs.resize(n, static_cast<Index>(ref_cols.size()));
  for (const auto& rc : ref_cols) d.ref_names.push_back(rc.first);
  for (Index i = 0; i < n; ++i) {
    const auto& r = rows[static_cast<std::size_t>(i)];
    d.x[i] = r[static_cast<std::size_t>(x_col)];
    d.y[i] = r[static_cast<std::size_t>(y_col)];
    for (const auto& [j, c] : u_cols) d.u(i, j) = r[static_cast<std::size_t>(c)];
    if (zc_col >= 0) (*d.z_c_true)[i] = r[static_cast<std::size_t>(zc_col)];
    for (std::size_t k = 0; k < ref_cols.size(); ++k)
      d.refs(i, static_cast<Index>(k)) = r[static_cast<std::size_t>(ref_cols[k].second)];
  }
  return d;
}

Dataset read_dataset_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DatasetError("dataset: cannot open '" + path + "'", 0);
  return read_dataset(in);
}

void write_dataset(std::ostream& out, const Dataset& d) {
  out << "x,y";
  for (Index j = 0; j < d.u.cols(); ++j) out << ",u_" << j;
  if (d.z_c_true) out << ",z_c_true";
  for (const auto& name : d.ref_names) out << ',' << name;
  out << '\n';
  for (Index i = 0; i < d.x.size(); ++i) {
    out << format_double(d.x[i]) << ',' << format_double(d.y[i]);
    for (Index j = 0; j < d.u.cols(); ++j) out << ',' << format_double(d.u(i, j));
    if (d.z_c_true) out << ',' << format_double((*d.z_c_true)[i]);
    for (Index k = 0; k < d.refs.cols(); ++k) out << ',' << format_double(d.refs(i, k));
    out << '\n';
  }
}

void write_dataset_file(const std::string& path, const Dataset& d) {
  std::ofstream out(path);
  if (!out) throw DatasetError("dataset: cannot write '" + path + "'", 0);
  write_dataset(out, d);
}

Dataset dataset_from_draw(const ScmDraw& draw) {
  Dataset d;
  d.x = draw.x;
  d.y = draw.y;
  d.u = draw.u;
  d.z_c_true = draw.z_c;
  d.refs.resize(draw.x.size(), 0);
  return d;
}

}  // namespace pcf::cli
