/**
 * @file csv.hpp
 * @brief Minimal CSV emission and numeric CSV loading.
 *
 * Numbers are written in shortest round-trip form so files are reproducible
 * byte-for-byte and reload to the same doubles.
 */
#pragma once

#include <charconv>
#include <cmath>
#include <fstream>
#include <initializer_list>
#include <istream>
#include <limits>
#include <map>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "pidoc/error.hpp"

namespace pidoc {

/// Shortest decimal representation that round-trips; "inf"/"-inf"/"nan" otherwise.
[[nodiscard]] inline std::string format_number(double value) {
  if (std::isnan(value)) return "nan";
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, res.ptr);
}

/// Quotes a field when it contains a delimiter, quote, or newline.
[[nodiscard]] inline std::string csv_field(std::string_view text) {
  if (text.find_first_of(",\"\n") == std::string_view::npos) return std::string(text);
  std::string out = "\"";
  for (char c : text) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

class CsvWriter {
 public:
  explicit CsvWriter(std::ostream& os) : os_(os) {}

  void header(const std::vector<std::string>& names) { write_fields(names); }

  void row(std::initializer_list<double> values) {
    bool first = true;
    for (double v : values) {
      if (!first) os_ << ',';
      os_ << format_number(v);
      first = false;
    }
    os_ << '\n';
  }

  void row(const std::vector<double>& values) {
    for (std::size_t i = 0; i < values.size(); ++i) {
      if (i) os_ << ',';
      os_ << format_number(values[i]);
    }
    os_ << '\n';
  }

  /// Row of pre-formatted text fields (quoted when needed).
  void text_row(const std::vector<std::string>& fields) { write_fields(fields); }

 private:
  void write_fields(const std::vector<std::string>& fields) {
    for (std::size_t i = 0; i < fields.size(); ++i) {
      if (i) os_ << ',';
      os_ << csv_field(fields[i]);
    }
    os_ << '\n';
  }

  std::ostream& os_;
};

/// Column-oriented numeric table loaded from a CSV file with a header row.
struct NumericTable {
  std::vector<std::string> columns;
  std::vector<std::vector<double>> data;  // data[column][row]

  [[nodiscard]] const std::vector<double>& column(const std::string& name) const {
    for (std::size_t i = 0; i < columns.size(); ++i)
      if (columns[i] == name) return data[i];
    throw Error("csv: missing column '" + name + "'");
  }

  [[nodiscard]] bool has(const std::string& name) const {
    for (const auto& c : columns)
      if (c == name) return true;
    return false;
  }

  [[nodiscard]] std::size_t rows() const { return data.empty() ? 0 : data.front().size(); }
};

[[nodiscard]] inline double parse_number(std::string_view s) {
  if (s == "inf") return std::numeric_limits<double>::infinity();
  if (s == "-inf") return -std::numeric_limits<double>::infinity();
  if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
  double v = 0.0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size())
    throw Error("csv: cannot parse number '" + std::string(s) + "'");
  return v;
}

/// Reads a purely numeric CSV (unquoted header, numeric rows).
[[nodiscard]] inline NumericTable read_numeric_csv(std::istream& is) {
  NumericTable table;
  std::string line;
  if (!std::getline(is, line)) throw Error("csv: empty input");
  {
    std::stringstream ss(line);
    std::string name;
    while (std::getline(ss, name, ',')) table.columns.push_back(name);
  }
  table.data.resize(table.columns.size());
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::size_t col = 0;
    std::size_t start = 0;
    while (start <= line.size()) {
      const std::size_t end = std::min(line.find(',', start), line.size());
      if (col >= table.columns.size()) throw Error("csv: too many fields in row");
      table.data[col++].push_back(parse_number(std::string_view(line).substr(start, end - start)));
      start = end + 1;
    }
    if (col != table.columns.size()) throw Error("csv: too few fields in row");
  }
  return table;
}

[[nodiscard]] inline NumericTable read_numeric_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("csv: cannot open " + path);
  return read_numeric_csv(in);
}

}  // namespace pidoc
