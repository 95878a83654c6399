#include "ccbf/result_io.hpp"

#include <algorithm>
#include <charconv>
#include <istream>
#include <ostream>
#include <sstream>

#include <fmt/format.h>

namespace ccbf {

namespace {

std::string num(double v) { return fmt::format("{:.17g}", v); }

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream ss(line);
  while (std::getline(ss, cell, ',')) {
    const auto b = cell.find_first_not_of(" \t\r");
    const auto e = cell.find_last_not_of(" \t\r");
    out.push_back(b == std::string::npos ? "" : cell.substr(b, e - b + 1));
  }
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

}  // namespace

std::vector<std::string> result_columns(std::size_t n) {
  std::vector<std::string> cols{"t"};
  for (const char* p : {"x", "u", "cbar"}) {
    for (std::size_t i = 1; i <= n; ++i) cols.push_back(fmt::format("{}_{}", p, i));
  }
  cols.push_back("outer_rounds");
  cols.push_back("inner_rounds");
  for (std::size_t i = 1; i <= n; ++i) cols.push_back(fmt::format("viol_{}", i));
  return cols;
}

void write_result_csv(std::ostream& out, const ScenarioResult& r) {
  const std::size_t n = r.states.empty() ? 0 : r.states.front().size();
  const auto cols = result_columns(n);
  for (std::size_t c = 0; c < cols.size(); ++c) out << (c ? "," : "") << cols[c];
  out << '\n';
  std::string line;
  for (std::size_t k = 0; k < r.rows(); ++k) {
    line = num(r.times[k]);
    for (std::size_t i = 0; i < n; ++i) {
      if (r.states[k][i].size() != 1 || r.controls[k][i].size() != 1) {
        throw DimensionError("result CSV holds one state and one control per node");
      }
      line += ',' + num(r.states[k][i](0));
    }
    for (std::size_t i = 0; i < n; ++i) line += ',' + num(r.controls[k][i](0));
    for (std::size_t i = 0; i < n; ++i) line += ',' + num(r.capabilities[k][i]);
    line += fmt::format(",{},{}", r.outer_rounds[k], r.inner_rounds[k]);
    for (std::size_t i = 0; i < n; ++i) line += ',' + num(r.violations[k][i]);
    out << line << '\n';
  }
}

std::string message_csv_header() { return "sim_time,sub_round,kind,from,to,value"; }

std::string message_csv_row(double time, int sub_round, const CollabMessage& m) {
  return fmt::format("{},{},{},{},{},{}", num(time), sub_round, to_string(m.kind), m.from + 1,
                     m.to + 1, num(m.value));
}

std::size_t ResultTable::column(const std::string& name) const {
  for (std::size_t c = 0; c < header.size(); ++c) {
    if (header[c] == name) return c;
  }
  throw ResultFormatError(fmt::format("missing column '{}'", name));
}

std::vector<double> ResultTable::values(const std::string& name) const {
  const std::size_t c = column(name);
  std::vector<double> out;
  out.reserve(rows.size());
  for (const auto& row : rows) out.push_back(row[c]);
  return out;
}

ResultTable read_result_csv(std::istream& in) {
  ResultTable t;
  std::string line;
  if (!std::getline(in, line)) throw ResultFormatError("empty file: no header");
  t.header = split(line);
  std::size_t n = 0;
  while (std::find(t.header.begin(), t.header.end(), fmt::format("x_{}", n + 1)) != t.header.end()) ++n;
  if (n == 0) throw ResultFormatError("missing column 'x_1'");
  const auto expected = result_columns(n);
  for (std::size_t c = 0; c < expected.size(); ++c) {
    if (c >= t.header.size() || t.header[c] != expected[c]) {
      throw ResultFormatError(fmt::format("column {}: expected '{}', found '{}'", c + 1,
                                          expected[c], c < t.header.size() ? t.header[c] : ""));
    }
  }
  if (t.header.size() != expected.size()) {
    throw ResultFormatError(fmt::format("unexpected extra column '{}'", t.header[expected.size()]));
  }
  t.nodes = n;

  std::size_t row_no = 1;
  while (std::getline(in, line)) {
    ++row_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const auto cells = split(line);
    if (cells.size() != t.header.size()) {
      throw ResultFormatError(
          fmt::format("line {}: {} fields, header has {}", row_no, cells.size(), t.header.size()));
    }
    std::vector<double> row(cells.size());
    for (std::size_t c = 0; c < cells.size(); ++c) {
      const auto& s = cells[c];
      auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), row[c]);
      if (ec != std::errc() || ptr != s.data() + s.size()) {
        throw ResultFormatError(
            fmt::format("line {}: column '{}': '{}' is not a number", row_no, t.header[c], s));
      }
    }
    t.rows.push_back(std::move(row));
  }
  return t;
}

}  // namespace ccbf
