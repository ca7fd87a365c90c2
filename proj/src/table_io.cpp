#include "afc/table_io.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "afc/error.hpp"

namespace afc {

namespace {

WarningSink& sink() {
  static WarningSink s;
  return s;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

}  // namespace

void set_warning_sink(WarningSink s) { sink() = std::move(s); }

void warn(const std::string& message) {
  if (sink()) {
    sink()(message);
  } else {
    std::fputs(("warning: " + message + "\n").c_str(), stderr);
  }
}

std::string format_number(double value) {
  if (value == 0.0) return "0";  // folds -0 as well
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, res.ptr);
}

void write_table(std::ostream& os, const Table& table) {
  if (!table.title.empty()) os << "# " << table.title << '\n';
  for (const auto& [k, v] : table.metadata) os << "# " << k << " = " << v << '\n';
  os << "# ";
  for (std::size_t c = 0; c < table.columns.size(); ++c) os << (c ? "\t" : "") << table.columns[c];
  os << '\n';
  const Eigen::Index rows = table.data.empty() ? 0 : table.data.front().size();
  for (const auto& col : table.data) {
    if (col.size() != rows) throw std::logic_error("write_table: ragged columns");
  }
  for (Eigen::Index r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < table.data.size(); ++c) {
      if (c) os << '\t';
      os << format_number(table.data[c](r));
    }
    os << '\n';
  }
}

Table read_table(std::istream& is) {
  Table t;
  std::vector<std::string> comments;
  std::vector<std::vector<double>> cols;
  std::string line;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    if (line[0] == '#') {
      comments.push_back(trim(line.substr(1)));
      continue;
    }
    std::istringstream ss(line);
    std::vector<double> row;
    std::string cell;
    while (std::getline(ss, cell, '\t')) {
      double v{};
      const auto c = trim(cell);
      const auto res = std::from_chars(c.data(), c.data() + c.size(), v);
      if (res.ec != std::errc{}) throw ConfigError("read_table: malformed number '" + c + "'");
      row.push_back(v);
    }
    if (cols.empty()) cols.resize(row.size());
    if (row.size() != cols.size()) throw ConfigError("read_table: ragged row");
    for (std::size_t c = 0; c < row.size(); ++c) cols[c].push_back(row[c]);
  }
  // Last comment line is the column header, the first may be a title.
  for (std::size_t i = 0; i < comments.size(); ++i) {
    const auto& c = comments[i];
    const auto eq = c.find(" = ");
    if (eq != std::string::npos) {
      t.metadata.emplace_back(trim(c.substr(0, eq)), trim(c.substr(eq + 3)));
    } else if (i + 1 == comments.size()) {
      std::istringstream ss(c);
      std::string name;
      while (std::getline(ss, name, '\t')) t.columns.push_back(trim(name));
    } else if (t.title.empty()) {
      t.title = c;
    }
  }
  for (auto& c : cols) t.data.push_back(Eigen::Map<Eigen::ArrayXd>(c.data(), static_cast<Eigen::Index>(c.size())));
  return t;
}

const std::string& metadata_value(const Table& table, const std::string& key) {
  for (const auto& [k, v] : table.metadata) {
    if (k == key) return v;
  }
  throw ConfigError("missing table metadata key '" + key + "'");
}

}  // namespace afc
