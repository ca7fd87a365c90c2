#pragma once

// Tab-separated numeric tables with "# key = value" comment headers. Numbers
// use the shortest round-trip representation so identical inputs always give
// byte-identical files.

#include <Eigen/Dense>

#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

namespace afc {

std::string format_number(double value);

struct Table {
  std::string title;
  std::vector<std::pair<std::string, std::string>> metadata;
  std::vector<std::string> columns;
  std::vector<Eigen::ArrayXd> data;  // one entry per column, equal lengths
};

void write_table(std::ostream& os, const Table& table);

/// Parses a table written by write_table. Metadata keys map to raw strings.
Table read_table(std::istream& is);

/// Looks up a metadata value or throws ConfigError naming the missing key.
const std::string& metadata_value(const Table& table, const std::string& key);

}  // namespace afc
