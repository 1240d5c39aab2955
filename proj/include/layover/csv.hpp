#pragma once

#include <cstddef>
#include <iosfwd>
#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace layover::csv {

/// A header-addressed CSV table. Cells are unquoted; commas are separators.
class Table {
 public:
  static Table read(const std::string& path);
  static Table parse(std::istream& in, const std::string& source_name);

  std::size_t rows() const { return cells_.size(); }
  /// Throws ParseError naming the source and line when the column is missing.
  std::size_t column(std::string_view name) const;
  const std::string& cell(std::size_t row, std::size_t col) const { return cells_[row][col]; }
  double number(std::size_t row, std::size_t col) const;
  std::size_t line_of(std::size_t row) const { return lines_[row]; }
  const std::string& source() const { return source_; }

 private:
  std::string source_;
  std::vector<std::string> header_;
  std::vector<std::vector<std::string>> cells_;
  std::vector<std::size_t> lines_;
};

std::vector<std::string> split(std::string_view line, char sep = ',');

/// Shortest decimal text that parses back to exactly `value`.
std::string format_exact(double value);

/// 17 significant digits, the fixed-width round-trip form used in CSV outputs.
std::string format17(double value);

}  // namespace layover::csv
