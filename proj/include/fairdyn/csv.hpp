#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

namespace fairdyn::csv {

struct Row {
  std::size_t line = 0;  // 1-based source line
  std::vector<std::string> fields;
};

struct Table {
  std::string file;
  std::vector<std::string> header;
  std::vector<Row> rows;

  /// Column position by name; throws ParseError naming the file when absent.
  std::size_t column(const std::string& name) const;
};

/// RFC-4180 style reader. Lines starting with '#' before the header are
/// metadata comments and skipped. A header row is required; each data row
/// must have exactly as many fields as the header.
Table read(const std::filesystem::path& path);
Table parse(std::istream& in, const std::string& name);

/// Quotes a field when it contains a separator, quote or newline.
std::string escape(const std::string& field);
void write_row(std::ostream& out, const std::vector<std::string>& fields);

/// Shortest round-trippable decimal rendering of a double.
std::string format_double(double value);

}  // namespace fairdyn::csv
