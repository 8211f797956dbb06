#include "fairdyn/csv.hpp"

#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "fairdyn/core.hpp"

namespace fairdyn::csv {

std::size_t Table::column(const std::string& name) const {
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (header[i] == name) return i;
  }
  throw ParseError(file, 1, "missing required column \"" + name + "\"");
}

namespace {

// Splits one logical record; quoted fields may span physical lines.
bool next_record(std::istream& in, std::size_t& line, std::vector<std::string>& out,
                 const std::string& name) {
  out.clear();
  std::string field;
  bool in_quotes = false;
  bool any = false;
  const std::size_t start_line = line + 1;
  int ch;
  while ((ch = in.get()) != EOF) {
    any = true;
    const char c = static_cast<char>(ch);
    if (in_quotes) {
      if (c == '"') {
        if (in.peek() == '"') {
          field.push_back('"');
          in.get();
        } else {
          in_quotes = false;
        }
      } else {
        if (c == '\n') ++line;
        field.push_back(c);
      }
      continue;
    }
    if (c == '"') {
      in_quotes = true;
    } else if (c == ',') {
      out.push_back(std::move(field));
      field.clear();
    } else if (c == '\r') {
      // tolerated before '\n'
    } else if (c == '\n') {
      ++line;
      out.push_back(std::move(field));
      return true;
    } else {
      field.push_back(c);
    }
  }
  if (in_quotes) throw ParseError(name, start_line, "unterminated quoted field");
  if (!any) return false;
  ++line;
  out.push_back(std::move(field));
  return true;
}

bool is_blank(const std::vector<std::string>& fields) {
  return fields.size() == 1 && fields[0].empty();
}

}  // namespace

Table parse(std::istream& in, const std::string& name) {
  Table table;
  table.file = name;
  std::size_t line = 0;
  std::vector<std::string> fields;

  bool have_header = false;
  while (next_record(in, line, fields, name)) {
    if (is_blank(fields)) continue;
    if (!have_header) {
      if (!fields.empty() && !fields[0].empty() && fields[0][0] == '#') continue;
      table.header = fields;
      have_header = true;
      continue;
    }
    if (fields.size() != table.header.size()) {
      throw ParseError(name, line,
                       "expected " + std::to_string(table.header.size()) + " fields, found " +
                           std::to_string(fields.size()));
    }
    table.rows.push_back(Row{line, fields});
  }
  if (!have_header) throw ParseError(name, 1, "missing header row");
  return table;
}

Table read(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError(path.string(), 0, "cannot open file");
  return parse(in, path.string());
}

std::string escape(const std::string& field) {
  if (field.find_first_of(",\"\n\r") == std::string::npos) return field;
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out.push_back('"');
    out.push_back(c);
  }
  out.push_back('"');
  return out;
}

void write_row(std::ostream& out, const std::vector<std::string>& fields) {
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i) out << ',';
    out << escape(fields[i]);
  }
  out << '\n';
}

std::string format_double(double value) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  if (ec != std::errc{}) return std::to_string(value);
  return std::string(buf, ptr);
}

}  // namespace fairdyn::csv
