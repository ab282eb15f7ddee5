#pragma once

// Line-oriented text helpers shared by the CSV and key-value loaders.

#include "iamflood/error.hpp"

#include <charconv>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

namespace iamflood::text {

inline std::string_view trim(std::string_view s)
{
  constexpr std::string_view ws = " \t\r\n";
  const auto b = s.find_first_not_of(ws);
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(ws);
  return s.substr(b, e - b + 1);
}

inline std::vector<std::string> split(std::string_view s, char sep)
{
  std::vector<std::string> out;
  std::size_t start = 0;
  for (;;) {
    const auto pos = s.find(sep, start);
    out.emplace_back(trim(s.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

inline std::string read_file(const std::string& path)
{
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline bool parse_double(std::string_view s, double& out)
{
  s = trim(s);
  if (s.empty()) return false;
  if (s.front() == '+') s.remove_prefix(1);
  const auto* end = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(s.data(), end, out);
  return ec == std::errc() && ptr == end;
}

inline bool parse_int(std::string_view s, long long& out)
{
  s = trim(s);
  if (s.empty()) return false;
  if (s.front() == '+') s.remove_prefix(1);
  const auto* end = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(s.data(), end, out);
  return ec == std::errc() && ptr == end;
}

/// Shortest round-trip representation; integral values keep a trailing ".0".
inline std::string format_double(double v)
{
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  std::string s(buf, ptr);
  if (std::isfinite(v) && s.find_first_of(".en") == std::string::npos) s += ".0";
  return s;
}

/// A parsed CSV file: header plus data rows, each row remembering its 1-based line number.
struct CsvTable {
  struct Row {
    std::size_t line;
    std::vector<std::string> fields;
  };
  std::string path;
  std::vector<std::string> header;
  std::vector<Row> rows;
};

/// Reads a comma-separated file and checks that the header matches `expected` exactly.
/// Blank lines are skipped; every data row must have the header's field count.
inline CsvTable read_csv(const std::string& path, const std::vector<std::string>& expected)
{
  const std::string content = read_file(path);
  CsvTable table;
  table.path = path;
  std::istringstream in(content);
  std::string line;
  std::size_t lineno = 0;
  bool have_header = false;
  while (std::getline(in, line)) {
    ++lineno;
    if (lineno == 1 && line.size() >= 3 && line.compare(0, 3, "\xEF\xBB\xBF") == 0) line.erase(0, 3);
    if (trim(line).empty()) continue;
    auto fields = split(line, ',');
    if (!have_header) {
      if (fields != expected) {
        std::string want;
        for (const auto& f : expected) want += (want.empty() ? "" : ",") + f;
        throw input_error(path, lineno, "expected header '" + want + "'");
      }
      table.header = std::move(fields);
      have_header = true;
      continue;
    }
    if (fields.size() != expected.size())
      throw input_error(path, lineno,
                        "expected " + std::to_string(expected.size()) + " fields, got " + std::to_string(fields.size()));
    table.rows.push_back({lineno, std::move(fields)});
  }
  if (!have_header) throw input_error(path, 1, "missing header");
  return table;
}

inline double field_double(const CsvTable& t, const CsvTable::Row& row, std::size_t col)
{
  double v = 0.0;
  if (!parse_double(row.fields[col], v) || !std::isfinite(v))
    throw input_error(t.path, row.line, "field '" + t.header[col] + "' is not a finite number: '" + row.fields[col] + "'");
  return v;
}

inline long long field_int(const CsvTable& t, const CsvTable::Row& row, std::size_t col)
{
  long long v = 0;
  if (!parse_int(row.fields[col], v))
    throw input_error(t.path, row.line, "field '" + t.header[col] + "' is not an integer: '" + row.fields[col] + "'");
  return v;
}

} // namespace iamflood::text
