#pragma once

// Raster containers and the ASCII grid format (ncols/nrows/xllcorner/
// yllcorner/cellsize/NODATA_value header, row 0 = north).

#include "iamflood/error.hpp"
#include "iamflood/text.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstddef>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace iamflood {

struct Cell {
  int row = 0;
  int col = 0;
  friend bool operator==(const Cell&, const Cell&) = default;
};

struct DemGrid {
  int nrows = 0;
  int ncols = 0;
  double cell_size_m = 1.0;
  double xll = 0.0;
  double yll = 0.0;
  double nodata_value = -9999.0;
  std::vector<double> elevation;  // row-major
  std::vector<char> nodata;       // 1 = masked

  DemGrid() = default;

  DemGrid(int rows, int cols, double cell_size, std::vector<double> elev)
      : nrows(rows), ncols(cols), cell_size_m(cell_size), elevation(std::move(elev)),
        nodata(static_cast<std::size_t>(rows) * cols, 0)
  {
    validate();
  }

  std::size_t size() const { return elevation.size(); }
  std::size_t index(int r, int c) const { return static_cast<std::size_t>(r) * ncols + c; }
  bool in_bounds(int r, int c) const { return r >= 0 && r < nrows && c >= 0 && c < ncols; }
  double cell_area() const { return cell_size_m * cell_size_m; }
  bool masked(std::size_t i) const { return nodata[i] != 0; }

  void validate() const
  {
    if (nrows < 1 || ncols < 1) throw InputError("raster must have at least one row and column");
    if (!(cell_size_m > 0.0) || !std::isfinite(cell_size_m)) throw InputError("cell size must be positive");
    const auto n = static_cast<std::size_t>(nrows) * ncols;
    if (elevation.size() != n || nodata.size() != n) throw InputError("raster data does not match its shape");
    for (std::size_t i = 0; i < n; ++i)
      if (!nodata[i] && !std::isfinite(elevation[i])) throw InputError("non-finite elevation in unmasked cell");
  }
};

/// Water depths on the cells of a DemGrid.
struct DepthField {
  int nrows = 0;
  int ncols = 0;
  double cell_size_m = 1.0;
  std::vector<double> depth_m;
  double input_m3 = 0.0;
  double outflow_m3 = 0.0;

  std::size_t index(int r, int c) const { return static_cast<std::size_t>(r) * ncols + c; }
  bool in_bounds(int r, int c) const { return r >= 0 && r < nrows && c >= 0 && c < ncols; }
  double at(int r, int c) const { return depth_m[index(r, c)]; }

  double stored_m3() const
  {
    double s = 0.0;
    for (double d : depth_m) s += d;
    return s * cell_size_m * cell_size_m;
  }
};

namespace detail {

inline std::string lower(std::string s)
{
  for (char& ch : s) ch = static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
  return s;
}

} // namespace detail

inline DemGrid parse_ascii_grid(const std::string& content, const std::string& path = "<raster>")
{
  std::istringstream in(content);
  std::string line;
  std::size_t lineno = 0;

  std::optional<long long> ncols, nrows;
  std::optional<double> cellsize, nodata_value;
  double xll = 0.0, yll = 0.0;
  bool x_center = false, y_center = false;

  // Header: keyword/value pairs until the first line starting with a number.
  std::streampos data_start = in.tellg();
  std::size_t data_line = 0;
  while (true) {
    data_start = in.tellg();
    if (!std::getline(in, line)) break;
    ++lineno;
    const auto t = text::trim(line);
    if (t.empty()) continue;
    const char first = t.front();
    if (std::isdigit(static_cast<unsigned char>(first)) || first == '-' || first == '+' || first == '.') {
      data_line = lineno;
      break;
    }
    std::istringstream ls{std::string(t)};
    std::string key, value, extra;
    ls >> key >> value;
    if (value.empty() || (ls >> extra)) throw input_error(path, lineno, "malformed header line");
    key = detail::lower(key);
    long long iv = 0;
    double dv = 0.0;
    if (key == "ncols" || key == "nrows") {
      if (!text::parse_int(value, iv)) throw input_error(path, lineno, key + " is not an integer");
      (key == "ncols" ? ncols : nrows) = iv;
    } else if (key == "xllcorner" || key == "xllcenter" || key == "yllcorner" || key == "yllcenter" ||
               key == "cellsize" || key == "nodata_value") {
      if (!text::parse_double(value, dv)) throw input_error(path, lineno, key + " is not a number");
      if (key == "xllcorner") xll = dv;
      else if (key == "xllcenter") xll = dv, x_center = true;
      else if (key == "yllcorner") yll = dv;
      else if (key == "yllcenter") yll = dv, y_center = true;
      else if (key == "cellsize") cellsize = dv;
      else nodata_value = dv;
    } else {
      throw input_error(path, lineno, "unknown header keyword '" + key + "'");
    }
  }
  if (!ncols || !nrows) throw input_error(path, lineno, "header must declare ncols and nrows");
  if (!cellsize) throw input_error(path, lineno, "header must declare cellsize");
  if (*ncols < 1 || *nrows < 1) throw input_error(path, lineno, "ncols and nrows must be positive");
  if (!(*cellsize > 0.0)) throw input_error(path, lineno, "cellsize must be positive");
  if (data_line == 0) throw input_error(path, lineno, "no raster rows");

  DemGrid g;
  g.nrows = static_cast<int>(*nrows);
  g.ncols = static_cast<int>(*ncols);
  g.cell_size_m = *cellsize;
  g.xll = x_center ? xll - 0.5 * *cellsize : xll;
  g.yll = y_center ? yll - 0.5 * *cellsize : yll;
  if (nodata_value) g.nodata_value = *nodata_value;
  g.elevation.reserve(static_cast<std::size_t>(g.nrows) * g.ncols);
  g.nodata.reserve(static_cast<std::size_t>(g.nrows) * g.ncols);

  in.clear();
  in.seekg(data_start);
  lineno = data_line - 1;
  int rows_read = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (text::trim(line).empty()) continue;
    if (rows_read == g.nrows) throw input_error(path, lineno, "more rows than nrows=" + std::to_string(g.nrows));
    std::istringstream ls(line);
    std::string tok;
    int count = 0;
    while (ls >> tok) {
      double v = 0.0;
      if (!text::parse_double(tok, v)) throw input_error(path, lineno, "non-numeric cell '" + tok + "'");
      ++count;
      if (count > g.ncols) break;
      const bool masked = nodata_value && v == *nodata_value;
      if (!masked && !std::isfinite(v)) throw input_error(path, lineno, "non-finite cell value");
      g.elevation.push_back(masked ? 0.0 : v);
      g.nodata.push_back(masked ? 1 : 0);
    }
    if (count != g.ncols)
      throw input_error(path, lineno,
                        "row has " + std::string(count > g.ncols ? "more than " : "") + std::to_string(count) +
                            " values, ncols=" + std::to_string(g.ncols));
    ++rows_read;
  }
  if (rows_read != g.nrows)
    throw input_error(path, lineno, "found " + std::to_string(rows_read) + " rows, nrows=" + std::to_string(g.nrows));
  return g;
}

inline DemGrid load_dem(const std::string& path) { return parse_ascii_grid(text::read_file(path), path); }

/// Writes values in the ASCII grid format; masked cells get `nodata_value`.
inline void write_ascii_grid(std::ostream& out, int nrows, int ncols, double cell_size, double xll, double yll,
                             double nodata_value, const std::vector<double>& values, const std::vector<char>& mask)
{
  out << "ncols " << ncols << "\n"
      << "nrows " << nrows << "\n"
      << "xllcorner " << text::format_double(xll) << "\n"
      << "yllcorner " << text::format_double(yll) << "\n"
      << "cellsize " << text::format_double(cell_size) << "\n"
      << "NODATA_value " << text::format_double(nodata_value) << "\n";
  for (int r = 0; r < nrows; ++r) {
    for (int c = 0; c < ncols; ++c) {
      const auto i = static_cast<std::size_t>(r) * ncols + c;
      if (c) out << ' ';
      out << text::format_double(!mask.empty() && mask[i] ? nodata_value : values[i]);
    }
    out << "\n";
  }
}

inline void write_depth_raster(const std::string& path, const DemGrid& dem, const DepthField& field)
{
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  write_ascii_grid(out, dem.nrows, dem.ncols, dem.cell_size_m, dem.xll, dem.yll, dem.nodata_value, field.depth_m,
                   dem.nodata);
}

} // namespace iamflood
