#pragma once

#include "iamflood/error.hpp"
#include "iamflood/grid.hpp"
#include "iamflood/text.hpp"

#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace iamflood {

/// A costed piece of road infrastructure, located on DEM cells, owned by a
/// zone and optionally carried by a zone-graph edge.
struct RoadSegment {
  std::string id;
  std::string taz_id;
  std::optional<std::pair<std::string, std::string>> edge;
  double length_m = 0.0;
  std::string road_type;
  int lanes = 1;
  bool lit = false;
  std::vector<Cell> cells;
};

inline std::vector<Cell> parse_cells(const std::string& s, const std::string& path, std::size_t line)
{
  std::vector<Cell> cells;
  for (const auto& tok : text::split(s, ';')) {
    if (tok.empty()) continue;
    const auto parts = text::split(tok, ':');
    long long r = 0, c = 0;
    if (parts.size() != 2 || !text::parse_int(parts[0], r) || !text::parse_int(parts[1], c) || r < 0 || c < 0)
      throw input_error(path, line, "bad cell '" + tok + "', expected row:col");
    cells.push_back({static_cast<int>(r), static_cast<int>(c)});
  }
  return cells;
}

inline bool parse_bool(std::string v, bool& out)
{
  for (auto& ch : v) ch = static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
  if (v == "1" || v == "true" || v == "yes") return out = true, true;
  if (v == "0" || v == "false" || v == "no") return out = false, true;
  return false;
}

/// Roads CSV `segment_id,taz_id,edge_a,edge_b,length_m,road_type,lanes,lit,cells`,
/// cells encoded `r:c;r:c;...`. Empty edge_a and edge_b mean no graph edge.
inline std::vector<RoadSegment> load_roads(const std::string& path)
{
  const auto table =
      text::read_csv(path, {"segment_id", "taz_id", "edge_a", "edge_b", "length_m", "road_type", "lanes", "lit", "cells"});
  std::vector<RoadSegment> out;
  for (const auto& row : table.rows) {
    RoadSegment s;
    s.id = row.fields[0];
    s.taz_id = row.fields[1];
    if (s.id.empty()) throw input_error(path, row.line, "empty segment_id");
    for (const auto& prev : out)
      if (prev.id == s.id) throw input_error(path, row.line, "duplicate segment_id '" + s.id + "'");
    const auto& ea = row.fields[2];
    const auto& eb = row.fields[3];
    if (ea.empty() != eb.empty()) throw input_error(path, row.line, "edge_a and edge_b must both be set or both empty");
    if (!ea.empty()) s.edge = std::make_pair(ea, eb);
    s.length_m = text::field_double(table, row, 4);
    if (!(s.length_m > 0.0)) throw input_error(path, row.line, "length_m must be positive");
    s.road_type = row.fields[5];
    if (s.road_type.empty()) throw input_error(path, row.line, "empty road_type");
    const auto lanes = text::field_int(table, row, 6);
    if (lanes < 1) throw input_error(path, row.line, "lanes must be >= 1");
    s.lanes = static_cast<int>(lanes);
    if (!parse_bool(row.fields[7], s.lit)) throw input_error(path, row.line, "lit must be true/false or 1/0");
    s.cells = parse_cells(row.fields[8], path, row.line);
    if (s.cells.empty()) throw input_error(path, row.line, "segment has no cells");
    out.push_back(std::move(s));
  }
  return out;
}

} // namespace iamflood
