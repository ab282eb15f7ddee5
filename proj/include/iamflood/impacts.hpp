#pragma once

#include "iamflood/error.hpp"
#include "iamflood/flood.hpp"
#include "iamflood/roads.hpp"
#include "iamflood/text.hpp"
#include "iamflood/transport.hpp"

#include <algorithm>
#include <map>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace iamflood {

struct CostEntry {
  double cost_per_km = 0.0;
  double lighting_per_km = 0.0;
};

/// Construction cost per (road_type, lanes).
class CostTable {
 public:
  void set(const std::string& road_type, int lanes, CostEntry e) { entries_[{road_type, lanes}] = e; }

  const CostEntry& get(const std::string& road_type, int lanes) const
  {
    const auto it = entries_.find({road_type, lanes});
    if (it == entries_.end())
      throw std::out_of_range("cost table has no entry for road_type '" + road_type + "' with " +
                              std::to_string(lanes) + " lanes");
    return it->second;
  }

  bool contains(const std::string& road_type, int lanes) const { return entries_.count({road_type, lanes}) != 0; }
  std::size_t size() const { return entries_.size(); }

 private:
  std::map<std::pair<std::string, int>, CostEntry> entries_;
};

struct DamagePoint {
  double depth_m;
  double fraction;
};

/// Depth-damage points per road type. A curve under the type `*` applies to
/// any type without its own curve.
class DamageCurves {
 public:
  void set(const std::string& road_type, std::vector<DamagePoint> points)
  {
    validate(points);
    curves_[road_type] = std::move(points);
  }

  const std::vector<DamagePoint>& get(const std::string& road_type) const
  {
    auto it = curves_.find(road_type);
    if (it == curves_.end()) it = curves_.find("*");
    if (it == curves_.end()) throw std::out_of_range("no damage curve for road_type '" + road_type + "'");
    return it->second;
  }

  bool covers(const std::string& road_type) const { return curves_.count(road_type) || curves_.count("*"); }

  static void validate(const std::vector<DamagePoint>& pts)
  {
    if (pts.empty()) throw std::invalid_argument("damage curve is empty");
    if (pts.front().depth_m != 0.0 || pts.front().fraction != 0.0)
      throw std::invalid_argument("damage curve must start at (0, 0)");
    for (std::size_t k = 0; k < pts.size(); ++k) {
      if (!(pts[k].fraction >= 0.0 && pts[k].fraction <= 1.0))
        throw std::invalid_argument("damage fraction outside [0, 1]");
      if (k > 0 && !(pts[k].depth_m > pts[k - 1].depth_m))
        throw std::invalid_argument("damage curve depths must be strictly increasing");
      if (k > 0 && pts[k].fraction < pts[k - 1].fraction)
        throw std::invalid_argument("damage curve fractions must be non-decreasing");
    }
  }

 private:
  std::map<std::string, std::vector<DamagePoint>> curves_;
};

inline CostTable load_cost_table(const std::string& path)
{
  const auto table = text::read_csv(path, {"road_type", "lanes", "cost_per_km", "lighting_per_km"});
  CostTable out;
  for (const auto& row : table.rows) {
    const auto& type = row.fields[0];
    if (type.empty()) throw input_error(path, row.line, "empty road_type");
    const auto lanes = text::field_int(table, row, 1);
    if (lanes < 1) throw input_error(path, row.line, "lanes must be >= 1");
    const CostEntry e{text::field_double(table, row, 2), text::field_double(table, row, 3)};
    if (!(e.cost_per_km >= 0.0) || !(e.lighting_per_km >= 0.0))
      throw input_error(path, row.line, "costs must be >= 0");
    if (out.contains(type, static_cast<int>(lanes)))
      throw input_error(path, row.line, "duplicate cost entry for '" + type + "'");
    out.set(type, static_cast<int>(lanes), e);
  }
  return out;
}

/// Rows are grouped by road_type and must be in increasing depth order.
inline DamageCurves load_damage_curves(const std::string& path)
{
  const auto table = text::read_csv(path, {"road_type", "depth_m", "fraction"});
  std::map<std::string, std::vector<DamagePoint>> pts;
  std::map<std::string, std::size_t> first_line;
  std::string current;
  for (const auto& row : table.rows) {
    const auto& type = row.fields[0];
    if (type.empty()) throw input_error(path, row.line, "empty road_type");
    if (type != current && pts.count(type))
      throw input_error(path, row.line, "rows for road_type '" + type + "' are not contiguous");
    current = type;
    first_line.emplace(type, row.line);
    pts[type].push_back({text::field_double(table, row, 1), text::field_double(table, row, 2)});
    try {
      // Validate the prefix so the error points at the offending row.
      DamageCurves::validate(pts[type]);
    } catch (const std::invalid_argument& e) {
      throw input_error(path, row.line, e.what());
    }
  }
  if (pts.empty()) throw input_error(path, 1, "no damage curves");
  DamageCurves out;
  for (auto& [type, p] : pts) out.set(type, std::move(p));
  return out;
}

/// Checks that the tables cover every segment's class.
inline void check_coverage(std::span<const RoadSegment> segments, const CostTable& costs, const DamageCurves& curves)
{
  for (const auto& s : segments) {
    if (!costs.contains(s.road_type, s.lanes))
      throw std::invalid_argument("segment '" + s.id + "': cost table has no entry for '" + s.road_type + "' with " +
                                  std::to_string(s.lanes) + " lanes");
    if (!curves.covers(s.road_type))
      throw std::invalid_argument("segment '" + s.id + "': no damage curve for '" + s.road_type + "'");
  }
}

inline double segment_construction_cost(const RoadSegment& s, const CostTable& table)
{
  const auto& e = table.get(s.road_type, s.lanes);
  return (e.cost_per_km + (s.lit ? e.lighting_per_km : 0.0)) * s.length_m / 1000.0;
}

/// Piecewise-linear, clamped to the first and last point.
inline double damage_fraction(double depth_m, std::span<const DamagePoint> curve)
{
  if (depth_m < 0.0) throw std::invalid_argument("damage_fraction: negative depth");
  if (depth_m <= curve.front().depth_m) return curve.front().fraction;
  if (depth_m >= curve.back().depth_m) return curve.back().fraction;
  const auto hi = std::upper_bound(curve.begin(), curve.end(), depth_m,
                                   [](double d, const DamagePoint& p) { return d < p.depth_m; });
  const auto lo = hi - 1;
  const double t = (depth_m - lo->depth_m) / (hi->depth_m - lo->depth_m);
  return lo->fraction + t * (hi->fraction - lo->fraction);
}

/// Damage booked by one segment.
inline double segment_damage(const RoadSegment& s, const DepthField& field, double offset_m, const CostTable& table,
                             const DamageCurves& curves)
{
  const double depth = depth_at_cells(field, s.cells, offset_m);
  if (depth <= 0.0) return 0.0;
  return damage_fraction(depth, curves.get(s.road_type)) * segment_construction_cost(s, table);
}

/// R_i per zone. segment_zone maps each segment to its zone index; offsets are per zone.
inline std::vector<double> zone_damage(std::size_t n_zones, std::span<const RoadSegment> segments,
                                       std::span<const std::size_t> segment_zone, const DepthField& field,
                                       std::span<const double> offsets, const CostTable& table,
                                       const DamageCurves& curves)
{
  if (segment_zone.size() != segments.size()) throw std::invalid_argument("zone_damage: segment/zone size mismatch");
  if (offsets.size() != n_zones) throw std::invalid_argument("zone_damage: offsets size mismatch");
  std::vector<double> r(n_zones, 0.0);
  for (std::size_t k = 0; k < segments.size(); ++k) {
    const auto z = segment_zone[k];
    r.at(z) += segment_damage(segments[k], field, offsets[z], table, curves);
  }
  return r;
}

struct DelayResult {
  std::vector<double> delay;            // D_i, money
  std::vector<double> stranded_trips;   // per origin
  double total_stranded = 0.0;
};

/// D_i attributed to the origin zone. Pairs reachable when dry and cut when
/// wet cost stranded_cost per trip. Pairs already unreachable when dry are ignored.
inline DelayResult zone_delay(const RoutingResult& dry, const RoutingResult& wet, const OdMatrix& od,
                              double vot_per_hour, double stranded_cost)
{
  const auto n = od.rows();
  if (dry.paths.n != n || wet.paths.n != n || od.cols() != n)
    throw std::invalid_argument("zone_delay: routings and OD matrix cover different zones");
  if (vot_per_hour < 0.0 || stranded_cost < 0.0) throw std::invalid_argument("zone_delay: negative cost");
  DelayResult out{std::vector<double>(n, 0.0), std::vector<double>(n, 0.0), 0.0};
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      const double trips = od(i, j);
      if (i == j || trips == 0.0) continue;
      const auto d = dry.paths.at(i, j);
      if (!d) continue;
      const auto w = wet.paths.at(i, j);
      if (!w) {
        out.stranded_trips[i] += trips;
        out.total_stranded += trips;
        out.delay[i] += trips * stranded_cost;
        continue;
      }
      out.delay[i] += trips * std::max(0.0, *w - *d) * vot_per_hour / 60.0;
    }
  return out;
}

} // namespace iamflood
