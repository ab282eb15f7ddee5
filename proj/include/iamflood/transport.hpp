#pragma once

// Simplified four-step model on zone centroids: gravity seed, iterative
// proportional fitting, shortest-time routing and all-or-nothing assignment.

#include "iamflood/disruption.hpp"
#include "iamflood/error.hpp"
#include "iamflood/flood.hpp"
#include "iamflood/roads.hpp"
#include "iamflood/text.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <optional>
#include <queue>
#include <span>
#include <string>
#include <vector>

namespace iamflood {

struct TazZone {
  std::string id;
  double x = 0.0;
  double y = 0.0;
  double trips_out = 0.0;
  double trips_in = 0.0;
};

/// Dense row-major square or rectangular matrix.
class Matrix {
public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0) : rows_(rows), cols_(cols), data_(rows * cols, fill) {}
  Matrix(std::size_t rows, std::size_t cols, std::vector<double> data) : rows_(rows), cols_(cols), data_(std::move(data))
  {
    if (data_.size() != rows * cols) throw std::invalid_argument("matrix data size mismatch");
  }

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
  double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }
  const std::vector<double>& data() const { return data_; }

  double row_sum(std::size_t i) const
  {
    double s = 0.0;
    for (std::size_t j = 0; j < cols_; ++j) s += (*this)(i, j);
    return s;
  }
  double col_sum(std::size_t j) const
  {
    double s = 0.0;
    for (std::size_t i = 0; i < rows_; ++i) s += (*this)(i, j);
    return s;
  }

  friend bool operator==(const Matrix&, const Matrix&) = default;

private:
  std::size_t rows_ = 0, cols_ = 0;
  std::vector<double> data_;
};

using OdMatrix = Matrix;

inline std::vector<TazZone> load_zones(const std::string& path)
{
  const auto table = text::read_csv(path, {"taz_id", "centroid_x", "centroid_y", "trips_out", "trips_in"});
  std::vector<TazZone> zones;
  for (const auto& row : table.rows) {
    TazZone z{row.fields[0], text::field_double(table, row, 1), text::field_double(table, row, 2),
              text::field_double(table, row, 3), text::field_double(table, row, 4)};
    if (z.id.empty()) throw input_error(path, row.line, "empty taz_id");
    if (z.trips_out < 0.0 || z.trips_in < 0.0) throw input_error(path, row.line, "negative trip marginal");
    for (const auto& prev : zones)
      if (prev.id == z.id) throw input_error(path, row.line, "duplicate taz_id '" + z.id + "'");
    zones.push_back(std::move(z));
  }
  if (zones.empty()) throw input_error(path, 1, "no zones");
  return zones;
}

struct Adjacency {
  std::string a, b;
  std::optional<double> free_flow_kmh;
};

/// Adjacency CSV `taz_a,taz_b`, optionally with a third `free_flow_kmh` column.
inline std::vector<Adjacency> load_adjacency(const std::string& path)
{
  const auto content = text::read_file(path);
  const std::string head = content.substr(0, content.find('\n'));
  const bool with_speed = text::split(text::trim(head), ',').size() == 3;
  const auto table = with_speed ? text::read_csv(path, {"taz_a", "taz_b", "free_flow_kmh"})
                                : text::read_csv(path, {"taz_a", "taz_b"});
  std::vector<Adjacency> out;
  for (const auto& row : table.rows) {
    Adjacency adj{row.fields[0], row.fields[1], std::nullopt};
    if (with_speed && !row.fields[2].empty()) {
      const double v = text::field_double(table, row, 2);
      if (!(v > 0.0)) throw input_error(path, row.line, "free_flow_kmh must be positive");
      adj.free_flow_kmh = v;
    }
    out.push_back(std::move(adj));
  }
  return out;
}

/// Negative-exponential deterrence seed: exp(-d_ij / lambda), diagonal 1.
inline Matrix build_seed_matrix(std::span<const TazZone> zones, double lambda_m)
{
  if (!(lambda_m > 0.0)) throw std::invalid_argument("impedance scale lambda must be positive");
  if (zones.size() < 2) throw std::invalid_argument("seed matrix needs at least two zones");
  Matrix seed(zones.size(), zones.size());
  for (std::size_t i = 0; i < zones.size(); ++i)
    for (std::size_t j = 0; j < zones.size(); ++j)
      seed(i, j) = i == j ? 1.0 : std::exp(-std::hypot(zones[i].x - zones[j].x, zones[i].y - zones[j].y) / lambda_m);
  return seed;
}

struct IpfResult {
  OdMatrix trips;
  int iterations = 0;
  double max_deviation = 0.0;
  bool converged = false;
};

namespace detail {

inline double marginal_deviation(const Matrix& m, std::span<const double> rows, std::span<const double> cols)
{
  double dev = 0.0;
  auto rel = [](double got, double want) { return want > 0.0 ? std::abs(got - want) / want : std::abs(got); };
  for (std::size_t i = 0; i < m.rows(); ++i) dev = std::max(dev, rel(m.row_sum(i), rows[i]));
  for (std::size_t j = 0; j < m.cols(); ++j) dev = std::max(dev, rel(m.col_sum(j), cols[j]));
  return dev;
}

} // namespace detail

/// Iterative proportional fitting: alternate row and column scaling until
/// every marginal is within `tol` (relative) or `max_iter` sweeps are done.
inline IpfResult ipf_fit(const Matrix& seed, std::span<const double> row_marginals, std::span<const double> col_marginals,
                         double tol = 1e-6, int max_iter = 100)
{
  if (seed.rows() != row_marginals.size() || seed.cols() != col_marginals.size())
    throw std::invalid_argument("ipf: marginal sizes do not match the seed");
  double rt = 0.0, ct = 0.0;
  for (double v : row_marginals) {
    if (v < 0.0) throw std::invalid_argument("ipf: negative row marginal");
    rt += v;
  }
  for (double v : col_marginals) {
    if (v < 0.0) throw std::invalid_argument("ipf: negative column marginal");
    ct += v;
  }
  if (std::abs(rt - ct) > 1e-9 * std::max(rt, ct))
    throw std::invalid_argument("ipf: row and column marginal totals differ");
  for (double v : seed.data())
    if (!(v >= 0.0) || !std::isfinite(v)) throw std::invalid_argument("ipf: seed entries must be finite and >= 0");
  for (std::size_t i = 0; i < seed.rows(); ++i)
    if (row_marginals[i] > 0.0 && seed.row_sum(i) == 0.0)
      throw std::invalid_argument("ipf: infeasible zero structure in row " + std::to_string(i));
  for (std::size_t j = 0; j < seed.cols(); ++j)
    if (col_marginals[j] > 0.0 && seed.col_sum(j) == 0.0)
      throw std::invalid_argument("ipf: infeasible zero structure in column " + std::to_string(j));

  IpfResult res{seed, 0, detail::marginal_deviation(seed, row_marginals, col_marginals), false};
  auto& m = res.trips;
  while (res.max_deviation > tol && res.iterations < max_iter) {
    for (std::size_t i = 0; i < m.rows(); ++i) {
      const double s = m.row_sum(i);
      const double f = s > 0.0 ? row_marginals[i] / s : 0.0;
      for (std::size_t j = 0; j < m.cols(); ++j) m(i, j) *= f;
    }
    for (std::size_t j = 0; j < m.cols(); ++j) {
      const double s = m.col_sum(j);
      const double f = s > 0.0 ? col_marginals[j] / s : 0.0;
      for (std::size_t i = 0; i < m.rows(); ++i) m(i, j) *= f;
    }
    ++res.iterations;
    res.max_deviation = detail::marginal_deviation(m, row_marginals, col_marginals);
  }
  res.converged = res.max_deviation <= tol;
  return res;
}

struct TazEdge {
  std::size_t a = 0, b = 0; // zone indices, a < b
  double length_m = 0.0;
  double free_flow_kmh = kDefaultFreeFlowKmh;
  std::vector<std::size_t> segments; // indices into the road list
};

/// Undirected zone-adjacency graph over centroids.
class TazGraph {
public:
  TazGraph() = default;
  explicit TazGraph(std::size_t nodes) : adj_(nodes) {}

  std::size_t node_count() const { return adj_.size(); }
  const std::vector<TazEdge>& edges() const { return edges_; }
  std::vector<TazEdge>& edges() { return edges_; }
  const std::vector<std::size_t>& incident(std::size_t node) const { return adj_[node]; }

  std::optional<std::size_t> edge_between(std::size_t u, std::size_t v) const
  {
    for (auto e : adj_[u]) {
      const auto& ed = edges_[e];
      if ((ed.a == u && ed.b == v) || (ed.a == v && ed.b == u)) return e;
    }
    return std::nullopt;
  }

  std::size_t add_edge(TazEdge e)
  {
    edges_.push_back(std::move(e));
    const auto id = edges_.size() - 1;
    adj_[edges_[id].a].push_back(id);
    adj_[edges_[id].b].push_back(id);
    return id;
  }

  static std::size_t other(const TazEdge& e, std::size_t u) { return e.a == u ? e.b : e.a; }

private:
  std::vector<TazEdge> edges_;
  std::vector<std::vector<std::size_t>> adj_;
};

inline std::optional<std::size_t> zone_index(std::span<const TazZone> zones, const std::string& id)
{
  for (std::size_t i = 0; i < zones.size(); ++i)
    if (zones[i].id == id) return i;
  return std::nullopt;
}

/// Builds the zone graph. Duplicate pairs (either orientation) collapse into
/// one edge; each collapse is reported in `warnings`.
inline TazGraph build_taz_graph(std::span<const TazZone> zones, std::span<const Adjacency> adjacency,
                                std::span<const RoadSegment> segments, double default_free_flow_kmh = kDefaultFreeFlowKmh,
                                std::vector<std::string>* warnings = nullptr)
{
  TazGraph g(zones.size());
  auto lookup = [&](const std::string& id) {
    const auto i = zone_index(zones, id);
    if (!i) throw InputError("unknown zone id '" + id + "'");
    return *i;
  };
  for (const auto& adj : adjacency) {
    auto u = lookup(adj.a), v = lookup(adj.b);
    if (u == v) throw InputError("self-loop on zone '" + adj.a + "'");
    if (u > v) std::swap(u, v);
    if (g.edge_between(u, v)) {
      if (warnings) warnings->push_back("duplicate adjacency " + adj.a + "-" + adj.b + " collapsed");
      continue;
    }
    const double len = std::hypot(zones[u].x - zones[v].x, zones[u].y - zones[v].y);
    if (!(len > 0.0)) throw InputError("adjacent zones '" + adj.a + "' and '" + adj.b + "' share a centroid");
    g.add_edge({u, v, len, adj.free_flow_kmh.value_or(default_free_flow_kmh), {}});
  }
  for (std::size_t s = 0; s < segments.size(); ++s) {
    const auto& seg = segments[s];
    if (!zone_index(zones, seg.taz_id)) throw InputError("segment '" + seg.id + "' references unknown zone '" + seg.taz_id + "'");
    if (!seg.edge) continue;
    const auto e = g.edge_between(lookup(seg.edge->first), lookup(seg.edge->second));
    if (!e)
      throw InputError("segment '" + seg.id + "' is attached to non-adjacent zones " + seg.edge->first + "-" +
                       seg.edge->second);
    g.edges()[*e].segments.push_back(s);
  }
  return g;
}

/// Travel time in minutes; std::nullopt means the edge is impassable.
using EdgeTime = std::optional<double>;

/// Dry (no depth field) or flooded traversal time of one edge. Segment speed
/// is the disrupted speed at the segment's effective depth, capped at the
/// edge's free-flow speed; the part of the edge not covered by segments runs
/// at free flow.
inline EdgeTime edge_travel_time(const TazEdge& edge, std::span<const RoadSegment> segments, const DepthField* field,
                                 std::span<const double> zone_offsets, std::span<const std::size_t> segment_zone,
                                 const DisruptionCurve& curve = {})
{
  auto minutes = [](double length_m, double kmh) { return length_m / 1000.0 / kmh * 60.0; };
  // Dry and wet times go through the same sum so that a dry wet-run is bit-identical.
  double time = 0.0, covered = 0.0;
  for (auto s : edge.segments) {
    const auto& seg = segments[s];
    const double depth_mm = field ? 1000.0 * depth_at_cells(*field, seg.cells, zone_offsets[segment_zone[s]]) : 0.0;
    const double v = depth_mm > 0.0 ? std::min(curve.speed(depth_mm), edge.free_flow_kmh) : edge.free_flow_kmh;
    if (v <= 0.0) return std::nullopt;
    time += minutes(seg.length_m, v);
    covered += seg.length_m;
  }
  if (covered < edge.length_m) time += minutes(edge.length_m - covered, edge.free_flow_kmh);
  return time;
}

/// All-pairs shortest travel times; `path[i][j]` is the node sequence from i
/// to j (single node on the diagonal, empty when unreachable).
struct AllPairs {
  std::size_t n = 0;
  std::vector<std::optional<double>> time;
  std::vector<std::vector<std::size_t>> path;

  std::optional<double> at(std::size_t i, std::size_t j) const { return time[i * n + j]; }
  const std::vector<std::size_t>& route(std::size_t i, std::size_t j) const { return path[i * n + j]; }
};

/// Dijkstra from every source. Among equal-time paths the one whose node
/// index sequence is lexicographically smallest wins. Blocked edges are skipped.
inline AllPairs shortest_paths(const TazGraph& g, std::span<const EdgeTime> edge_times)
{
  const auto n = g.node_count();
  AllPairs ap{n, std::vector<std::optional<double>>(n * n), std::vector<std::vector<std::size_t>>(n * n)};
  for (std::size_t src = 0; src < n; ++src) {
    std::vector<std::optional<double>> dist(n);
    std::vector<std::vector<std::size_t>> best(n);
    std::vector<char> done(n, 0);
    using Item = std::pair<double, std::size_t>;
    std::priority_queue<Item, std::vector<Item>, std::greater<>> pq;
    dist[src] = 0.0;
    best[src] = {src};
    pq.push({0.0, src});
    while (!pq.empty()) {
      const auto [d, u] = pq.top();
      pq.pop();
      if (done[u] || d != *dist[u]) continue;
      done[u] = 1;
      for (auto e : g.incident(u)) {
        if (!edge_times[e]) continue;
        const auto v = TazGraph::other(g.edges()[e], u);
        if (done[v]) continue;
        const double cand = d + *edge_times[e];
        bool better = !dist[v] || cand < *dist[v];
        if (!better && cand == *dist[v]) {
          auto p = best[u];
          p.push_back(v);
          better = p < best[v];
        }
        if (better) {
          const bool improved_time = !dist[v] || cand < *dist[v];
          dist[v] = cand;
          best[v] = best[u];
          best[v].push_back(v);
          if (improved_time) pq.push({cand, v});
        }
      }
    }
    for (std::size_t j = 0; j < n; ++j) {
      ap.time[src * n + j] = dist[j];
      ap.path[src * n + j] = std::move(best[j]);
    }
  }
  return ap;
}

struct RoutingResult {
  AllPairs paths;
  std::vector<double> edge_volume;       // trips per edge
  std::vector<double> origin_trip_minutes; // per origin zone
  std::vector<double> origin_stranded;   // unreachable off-diagonal trips per origin zone
  double stranded_trips = 0.0;
};

/// All-or-nothing assignment of every OD flow to its shortest path.
/// Intrazonal trips take no time and load no edge.
inline RoutingResult assign_trips(const OdMatrix& od, const TazGraph& g, AllPairs paths)
{
  const auto n = g.node_count();
  if (od.rows() != n || od.cols() != n || paths.n != n) throw std::invalid_argument("assign_trips: zone count mismatch");
  RoutingResult res;
  res.edge_volume.assign(g.edges().size(), 0.0);
  res.origin_trip_minutes.assign(n, 0.0);
  res.origin_stranded.assign(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      const double trips = od(i, j);
      if (i == j || trips == 0.0) continue;
      const auto t = paths.at(i, j);
      if (!t) {
        res.origin_stranded[i] += trips;
        res.stranded_trips += trips;
        continue;
      }
      res.origin_trip_minutes[i] += trips * *t;
      const auto& route = paths.route(i, j);
      for (std::size_t k = 1; k < route.size(); ++k) res.edge_volume[*g.edge_between(route[k - 1], route[k])] += trips;
    }
  }
  res.paths = std::move(paths);
  return res;
}

} // namespace iamflood
