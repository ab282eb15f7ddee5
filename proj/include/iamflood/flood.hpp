#pragma once

// Steady-state pluvial flooding on a DEM.
//
// Rain falls uniformly on every unmasked cell and runs downhill along the
// D8 steepest-descent receiver of each cell until it reaches a pit or leaves
// the grid. The pits' watersheds are merged in order of their lowest
// saddles (a Kruskal sweep over the basin adjacency graph), which yields the
// depression hierarchy: a binary tree whose leaves are pits and whose inner
// nodes are merged depressions. Water is then distributed over the tree
// with fill-spill-merge semantics:
//   - a depression holds water up to the height of its lowest saddle;
//   - excess pours across that saddle into the neighbouring depression;
//   - once two sibling depressions are both full they rise together as one;
//   - a depression whose saddle leads outside the grid (or to a nodata
//     cell) sends its excess off the grid, booked as outflow.

#include "iamflood/grid.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <span>
#include <stdexcept>
#include <vector>

namespace iamflood {

enum class Boundary {
  Open,   ///< grid edge and nodata cells are perfect sinks
  Sealed, ///< no sinks at all; nodata cells act as walls
};

/// Neighbour scan order N, NE, E, SE, S, SW, W, NW. Ties in steepest descent
/// resolve to the first neighbour in this order.
inline constexpr std::array<int, 8> kD8Row = {-1, -1, 0, 1, 1, 1, 0, -1};
inline constexpr std::array<int, 8> kD8Col = {0, 1, 1, 1, 0, -1, -1, -1};

enum class NeighbourKind { None, Cell, Sink };

/// Classifies the neighbour of (r, c) in direction k. An axis of extent one
/// is a transect: it has no neighbours (and no off-grid sink) across it.
inline NeighbourKind classify_neighbour(const DemGrid& dem, int r, int c, int k, Boundary boundary,
                                        std::size_t& out_index)
{
  const int dr = kD8Row[k], dc = kD8Col[k];
  if ((dr != 0 && dem.nrows == 1) || (dc != 0 && dem.ncols == 1)) return NeighbourKind::None;
  const int nr = r + dr, nc = c + dc;
  if (!dem.in_bounds(nr, nc)) return boundary == Boundary::Open ? NeighbourKind::Sink : NeighbourKind::None;
  out_index = dem.index(nr, nc);
  if (dem.masked(out_index)) return boundary == Boundary::Open ? NeighbourKind::Sink : NeighbourKind::None;
  return NeighbourKind::Cell;
}

/// Receiver of a cell under D8 steepest descent (lowest neighbour, strictly
/// lower than the cell). Sinks count as -infinity; `kPit` when no neighbour is lower.
inline constexpr std::size_t kPit = std::numeric_limits<std::size_t>::max();
inline constexpr std::size_t kToSink = kPit - 1;

inline std::vector<std::size_t> d8_receivers(const DemGrid& dem, Boundary boundary)
{
  std::vector<std::size_t> recv(dem.size(), kPit);
  for (int r = 0; r < dem.nrows; ++r) {
    for (int c = 0; c < dem.ncols; ++c) {
      const auto i = dem.index(r, c);
      if (dem.masked(i)) continue;
      double best = dem.elevation[i];
      std::size_t best_idx = kPit;
      for (int k = 0; k < 8; ++k) {
        std::size_t j = 0;
        const auto kind = classify_neighbour(dem, r, c, k, boundary, j);
        if (kind == NeighbourKind::Sink) {
          best_idx = kToSink;
          break;
        }
        if (kind == NeighbourKind::Cell && dem.elevation[j] < best) {
          best = dem.elevation[j];
          best_idx = j;
        }
      }
      recv[i] = best_idx;
    }
  }
  return recv;
}

namespace detail {

inline constexpr int kOcean = -1;
inline constexpr std::size_t kNoCell = std::numeric_limits<std::size_t>::max();

struct DepressionNode {
  int parent = -1;
  std::array<int, 2> child = {-1, -1};
  double spill = std::numeric_limits<double>::infinity();
  std::size_t outlet = kNoCell; // cell across the spill saddle
  double count = 0.0;           // cells below the spill height
  double elev_sum = 0.0;        // their summed elevation
  double capacity = 0.0;        // m^3 held when filled to the spill height
  double stored = 0.0;          // m^3 currently retained in the subtree
};

class UnionFind {
public:
  explicit UnionFind(std::size_t n) : parent_(n) { std::iota(parent_.begin(), parent_.end(), std::size_t{0}); }
  std::size_t find(std::size_t x)
  {
    while (parent_[x] != x) x = parent_[x] = parent_[parent_[x]];
    return x;
  }
  void unite_into(std::size_t from, std::size_t to) { parent_[find(from)] = find(to); }

private:
  std::vector<std::size_t> parent_;
};

struct SaddleEdge {
  double height;
  double low;
  std::size_t a, b;
};

/// Fills the lowest cells of `elev` (ascending) with `volume` m^3 and returns
/// the resulting flat water level.
inline double solve_level(std::vector<double>& elev, double volume, double area)
{
  std::sort(elev.begin(), elev.end());
  const double depth_sum = volume / area;
  double prefix = 0.0;
  for (std::size_t k = 1; k <= elev.size(); ++k) {
    prefix += elev[k - 1];
    const double level = (depth_sum + prefix) / static_cast<double>(k);
    if (k == elev.size() || level <= elev[k]) return std::max(level, elev[k - 1]);
  }
  return elev.empty() ? 0.0 : elev.back();
}

} // namespace detail

/// Pluvial flood solver. Pure: the same inputs always produce bit-identical output.
inline DepthField compute_flood(const DemGrid& dem, double rainfall_mm, Boundary boundary = Boundary::Open)
{
  using detail::DepressionNode;
  using detail::kNoCell;
  using detail::kOcean;
  if (!(rainfall_mm >= 0.0) || !std::isfinite(rainfall_mm)) throw std::invalid_argument("rainfall must be >= 0");

  const std::size_t n = dem.size();
  const double area = dem.cell_area();
  const double cell_rain = rainfall_mm / 1000.0 * area;

  DepthField field;
  field.nrows = dem.nrows;
  field.ncols = dem.ncols;
  field.cell_size_m = dem.cell_size_m;
  field.depth_m.assign(n, 0.0);

  // 1. Receivers and pit labels.
  const auto recv = d8_receivers(dem, boundary);
  std::vector<int> label(n, kOcean);
  std::vector<std::size_t> pits;
  {
    std::vector<char> done(n, 0);
    std::vector<std::size_t> path;
    for (std::size_t i = 0; i < n; ++i) {
      if (dem.masked(i) || done[i]) continue;
      std::size_t cur = i;
      path.clear();
      int lab = kOcean;
      for (;;) {
        if (done[cur]) {
          lab = label[cur];
          break;
        }
        path.push_back(cur);
        const auto nxt = recv[cur];
        if (nxt == kToSink) {
          lab = kOcean;
          break;
        }
        if (nxt == kPit) {
          lab = static_cast<int>(pits.size());
          pits.push_back(cur);
          break;
        }
        cur = nxt;
      }
      for (auto p : path) {
        label[p] = lab;
        done[p] = 1;
      }
    }
  }
  const std::size_t leaves = pits.size();

  // 2. Saddle edges between distinct basins, swept in ascending height.
  std::vector<detail::SaddleEdge> edges;
  for (int r = 0; r < dem.nrows; ++r) {
    for (int c = 0; c < dem.ncols; ++c) {
      const auto i = dem.index(r, c);
      if (dem.masked(i)) continue;
      for (int k = 0; k < 8; ++k) {
        std::size_t j = 0;
        if (classify_neighbour(dem, r, c, k, boundary, j) != NeighbourKind::Cell) continue;
        if (j < i || label[i] == label[j]) continue;
        const double ei = dem.elevation[i], ej = dem.elevation[j];
        edges.push_back({std::max(ei, ej), std::min(ei, ej), i, j});
      }
    }
  }
  std::sort(edges.begin(), edges.end(), [](const detail::SaddleEdge& x, const detail::SaddleEdge& y) {
    if (x.height != y.height) return x.height < y.height;
    if (x.low != y.low) return x.low < y.low;
    if (x.a != y.a) return x.a < y.a;
    return x.b < y.b;
  });

  std::vector<DepressionNode> nodes(leaves);
  nodes.reserve(2 * leaves);
  const std::size_t ocean_set = leaves;
  detail::UnionFind uf(leaves + 1);
  std::vector<int> set_node(leaves + 1, -1);
  for (std::size_t l = 0; l < leaves; ++l) set_node[l] = static_cast<int>(l);
  auto set_of = [&](std::size_t cell) {
    return uf.find(label[cell] == kOcean ? ocean_set : static_cast<std::size_t>(label[cell]));
  };

  for (const auto& e : edges) {
    const auto sa = set_of(e.a), sb = set_of(e.b);
    if (sa == sb) continue;
    const auto ocean_root = uf.find(ocean_set);
    if (sa == ocean_root || sb == ocean_root) {
      const bool a_is_ocean = (sa == ocean_root);
      const auto land = a_is_ocean ? sb : sa;
      auto& x = nodes[static_cast<std::size_t>(set_node[land])];
      x.spill = e.height;
      x.outlet = a_is_ocean ? e.a : e.b;
      uf.unite_into(land, ocean_root);
      continue;
    }
    const int xa = set_node[sa], xb = set_node[sb];
    const int p = static_cast<int>(nodes.size());
    nodes.emplace_back();
    nodes[static_cast<std::size_t>(p)].child = {xa, xb};
    auto& na = nodes[static_cast<std::size_t>(xa)];
    auto& nb = nodes[static_cast<std::size_t>(xb)];
    na.parent = nb.parent = p;
    na.spill = nb.spill = e.height;
    na.outlet = e.b;
    nb.outlet = e.a;
    uf.unite_into(sb, sa);
    set_node[uf.find(sa)] = p;
  }

  // 3. Capacities. A cell contributes to every ancestor of its leaf whose
  //    spill height exceeds its elevation; spill heights grow toward the root.
  for (std::size_t i = 0; i < n; ++i) {
    if (dem.masked(i) || label[i] == kOcean) continue;
    const double z = dem.elevation[i];
    int node = label[i];
    while (node >= 0 && !(nodes[static_cast<std::size_t>(node)].spill > z)) node = nodes[static_cast<std::size_t>(node)].parent;
    if (node < 0) continue;
    nodes[static_cast<std::size_t>(node)].count += 1.0;
    nodes[static_cast<std::size_t>(node)].elev_sum += z;
  }
  for (std::size_t id = 0; id < nodes.size(); ++id) {
    auto& nd = nodes[id];
    if (nd.parent >= 0) {
      nodes[static_cast<std::size_t>(nd.parent)].count += nd.count;
      nodes[static_cast<std::size_t>(nd.parent)].elev_sum += nd.elev_sum;
    }
    nd.capacity = std::isinf(nd.spill) ? std::numeric_limits<double>::infinity()
                                       : std::max(0.0, (nd.count * nd.spill - nd.elev_sum) * area);
  }

  // 4. Fill, spill, merge.
  auto credit = [&](int node, double w) {
    for (; node >= 0; node = nodes[static_cast<std::size_t>(node)].parent) nodes[static_cast<std::size_t>(node)].stored += w;
  };
  auto is_full = [&](const DepressionNode& nd) {
    return std::isfinite(nd.capacity) && nd.capacity - nd.stored <= 1e-12 * std::max(1.0, nd.capacity);
  };
  double outflow = 0.0;
  auto add_water = [&](int node, double w) {
    while (w > 0.0) {
      auto& nd = nodes[static_cast<std::size_t>(node)];
      const double room = nd.capacity - nd.stored;
      if (w <= room) {
        credit(node, w);
        return;
      }
      const double take = std::max(room, 0.0);
      credit(node, take);
      w -= take;
      if (nd.parent < 0) {
        if (nd.outlet == kNoCell) return; // unreachable: infinite capacity
        const int lab = label[nd.outlet];
        if (lab == kOcean) {
          outflow += w;
          return;
        }
        node = lab;
        continue;
      }
      const auto& par = nodes[static_cast<std::size_t>(nd.parent)];
      const int sib = par.child[0] == node ? par.child[1] : par.child[0];
      if (!is_full(nodes[static_cast<std::size_t>(sib)])) {
        node = label[nd.outlet];
      } else {
        node = nd.parent;
      }
    }
  };

  std::vector<double> leaf_rain(leaves, 0.0);
  double input = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    if (dem.masked(i)) continue;
    input += cell_rain;
    if (label[i] == kOcean) outflow += cell_rain;
    else leaf_rain[static_cast<std::size_t>(label[i])] += cell_rain;
  }
  for (std::size_t l = 0; l < leaves; ++l) add_water(static_cast<int>(l), leaf_rain[l]);

  // 5. Water levels, resolved top-down.
  std::vector<std::vector<std::size_t>> leaf_cells(leaves);
  for (std::size_t i = 0; i < n; ++i)
    if (!dem.masked(i) && label[i] != kOcean) leaf_cells[static_cast<std::size_t>(label[i])].push_back(i);

  auto subtree_cells = [&](int root) {
    std::vector<std::size_t> out;
    std::vector<int> stack{root};
    while (!stack.empty()) {
      const int id = stack.back();
      stack.pop_back();
      const auto& nd = nodes[static_cast<std::size_t>(id)];
      if (nd.child[0] < 0) {
        const auto& lc = leaf_cells[static_cast<std::size_t>(id)];
        out.insert(out.end(), lc.begin(), lc.end());
      } else {
        stack.push_back(nd.child[1]);
        stack.push_back(nd.child[0]);
      }
    }
    return out;
  };
  auto flood_to = [&](const std::vector<std::size_t>& cells, double level) {
    for (auto i : cells) field.depth_m[i] = std::max(0.0, level - dem.elevation[i]);
  };

  std::vector<int> work;
  for (std::size_t id = 0; id < nodes.size(); ++id)
    if (nodes[id].parent < 0) work.push_back(static_cast<int>(id));
  while (!work.empty()) {
    const int id = work.back();
    work.pop_back();
    const auto& nd = nodes[static_cast<std::size_t>(id)];
    if (nd.stored <= 0.0) continue;
    const bool leaf = nd.child[0] < 0;
    if (is_full(nd)) {
      flood_to(subtree_cells(id), nd.spill);
      continue;
    }
    if (leaf || (is_full(nodes[static_cast<std::size_t>(nd.child[0])]) && is_full(nodes[static_cast<std::size_t>(nd.child[1])]))) {
      const auto cells = subtree_cells(id);
      std::vector<double> elev;
      elev.reserve(cells.size());
      for (auto i : cells) elev.push_back(dem.elevation[i]);
      double level = detail::solve_level(elev, nd.stored, area);
      if (!leaf) level = std::max(level, nodes[static_cast<std::size_t>(nd.child[0])].spill);
      flood_to(cells, std::min(level, nd.spill));
      continue;
    }
    work.push_back(nd.child[0]);
    work.push_back(nd.child[1]);
  }

  field.input_m3 = input;
  field.outflow_m3 = outflow;
  return field;
}

/// Worst depth over a road's cells after subtracting its elevation offset.
inline double depth_at_cells(const DepthField& field, std::span<const Cell> cells, double offset_m)
{
  if (cells.empty()) throw std::invalid_argument("depth_at_cells: empty cell list");
  if (!(offset_m >= 0.0)) throw std::invalid_argument("depth_at_cells: offset must be >= 0");
  double worst = 0.0;
  for (const auto& cell : cells) {
    if (!field.in_bounds(cell.row, cell.col))
      throw std::out_of_range("depth_at_cells: cell (" + std::to_string(cell.row) + "," + std::to_string(cell.col) +
                              ") out of bounds");
    worst = std::max(worst, field.at(cell.row, cell.col) - offset_m);
  }
  return std::max(0.0, worst);
}

} // namespace iamflood
