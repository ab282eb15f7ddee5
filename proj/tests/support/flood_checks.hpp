#pragma once

// Invariant checks over flood solutions, shared by unit and acceptance tests.

#include "iamflood/flood.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

namespace testsupport {

inline double mass_imbalance(const iamflood::DepthField& f)
{
  return std::abs(f.input_m3 - f.stored_m3() - f.outflow_m3);
}

/// Largest surface spread (max - min of elevation + depth) over any
/// 8-connected component of cells wetter than `wet_tol`.
inline double max_pond_spread(const iamflood::DemGrid& dem, const iamflood::DepthField& f, double wet_tol = 1e-9)
{
  const auto n = dem.size();
  std::vector<char> seen(n, 0);
  double worst = 0.0;
  for (std::size_t s = 0; s < n; ++s) {
    if (seen[s] || dem.masked(s) || f.depth_m[s] <= wet_tol) continue;
    double lo = 1e300, hi = -1e300;
    std::vector<std::size_t> stack{s};
    seen[s] = 1;
    while (!stack.empty()) {
      const auto i = stack.back();
      stack.pop_back();
      const double surf = dem.elevation[i] + f.depth_m[i];
      lo = std::min(lo, surf);
      hi = std::max(hi, surf);
      const int r = static_cast<int>(i) / dem.ncols, c = static_cast<int>(i) % dem.ncols;
      for (int k = 0; k < 8; ++k) {
        std::size_t j = 0;
        if (iamflood::classify_neighbour(dem, r, c, k, iamflood::Boundary::Open, j) != iamflood::NeighbourKind::Cell)
          continue;
        if (seen[j] || f.depth_m[j] <= wet_tol) continue;
        seen[j] = 1;
        stack.push_back(j);
      }
    }
    worst = std::max(worst, hi - lo);
  }
  return worst;
}

inline double max_abs_diff(const std::vector<double>& a, const std::vector<double>& b)
{
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

/// Max over cells of (depth(lower rain) - depth(higher rain)); <= 0 means monotone.
inline double max_monotonicity_violation(const iamflood::DepthField& lower, const iamflood::DepthField& higher)
{
  double m = -1e300;
  for (std::size_t i = 0; i < lower.depth_m.size(); ++i) m = std::max(m, lower.depth_m[i] - higher.depth_m[i]);
  return m;
}

} // namespace testsupport
