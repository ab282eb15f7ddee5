#pragma once

#include <algorithm>
#include <stdexcept>

namespace iamflood {

/// Depth-disruption curve: attainable vehicle speed (km/h) at water depth
/// `depth_mm`. Quadratic fit from the flood-disruption literature, with
/// roads impassable from 300 mm.
struct DisruptionCurve {
  double a = 0.0009;
  double b = -0.5529;
  double c = 86.9448;
  double cutoff_mm = 300.0;

  double speed(double depth_mm) const
  {
    if (!(depth_mm >= 0.0)) throw std::domain_error("depth must be >= 0");
    if (depth_mm >= cutoff_mm) return 0.0;
    return std::max(0.0, (a * depth_mm + b) * depth_mm + c);
  }
};

inline double disrupted_speed(double depth_mm) { return DisruptionCurve{}.speed(depth_mm); }

/// Free-flow speed that makes dry travel coincide with zero-depth disruption.
inline constexpr double kDefaultFreeFlowKmh = 86.9448;

} // namespace iamflood
