#pragma once

#include "iamflood/rng.hpp"
#include "iamflood/transport.hpp"

#include <vector>

namespace testsupport {

struct RandomGraph {
  iamflood::TazGraph graph;
  std::vector<iamflood::EdgeTime> times;
};

/// Random undirected graph with small integer edge times (so equal-time
/// paths are common and sums are exact) and a sprinkling of blocked edges.
inline RandomGraph random_graph(std::uint64_t seed, std::size_t nodes, double edge_prob = 0.2, double blocked_prob = 0.1)
{
  iamflood::SplitMix64 rng(seed);
  RandomGraph rg{iamflood::TazGraph(nodes), {}};
  for (std::size_t a = 0; a < nodes; ++a)
    for (std::size_t b = a + 1; b < nodes; ++b) {
      if (rng.uniform() >= edge_prob) continue;
      rg.graph.add_edge({a, b, 1000.0, iamflood::kDefaultFreeFlowKmh, {}});
      if (rng.uniform() < blocked_prob) rg.times.push_back(std::nullopt);
      else rg.times.push_back(static_cast<double>(1 + rng.below(6)));
    }
  return rg;
}

} // namespace testsupport
