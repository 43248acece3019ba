#pragma once
#include <cstdint>
#include <vector>

#include "fpp/graph.hpp"

namespace fpp {

// Single-source cost distances. dist is kUnreachable where no path exists;
// parent is -1 at the source and at unreached vertices. Ties between
// equal-cost paths are resolved by finalisation order (distance, then vertex
// id), so the shortest-path tree is deterministic.
struct ShortestPaths {
  std::int32_t source = 0;
  std::vector<double> dist;
  std::vector<std::int32_t> parent;
};

ShortestPaths dijkstra(const SpatialGraph& g, std::int32_t source);

// Truncated variant: vertices at distance > radius (or beyond the first
// max_count finalised, if max_count >= 0) are left unreached.
ShortestPaths dijkstra_within(const SpatialGraph& g, std::int32_t source,
                              double radius, std::int64_t max_count = -1);

// Vertex ids of the closed cost ball B(source, radius), ascending.
std::vector<std::int32_t> cost_ball(const SpatialGraph& g, std::int32_t source,
                                    double radius);

// Hop distances (BFS); kUnreachableHops where no path exists.
std::vector<std::int64_t> hop_distance(const SpatialGraph& g, std::int32_t source);

// Vertices of the source..target shortest path, in order; empty if unreached.
std::vector<std::int32_t> path_to(const ShortestPaths& sp, std::int32_t target);

// Support points of r -> |B(source, r)|: one entry per distinct finalised
// distance, carrying the cumulative vertex count. Counts are monotone.
struct BallGrowthPoint {
  double radius = 0.0;
  std::int64_t count = 0;
};
std::vector<BallGrowthPoint> ball_growth_profile(const SpatialGraph& g,
                                                 std::int32_t source,
                                                 double max_radius,
                                                 std::int64_t max_count = -1);

}  // namespace fpp
