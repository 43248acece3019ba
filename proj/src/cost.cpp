#include "fpp/cost.hpp"

#include <algorithm>
#include <queue>
#include <stdexcept>

#include "fpp/common.hpp"

namespace fpp {

namespace {

void check_source(const SpatialGraph& g, std::int32_t source) {
  if (source < 0 || source >= g.n())
    throw std::out_of_range("source vertex out of range");
}

// binary heap of (dist, id) with lazy deletion; pops ascend in (dist, id)
using HeapItem = std::pair<double, std::int32_t>;
using MinHeap =
    std::priority_queue<HeapItem, std::vector<HeapItem>, std::greater<HeapItem>>;

ShortestPaths run_dijkstra(const SpatialGraph& g, std::int32_t source,
                           double radius, std::int64_t max_count) {
  check_source(g, source);
  ShortestPaths sp;
  sp.source = source;
  sp.dist.assign(g.n(), kUnreachable);
  sp.parent.assign(g.n(), -1);

  MinHeap heap;
  sp.dist[source] = 0.0;
  heap.push({0.0, source});
  std::int64_t finalised = 0;
  std::vector<char> done(g.n(), 0);

  while (!heap.empty()) {
    const auto [d, v] = heap.top();
    heap.pop();
    if (done[v]) continue;
    if (d > radius) break;
    if (max_count >= 0 && finalised >= max_count) break;
    done[v] = 1;
    ++finalised;
    for (const auto& [w, e] : g.adj[v]) {
      if (done[w]) continue;
      const double nd = d + g.edges[e].cost;
      if (nd < sp.dist[w]) {
        sp.dist[w] = nd;
        sp.parent[w] = v;
        heap.push({nd, w});
      }
    }
  }
  // erase tentative distances of vertices the truncation never finalised
  for (std::int32_t v = 0; v < g.n(); ++v)
    if (!done[v]) {
      sp.dist[v] = kUnreachable;
      sp.parent[v] = -1;
    }
  return sp;
}

}  // namespace

ShortestPaths dijkstra(const SpatialGraph& g, std::int32_t source) {
  return run_dijkstra(g, source, kUnreachable, -1);
}

ShortestPaths dijkstra_within(const SpatialGraph& g, std::int32_t source,
                              double radius, std::int64_t max_count) {
  return run_dijkstra(g, source, radius, max_count);
}

std::vector<std::int32_t> cost_ball(const SpatialGraph& g, std::int32_t source,
                                    double radius) {
  const auto sp = run_dijkstra(g, source, radius, -1);
  std::vector<std::int32_t> ball;
  for (std::int32_t v = 0; v < g.n(); ++v)
    if (sp.dist[v] <= radius) ball.push_back(v);
  return ball;
}

std::vector<std::int64_t> hop_distance(const SpatialGraph& g, std::int32_t source) {
  check_source(g, source);
  std::vector<std::int64_t> hops(g.n(), kUnreachableHops);
  std::vector<std::int32_t> frontier{source}, next;
  hops[source] = 0;
  std::int64_t level = 0;
  while (!frontier.empty()) {
    ++level;
    next.clear();
    for (std::int32_t v : frontier)
      for (const auto& [w, e] : g.adj[v])
        if (hops[w] < 0) {
          hops[w] = level;
          next.push_back(w);
        }
    frontier.swap(next);
  }
  return hops;
}

std::vector<std::int32_t> path_to(const ShortestPaths& sp, std::int32_t target) {
  if (target < 0 || target >= static_cast<std::int32_t>(sp.dist.size()))
    throw std::out_of_range("target vertex out of range");
  if (is_infinite(sp.dist[target])) return {};
  std::vector<std::int32_t> path;
  for (std::int32_t v = target; v != -1; v = sp.parent[v]) path.push_back(v);
  std::reverse(path.begin(), path.end());
  return path;
}

std::vector<BallGrowthPoint> ball_growth_profile(const SpatialGraph& g,
                                                 std::int32_t source,
                                                 double max_radius,
                                                 std::int64_t max_count) {
  check_source(g, source);
  // finalisation order of Dijkstra ascends in distance, so the profile is one
  // sweep emitting the running count at every distinct distance
  ShortestPaths sp;
  sp.dist.assign(g.n(), kUnreachable);
  MinHeap heap;
  sp.dist[source] = 0.0;
  heap.push({0.0, source});
  std::vector<char> done(g.n(), 0);

  std::vector<BallGrowthPoint> profile;
  std::int64_t count = 0;
  while (!heap.empty()) {
    const auto [d, v] = heap.top();
    heap.pop();
    if (done[v]) continue;
    if (d > max_radius) break;
    done[v] = 1;
    ++count;
    if (!profile.empty() && profile.back().radius == d)
      profile.back().count = count;
    else
      profile.push_back({d, count});
    if (max_count >= 0 && count >= max_count) break;
    for (const auto& [w, e] : g.adj[v]) {
      if (done[w]) continue;
      const double nd = d + g.edges[e].cost;
      if (nd < sp.dist[w]) {
        sp.dist[w] = nd;
        heap.push({nd, w});
      }
    }
  }
  return profile;
}

}  // namespace fpp
