#pragma once
#include <cstdint>
#include <utility>
#include <vector>

#include "fpp/domain.hpp"
#include "fpp/params.hpp"
#include "fpp/rng.hpp"

namespace fpp {

enum class LKind { PowerNearZero, Constant, ExplicitCDF };

// F_L specification. PowerNearZero: F_L(t) = min(1, (t/t0_cap)^beta), the
// default satisfying c1 t^beta <= F_L(t) <= c2 t^beta with c1 = c2 = t0_cap^-beta.
// Constant: L = 1. ExplicitCDF: piecewise-linear CDF through given knots.
struct LDistributionSpec {
  LKind kind = LKind::PowerNearZero;
  double beta = 1.0;
  double t0_cap = 1.0;
  std::vector<std::pair<double, double>> cdf_knots;  // (t, F(t)), increasing

  double cdf(double t) const;
  double sample(double u) const;  // inverse CDF, u in [0,1)
  void validate() const;
  // True when L has no polynomial mass at 0 (legal companion to beta = INFINITE).
  bool no_mass_near_zero() const;
};

struct Vertex {
  std::int64_t id = 0;
  Point position;
  double weight = 1.0;
};

// Unordered edge; cost = l_value * (W_u W_v)^mu always.
struct EdgeRecord {
  std::int32_t u = 0;
  std::int32_t v = 0;
  double l_value = 0.0;
  double cost = 0.0;
};

enum class RootConditioning { None, RootAtOrigin, TwoRoots };

enum class GenMode { Naive, CellAccelerated };

struct SpatialGraph {
  Domain domain;
  ModelParams params;
  LDistributionSpec l_spec;
  std::uint64_t seed = 0;
  RootConditioning root_conditioning = RootConditioning::None;

  // vertex arrays, positions flattened row-major (n x d)
  std::vector<double> pos;
  std::vector<double> weight;
  std::vector<std::int64_t> orig_id;  // identity unless built as a subgraph
  std::vector<std::int32_t> roots;    // indices of conditioned roots

  std::vector<EdgeRecord> edges;
  // per-vertex (neighbor, edge index), sorted by neighbor id
  std::vector<std::vector<std::pair<std::int32_t, std::int32_t>>> adj;

  int n() const { return static_cast<int>(weight.size()); }
  int dim() const { return domain.d; }
  Point position(int i) const;
  Vertex vertex(int i) const;
  double sq_dist_between(int i, int j) const;

  // test/instance-building helpers
  std::int32_t add_vertex(const Point& p, double w);
  void add_edge(std::int32_t u, std::int32_t v, double l_value);
  void rebuild_adjacency();
};

// Inverse-CDF Pareto weight: (1-u)^(-1/(tau-1)), support [1, inf).
double sample_weight(double tau, double u);

double sample_L(const LDistributionSpec& spec, double u);

// Canonical kernel h = c_lower * min{1, w1 w2 / |x|^d}^alpha; the alpha = inf
// limit is a step at ratio = c_prime. Co-located pairs get c_lower.
double connection_prob(const Point& x_diff, double w1, double w2,
                       const ModelParams& par);
double connection_prob_sq(double sq, double w1, double w2, const ModelParams& par);

// (W_u W_v)^mu in log space when the magnitude would overflow; clamped at 1e300.
double edge_cost(double l_value, double w1, double w2, double mu);

struct GenerateOptions {
  GenMode mode = GenMode::CellAccelerated;
  RootConditioning root = RootConditioning::None;
  Point second_root;       // used by TwoRoots
  double intensity = 1.0;  // continuum domains
  double max_expected_edges = 1e8;  // memory budget guard
};

SpatialGraph generate_graph(const Domain& domain, const ModelParams& par,
                            const LDistributionSpec& l_spec, std::uint64_t seed,
                            const GenerateOptions& opt = {});

// Re-derives every edge cost from the stored (W, L) randomness at a new mu.
// Topology, weights and l_values are untouched (shared-randomness coupling).
void recompute_costs(SpatialGraph& graph, double mu);

// V_M = {v : W_v in [M, 2M]}, E_M = edges within V_M of cost <= M^{3 mu};
// original vertex ids preserved through orig_id.
SpatialGraph subgraph_GM(const SpatialGraph& graph, double M, double mu);

}  // namespace fpp
