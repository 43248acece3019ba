#pragma once
#include <cstdint>
#include <limits>
#include <unordered_map>
#include <utility>
#include <vector>

#include "fpp/domain.hpp"
#include "fpp/graph.hpp"

namespace fpp {

// ---------------- good blocks ----------------

enum class BlockFailure { None, BaseCaseCheapEdge, LongCheapEdge, TooManyBadChildren };
const char* to_string(BlockFailure f);

struct BlockStatus {
  BlockId id;
  double eta = 1.0;
  double u = 0.0;
  bool good = true;
  BlockFailure failure = BlockFailure::None;
  // offending edge for the edge rules, offending count for the child rule
  std::int32_t edge_u = -1;
  std::int32_t edge_v = -1;
  int bad_children = 0;
};

// Translate by j * A_{level-1}/2 per axis, j in {-1,0,1}^d; requires level > k0.
BlockId block_translate(const BlockId& id, const BlockGeometry& geom,
                        const std::vector<int>& j);

// Recursive goodness checker at fixed (eta, u), memoised by block identity.
// A base-level block is good iff every internal edge costs at least u. A
// higher block is good iff for each of its 3^d half-child translates, every
// internal edge longer than A_{k-1}/100 costs at least u * A_k^eta and at
// most 3^d of the translate's children are bad.
class BlockChecker {
 public:
  BlockChecker(const SpatialGraph& g, const BlockGeometry& geom, double eta,
               double u);

  const BlockStatus& check(const BlockId& id);

  // every status evaluated so far, sorted by (level, origin)
  std::vector<BlockStatus> all_statuses() const;

  double eta() const { return eta_; }
  double u() const { return u_; }
  const BlockGeometry& geometry() const { return geom_; }
  const SpatialGraph& graph() const { return g_; }
  std::size_t evaluated() const { return memo_.size(); }

 private:
  struct IdHash {
    std::size_t operator()(const BlockId& id) const;
  };

  BlockStatus evaluate(const BlockId& id);
  // first internal edge of the box with length > min_len and cost < max_cost
  int find_cheap_edge(const BlockBox& box, double min_len, double max_cost) const;

  const SpatialGraph& g_;
  BlockGeometry geom_;
  double eta_;
  double u_;
  std::unordered_map<BlockId, BlockStatus, IdHash> memo_;

  // per-edge bounding data, sorted by first-axis lower corner for range scans
  std::vector<std::int32_t> order_;
  std::vector<double> emin_, emax_;  // edge k, axis i at [k * d + i]
  std::vector<double> sorted_min0_;  // emin_ axis 0 in order_ sequence
  std::vector<double> elen_, ecost_;
};

// C * prod_{h >= k0}(1 - k0/h^2) with C = u / (A_{k0} sqrt(d)), the base
// constant of the deterministic path lower bound. The infinite product is
// truncated at h = 10^6; the discarded tail is within k0 * 1e-6 of 1. k0 = 0
// makes the product empty (= 1); k0 = 1 annihilates it (u_star = 0).
double u_star_constant(const BlockGeometry& geom, int d, double u);

// Largest u (scaled back by 1%, capped at 0.9) under which no edge of the
// graph can violate the base rule or any level rule up to `level`; blocks
// whose edges all lie in the graph are then certified good at that u.
// Returns 0.5 for edgeless graphs and 0 when an edge of cost <= 0 makes
// every u fail.
double suggest_block_u(const SpatialGraph& g, const BlockGeometry& geom,
                       double eta, int level);

struct PathBoundReport {
  bool holds = true;
  double u_star = 0.0;
  double required = 0.0;      // u_star * |x-y|^eta
  double optimal_cost = std::numeric_limits<double>::infinity();
  std::vector<std::int32_t> counterexample;  // cheapest path when violated
};

// Checks the certified lower bound: every path between x and y inside the
// good block costs at least u_star |x-y|^eta. Runs Dijkstra restricted to
// the block; a violation returns the cheapest path as counterexample.
// Throws if the block is not certified good, if an endpoint lies outside the
// block, or if |x-y| <= A_k/16.
PathBoundReport verify_path_lower_bound(BlockChecker& checker, const BlockId& block,
                                        std::int32_t x, std::int32_t y);

// ---------------- bond percolation substrate ----------------

struct PercConfig {
  int d = 2;
  int side = 0;  // sites per axis; site indices are row-major
  double p = 0.0;
  // bond (site, axis) towards increasing axis coordinate; absent at the far
  // boundary (entry kept, always closed)
  std::vector<std::uint8_t> open;
  std::vector<std::int32_t> label;  // cluster representative per site
  std::int32_t largest_label = -1;
  std::int64_t largest_size = 0;

  std::int64_t n_sites() const;
  std::int64_t site_index(const std::vector<int>& coords) const;
  std::vector<int> site_coords(std::int64_t index) const;
  bool bond_open(std::int64_t site, int axis) const;
};

// iid Bernoulli(p) bonds from per-bond uniforms keyed by (seed, site, axis);
// the same seed couples configurations monotonically across p. Cluster
// labels by union-find, largest cluster recorded.
PercConfig bond_percolation(int d, int side, double p, std::uint64_t seed);

// min over lattice y with |y| <= r of
//   |B_rho(y) cap largest cluster| / |B_rho(y) cap Z^d|,
// balls Euclidean, origin at the box centre. Throws if r + rho leaves the box.
double perc_local_density(const PercConfig& cfg, double r, double rho);

struct PercPathStats {
  std::int64_t hops = 0;
  double hop_ratio = 0.0;        // hops / |x - y|
  double deviation_ratio = 0.0;  // dev(path) / |x - y|
  bool within_kappa = true;
  bool within_zeta = true;
};

// BFS shortest open-bond path per pair; endpoints must be distinct sites of
// the largest cluster.
std::vector<PercPathStats> perc_linear_paths(
    const PercConfig& cfg,
    const std::vector<std::pair<std::int64_t, std::int64_t>>& pairs, double kappa,
    double zeta);

// ---------------- dense geometric graphs ----------------

struct DenseGeomEstimate {
  double R = 0.0;
  int boxes = 0;       // boxes fully inside the domain
  int pairs = 0;       // neighbouring in-range box pairs (closures touch)
  int fail_nonempty_connected = 0;  // per box
  int fail_cross_edge = 0;          // per neighbouring pair
  int fail_diameter = 0;            // per box, hop diameter > D

  double rate_nonempty_connected() const;
  double rate_cross_edge() const;
  double rate_diameter() const;
};

// Evaluates the box partition of the graph domain: per in-range box,
// non-empty + connected and hop-diameter <= D; per neighbouring pair of
// in-range boxes, existence of a cross edge.
DenseGeomEstimate dense_geometric_check(const SpatialGraph& g_M,
                                        const BoxingScheme& scheme, int D);

// Smallest K such that at least a (1 - eps) fraction of in-range boxes hold
// at most K vertices.
int choose_K(const SpatialGraph& g_M, const BoxingScheme& scheme, double eps);

struct RenormalisedField {
  BoxingScheme scheme;
  int K = 0;
  std::vector<std::int64_t> z_lo;  // first in-range box coordinate per axis
  // site occupied iff its box is non-empty, connected, and has <= K vertices;
  // bond open iff both sites occupied and a cross edge joins the two boxes
  std::vector<std::uint8_t> occupied;
  PercConfig bonds;  // p records the empirical open fraction
  std::int64_t bonds_total = 0;
  std::int64_t bonds_open = 0;

  double open_bond_frequency() const;
};

// One-step renormalisation of the auxiliary graph to a site-bond field on
// the box grid. The open-bond frequency is the quantity to compare against
// an independent Bernoulli reference.
RenormalisedField couple_GM_to_bond(const SpatialGraph& g_M,
                                    const BoxingScheme& scheme, int K);

// Union of the vertex sets of all boxes whose site belongs to the largest
// cluster of the renormalised bond field; ascending vertex ids.
std::vector<std::int32_t> h_infinity(const SpatialGraph& g_M,
                                     const RenormalisedField& field);

}  // namespace fpp
