#pragma once
#include <cstdint>
#include <vector>

#include "fpp/common.hpp"
#include "fpp/rng.hpp"

namespace fpp {

using Point = std::vector<double>;

double sq_dist(const Point& a, const Point& b);
double euclid(const Point& a, const Point& b);

enum class DomainKind { ContinuumBox, LatticeBox };

// Box [-half_side, half_side]^d centred at the origin. Lattice domains hold
// the integer points of the box.
struct Domain {
  int d = 2;
  DomainKind kind = DomainKind::ContinuumBox;
  double half_side = 10.0;
  bool torus_wrap = false;

  double side() const { return 2.0 * half_side; }
  double volume() const;
  bool contains(const Point& p) const;
};

// Point count is Poisson(intensity * volume) exactly; the box is partitioned
// into near-unit cells with independent per-cell streams, so the result is
// independent of evaluation order. Points are listed cell-major (row-major
// cells, draw order within a cell).
std::vector<Point> sample_ppp(const Domain& domain, double intensity,
                              std::uint64_t seed);

// Integer points of the box in row-major order (x_1 outermost, x_d fastest).
std::vector<Point> lattice_points(const Domain& domain);

// Half-open boxes S_z = prod_i [offset_i + z_i R, offset_i + (z_i+1) R),
// lower boundary inclusive; they partition R^d.
struct BoxingScheme {
  int d = 2;
  double R = 1.0;
  Point origin_offset;  // empty means all-zero

  double offset(int axis) const {
    return origin_offset.empty() ? 0.0 : origin_offset[axis];
  }
};

std::vector<std::int64_t> box_of(const Point& p, const BoxingScheme& scheme);

enum class BlockSchedule { Factorial, Geometric };

// Side schedule of the block hierarchy: A_k = A1 (k!)^2 or A1 gamma^k.
// Geometric gamma must be an integer >= 2 so children partition parents
// exactly; all block origins then live on the grid of A1/2 units.
struct BlockGeometry {
  double A1 = 4.0;
  BlockSchedule schedule = BlockSchedule::Geometric;
  double gamma = 4.0;
  int k0 = 0;

  double side(int k) const;
  // A_k / A_{k-1}, an integer per-axis child count.
  std::int64_t child_ratio(int k) const;
  double unit() const { return 0.5 * A1; }
  void validate() const;
};

// A level-k block identified by its lower corner in units of A1/2. Exact
// integer identity makes memoised goodness lookups safe.
struct BlockId {
  int level = 0;
  std::vector<std::int64_t> origin_units;

  bool operator==(const BlockId& o) const = default;
};

struct BlockBox {
  Point lo;  // inclusive
  Point hi;  // exclusive
};

BlockBox block_box(const BlockId& id, const BlockGeometry& geom);

// Block of the centred level-k hierarchy, shifted by j*A_{k-1}/2, containing
// the point. j components must lie in {-1,0,1}; j != 0 requires k > k0.
BlockId block_of(const Point& p, const BlockGeometry& geom, int k,
                 const std::vector<int>& j);

// The (child_ratio)^d sub-blocks partitioning the block, level k-1, in
// row-major order.
std::vector<BlockId> block_children(const BlockId& id, const BlockGeometry& geom);

// Max over path vertices of the Euclidean distance to the segment [u, v];
// u = v degenerates to distance-to-point.
double deviation(const std::vector<Point>& path, const Point& u, const Point& v);

// Deviation measured against the path's own endpoints.
double deviation_endpoints(const std::vector<Point>& path);

double point_segment_distance(const Point& p, const Point& u, const Point& v);

}  // namespace fpp
