#include "fpp/domain.hpp"

#include <cmath>
#include <stdexcept>

namespace fpp {

double sq_dist(const Point& a, const Point& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    double t = a[i] - b[i];
    s += t * t;
  }
  return s;
}

double euclid(const Point& a, const Point& b) { return std::sqrt(sq_dist(a, b)); }

double Domain::volume() const {
  double v = 1.0;
  for (int i = 0; i < d; ++i) v *= side();
  return v;
}

bool Domain::contains(const Point& p) const {
  for (int i = 0; i < d; ++i)
    if (p[i] < -half_side || p[i] > half_side) return false;
  return true;
}

std::vector<Point> sample_ppp(const Domain& domain, double intensity,
                              std::uint64_t seed) {
  if (domain.kind != DomainKind::ContinuumBox)
    throw std::invalid_argument("sample_ppp requires a continuum box domain");
  if (intensity < 0.0) throw std::invalid_argument("intensity must be >= 0");
  std::vector<Point> points;
  if (intensity == 0.0) return points;

  const int d = domain.d;
  const double side = domain.side();
  const std::int64_t cells_per_axis =
      std::max<std::int64_t>(1, static_cast<std::int64_t>(std::ceil(side)));
  const double w = side / static_cast<double>(cells_per_axis);
  double cell_vol = 1.0;
  for (int i = 0; i < d; ++i) cell_vol *= w;

  std::int64_t total_cells = 1;
  for (int i = 0; i < d; ++i) total_cells *= cells_per_axis;

  std::vector<std::int64_t> idx(d, 0);
  for (std::int64_t cell = 0; cell < total_cells; ++cell) {
    Rng rng(derive_key(seed, kTagPppCell, static_cast<std::uint64_t>(cell)));
    std::int64_t count = rng.poisson(intensity * cell_vol);
    for (std::int64_t n = 0; n < count; ++n) {
      Point p(d);
      for (int i = 0; i < d; ++i) {
        double lo = -domain.half_side + w * static_cast<double>(idx[i]);
        p[i] = lo + w * rng.uniform();
      }
      points.push_back(std::move(p));
    }
    for (int i = d - 1; i >= 0; --i) {
      if (++idx[i] < cells_per_axis) break;
      idx[i] = 0;
    }
  }
  return points;
}

std::vector<Point> lattice_points(const Domain& domain) {
  if (domain.kind != DomainKind::LatticeBox)
    throw std::invalid_argument("lattice_points requires a lattice box domain");
  const int d = domain.d;
  const std::int64_t h = static_cast<std::int64_t>(std::floor(domain.half_side));
  const std::int64_t per_axis = 2 * h + 1;
  std::int64_t total = 1;
  for (int i = 0; i < d; ++i) total *= per_axis;

  std::vector<Point> points;
  points.reserve(total);
  std::vector<std::int64_t> idx(d, -h);
  for (std::int64_t n = 0; n < total; ++n) {
    Point p(d);
    for (int i = 0; i < d; ++i) p[i] = static_cast<double>(idx[i]);
    points.push_back(std::move(p));
    for (int i = d - 1; i >= 0; --i) {
      if (++idx[i] <= h) break;
      idx[i] = -h;
    }
  }
  return points;
}

std::vector<std::int64_t> box_of(const Point& p, const BoxingScheme& scheme) {
  std::vector<std::int64_t> z(scheme.d);
  for (int i = 0; i < scheme.d; ++i)
    z[i] = static_cast<std::int64_t>(std::floor((p[i] - scheme.offset(i)) / scheme.R));
  return z;
}

double BlockGeometry::side(int k) const {
  if (schedule == BlockSchedule::Geometric) return A1 * std::pow(gamma, k);
  double f = 1.0;
  for (int i = 2; i <= k; ++i) f *= static_cast<double>(i);
  return A1 * f * f;  // A1 (k!)^2; k <= 0 gives A1
}

std::int64_t BlockGeometry::child_ratio(int k) const {
  if (schedule == BlockSchedule::Geometric) return static_cast<std::int64_t>(gamma);
  std::int64_t kk = static_cast<std::int64_t>(k);
  return kk * kk;
}

void BlockGeometry::validate() const {
  if (!(A1 > 0.0)) throw std::invalid_argument("A1 must be positive");
  if (schedule == BlockSchedule::Geometric) {
    if (gamma < 2.0 || gamma != std::floor(gamma))
      throw std::invalid_argument("Geometric gamma must be an integer >= 2");
  }
  if (k0 < 0) throw std::invalid_argument("k0 must be >= 0");
}

BlockBox block_box(const BlockId& id, const BlockGeometry& geom) {
  const int d = static_cast<int>(id.origin_units.size());
  const double u0 = geom.unit();
  BlockBox box;
  box.lo.resize(d);
  box.hi.resize(d);
  const double a = geom.side(id.level);
  for (int i = 0; i < d; ++i) {
    box.lo[i] = u0 * static_cast<double>(id.origin_units[i]);
    box.hi[i] = box.lo[i] + a;
  }
  return box;
}

BlockId block_of(const Point& p, const BlockGeometry& geom, int k,
                 const std::vector<int>& j) {
  geom.validate();
  if (k < geom.k0) throw std::invalid_argument("level below k0");
  const int d = static_cast<int>(p.size());
  bool shifted = false;
  for (int v : j) {
    if (v < -1 || v > 1) throw std::invalid_argument("translate must be in {-1,0,1}^d");
    if (v != 0) shifted = true;
  }
  if (shifted && k <= geom.k0)
    throw std::invalid_argument("translates are defined for levels above k0");

  const double a_k = geom.side(k);
  const double u0 = geom.unit();
  // units per A_k and per A_{k-1}/2
  const std::int64_t units_k = static_cast<std::int64_t>(std::llround(a_k / u0));
  const std::int64_t units_half_child =
      shifted ? std::llround(geom.side(k - 1) / (2.0 * u0)) : 0;

  BlockId id;
  id.level = k;
  id.origin_units.resize(d);
  for (int i = 0; i < d; ++i) {
    // centred hierarchy: origins at -A_k/2 + m A_k, plus the translate shift
    double shift = static_cast<double>(j.empty() ? 0 : j[i]) *
                   static_cast<double>(units_half_child) * u0;
    double rel = (p[i] - shift + 0.5 * a_k) / a_k;
    std::int64_t m = static_cast<std::int64_t>(std::floor(rel));
    id.origin_units[i] = m * units_k - units_k / 2 +
                         (j.empty() ? 0 : j[i]) * units_half_child;
  }
  return id;
}

std::vector<BlockId> block_children(const BlockId& id, const BlockGeometry& geom) {
  const int d = static_cast<int>(id.origin_units.size());
  const std::int64_t ratio = geom.child_ratio(id.level);
  const std::int64_t child_units =
      static_cast<std::int64_t>(std::llround(geom.side(id.level - 1) / geom.unit()));
  std::int64_t total = 1;
  for (int i = 0; i < d; ++i) total *= ratio;

  std::vector<BlockId> children;
  children.reserve(total);
  std::vector<std::int64_t> idx(d, 0);
  for (std::int64_t n = 0; n < total; ++n) {
    BlockId c;
    c.level = id.level - 1;
    c.origin_units.resize(d);
    for (int i = 0; i < d; ++i)
      c.origin_units[i] = id.origin_units[i] + idx[i] * child_units;
    children.push_back(std::move(c));
    for (int i = d - 1; i >= 0; --i) {
      if (++idx[i] < ratio) break;
      idx[i] = 0;
    }
  }
  return children;
}

double point_segment_distance(const Point& p, const Point& u, const Point& v) {
  double vv = sq_dist(u, v);
  if (vv == 0.0) return euclid(p, u);
  double t = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) t += (p[i] - u[i]) * (v[i] - u[i]);
  t /= vv;
  if (t < 0.0) t = 0.0;
  if (t > 1.0) t = 1.0;
  double s = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    double proj = u[i] + t * (v[i] - u[i]);
    double diff = p[i] - proj;
    s += diff * diff;
  }
  return std::sqrt(s);
}

double deviation(const std::vector<Point>& path, const Point& u, const Point& v) {
  if (path.empty()) throw std::invalid_argument("deviation of an empty path");
  double m = 0.0;
  for (const auto& p : path) m = std::max(m, point_segment_distance(p, u, v));
  return m;
}

double deviation_endpoints(const std::vector<Point>& path) {
  return deviation(path, path.front(), path.back());
}

}  // namespace fpp
