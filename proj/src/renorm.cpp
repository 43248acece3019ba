#include "fpp/renorm.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <queue>
#include <stdexcept>
#include <unordered_set>

#include "fpp/rng.hpp"

namespace fpp {

namespace {

std::int64_t int_pow(std::int64_t base, int exp) {
  std::int64_t out = 1;
  for (int i = 0; i < exp; ++i) out *= base;
  return out;
}

// odometer over {-1,0,1}^d in row-major order
bool next_sign_vector(std::vector<int>& j) {
  for (int i = static_cast<int>(j.size()) - 1; i >= 0; --i) {
    if (++j[i] <= 1) return true;
    j[i] = -1;
  }
  return false;
}

}  // namespace

const char* to_string(BlockFailure f) {
  switch (f) {
    case BlockFailure::None: return "None";
    case BlockFailure::BaseCaseCheapEdge: return "BaseCaseCheapEdge";
    case BlockFailure::LongCheapEdge: return "LongCheapEdge";
    case BlockFailure::TooManyBadChildren: return "TooManyBadChildren";
  }
  return "None";
}

BlockId block_translate(const BlockId& id, const BlockGeometry& geom,
                        const std::vector<int>& j) {
  if (j.size() != id.origin_units.size())
    throw std::invalid_argument("translate dimension mismatch");
  bool shifted = false;
  for (int v : j) {
    if (v < -1 || v > 1)
      throw std::invalid_argument("translate must be in {-1,0,1}^d");
    if (v != 0) shifted = true;
  }
  if (shifted && id.level <= geom.k0)
    throw std::invalid_argument("translates are defined for levels above k0");
  const std::int64_t units =
      std::llround(geom.side(id.level - 1) / (2.0 * geom.unit()));
  BlockId out = id;
  for (std::size_t i = 0; i < j.size(); ++i)
    out.origin_units[i] += static_cast<std::int64_t>(j[i]) * units;
  return out;
}

std::size_t BlockChecker::IdHash::operator()(const BlockId& id) const {
  std::uint64_t h = 0x9e3779b97f4a7c15ULL ^ static_cast<std::uint64_t>(id.level);
  for (std::int64_t v : id.origin_units) {
    h ^= static_cast<std::uint64_t>(v) + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
    h *= 0xbf58476d1ce4e5b9ULL;
  }
  return static_cast<std::size_t>(h);
}

BlockChecker::BlockChecker(const SpatialGraph& g, const BlockGeometry& geom,
                           double eta, double u)
    : g_(g), geom_(geom), eta_(eta), u_(u) {
  geom_.validate();
  if (!(eta > 0.0 && eta <= 1.0))
    throw std::invalid_argument("eta must lie in (0, 1]");
  if (!(u > 0.0 && u < 1.0)) throw std::invalid_argument("u must lie in (0, 1)");

  const int d = g_.dim();
  const std::size_t m = g_.edges.size();
  emin_.resize(m * d);
  emax_.resize(m * d);
  elen_.resize(m);
  ecost_.resize(m);
  for (std::size_t k = 0; k < m; ++k) {
    const auto& e = g_.edges[k];
    for (int i = 0; i < d; ++i) {
      const double a = g_.pos[static_cast<std::size_t>(e.u) * d + i];
      const double b = g_.pos[static_cast<std::size_t>(e.v) * d + i];
      emin_[k * d + i] = std::min(a, b);
      emax_[k * d + i] = std::max(a, b);
    }
    elen_[k] = std::sqrt(g_.sq_dist_between(e.u, e.v));
    ecost_[k] = e.cost;
  }
  order_.resize(m);
  std::iota(order_.begin(), order_.end(), 0);
  std::sort(order_.begin(), order_.end(), [&](std::int32_t a, std::int32_t b) {
    const double xa = emin_[static_cast<std::size_t>(a) * d];
    const double xb = emin_[static_cast<std::size_t>(b) * d];
    return xa != xb ? xa < xb : a < b;
  });
  sorted_min0_.resize(m);
  for (std::size_t r = 0; r < m; ++r)
    sorted_min0_[r] = emin_[static_cast<std::size_t>(order_[r]) * d];
}

int BlockChecker::find_cheap_edge(const BlockBox& box, double min_len,
                                  double max_cost) const {
  const int d = g_.dim();
  const auto lo = std::lower_bound(sorted_min0_.begin(), sorted_min0_.end(),
                                   box.lo[0]) -
                  sorted_min0_.begin();
  for (std::size_t r = lo; r < sorted_min0_.size(); ++r) {
    if (sorted_min0_[r] >= box.hi[0]) break;
    const std::size_t k = static_cast<std::size_t>(order_[r]);
    if (!(ecost_[k] < max_cost) || !(elen_[k] > min_len)) continue;
    bool inside = emax_[k * d] < box.hi[0];
    for (int i = 1; inside && i < d; ++i)
      inside = emin_[k * d + i] >= box.lo[i] && emax_[k * d + i] < box.hi[i];
    if (inside) return static_cast<int>(k);
  }
  return -1;
}

std::vector<BlockStatus> BlockChecker::all_statuses() const {
  std::vector<BlockStatus> out;
  out.reserve(memo_.size());
  for (const auto& [id, st] : memo_) out.push_back(st);
  std::sort(out.begin(), out.end(), [](const BlockStatus& a, const BlockStatus& b) {
    if (a.id.level != b.id.level) return a.id.level < b.id.level;
    return a.id.origin_units < b.id.origin_units;
  });
  return out;
}

const BlockStatus& BlockChecker::check(const BlockId& id) {
  auto it = memo_.find(id);
  if (it != memo_.end()) return it->second;
  BlockStatus st = evaluate(id);
  return memo_.emplace(id, std::move(st)).first->second;
}

BlockStatus BlockChecker::evaluate(const BlockId& id) {
  BlockStatus st;
  st.id = id;
  st.eta = eta_;
  st.u = u_;

  const int k = id.level;
  if (k < geom_.k0) throw std::invalid_argument("level below the base level");

  const auto record_edge = [&](int e, BlockFailure why) {
    st.good = false;
    st.failure = why;
    st.edge_u = g_.edges[static_cast<std::size_t>(e)].u;
    st.edge_v = g_.edges[static_cast<std::size_t>(e)].v;
  };

  if (k == geom_.k0) {
    const int e = find_cheap_edge(block_box(id, geom_), -1.0, u_);
    if (e >= 0) record_edge(e, BlockFailure::BaseCaseCheapEdge);
    return st;
  }

  const double min_len = geom_.side(k - 1) / 100.0;
  const double cost_floor = u_ * std::pow(geom_.side(k), eta_);
  const int max_bad = static_cast<int>(int_pow(3, g_.dim()));

  std::vector<int> j(g_.dim(), -1);
  do {
    const BlockId shifted = block_translate(id, geom_, j);
    const int e = find_cheap_edge(block_box(shifted, geom_), min_len, cost_floor);
    if (e >= 0) {
      record_edge(e, BlockFailure::LongCheapEdge);
      return st;
    }
    int bad = 0;
    for (const BlockId& child : block_children(shifted, geom_))
      if (!check(child).good) ++bad;
    if (bad > max_bad) {
      st.good = false;
      st.failure = BlockFailure::TooManyBadChildren;
      st.bad_children = bad;
      return st;
    }
  } while (next_sign_vector(j));
  return st;
}

double u_star_constant(const BlockGeometry& geom, int d, double u) {
  geom.validate();
  const double base = u / (geom.side(geom.k0) * std::sqrt(static_cast<double>(d)));
  const int k0 = geom.k0;
  if (k0 == 0) return base;
  double prod = 1.0;
  for (std::int64_t h = k0; h <= 1000000; ++h) {
    const double term =
        1.0 - static_cast<double>(k0) / (static_cast<double>(h) * h);
    if (term <= 0.0) return 0.0;
    prod *= term;
  }
  return base * prod;
}

double suggest_block_u(const SpatialGraph& g, const BlockGeometry& geom,
                       double eta, int level) {
  geom.validate();
  if (level < geom.k0) throw std::invalid_argument("level below the base level");
  if (g.edges.empty()) return 0.5;
  double lo = std::numeric_limits<double>::infinity();
  std::vector<double> scale;  // 1 / side(k)^eta per level above base
  for (int k = geom.k0 + 1; k <= level; ++k)
    scale.push_back(std::pow(geom.side(k), -eta));
  for (const auto& e : g.edges) {
    lo = std::min(lo, e.cost);
    const double len = std::sqrt(g.sq_dist_between(e.u, e.v));
    for (int k = geom.k0 + 1; k <= level; ++k)
      if (len > geom.side(k - 1) / 100.0)
        lo = std::min(lo, e.cost * scale[static_cast<std::size_t>(k - geom.k0 - 1)]);
  }
  if (!(lo > 0.0)) return 0.0;
  return std::min(0.99 * lo, 0.9);
}

PathBoundReport verify_path_lower_bound(BlockChecker& checker, const BlockId& block,
                                        std::int32_t x, std::int32_t y) {
  const BlockStatus& st = checker.check(block);
  if (!st.good) throw std::invalid_argument("block is not certified good");
  const SpatialGraph& g = checker.graph();
  const BlockGeometry& geom = checker.geometry();
  const int d = g.dim();
  const BlockBox box = block_box(block, geom);

  const auto in_box = [&](std::int32_t v) {
    for (int i = 0; i < d; ++i) {
      const double c = g.pos[static_cast<std::size_t>(v) * d + i];
      if (c < box.lo[i] || c >= box.hi[i]) return false;
    }
    return true;
  };
  if (x < 0 || y < 0 || x >= g.n() || y >= g.n())
    throw std::invalid_argument("vertex id out of range");
  if (!in_box(x) || !in_box(y))
    throw std::invalid_argument("endpoint outside the block");
  const double dist = std::sqrt(g.sq_dist_between(x, y));
  if (!(dist > geom.side(block.level) / 16.0))
    throw std::invalid_argument("endpoints too close for the path bound");

  PathBoundReport rep;
  rep.u_star = u_star_constant(geom, d, checker.u());
  rep.required = rep.u_star * std::pow(dist, checker.eta());

  // Dijkstra from x restricted to vertices inside the block
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> dist_to(g.n(), inf);
  std::vector<std::int32_t> parent(g.n(), -1);
  std::vector<char> done(g.n(), 0);
  using Entry = std::pair<double, std::int32_t>;
  std::priority_queue<Entry, std::vector<Entry>, std::greater<Entry>> heap;
  dist_to[x] = 0.0;
  heap.emplace(0.0, x);
  while (!heap.empty()) {
    const auto [dv, v] = heap.top();
    heap.pop();
    if (done[v] || dv > dist_to[v]) continue;
    done[v] = 1;
    if (v == y) break;
    for (const auto& [w, eidx] : g.adj[v]) {
      if (done[w] || !in_box(w)) continue;
      const double cand = dv + g.edges[static_cast<std::size_t>(eidx)].cost;
      if (cand < dist_to[w]) {
        dist_to[w] = cand;
        parent[w] = v;
        heap.emplace(cand, w);
      }
    }
  }

  rep.optimal_cost = done[y] ? dist_to[y] : inf;
  rep.holds = !(rep.optimal_cost < rep.required);
  if (!rep.holds) {
    for (std::int32_t v = y; v != -1; v = parent[v]) rep.counterexample.push_back(v);
    std::reverse(rep.counterexample.begin(), rep.counterexample.end());
  }
  return rep;
}

// ---------------- bond percolation ----------------

std::int64_t PercConfig::n_sites() const { return int_pow(side, d); }

std::int64_t PercConfig::site_index(const std::vector<int>& coords) const {
  std::int64_t idx = 0;
  for (int i = 0; i < d; ++i) {
    if (coords[i] < 0 || coords[i] >= side)
      throw std::invalid_argument("site coordinate out of range");
    idx = idx * side + coords[i];
  }
  return idx;
}

std::vector<int> PercConfig::site_coords(std::int64_t index) const {
  std::vector<int> coords(d);
  for (int i = d - 1; i >= 0; --i) {
    coords[i] = static_cast<int>(index % side);
    index /= side;
  }
  return coords;
}

bool PercConfig::bond_open(std::int64_t site, int axis) const {
  return open[static_cast<std::size_t>(site) * d + axis] != 0;
}

namespace {

struct UnionFind {
  std::vector<std::int32_t> parent;
  std::vector<std::int32_t> size;

  explicit UnionFind(std::int64_t n) : parent(n), size(n, 1) {
    std::iota(parent.begin(), parent.end(), 0);
  }
  std::int32_t find(std::int32_t v) {
    while (parent[v] != v) {
      parent[v] = parent[parent[v]];
      v = parent[v];
    }
    return v;
  }
  void unite(std::int32_t a, std::int32_t b) {
    a = find(a);
    b = find(b);
    if (a == b) return;
    if (size[a] < size[b]) std::swap(a, b);
    parent[b] = a;
    size[a] += size[b];
  }
};

void label_clusters(PercConfig& cfg) {
  const std::int64_t n = cfg.n_sites();
  UnionFind uf(n);
  std::vector<std::int64_t> stride(cfg.d);
  stride[cfg.d - 1] = 1;
  for (int i = cfg.d - 2; i >= 0; --i) stride[i] = stride[i + 1] * cfg.side;

  for (std::int64_t s = 0; s < n; ++s)
    for (int axis = 0; axis < cfg.d; ++axis)
      if (cfg.open[static_cast<std::size_t>(s) * cfg.d + axis])
        uf.unite(static_cast<std::int32_t>(s),
                 static_cast<std::int32_t>(s + stride[axis]));

  cfg.label.resize(n);
  cfg.largest_label = -1;
  cfg.largest_size = 0;
  for (std::int64_t s = 0; s < n; ++s) {
    const std::int32_t root = uf.find(static_cast<std::int32_t>(s));
    cfg.label[s] = root;
    // ties resolved towards the smaller root for determinism
    if (uf.size[root] > cfg.largest_size ||
        (uf.size[root] == cfg.largest_size && root < cfg.largest_label)) {
      cfg.largest_size = uf.size[root];
      cfg.largest_label = root;
    }
  }
}

}  // namespace

PercConfig bond_percolation(int d, int side, double p, std::uint64_t seed) {
  if (d < 1) throw std::invalid_argument("dimension must be >= 1");
  if (side < 1) throw std::invalid_argument("side must be >= 1");
  if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument("p must lie in [0, 1]");
  PercConfig cfg;
  cfg.d = d;
  cfg.side = side;
  cfg.p = p;
  const std::int64_t n = cfg.n_sites();
  if (n > std::numeric_limits<std::int32_t>::max())
    throw std::invalid_argument("lattice too large for 32-bit site ids");
  cfg.open.assign(static_cast<std::size_t>(n) * d, 0);

  std::vector<int> coords(d, 0);
  for (std::int64_t s = 0; s < n; ++s) {
    for (int axis = 0; axis < d; ++axis) {
      if (coords[axis] + 1 < side) {
        const double u = key_uniform(
            derive_key(seed, kTagBond, static_cast<std::uint64_t>(s),
                       static_cast<std::uint64_t>(axis)));
        if (u < p) cfg.open[static_cast<std::size_t>(s) * d + axis] = 1;
      }
    }
    for (int i = d - 1; i >= 0; --i) {
      if (++coords[i] < side) break;
      coords[i] = 0;
    }
  }
  label_clusters(cfg);
  return cfg;
}

double perc_local_density(const PercConfig& cfg, double r, double rho) {
  if (!(r >= 0.0) || !(rho >= 0.0))
    throw std::invalid_argument("radii must be non-negative");
  const int d = cfg.d;
  const int c0 = cfg.side / 2;
  const double reach = r + rho;
  if (reach > c0 || reach > cfg.side - 1 - c0)
    throw std::invalid_argument("r + rho exceeds the lattice box");

  // integer offsets within the Euclidean balls
  const auto ball_offsets = [&](double radius) {
    const int m = static_cast<int>(std::floor(radius));
    std::vector<std::vector<int>> out;
    std::vector<int> o(d, -m);
    while (true) {
      double sq = 0.0;
      for (int v : o) sq += static_cast<double>(v) * v;
      if (sq <= radius * radius) out.push_back(o);
      int i = d - 1;
      for (; i >= 0; --i) {
        if (++o[i] <= m) break;
        o[i] = -m;
      }
      if (i < 0) break;
    }
    return out;
  };

  const auto centers = ball_offsets(r);
  const auto window = ball_offsets(rho);
  const double denom = static_cast<double>(window.size());

  double min_ratio = 1.0;
  std::vector<int> site(d);
  for (const auto& y : centers) {
    std::int64_t in_cluster = 0;
    for (const auto& o : window) {
      for (int i = 0; i < d; ++i) site[i] = c0 + y[i] + o[i];
      if (cfg.label[cfg.site_index(site)] == cfg.largest_label) ++in_cluster;
    }
    min_ratio = std::min(min_ratio, static_cast<double>(in_cluster) / denom);
  }
  return min_ratio;
}

std::vector<PercPathStats> perc_linear_paths(
    const PercConfig& cfg,
    const std::vector<std::pair<std::int64_t, std::int64_t>>& pairs, double kappa,
    double zeta) {
  const int d = cfg.d;
  const std::int64_t n = cfg.n_sites();
  std::vector<std::int64_t> stride(d);
  stride[d - 1] = 1;
  for (int i = d - 2; i >= 0; --i) stride[i] = stride[i + 1] * cfg.side;

  std::vector<std::int32_t> parent(n);
  std::vector<char> seen(n);
  std::vector<std::int64_t> queue_buf(n);

  std::vector<PercPathStats> out;
  out.reserve(pairs.size());
  for (const auto& [a, b] : pairs) {
    if (a < 0 || b < 0 || a >= n || b >= n)
      throw std::invalid_argument("site index out of range");
    if (a == b) throw std::invalid_argument("pair endpoints must differ");
    if (cfg.label[a] != cfg.largest_label || cfg.label[b] != cfg.largest_label)
      throw std::invalid_argument("endpoint outside the largest cluster");

    std::fill(seen.begin(), seen.end(), 0);
    std::size_t head = 0, tail = 0;
    queue_buf[tail++] = a;
    seen[a] = 1;
    parent[a] = -1;
    bool found = false;
    while (head < tail && !found) {
      const std::int64_t v = queue_buf[head++];
      const auto coords = cfg.site_coords(v);
      for (int axis = 0; axis < d && !found; ++axis) {
        for (int dir = -1; dir <= 1; dir += 2) {
          const int c = coords[axis] + dir;
          if (c < 0 || c >= cfg.side) continue;
          const std::int64_t w = v + dir * stride[axis];
          const std::int64_t bond_site = dir > 0 ? v : w;
          if (!cfg.bond_open(bond_site, axis) || seen[w]) continue;
          seen[w] = 1;
          parent[w] = static_cast<std::int32_t>(v);
          queue_buf[tail++] = w;
          if (w == b) {
            found = true;
            break;
          }
        }
      }
    }
    // same largest cluster guarantees reachability
    std::vector<Point> path;
    for (std::int64_t v = b; v != -1; v = parent[v]) {
      const auto coords = cfg.site_coords(v);
      Point p(d);
      for (int i = 0; i < d; ++i) p[i] = static_cast<double>(coords[i]);
      path.push_back(std::move(p));
    }
    std::reverse(path.begin(), path.end());

    PercPathStats st;
    st.hops = static_cast<std::int64_t>(path.size()) - 1;
    const double euclid_ab = euclid(path.front(), path.back());
    st.hop_ratio = static_cast<double>(st.hops) / euclid_ab;
    st.deviation_ratio = deviation_endpoints(path) / euclid_ab;
    st.within_kappa = st.hop_ratio <= kappa;
    st.within_zeta = st.deviation_ratio <= zeta;
    out.push_back(st);
  }
  return out;
}

// ---------------- dense geometric graphs ----------------

namespace {

// boxes of the scheme fully contained in the graph domain
struct BoxGrid {
  int d = 0;
  std::vector<std::int64_t> z_lo, z_hi;  // inclusive
  std::vector<std::int64_t> stride;
  std::int64_t count = 0;

  static BoxGrid build(const SpatialGraph& g, const BoxingScheme& scheme) {
    if (scheme.d != g.dim())
      throw std::invalid_argument("boxing scheme dimension mismatch");
    if (!(scheme.R > 0.0)) throw std::invalid_argument("box side must be positive");
    BoxGrid grid;
    grid.d = scheme.d;
    grid.z_lo.resize(grid.d);
    grid.z_hi.resize(grid.d);
    const double half = g.domain.half_side;
    for (int i = 0; i < grid.d; ++i) {
      const double off = scheme.offset(i);
      grid.z_lo[i] =
          static_cast<std::int64_t>(std::ceil((-half - off) / scheme.R - 1e-12));
      grid.z_hi[i] =
          static_cast<std::int64_t>(std::floor((half - off) / scheme.R + 1e-12)) - 1;
    }
    grid.stride.assign(grid.d, 1);
    for (int i = 0; i < grid.d; ++i) {
      if (grid.z_hi[i] - grid.z_lo[i] + 1 <= 0) {
        grid.count = 0;
        return grid;
      }
    }
    // row-major strides
    std::int64_t acc = 1;
    for (int i = grid.d - 1; i >= 0; --i) {
      grid.stride[i] = acc;
      acc *= grid.z_hi[i] - grid.z_lo[i] + 1;
    }
    grid.count = acc;
    return grid;
  }

  std::int64_t axis_count(int i) const { return z_hi[i] - z_lo[i] + 1; }

  // -1 when the vertex lies in a box not fully inside the domain
  std::int64_t site_of(const std::vector<std::int64_t>& z) const {
    std::int64_t s = 0;
    for (int i = 0; i < d; ++i) {
      if (z[i] < z_lo[i] || z[i] > z_hi[i]) return -1;
      s += (z[i] - z_lo[i]) * stride[i];
    }
    return s;
  }

  std::vector<std::int64_t> coords_of(std::int64_t s) const {
    std::vector<std::int64_t> z(d);
    for (int i = 0; i < d; ++i) {
      z[i] = z_lo[i] + s / stride[i];
      s %= stride[i];
    }
    return z;
  }
};

struct BoxedGraph {
  BoxGrid grid;
  std::vector<std::int64_t> site;                  // per vertex, -1 off-grid
  std::vector<std::vector<std::int32_t>> members;  // vertices per site
  // adjacency among same-box vertices, indices into members' vertex ids
  std::vector<std::vector<std::pair<std::int32_t, std::int32_t>>> internal;
  std::unordered_set<std::uint64_t> cross;  // canonical (min,max) site pairs

  static BoxedGraph build(const SpatialGraph& g, const BoxingScheme& scheme) {
    BoxedGraph bg;
    bg.grid = BoxGrid::build(g, scheme);
    const int n = g.n();
    bg.site.resize(n);
    bg.members.resize(static_cast<std::size_t>(bg.grid.count));
    for (int v = 0; v < n; ++v) {
      const auto z = box_of(g.position(v), scheme);
      bg.site[v] = bg.grid.site_of(z);
      if (bg.site[v] >= 0)
        bg.members[static_cast<std::size_t>(bg.site[v])].push_back(v);
    }
    bg.internal.resize(static_cast<std::size_t>(bg.grid.count));
    for (const auto& e : g.edges) {
      const std::int64_t su = bg.site[e.u], sv = bg.site[e.v];
      if (su < 0 || sv < 0) continue;
      if (su == sv) {
        bg.internal[static_cast<std::size_t>(su)].emplace_back(e.u, e.v);
      } else {
        const std::uint64_t a = static_cast<std::uint64_t>(std::min(su, sv));
        const std::uint64_t b = static_cast<std::uint64_t>(std::max(su, sv));
        bg.cross.insert(a * static_cast<std::uint64_t>(bg.grid.count) + b);
      }
    }
    return bg;
  }

  bool has_cross_edge(std::int64_t s1, std::int64_t s2) const {
    const std::uint64_t a = static_cast<std::uint64_t>(std::min(s1, s2));
    const std::uint64_t b = static_cast<std::uint64_t>(std::max(s1, s2));
    return cross.count(a * static_cast<std::uint64_t>(grid.count) + b) > 0;
  }

  // hop diameter of the box subgraph; -1 encodes disconnected or empty
  int box_diameter(std::int64_t s) const {
    const auto& verts = members[static_cast<std::size_t>(s)];
    if (verts.empty()) return -1;
    std::unordered_map<std::int32_t, int> local;
    local.reserve(verts.size());
    for (std::size_t i = 0; i < verts.size(); ++i)
      local[verts[i]] = static_cast<int>(i);
    std::vector<std::vector<int>> adj(verts.size());
    for (const auto& [u, v] : internal[static_cast<std::size_t>(s)]) {
      adj[local.at(u)].push_back(local.at(v));
      adj[local.at(v)].push_back(local.at(u));
    }
    int diameter = 0;
    std::vector<int> depth(verts.size());
    std::vector<int> queue_buf(verts.size());
    for (std::size_t src = 0; src < verts.size(); ++src) {
      std::fill(depth.begin(), depth.end(), -1);
      int head = 0, tail = 0;
      queue_buf[tail++] = static_cast<int>(src);
      depth[src] = 0;
      int reached = 1;
      while (head < tail) {
        const int v = queue_buf[head++];
        for (int w : adj[v])
          if (depth[w] < 0) {
            depth[w] = depth[v] + 1;
            queue_buf[tail++] = w;
            ++reached;
            diameter = std::max(diameter, depth[w]);
          }
      }
      if (reached != static_cast<int>(verts.size())) return -1;
    }
    return diameter;
  }
};

}  // namespace

double DenseGeomEstimate::rate_nonempty_connected() const {
  return boxes > 0 ? static_cast<double>(fail_nonempty_connected) / boxes
                   : std::numeric_limits<double>::quiet_NaN();
}
double DenseGeomEstimate::rate_cross_edge() const {
  return pairs > 0 ? static_cast<double>(fail_cross_edge) / pairs
                   : std::numeric_limits<double>::quiet_NaN();
}
double DenseGeomEstimate::rate_diameter() const {
  return boxes > 0 ? static_cast<double>(fail_diameter) / boxes
                   : std::numeric_limits<double>::quiet_NaN();
}

DenseGeomEstimate dense_geometric_check(const SpatialGraph& g_M,
                                        const BoxingScheme& scheme, int D) {
  const BoxedGraph bg = BoxedGraph::build(g_M, scheme);
  DenseGeomEstimate est;
  est.R = scheme.R;
  est.boxes = static_cast<int>(bg.grid.count);
  for (std::int64_t s = 0; s < bg.grid.count; ++s) {
    const int diam = bg.box_diameter(s);
    const bool empty = bg.members[static_cast<std::size_t>(s)].empty();
    if (diam < 0) {
      ++est.fail_nonempty_connected;
      // an empty box fails only the non-emptiness rule; the diameter rule is
      // vacuous there
      if (!empty) ++est.fail_diameter;
    } else if (diam > D) {
      ++est.fail_diameter;
    }
  }

  // neighbouring pairs: boxes whose closures intersect, counted once via
  // lexicographically positive direction vectors
  const int d = bg.grid.d;
  std::vector<std::vector<int>> dirs;
  std::vector<int> o(d, -1);
  while (true) {
    bool positive = false;
    for (int i = 0; i < d; ++i) {
      if (o[i] > 0) {
        positive = true;
        break;
      }
      if (o[i] < 0) break;
    }
    if (positive) dirs.push_back(o);
    int i = d - 1;
    for (; i >= 0; --i) {
      if (++o[i] <= 1) break;
      o[i] = -1;
    }
    if (i < 0) break;
  }

  for (std::int64_t s = 0; s < bg.grid.count; ++s) {
    const auto z = bg.grid.coords_of(s);
    for (const auto& delta : dirs) {
      auto z2 = z;
      bool ok = true;
      for (int i = 0; i < d; ++i) {
        z2[i] += delta[i];
        if (z2[i] < bg.grid.z_lo[i] || z2[i] > bg.grid.z_hi[i]) {
          ok = false;
          break;
        }
      }
      if (!ok) continue;
      ++est.pairs;
      if (!bg.has_cross_edge(s, bg.grid.site_of(z2))) ++est.fail_cross_edge;
    }
  }
  return est;
}

int choose_K(const SpatialGraph& g_M, const BoxingScheme& scheme, double eps) {
  if (!(eps > 0.0 && eps < 1.0)) throw std::invalid_argument("eps must lie in (0, 1)");
  const BoxedGraph bg = BoxedGraph::build(g_M, scheme);
  if (bg.grid.count == 0) throw std::invalid_argument("no box fits in the domain");
  std::vector<int> counts;
  counts.reserve(static_cast<std::size_t>(bg.grid.count));
  for (const auto& verts : bg.members)
    counts.push_back(static_cast<int>(verts.size()));
  std::sort(counts.begin(), counts.end());
  const std::size_t idx = static_cast<std::size_t>(
      std::min<double>(std::ceil((1.0 - eps) * counts.size()),
                       static_cast<double>(counts.size())) -
      1.0);
  return counts[idx];
}

double RenormalisedField::open_bond_frequency() const {
  return bonds_total > 0 ? static_cast<double>(bonds_open) / bonds_total : 0.0;
}

RenormalisedField couple_GM_to_bond(const SpatialGraph& g_M,
                                    const BoxingScheme& scheme, int K) {
  if (K < 0) throw std::invalid_argument("K must be non-negative");
  const BoxedGraph bg = BoxedGraph::build(g_M, scheme);
  const int d = bg.grid.d;
  if (bg.grid.count > 0)
    for (int i = 1; i < d; ++i)
      if (bg.grid.axis_count(i) != bg.grid.axis_count(0))
        throw std::invalid_argument("box grid is not square");

  RenormalisedField field;
  field.scheme = scheme;
  field.K = K;
  field.z_lo = bg.grid.z_lo;
  field.occupied.assign(static_cast<std::size_t>(bg.grid.count), 0);
  for (std::int64_t s = 0; s < bg.grid.count; ++s) {
    const auto& verts = bg.members[static_cast<std::size_t>(s)];
    if (verts.empty() || static_cast<int>(verts.size()) > K) continue;
    if (bg.box_diameter(s) >= 0) field.occupied[static_cast<std::size_t>(s)] = 1;
  }

  PercConfig pc;
  pc.d = d;
  pc.side = bg.grid.count > 0 ? static_cast<int>(bg.grid.axis_count(0)) : 0;
  pc.open.assign(static_cast<std::size_t>(bg.grid.count) * d, 0);
  for (std::int64_t s = 0; s < bg.grid.count; ++s) {
    const auto z = bg.grid.coords_of(s);
    for (int axis = 0; axis < d; ++axis) {
      if (z[axis] >= bg.grid.z_hi[axis]) continue;
      ++field.bonds_total;
      const std::int64_t s2 = s + bg.grid.stride[axis];
      if (field.occupied[static_cast<std::size_t>(s)] &&
          field.occupied[static_cast<std::size_t>(s2)] &&
          bg.has_cross_edge(s, s2)) {
        pc.open[static_cast<std::size_t>(s) * d + axis] = 1;
        ++field.bonds_open;
      }
    }
  }
  pc.p = field.bonds_total > 0
             ? static_cast<double>(field.bonds_open) / field.bonds_total
             : 0.0;
  if (pc.side > 0) label_clusters(pc);
  field.bonds = std::move(pc);
  return field;
}

std::vector<std::int32_t> h_infinity(const SpatialGraph& g_M,
                                     const RenormalisedField& field) {
  std::vector<std::int32_t> out;
  if (field.bonds.largest_label < 0) return out;
  const BoxedGraph bg = BoxedGraph::build(g_M, field.scheme);
  for (std::int64_t s = 0; s < bg.grid.count; ++s)
    if (field.bonds.label[s] == field.bonds.largest_label)
      for (std::int32_t v : bg.members[static_cast<std::size_t>(s)])
        out.push_back(v);
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace fpp
