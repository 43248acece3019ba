#include "fpp/graph.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <stdexcept>
#include <string>

#include "fpp/common.hpp"

namespace fpp {

namespace {

constexpr double kCostClamp = 1e300;

std::string fmt_approx(double x) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.3g", x);
  return buf;
}

}  // namespace

double LDistributionSpec::cdf(double t) const {
  switch (kind) {
    case LKind::Constant:
      return t >= 1.0 ? 1.0 : 0.0;
    case LKind::PowerNearZero: {
      if (t <= 0.0) return 0.0;
      if (is_infinite(beta)) return t >= t0_cap ? 1.0 : 0.0;
      return std::min(1.0, std::pow(t / t0_cap, beta));
    }
    case LKind::ExplicitCDF: {
      if (cdf_knots.empty() || t < cdf_knots.front().first) return 0.0;
      if (t >= cdf_knots.back().first) return 1.0;
      // linear interpolation on the first segment containing t
      for (std::size_t i = 1; i < cdf_knots.size(); ++i) {
        if (t < cdf_knots[i].first) {
          const auto& [t0, f0] = cdf_knots[i - 1];
          const auto& [t1, f1] = cdf_knots[i];
          return f0 + (f1 - f0) * (t - t0) / (t1 - t0);
        }
      }
      return 1.0;
    }
  }
  return 0.0;
}

double LDistributionSpec::sample(double u) const {
  switch (kind) {
    case LKind::Constant:
      return 1.0;
    case LKind::PowerNearZero:
      if (is_infinite(beta)) return t0_cap;
      return t0_cap * std::pow(u, 1.0 / beta);
    case LKind::ExplicitCDF: {
      if (u <= cdf_knots.front().second) return cdf_knots.front().first;
      for (std::size_t i = 1; i < cdf_knots.size(); ++i) {
        const auto& [t0, f0] = cdf_knots[i - 1];
        const auto& [t1, f1] = cdf_knots[i];
        if (u <= f1) return f1 > f0 ? t0 + (t1 - t0) * (u - f0) / (f1 - f0) : t1;
      }
      return cdf_knots.back().first;
    }
  }
  return 1.0;
}

void LDistributionSpec::validate() const {
  switch (kind) {
    case LKind::Constant:
      return;
    case LKind::PowerNearZero:
      if (!(beta > 0.0)) throw std::invalid_argument("l spec: beta must be positive or infinite");
      if (!(t0_cap > 0.0) || is_infinite(t0_cap))
        throw std::invalid_argument("l spec: cap must be positive and finite");
      return;
    case LKind::ExplicitCDF: {
      if (cdf_knots.size() < 2)
        throw std::invalid_argument("l spec: explicit cdf needs at least two knots");
      if (cdf_knots.front().first < 0.0)
        throw std::invalid_argument("l spec: cdf support must be nonnegative");
      for (std::size_t i = 0; i < cdf_knots.size(); ++i) {
        const auto& [t, f] = cdf_knots[i];
        if (!(f >= 0.0 && f <= 1.0))
          throw std::invalid_argument("l spec: cdf values must lie in [0, 1]");
        if (i > 0 && !(t > cdf_knots[i - 1].first))
          throw std::invalid_argument("l spec: cdf abscissae must be strictly increasing");
        if (i > 0 && f < cdf_knots[i - 1].second)
          throw std::invalid_argument("l spec: cdf must be nondecreasing");
      }
      if (cdf_knots.back().second != 1.0)
        throw std::invalid_argument("l spec: cdf must reach 1 at the last knot");
      return;
    }
  }
}

bool LDistributionSpec::no_mass_near_zero() const {
  switch (kind) {
    case LKind::Constant:
      return true;
    case LKind::PowerNearZero:
      return is_infinite(beta);
    case LKind::ExplicitCDF:
      return cdf_knots.front().first > 0.0 && cdf_knots.front().second == 0.0;
  }
  return false;
}

double sample_weight(double tau, double u) {
  // clamp keeps the extreme tail finite; reachable only below 1e-290 mass
  return std::min(std::pow(1.0 - u, -1.0 / (tau - 1.0)), 1e300);
}

double sample_L(const LDistributionSpec& spec, double u) { return spec.sample(u); }

double connection_prob_sq(double sq, double w1, double w2, const ModelParams& par) {
  if (sq <= 0.0) return par.c_lower;
  // |x|^d without a generic pow for the common dimensions
  double rd;
  switch (par.d) {
    case 1: rd = std::sqrt(sq); break;
    case 2: rd = sq; break;
    case 3: rd = sq * std::sqrt(sq); break;
    default: rd = std::pow(sq, 0.5 * par.d); break;
  }
  const double ratio = (w1 * w2) / rd;
  if (is_infinite(par.alpha)) return ratio >= par.c_prime ? par.c_lower : 0.0;
  if (ratio >= 1.0) return par.c_lower;
  return par.c_lower * std::pow(ratio, par.alpha);
}

double connection_prob(const Point& x_diff, double w1, double w2,
                       const ModelParams& par) {
  double sq = 0.0;
  for (double c : x_diff) sq += c * c;
  return connection_prob_sq(sq, w1, w2, par);
}

double edge_cost(double l_value, double w1, double w2, double mu) {
  if (l_value == 0.0 || mu == 0.0) return l_value;
  const double prod = w1 * w2;
  double c;
  if (std::isfinite(prod)) {
    c = l_value * std::pow(prod, mu);
  } else {
    const double lg = mu * (std::log(w1) + std::log(w2)) + std::log(l_value);
    c = lg > 690.0 ? kCostClamp : std::exp(lg);
  }
  return c > kCostClamp ? kCostClamp : c;
}

Point SpatialGraph::position(int i) const {
  const int d = dim();
  return Point(pos.begin() + static_cast<std::size_t>(i) * d,
               pos.begin() + static_cast<std::size_t>(i + 1) * d);
}

Vertex SpatialGraph::vertex(int i) const {
  return Vertex{orig_id[static_cast<std::size_t>(i)], position(i),
                weight[static_cast<std::size_t>(i)]};
}

double SpatialGraph::sq_dist_between(int i, int j) const {
  const int d = dim();
  const double* a = pos.data() + static_cast<std::size_t>(i) * d;
  const double* b = pos.data() + static_cast<std::size_t>(j) * d;
  double sq = 0.0;
  for (int k = 0; k < d; ++k) {
    const double diff = a[k] - b[k];
    sq += diff * diff;
  }
  return sq;
}

std::int32_t SpatialGraph::add_vertex(const Point& p, double w) {
  if (static_cast<int>(p.size()) != dim())
    throw std::invalid_argument("add_vertex: dimension mismatch");
  pos.insert(pos.end(), p.begin(), p.end());
  weight.push_back(w);
  orig_id.push_back(static_cast<std::int64_t>(weight.size()) - 1);
  adj.emplace_back();
  return static_cast<std::int32_t>(weight.size()) - 1;
}

void SpatialGraph::add_edge(std::int32_t u, std::int32_t v, double l_value) {
  if (u == v) throw std::invalid_argument("add_edge: loops are not allowed");
  if (u > v) std::swap(u, v);
  EdgeRecord e{u, v, l_value, edge_cost(l_value, weight[u], weight[v], params.mu)};
  const auto idx = static_cast<std::int32_t>(edges.size());
  edges.push_back(e);
  adj[u].emplace_back(v, idx);
  adj[v].emplace_back(u, idx);
}

void SpatialGraph::rebuild_adjacency() {
  std::sort(edges.begin(), edges.end(), [](const EdgeRecord& a, const EdgeRecord& b) {
    return a.u != b.u ? a.u < b.u : a.v < b.v;
  });
  adj.assign(weight.size(), {});
  for (std::int32_t i = 0; i < static_cast<std::int32_t>(edges.size()); ++i) {
    adj[edges[i].u].emplace_back(edges[i].v, i);
    adj[edges[i].v].emplace_back(edges[i].u, i);
  }
  for (auto& a : adj) std::sort(a.begin(), a.end());
}

namespace {

// ---- generation internals ----

struct GenContext {
  const ModelParams& par;
  const LDistributionSpec& l_spec;
  std::uint64_t seed;
  SpatialGraph& g;

  void try_pair(std::int32_t a, std::int32_t b) {
    if (a > b) std::swap(a, b);
    const double h = connection_prob_sq(g.sq_dist_between(a, b), g.weight[a],
                                        g.weight[b], par);
    if (h <= 0.0) return;
    const double u = key_uniform(derive_key(seed, kTagPair, a, b));
    if (u < h) emit(a, b);
  }

  // candidate drawn with class rate p_bar >= h; accept iff u * p_bar < h, so
  // the unconditional probability is exactly h (same per-pair uniform as Naive)
  void try_candidate(std::int32_t a, std::int32_t b, double p_bar) {
    if (a > b) std::swap(a, b);
    const double h = connection_prob_sq(g.sq_dist_between(a, b), g.weight[a],
                                        g.weight[b], par);
    if (h <= 0.0) return;
    const double u = key_uniform(derive_key(seed, kTagPair, a, b));
    if (u * p_bar < h) emit(a, b);
  }

  void emit(std::int32_t a, std::int32_t b) {
    const double l =
        sample_L(l_spec, key_uniform(derive_key(seed, kTagLValue, a, b)));
    g.edges.push_back(
        EdgeRecord{a, b, l, edge_cost(l, g.weight[a], g.weight[b], par.mu)});
  }
};

// Kernel evaluated at a product upper bound; monotone in the ratio, so this
// dominates h for every pair whose product is < wmax and distance is >= s.
double kernel_upper(double sq, double wmax, const ModelParams& par) {
  return connection_prob_sq(sq, wmax, 1.0, par);
}

int weight_layer(double w) {
  const int l = static_cast<int>(std::floor(std::log2(w)));
  return std::clamp(l, 0, 1023);
}

// Dyadic cell grid over the domain box, vertices bucketed per weight layer and
// sorted by Morton code so every (level, cell, layer) set is a contiguous run.
struct CellGrid {
  int d = 1;
  int levels = 0;
  double lo = 0.0;
  double leaf_side = 1.0;

  struct Layer {
    std::vector<std::uint64_t> morton;  // sorted, parallel to vids
    std::vector<std::int32_t> vids;
  };
  std::vector<int> layer_ids;  // present layers, ascending
  std::vector<Layer> layers;   // parallel to layer_ids
  // masks[lvl][cell] = bit i set iff layers[i] has a vertex in that cell
  std::vector<std::vector<std::uint64_t>> masks;

  std::uint64_t encode(const std::int64_t* ix) const {
    std::uint64_t m = 0;
    for (int bit = 0; bit < levels; ++bit)
      for (int axis = 0; axis < d; ++axis)
        m |= static_cast<std::uint64_t>((ix[axis] >> bit) & 1) << (bit * d + axis);
    return m;
  }

  void decode(std::uint64_t m, int lvl, std::int64_t* ix) const {
    for (int axis = 0; axis < d; ++axis) ix[axis] = 0;
    for (int bit = 0; bit < lvl; ++bit)
      for (int axis = 0; axis < d; ++axis)
        ix[axis] |= static_cast<std::int64_t>((m >> (bit * d + axis)) & 1) << bit;
  }

  // contiguous [lo, hi) of layer slot li inside cell c at level lvl
  std::pair<std::size_t, std::size_t> range(int li, int lvl, std::uint64_t c) const {
    const int shift = d * (levels - lvl);
    const auto& mv = layers[li].morton;
    const auto b = std::lower_bound(mv.begin(), mv.end(), c << shift);
    const auto e = std::lower_bound(b, mv.end(), (c + 1) << shift);
    return {static_cast<std::size_t>(b - mv.begin()),
            static_cast<std::size_t>(e - mv.begin())};
  }

  double cell_side(int lvl) const {
    return leaf_side * static_cast<double>(std::uint64_t{1} << (levels - lvl));
  }
};

CellGrid build_grid(const SpatialGraph& g) {
  CellGrid grid;
  grid.d = g.dim();
  const double side = g.domain.side();
  const int n = g.n();

  int lv = 0;
  while (grid.d <= 6 && lv < 20 && grid.d * (lv + 1) <= 60 &&
         (std::uint64_t{1} << (grid.d * (lv + 1))) <= static_cast<std::uint64_t>(n) &&
         side / static_cast<double>(std::uint64_t{1} << (lv + 1)) >= 1.0)
    ++lv;
  grid.levels = lv;
  grid.lo = -0.5 * side;
  grid.leaf_side = side / static_cast<double>(std::uint64_t{1} << lv);

  const std::uint64_t cpa = std::uint64_t{1} << lv;
  std::vector<std::pair<int, std::pair<std::uint64_t, std::int32_t>>> items;
  items.reserve(n);
  std::int64_t ix[8];
  for (std::int32_t v = 0; v < n; ++v) {
    for (int a = 0; a < grid.d; ++a) {
      const double x = g.pos[static_cast<std::size_t>(v) * grid.d + a];
      auto c = static_cast<std::int64_t>(std::floor((x - grid.lo) / grid.leaf_side));
      ix[a] = std::clamp<std::int64_t>(c, 0, static_cast<std::int64_t>(cpa) - 1);
    }
    items.push_back({weight_layer(g.weight[v]), {grid.encode(ix), v}});
  }
  std::sort(items.begin(), items.end());

  for (const auto& [layer, mv] : items) {
    if (grid.layer_ids.empty() || grid.layer_ids.back() != layer) {
      grid.layer_ids.push_back(layer);
      grid.layers.emplace_back();
    }
    grid.layers.back().morton.push_back(mv.first);
    grid.layers.back().vids.push_back(mv.second);
  }
  if (grid.layers.size() > 64)
    throw std::runtime_error("more than 64 weight layers present");

  grid.masks.resize(lv + 1);
  for (int l = 0; l <= lv; ++l)
    grid.masks[l].assign(std::uint64_t{1} << (grid.d * l), 0);
  for (std::size_t li = 0; li < grid.layers.size(); ++li)
    for (std::uint64_t m : grid.layers[li].morton)
      for (int l = 0; l <= lv; ++l)
        grid.masks[l][m >> (grid.d * (lv - l))] |= std::uint64_t{1} << li;

  return grid;
}

struct CellGenerator {
  GenContext& ctx;
  const CellGrid& grid;

  // gathered vertex ids of one leaf cell, all layers, in (layer, vid) order
  void leaf_vertices(std::uint64_t c, std::vector<std::int32_t>& out) const {
    out.clear();
    const std::uint64_t mask = grid.masks[grid.levels][c];
    for (std::size_t li = 0; li < grid.layers.size(); ++li) {
      if (!(mask >> li & 1)) continue;
      auto [lo, hi] = grid.range(static_cast<int>(li), grid.levels, c);
      for (std::size_t k = lo; k < hi; ++k)
        out.push_back(grid.layers[li].vids[k]);
    }
  }

  // min squared distance between cells a and b at level lvl, shrunk one part
  // in 1e12 so floating-point bucketing can never make it exceed a true pair
  // distance
  double min_sq_dist(std::uint64_t a, std::uint64_t b, int lvl) const {
    std::int64_t ia[8], ib[8];
    grid.decode(a, lvl, ia);
    grid.decode(b, lvl, ib);
    const double w = grid.cell_side(lvl);
    double sq = 0.0;
    for (int axis = 0; axis < grid.d; ++axis) {
      const auto gap = std::abs(ia[axis] - ib[axis]) - 1;
      if (gap > 0) {
        const double gd = static_cast<double>(gap) * w;
        sq += gd * gd;
      }
    }
    return sq * (1.0 - 1e-12);
  }

  void same_cell(int lvl, std::uint64_t c) const {
    if (lvl == grid.levels) {
      std::vector<std::int32_t> vs;
      leaf_vertices(c, vs);
      for (std::size_t i = 0; i < vs.size(); ++i)
        for (std::size_t j = i + 1; j < vs.size(); ++j)
          ctx.try_pair(vs[i], vs[j]);
      return;
    }
    const int kids = 1 << grid.d;
    std::uint64_t cc[1 << 6];
    int cnt = 0;
    for (int t = 0; t < kids; ++t) {
      const std::uint64_t child = (c << grid.d) | static_cast<std::uint64_t>(t);
      if (grid.masks[lvl + 1][child]) cc[cnt++] = child;
    }
    for (int i = 0; i < cnt; ++i) {
      same_cell(lvl + 1, cc[i]);
      for (int j = i + 1; j < cnt; ++j) cell_pair(lvl + 1, cc[i], cc[j]);
    }
  }

  void cell_pair(int lvl, std::uint64_t a, std::uint64_t b) const {
    const double sq = min_sq_dist(a, b, lvl);
    if (sq > 0.0) {
      separated_pair(lvl, a, b, sq);
      return;
    }
    if (lvl == grid.levels) {
      std::vector<std::int32_t> va, vb;
      leaf_vertices(a, va);
      leaf_vertices(b, vb);
      for (std::int32_t x : va)
        for (std::int32_t y : vb) ctx.try_pair(x, y);
      return;
    }
    const int kids = 1 << grid.d;
    for (int s = 0; s < kids; ++s) {
      const std::uint64_t ca = (a << grid.d) | static_cast<std::uint64_t>(s);
      if (!grid.masks[lvl + 1][ca]) continue;
      for (int t = 0; t < kids; ++t) {
        const std::uint64_t cb = (b << grid.d) | static_cast<std::uint64_t>(t);
        if (grid.masks[lvl + 1][cb]) cell_pair(lvl + 1, ca, cb);
      }
    }
  }

  // one class = (level, cell pair, layer pair); candidates are Bernoulli(p_bar)
  // per cross pair, drawn by geometric skips from a class-keyed stream
  void separated_pair(int lvl, std::uint64_t a, std::uint64_t b, double sq) const {
    const std::uint64_t ma = grid.masks[lvl][a];
    const std::uint64_t mb = grid.masks[lvl][b];
    for (std::size_t li = 0; li < grid.layers.size(); ++li) {
      if (!(ma >> li & 1)) continue;
      auto [alo, ahi] = grid.range(static_cast<int>(li), lvl, a);
      const std::uint64_t na = ahi - alo;
      for (std::size_t lj = 0; lj < grid.layers.size(); ++lj) {
        if (!(mb >> lj & 1)) continue;
        const double wmax = std::exp2(grid.layer_ids[li] + grid.layer_ids[lj] + 2);
        double p_bar = kernel_upper(sq, wmax, ctx.par);
        if (p_bar <= 0.0) continue;
        if (p_bar > 1.0) p_bar = 1.0;
        auto [blo, bhi] = grid.range(static_cast<int>(lj), lvl, b);
        const std::uint64_t nb = bhi - blo;
        const std::uint64_t count = na * nb;
        const std::int32_t* va = grid.layers[li].vids.data() + alo;
        const std::int32_t* vb = grid.layers[lj].vids.data() + blo;

        if (p_bar >= 1.0) {
          for (std::uint64_t k = 0; k < count; ++k)
            ctx.try_pair(va[k / nb], vb[k % nb]);
          continue;
        }
        Rng stream(derive_key(ctx.seed, kTagClass, static_cast<std::uint64_t>(lvl),
                              a, b,
                              (static_cast<std::uint64_t>(li) << 32) |
                                  static_cast<std::uint64_t>(lj)));
        const double log1mp = std::log1p(-p_bar);
        std::uint64_t idx = 0;
        while (true) {
          const double gap = std::floor(std::log(stream.uniform_pos()) / log1mp);
          if (gap >= static_cast<double>(count - idx)) break;
          idx += static_cast<std::uint64_t>(gap);
          if (idx >= count) break;
          ctx.try_candidate(va[idx / nb], vb[idx % nb], p_bar);
          ++idx;
        }
      }
    }
  }
};

// Naive pass over a lattice: integer squared distances allow a log table, and
// the kernel is evaluated as exp(alpha * log ratio). Agrees with
// connection_prob_sq to the last ulp or so, which is far below any
// statistically resolvable difference.
void naive_lattice(GenContext& ctx) {
  SpatialGraph& g = ctx.g;
  const int n = g.n();
  const int d = g.dim();
  const ModelParams& par = ctx.par;
  const double side = g.domain.side();
  const auto max_sq = static_cast<std::size_t>(d * side * side) + 1;
  if (max_sq > (std::size_t{1} << 24) || is_infinite(par.alpha)) {
    for (std::int32_t i = 0; i < n; ++i)
      for (std::int32_t j = i + 1; j < n; ++j) ctx.try_pair(i, j);
    return;
  }
  std::vector<double> log_rd(max_sq, 0.0);
  for (std::size_t s = 1; s < max_sq; ++s)
    log_rd[s] = 0.5 * d * std::log(static_cast<double>(s));
  std::vector<double> lw(n);
  for (int i = 0; i < n; ++i) lw[i] = std::log(g.weight[i]);
  const double log_cl = std::log(par.c_lower);

  for (std::int32_t i = 0; i < n; ++i) {
    const double* pi = g.pos.data() + static_cast<std::size_t>(i) * d;
    for (std::int32_t j = i + 1; j < n; ++j) {
      const double* pj = g.pos.data() + static_cast<std::size_t>(j) * d;
      double sqd = 0.0;
      for (int k = 0; k < d; ++k) {
        const double diff = pi[k] - pj[k];
        sqd += diff * diff;
      }
      const auto s = static_cast<std::size_t>(sqd + 0.5);
      const double log_ratio = lw[i] + lw[j] - log_rd[s];
      const double u = key_uniform(derive_key(ctx.seed, kTagPair, i, j));
      const double log_h = log_cl + (log_ratio < 0.0 ? par.alpha * log_ratio : 0.0);
      if (std::log(u) < log_h) ctx.emit(i, j);
    }
  }
}

double estimate_expected_edges(const SpatialGraph& g, std::uint64_t seed) {
  const int n = g.n();
  if (n < 2) return 0.0;
  Rng rng(derive_key(seed, kTagGeneric, 0x45444745));  // edge-budget stream
  const int k = 2048;
  double sum = 0.0;
  for (int t = 0; t < k; ++t) {
    const auto i = static_cast<std::int32_t>(rng.below(static_cast<std::uint64_t>(n)));
    auto j = static_cast<std::int32_t>(rng.below(static_cast<std::uint64_t>(n - 1)));
    if (j >= i) ++j;
    sum += connection_prob_sq(g.sq_dist_between(i, j), g.weight[i], g.weight[j],
                              g.params);
  }
  return (sum / k) * 0.5 * static_cast<double>(n) * static_cast<double>(n - 1);
}

// the lattice index of an integer point, row-major with the last axis fastest
std::int64_t lattice_index(const Domain& dom, const Point& p) {
  const auto half = static_cast<std::int64_t>(dom.half_side);
  const std::int64_t w = 2 * half + 1;
  std::int64_t idx = 0;
  for (int a = 0; a < dom.d; ++a) {
    const double c = p[a];
    const auto ci = static_cast<std::int64_t>(std::llround(c));
    if (static_cast<double>(ci) != c || ci < -half || ci > half)
      throw std::invalid_argument("root position is not a lattice point of the domain");
    idx = idx * w + (ci + half);
  }
  return idx;
}

}  // namespace

SpatialGraph generate_graph(const Domain& domain, const ModelParams& par,
                            const LDistributionSpec& l_spec, std::uint64_t seed,
                            const GenerateOptions& opt) {
  require_valid(par);
  l_spec.validate();
  // beta describes F_L near 0; the two specifications must agree.
  if (l_spec.kind == LKind::PowerNearZero && !is_infinite(l_spec.beta) &&
      l_spec.beta != par.beta)
    throw std::invalid_argument("beta and the power-law L spec exponent disagree");
  if (is_infinite(par.beta) != l_spec.no_mass_near_zero())
    throw std::invalid_argument(
        "beta = INFINITE requires (and is required by) an L distribution with no "
        "mass near zero");

  SpatialGraph g;
  g.domain = domain;
  g.params = par;
  g.l_spec = l_spec;
  g.seed = seed;
  g.root_conditioning = opt.root;

  std::vector<Point> pts = domain.kind == DomainKind::LatticeBox
                               ? lattice_points(domain)
                               : sample_ppp(domain, opt.intensity, seed);
  const auto n_domain = static_cast<std::int64_t>(pts.size());
  g.pos.reserve(pts.size() * domain.d);
  for (const auto& p : pts)
    g.pos.insert(g.pos.end(), p.begin(), p.end());
  g.weight.resize(pts.size());
  for (std::int64_t v = 0; v < n_domain; ++v)
    g.weight[v] = sample_weight(par.tau, key_uniform(derive_key(seed, kTagWeight, v)));

  // Root conditioning: on a lattice the requested points already exist; on a
  // continuum domain the Palm version adds them with independent weights.
  std::vector<Point> root_pts;
  if (opt.root == RootConditioning::RootAtOrigin ||
      opt.root == RootConditioning::TwoRoots)
    root_pts.emplace_back(domain.d, 0.0);
  if (opt.root == RootConditioning::TwoRoots) {
    if (static_cast<int>(opt.second_root.size()) != domain.d)
      throw std::invalid_argument("second root must have the domain dimension");
    if (!domain.contains(opt.second_root))
      throw std::invalid_argument("second root lies outside the domain");
    root_pts.push_back(opt.second_root);
  }
  for (std::size_t r = 0; r < root_pts.size(); ++r) {
    if (domain.kind == DomainKind::LatticeBox) {
      g.roots.push_back(static_cast<std::int32_t>(lattice_index(domain, root_pts[r])));
    } else {
      g.pos.insert(g.pos.end(), root_pts[r].begin(), root_pts[r].end());
      g.weight.push_back(sample_weight(
          par.tau, key_uniform(derive_key(seed, kTagRootWeight, r))));
      g.roots.push_back(g.n() - 1);
    }
  }
  g.orig_id.resize(g.weight.size());
  for (std::size_t v = 0; v < g.orig_id.size(); ++v)
    g.orig_id[v] = static_cast<std::int64_t>(v);
  g.adj.assign(g.weight.size(), {});

  const double est = estimate_expected_edges(g, seed);
  if (est > opt.max_expected_edges)
    throw std::runtime_error("expected edge count about " + fmt_approx(est) +
                             " exceeds the budget of " +
                             fmt_approx(opt.max_expected_edges) +
                             "; shrink the domain or adjust parameters");
  g.edges.reserve(static_cast<std::size_t>(std::min(est * 1.3 + 64.0, 4e9)));

  GenContext ctx{par, l_spec, seed, g};
  if (opt.mode == GenMode::Naive) {
    if (domain.kind == DomainKind::LatticeBox) {
      naive_lattice(ctx);
    } else {
      const int n = g.n();
      for (std::int32_t i = 0; i < n; ++i)
        for (std::int32_t j = i + 1; j < n; ++j) ctx.try_pair(i, j);
    }
  } else {
    const CellGrid grid = build_grid(g);
    if (g.n() >= 2) CellGenerator{ctx, grid}.same_cell(0, 0);
  }

  g.rebuild_adjacency();
  for (std::size_t e = 1; e < g.edges.size(); ++e)
    if (g.edges[e].u == g.edges[e - 1].u && g.edges[e].v == g.edges[e - 1].v)
      throw std::logic_error("duplicate edge produced; cell partition violated");
  return g;
}

void recompute_costs(SpatialGraph& graph, double mu) {
  graph.params.mu = mu;
  for (auto& e : graph.edges)
    e.cost = edge_cost(e.l_value, graph.weight[e.u], graph.weight[e.v], mu);
}

SpatialGraph subgraph_GM(const SpatialGraph& graph, double M, double mu) {
  if (!(M > 0.0)) throw std::invalid_argument("M must be positive");
  const double cost_cap = std::pow(M, 3.0 * mu);

  SpatialGraph sub;
  sub.domain = graph.domain;
  sub.params = graph.params;
  sub.l_spec = graph.l_spec;
  sub.seed = graph.seed;
  sub.root_conditioning = RootConditioning::None;

  const int d = graph.dim();
  std::vector<std::int32_t> remap(graph.n(), -1);
  for (std::int32_t v = 0; v < graph.n(); ++v) {
    if (graph.weight[v] < M || graph.weight[v] > 2.0 * M) continue;
    remap[v] = static_cast<std::int32_t>(sub.weight.size());
    sub.weight.push_back(graph.weight[v]);
    sub.orig_id.push_back(graph.orig_id[v]);
    sub.pos.insert(sub.pos.end(), graph.pos.begin() + static_cast<std::size_t>(v) * d,
                   graph.pos.begin() + static_cast<std::size_t>(v + 1) * d);
  }
  sub.adj.assign(sub.weight.size(), {});
  for (const auto& e : graph.edges) {
    if (remap[e.u] < 0 || remap[e.v] < 0 || e.cost > cost_cap) continue;
    sub.edges.push_back(EdgeRecord{remap[e.u], remap[e.v], e.l_value, e.cost});
  }
  for (std::int32_t r : graph.roots)
    if (remap[r] >= 0) sub.roots.push_back(remap[r]);
  sub.rebuild_adjacency();
  return sub;
}

}  // namespace fpp
