#include "fpp/io.hpp"

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "fpp/common.hpp"

namespace fpp {

namespace {

const char* to_token(LKind k) {
  switch (k) {
    case LKind::PowerNearZero: return "power";
    case LKind::Constant: return "constant";
    case LKind::ExplicitCDF: return "cdf";
  }
  return "power";
}

const char* to_token(RootConditioning r) {
  switch (r) {
    case RootConditioning::None: return "none";
    case RootConditioning::RootAtOrigin: return "origin";
    case RootConditioning::TwoRoots: return "two";
  }
  return "none";
}

const char* to_token(DomainKind k) {
  return k == DomainKind::LatticeBox ? "lattice" : "continuum";
}

double parse_double(const std::string& tok) {
  char* end = nullptr;
  const double v = std::strtod(tok.c_str(), &end);
  if (end == tok.c_str() || *end != '\0')
    throw std::runtime_error("graph file: bad number '" + tok + "'");
  return v;
}

std::int64_t parse_int(const std::string& tok) {
  char* end = nullptr;
  const long long v = std::strtoll(tok.c_str(), &end, 10);
  if (end == tok.c_str() || *end != '\0')
    throw std::runtime_error("graph file: bad integer '" + tok + "'");
  return v;
}

}  // namespace

void write_graph(std::ostream& os, const SpatialGraph& g) {
  os << "fpp-graph 1\n";
  const ModelParams& p = g.params;
  os << "d " << p.d << "\n";
  os << "tau " << fmt_g17(p.tau) << "\n";
  os << "alpha " << fmt_g17(p.alpha) << "\n";
  os << "mu " << fmt_g17(p.mu) << "\n";
  os << "beta " << fmt_g17(p.beta) << "\n";
  os << "c_lower " << fmt_g17(p.c_lower) << "\n";
  os << "c_upper " << fmt_g17(p.c_upper) << "\n";
  os << "c1 " << fmt_g17(p.c1) << "\n";
  os << "c2 " << fmt_g17(p.c2) << "\n";
  os << "t0 " << fmt_g17(p.t0) << "\n";
  if (p.c_prime_set) os << "c_prime " << fmt_g17(p.c_prime) << "\n";
  os << "l_kind " << to_token(g.l_spec.kind) << "\n";
  os << "l_beta " << fmt_g17(g.l_spec.beta) << "\n";
  os << "l_cap " << fmt_g17(g.l_spec.t0_cap) << "\n";
  if (g.l_spec.kind == LKind::ExplicitCDF) {
    os << "l_knots " << g.l_spec.cdf_knots.size();
    for (const auto& [t, f] : g.l_spec.cdf_knots)
      os << " " << fmt_g17(t) << " " << fmt_g17(f);
    os << "\n";
  }
  os << "seed " << g.seed << "\n";
  os << "domain " << to_token(g.domain.kind) << "\n";
  os << "half_side " << fmt_g17(g.domain.half_side) << "\n";
  os << "torus " << (g.domain.torus_wrap ? 1 : 0) << "\n";
  os << "root " << to_token(g.root_conditioning) << "\n";
  os << "roots " << g.roots.size();
  for (std::int32_t r : g.roots) os << " " << r;
  os << "\n";
  os << "vertices " << g.n() << "\n";
  os << "edges " << g.edges.size() << "\n";

  const int d = g.dim();
  for (int v = 0; v < g.n(); ++v) {
    os << "V " << g.orig_id[v];
    for (int a = 0; a < d; ++a)
      os << " " << fmt_g17(g.pos[static_cast<std::size_t>(v) * d + a]);
    os << " " << fmt_g17(g.weight[v]) << "\n";
  }
  for (const auto& e : g.edges)
    os << "E " << e.u << " " << e.v << " " << fmt_g17(e.l_value) << " "
       << fmt_g17(e.cost) << "\n";
}

SpatialGraph read_graph(std::istream& is) {
  std::string tok;
  std::uint64_t version = 0;
  if (!(is >> tok) || tok != "fpp-graph" || !(is >> version) || version != 1)
    throw std::runtime_error("graph file: missing 'fpp-graph 1' signature");

  SpatialGraph g;
  ModelParams& p = g.params;
  std::int64_t n = -1, m = -1;

  auto next = [&is](std::string& out) {
    if (!(is >> out)) throw std::runtime_error("graph file: truncated");
  };

  while (n < 0 || m < 0) {
    next(tok);
    std::string val;
    if (tok == "d") { next(val); p.d = static_cast<int>(parse_int(val)); }
    else if (tok == "tau") { next(val); p.tau = parse_double(val); }
    else if (tok == "alpha") { next(val); p.alpha = parse_double(val); }
    else if (tok == "mu") { next(val); p.mu = parse_double(val); }
    else if (tok == "beta") { next(val); p.beta = parse_double(val); }
    else if (tok == "c_lower") { next(val); p.c_lower = parse_double(val); }
    else if (tok == "c_upper") { next(val); p.c_upper = parse_double(val); }
    else if (tok == "c1") { next(val); p.c1 = parse_double(val); }
    else if (tok == "c2") { next(val); p.c2 = parse_double(val); }
    else if (tok == "t0") { next(val); p.t0 = parse_double(val); }
    else if (tok == "c_prime") {
      next(val);
      p.c_prime = parse_double(val);
      p.c_prime_set = true;
    } else if (tok == "l_kind") {
      next(val);
      if (val == "power") g.l_spec.kind = LKind::PowerNearZero;
      else if (val == "constant") g.l_spec.kind = LKind::Constant;
      else if (val == "cdf") g.l_spec.kind = LKind::ExplicitCDF;
      else throw std::runtime_error("graph file: unknown l_kind '" + val + "'");
    } else if (tok == "l_beta") { next(val); g.l_spec.beta = parse_double(val); }
    else if (tok == "l_cap") { next(val); g.l_spec.t0_cap = parse_double(val); }
    else if (tok == "l_knots") {
      next(val);
      const std::int64_t k = parse_int(val);
      g.l_spec.cdf_knots.resize(k);
      for (auto& [t, f] : g.l_spec.cdf_knots) {
        next(val); t = parse_double(val);
        next(val); f = parse_double(val);
      }
    } else if (tok == "seed") {
      next(val);
      g.seed = static_cast<std::uint64_t>(std::strtoull(val.c_str(), nullptr, 10));
    } else if (tok == "domain") {
      next(val);
      if (val == "lattice") g.domain.kind = DomainKind::LatticeBox;
      else if (val == "continuum") g.domain.kind = DomainKind::ContinuumBox;
      else throw std::runtime_error("graph file: unknown domain '" + val + "'");
    } else if (tok == "half_side") { next(val); g.domain.half_side = parse_double(val); }
    else if (tok == "torus") { next(val); g.domain.torus_wrap = parse_int(val) != 0; }
    else if (tok == "root") {
      next(val);
      if (val == "none") g.root_conditioning = RootConditioning::None;
      else if (val == "origin") g.root_conditioning = RootConditioning::RootAtOrigin;
      else if (val == "two") g.root_conditioning = RootConditioning::TwoRoots;
      else throw std::runtime_error("graph file: unknown root mode '" + val + "'");
    } else if (tok == "roots") {
      next(val);
      const std::int64_t k = parse_int(val);
      g.roots.resize(k);
      for (auto& r : g.roots) { next(val); r = static_cast<std::int32_t>(parse_int(val)); }
    } else if (tok == "vertices") { next(val); n = parse_int(val); }
    else if (tok == "edges") { next(val); m = parse_int(val); }
    else throw std::runtime_error("graph file: unknown header key '" + tok + "'");
  }
  g.domain.d = p.d;

  const int d = p.d;
  g.pos.reserve(static_cast<std::size_t>(n) * d);
  g.weight.reserve(n);
  g.orig_id.reserve(n);
  std::string val;
  for (std::int64_t v = 0; v < n; ++v) {
    next(tok);
    if (tok != "V") throw std::runtime_error("graph file: expected V record");
    next(val); g.orig_id.push_back(parse_int(val));
    for (int a = 0; a < d; ++a) { next(val); g.pos.push_back(parse_double(val)); }
    next(val); g.weight.push_back(parse_double(val));
  }
  g.edges.reserve(m);
  for (std::int64_t e = 0; e < m; ++e) {
    next(tok);
    if (tok != "E") throw std::runtime_error("graph file: expected E record");
    EdgeRecord rec;
    next(val); rec.u = static_cast<std::int32_t>(parse_int(val));
    next(val); rec.v = static_cast<std::int32_t>(parse_int(val));
    next(val); rec.l_value = parse_double(val);
    next(val); rec.cost = parse_double(val);
    if (rec.u < 0 || rec.v < 0 || rec.u >= n || rec.v >= n)
      throw std::runtime_error("graph file: edge endpoint out of range");
    g.edges.push_back(rec);
  }
  g.adj.assign(g.weight.size(), {});
  for (std::int32_t i = 0; i < static_cast<std::int32_t>(g.edges.size()); ++i) {
    g.adj[g.edges[i].u].emplace_back(g.edges[i].v, i);
    g.adj[g.edges[i].v].emplace_back(g.edges[i].u, i);
  }
  for (auto& a : g.adj) std::sort(a.begin(), a.end());
  return g;
}

void write_graph_file(const std::string& path, const SpatialGraph& g) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot open '" + path + "' for writing");
  write_graph(os, g);
  if (!os.flush()) throw std::runtime_error("write to '" + path + "' failed");
}

SpatialGraph read_graph_file(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot open '" + path + "' for reading");
  return read_graph(is);
}

}  // namespace fpp
