#include "fpp/census.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

#include "fpp/common.hpp"
#include "fpp/rng.hpp"

namespace fpp {

double CensusQuery::cost_cap(int d) const { return std::pow(N, a * d); }

void CensusQuery::validate() const {
  if (!(N > 0.0) || !(A > N)) throw std::invalid_argument("census needs A > N > 0");
  if (!(a > 0.0)) throw std::invalid_argument("census exponent a must be positive");
  if (!(epsilon > 0.0)) throw std::invalid_argument("census epsilon must be positive");
}

std::int64_t count_long_cheap_edges(const SpatialGraph& g, const CensusQuery& q) {
  q.validate();
  const double half = 0.5 * q.A;
  if (half > g.domain.half_side * (1.0 + 1e-12) + 1e-9)
    throw std::invalid_argument("census box exceeds the graph domain");
  const int d = g.dim();
  const double cap = q.cost_cap(d);
  const double min_sq = q.N * q.N;

  const auto in_box = [&](std::int32_t v) {
    const double* p = g.pos.data() + static_cast<std::size_t>(v) * d;
    for (int k = 0; k < d; ++k)
      if (std::abs(p[k]) > half) return false;
    return true;
  };

  std::int64_t count = 0;
  for (const auto& e : g.edges)
    if (e.cost <= cap && g.sq_dist_between(e.u, e.v) >= min_sq && in_box(e.u) &&
        in_box(e.v))
      ++count;
  return count;
}

namespace {

// ---- quadrature ----

template <class F>
double adapt_rec(const F& f, double a, double fa, double b, double fb, double m,
                 double fm, double whole, double eps, int depth, bool& ok) {
  const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
  const double flm = f(lm), frm = f(rm);
  const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  const double delta = left + right - whole;
  if (std::abs(delta) <= 15.0 * eps || b - a < 1e-14 * (std::abs(a) + 1.0))
    return left + right + delta / 15.0;
  if (depth <= 0) {
    ok = false;
    return left + right + delta / 15.0;
  }
  return adapt_rec(f, a, fa, m, fm, lm, flm, left, 0.5 * eps, depth - 1, ok) +
         adapt_rec(f, m, fm, b, fb, rm, frm, right, 0.5 * eps, depth - 1, ok);
}

template <class F>
double adaptive_simpson(const F& f, double a, double b, double eps, bool& ok) {
  if (!(b > a)) return 0.0;
  const double m = 0.5 * (a + b);
  const double fa = f(a), fb = f(b), fm = f(m);
  const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
  return adapt_rec(f, a, fa, b, fb, m, fm, whole, eps, 40, ok);
}

// split [a, b] at interior kinks, spend a shared absolute tolerance
template <class F>
double integrate_with_kinks(const F& f, double a, double b,
                            std::vector<double> kinks, double rel_tol, bool& ok) {
  if (!(b > a)) return 0.0;
  kinks.erase(std::remove_if(kinks.begin(), kinks.end(),
                             [&](double x) {
                               return !(x > a) || !(x < b) || !std::isfinite(x);
                             }),
              kinks.end());
  std::sort(kinks.begin(), kinks.end());
  kinks.insert(kinks.begin(), a);
  kinks.push_back(b);

  double rough = 0.0;
  for (std::size_t s = 1; s < kinks.size(); ++s) {
    const double lo = kinks[s - 1], hi = kinks[s], mid = 0.5 * (lo + hi);
    rough += std::abs((hi - lo) / 6.0 * (f(lo) + 4.0 * f(mid) + f(hi)));
  }
  const double eps =
      std::max(rough, 1e-300) * rel_tol / static_cast<double>(kinks.size() - 1);

  double total = 0.0;
  for (std::size_t s = 1; s < kinks.size(); ++s)
    total += adaptive_simpson(f, kinks[s - 1], kinks[s], eps, ok);
  return total;
}

// ---- the Lambda integrand over the weight product ----

struct LambdaTerms {
  double R = 1.0;    // r^d
  double cap = 1.0;  // N^{ad}
  const ModelParams* par = nullptr;
  const LDistributionSpec* l = nullptr;

  double operator()(double z) const {
    double kern;
    if (is_infinite(par->alpha)) {
      kern = z >= par->c_prime * R ? 1.0 : 0.0;
    } else {
      const double x = z / R;
      kern = x >= 1.0 ? 1.0 : std::pow(x, par->alpha);
    }
    if (kern <= 0.0) return 0.0;
    const double t = par->mu == 0.0 ? cap : cap * std::pow(z, -par->mu);
    return kern * l->cdf(t);
  }

  // z values where the integrand has kinks: the kernel cap and every point
  // where F_L(cap z^-mu) crosses a CDF knot
  std::vector<double> kinks() const {
    std::vector<double> k;
    k.push_back(is_infinite(par->alpha) ? par->c_prime * R : R);
    if (par->mu > 0.0) {
      const auto crossing = [&](double t) {
        return t > 0.0 ? std::pow(cap / t, 1.0 / par->mu)
                       : std::numeric_limits<double>::infinity();
      };
      switch (l->kind) {
        case LKind::PowerNearZero:
          k.push_back(crossing(l->t0_cap));
          break;
        case LKind::Constant:
          k.push_back(crossing(1.0));
          break;
        case LKind::ExplicitCDF:
          for (const auto& knot : l->cdf_knots) k.push_back(crossing(knot.first));
          break;
      }
    }
    return k;
  }
};

double rd_power(double r, int d) {
  switch (d) {
    case 1: return r;
    case 2: return r * r;
    case 3: return r * r * r;
    default: return std::pow(r, d);
  }
}

LambdaTerms make_terms(double r, const CensusQuery& q, const ModelParams& par,
                       const LDistributionSpec& l) {
  return LambdaTerms{rd_power(r, par.d), q.cost_cap(par.d), &par, &l};
}

double lambda_quad_impl(double r, const CensusQuery& q, const ModelParams& par,
                        const LDistributionSpec& l, bool degenerate, bool& ok) {
  const LambdaTerms g = make_terms(r, q, par, l);
  if (degenerate) return g(1.0);
  const double pareto = par.tau - 1.0;
  // integrate over t = ln z against the exact product density
  const auto integrand = [&](double t) {
    const double z = std::exp(t);
    return g(z) * pareto * pareto * std::exp(-pareto * t) * t;
  };
  std::vector<double> kinks;
  double t_max = 0.0;
  for (double z : g.kinks())
    if (std::isfinite(z) && z > 1.0) {
      kinks.push_back(std::log(z));
      t_max = std::max(t_max, std::log(z));
    }
  const double t_end = t_max + 60.0 / std::min(pareto, 1.0);
  return integrate_with_kinks(integrand, 0.0, t_end, kinks, 1e-10, ok);
}

// ---- stratified Z sample shared across nodes (common random numbers) ----

struct ZSample {
  std::vector<std::vector<double>> by_rep;

  static ZSample make(const ModelParams& par, std::int64_t samples,
                      std::uint64_t seed, bool degenerate, int reps) {
    ZSample zs;
    zs.by_rep.resize(reps);
    if (degenerate) {
      for (auto& v : zs.by_rep) v.assign(1, 1.0);
      return zs;
    }
    const auto strata = static_cast<std::int64_t>(std::ceil(
        std::sqrt(static_cast<double>(std::max<std::int64_t>(samples, reps)) /
                  reps)));
    for (int b = 0; b < reps; ++b) {
      Rng rng(derive_key(seed, kTagExperiment, 0x5a53414dULL, b));
      auto& v = zs.by_rep[b];
      v.reserve(strata * strata);
      for (std::int64_t i = 0; i < strata; ++i)
        for (std::int64_t j = 0; j < strata; ++j) {
          const double u1 = (i + rng.uniform()) / strata;
          const double u2 = (j + rng.uniform()) / strata;
          v.push_back(sample_weight(par.tau, u1) * sample_weight(par.tau, u2));
        }
    }
    return zs;
  }
};

// Simpson panels on a log-spaced grid; values of Lambda estimated per
// replicate at panel edges and midpoints.
struct PanelIntegrator {
  std::vector<double> edges;  // concatenated piece boundaries, ascending

  static PanelIntegrator log_spaced(const std::vector<double>& bounds,
                                    int panels_per_piece) {
    PanelIntegrator p;
    for (std::size_t piece = 1; piece < bounds.size(); ++piece) {
      const double lo = bounds[piece - 1], hi = bounds[piece];
      if (!(hi > lo)) continue;
      const int k = panels_per_piece;
      for (int i = (p.edges.empty() ? 0 : 1); i <= k; ++i)
        p.edges.push_back(lo * std::pow(hi / lo, static_cast<double>(i) / k));
    }
    if (!p.edges.empty()) p.edges.front() = bounds.front();
    return p;
  }

  // integral of weight(r) * Lambda(r) per replicate; returns mean and stderr
  template <class Weight>
  MeanStderr integrate(const Weight& weight, const CensusQuery& q,
                       const ModelParams& par, const LDistributionSpec& l,
                       const ZSample& zs) const {
    const int reps = static_cast<int>(zs.by_rep.size());
    if (edges.size() < 2) return {0.0, 0.0};
    std::vector<double> acc(reps, 0.0);
    std::vector<double> lam(reps);

    const auto lambda_at = [&](double r, std::vector<double>& out) {
      const LambdaTerms g = make_terms(r, q, par, l);
      for (int b = 0; b < reps; ++b) {
        double sum = 0.0;
        for (double z : zs.by_rep[b]) sum += g(z);
        out[b] = sum / static_cast<double>(zs.by_rep[b].size());
      }
    };

    std::vector<double> lam_lo(reps), lam_mid(reps), lam_hi(reps);
    lambda_at(edges[0], lam_hi);
    for (std::size_t p = 1; p < edges.size(); ++p) {
      const double lo = edges[p - 1], hi = edges[p], mid = 0.5 * (lo + hi);
      lam_lo.swap(lam_hi);
      lambda_at(mid, lam_mid);
      lambda_at(hi, lam_hi);
      const double wlo = weight(lo), wmid = weight(mid), whi = weight(hi);
      for (int b = 0; b < reps; ++b)
        acc[b] += (hi - lo) / 6.0 *
                  (wlo * lam_lo[b] + 4.0 * wmid * lam_mid[b] + whi * lam_hi[b]);
    }
    double mean = 0.0;
    for (double x : acc) mean += x;
    mean /= reps;
    double var = 0.0;
    for (double x : acc) var += (x - mean) * (x - mean);
    var = reps > 1 ? var / (reps - 1) : 0.0;
    return {mean, std::sqrt(var / reps)};
  }

  // same Simpson rule with the deterministic quadrature values of Lambda, so
  // the difference to integrate() is pure Monte Carlo noise
  template <class Weight>
  double integrate_quad(const Weight& weight, const CensusQuery& q,
                        const ModelParams& par, const LDistributionSpec& l,
                        bool degenerate, bool& ok) const {
    const auto f = [&](double r) {
      return weight(r) * lambda_quad_impl(r, q, par, l, degenerate, ok);
    };
    double total = 0.0;
    double f_hi = f(edges.empty() ? 0.0 : edges[0]);
    for (std::size_t p = 1; p < edges.size(); ++p) {
      const double lo = edges[p - 1], hi = edges[p];
      const double f_lo = f_hi, f_mid = f(0.5 * (lo + hi));
      f_hi = f(hi);
      total += (hi - lo) / 6.0 * (f_lo + 4.0 * f_mid + f_hi);
    }
    return total;
  }
};

double closed_form_bound(const CensusQuery& q, const ModelParams& par) {
  const double d = par.d;
  const auto n_pow = [&](double expo) { return std::pow(q.N, -d * expo); };
  double sum = is_infinite(par.alpha) ? 0.0 : n_pow(par.alpha - 1.0);
  if (q.a >= par.mu) {
    sum += n_pow(par.tau - 2.0);
  } else {
    if (!is_infinite(par.alpha))
      sum += n_pow(par.alpha - 1.0 -
                   (q.a / par.mu) * (par.alpha - (par.tau - 1.0)));
    if (!is_infinite(par.beta))
      sum += n_pow(par.tau - 2.0 + (par.mu - q.a) * par.beta);
  }
  return std::pow(q.A, d) * std::pow(q.N, q.epsilon) * sum;
}

}  // namespace

MeanStderr lambda_integrand_mc(double r, const CensusQuery& q,
                               const ModelParams& par,
                               const LDistributionSpec& l_spec,
                               std::int64_t samples, std::uint64_t seed,
                               bool degenerate_weights) {
  require_valid(par);
  const LambdaTerms g = make_terms(r, q, par, l_spec);
  if (degenerate_weights) return {g(1.0), 0.0};
  if (samples < 1) throw std::invalid_argument("lambda mc needs samples >= 1");
  Rng rng(derive_key(seed, kTagExperiment, 0x4c414dULL));
  double sum = 0.0, sumsq = 0.0;
  for (std::int64_t s = 0; s < samples; ++s) {
    const double z =
        sample_weight(par.tau, rng.uniform()) * sample_weight(par.tau, rng.uniform());
    const double v = g(z);
    sum += v;
    sumsq += v * v;
  }
  const double mean = sum / samples;
  const double var =
      samples > 1 ? std::max(0.0, (sumsq - samples * mean * mean) / (samples - 1))
                  : 0.0;
  return {mean, std::sqrt(var / samples)};
}

double lambda_quadrature(double r, const CensusQuery& q, const ModelParams& par,
                         const LDistributionSpec& l_spec, bool degenerate_weights) {
  require_valid(par);
  bool ok = true;
  return lambda_quad_impl(r, q, par, l_spec, degenerate_weights, ok);
}

double box_pair_distance_density(double r, double side, int d) {
  if (!(side > 0.0)) throw std::invalid_argument("box side must be positive");
  const double s = r / side;
  if (s < 0.0) return 0.0;
  switch (d) {
    case 1:
      return s <= 1.0 ? 2.0 * (1.0 - s) / side : 0.0;
    case 2: {
      // square line picking density
      constexpr double pi = std::numbers::pi;
      if (s <= 1.0) return 2.0 * s * (s * s - 4.0 * s + pi) / side;
      if (s * s <= 2.0) {
        const double b = std::sqrt(s * s - 1.0);
        return 2.0 * s *
               (4.0 * b - (s * s + 2.0 - pi) - 4.0 * std::atan(b)) / side;
      }
      return 0.0;
    }
    default:
      throw std::invalid_argument(
          "pair-distance density implemented for d = 1 and d = 2 only");
  }
}

CensusEstimate expected_census(const CensusQuery& q, const ModelParams& par,
                               const LDistributionSpec& l_spec,
                               std::int64_t samples, std::uint64_t seed,
                               bool degenerate_weights, double intensity) {
  require_valid(par);
  q.validate();
  const int d = par.d;
  const double scale = intensity * intensity;
  constexpr int kReps = 20;

  CensusEstimate est;
  est.closed_form_bound = scale * closed_form_bound(q, par);

  const ZSample zs =
      ZSample::make(par, samples, seed, degenerate_weights, kReps);

  // bound-shaped radial integral over [N, dA]
  const double r_hi = static_cast<double>(d) * q.A;
  const auto radial_weight = [&](double r) {
    return std::pow(q.A, d) * rd_power(r, d) / r;
  };
  const auto radial_panels = PanelIntegrator::log_spaced({q.N, r_hi}, 96);
  const auto radial = radial_panels.integrate(radial_weight, q, par, l_spec, zs);
  est.radial_integral = scale * radial.mean;
  est.radial_stderr = scale * radial.se;
  bool ok = true;
  est.radial_quadrature =
      scale *
      radial_panels.integrate_quad(radial_weight, q, par, l_spec,
                                   degenerate_weights, ok);

  // exact pair geometry needs the closed-form distance density
  if (d <= 2) {
    const double diag = q.A * std::sqrt(static_cast<double>(d));
    const double half_pairs = 0.5 * std::pow(q.A, 2 * d) * par.c_lower;
    const auto pair_weight = [&](double r) {
      return half_pairs * box_pair_distance_density(r, q.A, d);
    };
    std::vector<double> bounds{q.N};
    if (d == 2 && q.A > q.N) bounds.push_back(q.A);
    bounds.push_back(diag);
    const auto pair_panels = PanelIntegrator::log_spaced(bounds, 64);
    const auto pair = pair_panels.integrate(pair_weight, q, par, l_spec, zs);
    est.mc_expectation = scale * pair.mean;
    est.mc_stderr = scale * pair.se;
    est.quadrature_expectation =
        scale *
        pair_panels.integrate_quad(pair_weight, q, par, l_spec,
                                   degenerate_weights, ok);
  } else {
    est.mc_expectation = est.mc_stderr = est.quadrature_expectation =
        std::numeric_limits<double>::quiet_NaN();
  }
  est.converged = ok;
  return est;
}

CensusTable census_experiment(const ModelParams& par,
                              const LDistributionSpec& l_spec, double A,
                              const std::vector<double>& N_grid, double a,
                              double epsilon, int seeds, std::uint64_t base_seed,
                              std::int64_t samples, double intensity) {
  require_valid(par);
  if (seeds < 1) throw std::invalid_argument("census experiment needs seeds >= 1");
  for (double N : N_grid)
    CensusQuery{A, N, a, epsilon}.validate();

  Domain dom;
  dom.d = par.d;
  dom.kind = DomainKind::ContinuumBox;
  dom.half_side = 0.5 * A;
  GenerateOptions opt;
  opt.intensity = intensity;

  std::vector<std::vector<double>> counts(N_grid.size());
  for (int s = 0; s < seeds; ++s) {
    const auto g = generate_graph(dom, par, l_spec, base_seed + s, opt);
    for (std::size_t k = 0; k < N_grid.size(); ++k)
      counts[k].push_back(static_cast<double>(
          count_long_cheap_edges(g, CensusQuery{A, N_grid[k], a, epsilon})));
  }

  CensusTable table;
  table.n_min_bound_holds = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < N_grid.size(); ++k) {
    CensusRow row;
    row.N = N_grid[k];
    double mean = 0.0;
    for (double c : counts[k]) mean += c;
    mean /= seeds;
    double var = 0.0;
    for (double c : counts[k]) var += (c - mean) * (c - mean);
    var = seeds > 1 ? var / (seeds - 1) : 0.0;
    row.empirical_mean = mean;
    row.empirical_stderr = std::sqrt(var / seeds);
    row.theory = expected_census(CensusQuery{A, N_grid[k], a, epsilon}, par,
                                 l_spec, samples, derive_key(base_seed, kTagGeneric, k),
                                 false, intensity);
    if (row.empirical_mean <= row.theory.closed_form_bound)
      table.n_min_bound_holds = std::min(table.n_min_bound_holds, row.N);
    table.rows.push_back(row);
  }
  return table;
}

}  // namespace fpp
