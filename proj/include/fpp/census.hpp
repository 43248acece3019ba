#pragma once
#include <cstdint>
#include <vector>

#include "fpp/graph.hpp"

namespace fpp {

// Long-cheap-edge census: edges of Euclidean length >= N whose cost is at
// most N^{a d}, counted inside the box [-A/2, A/2]^d.
struct CensusQuery {
  double A = 0.0;
  double N = 0.0;
  double a = 0.0;
  double epsilon = 0.1;

  double cost_cap(int d) const;
  void validate() const;  // A > N > 0, a > 0, epsilon > 0
};

std::int64_t count_long_cheap_edges(const SpatialGraph& g, const CensusQuery& q);

struct MeanStderr {
  double mean = 0.0;
  double se = 0.0;
};

// Lambda(r) = E[(1 ^ Z/r^d)^alpha F_L(N^{ad} Z^-mu)], Z the product of two
// independent Pareto(tau-1) weights. Monte Carlo over Z; the same seed reuses
// the same Z sample (common random numbers), so estimates are comparable and
// monotone across r. degenerate_weights pins Z = 1 (test mode).
MeanStderr lambda_integrand_mc(double r, const CensusQuery& q,
                               const ModelParams& par,
                               const LDistributionSpec& l_spec,
                               std::int64_t samples, std::uint64_t seed,
                               bool degenerate_weights = false);

// Same expectation by deterministic quadrature over the product density
// f_Z(z) = (tau-1)^2 z^-tau ln z; serves as the oracle for the MC estimate.
double lambda_quadrature(double r, const CensusQuery& q, const ModelParams& par,
                         const LDistributionSpec& l_spec,
                         bool degenerate_weights = false);

// Density of |X - Y| for X, Y independent uniform on a d-dimensional box of
// the given side (exact closed forms for d = 1 and d = 2).
double box_pair_distance_density(double r, double side, int d);

struct CensusEstimate {
  // expected count over a unit-intensity Poisson cloud, exact pair geometry:
  // (1/2) A^{2d} c_lower * Integral f_R(r) Lambda(r) dr; Monte Carlo over Z
  // with stratified replicates, and the all-quadrature evaluation next to it
  double mc_expectation = 0.0;
  double mc_stderr = 0.0;
  double quadrature_expectation = 0.0;
  // bound-shaped radial integral A^d Integral_N^{dA} r^{d-1} Lambda(r) dr,
  // which dominates the expectation only up to a dimension constant
  double radial_integral = 0.0;
  double radial_stderr = 0.0;
  double radial_quadrature = 0.0;
  // N-power closed form, unit constant: A^d N^eps (N^{-d(alpha-1)} + ...)
  double closed_form_bound = 0.0;
  bool converged = true;
};

// Exact-geometry expectations require d <= 2 (the fields are NaN otherwise);
// the radial and closed forms are available in any dimension.
CensusEstimate expected_census(const CensusQuery& q, const ModelParams& par,
                               const LDistributionSpec& l_spec,
                               std::int64_t samples, std::uint64_t seed,
                               bool degenerate_weights = false,
                               double intensity = 1.0);

struct CensusRow {
  double N = 0.0;
  double empirical_mean = 0.0;
  double empirical_stderr = 0.0;
  CensusEstimate theory;
};

struct CensusTable {
  std::vector<CensusRow> rows;
  // smallest grid N whose empirical mean is below the closed-form bound, or
  // infinity when none is
  double n_min_bound_holds = 0.0;
};

// Generates `seeds` unit-intensity Poisson graphs on the side-A box and
// censuses every N of the grid on each realisation.
CensusTable census_experiment(const ModelParams& par,
                              const LDistributionSpec& l_spec, double A,
                              const std::vector<double>& N_grid, double a,
                              double epsilon, int seeds, std::uint64_t base_seed,
                              std::int64_t samples, double intensity = 1.0);

}  // namespace fpp
