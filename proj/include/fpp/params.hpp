#pragma once
#include <string>
#include <vector>

#include "fpp/common.hpp"

namespace fpp {

// Full model parameter set. alpha and beta accept kInfinite for the limit
// regimes; c_prime is consulted only when alpha is infinite.
struct ModelParams {
  int d = 2;
  double tau = 2.5;
  double alpha = 3.5;
  double mu = 0.0;
  double beta = 1.0;
  double c_lower = 1.0;
  double c_upper = 1.0;
  double c1 = 1.0;
  double c2 = 1.0;
  double t0 = 1.0;
  double c_prime = 0.0;
  bool c_prime_set = false;
};

enum class Phase {
  Explosive,
  Polylogarithmic,
  StrictPolynomial,
  Linear,
  NonScaleFreeLinear,
  Boundary,
  Unclassified,
};

const char* to_string(Phase phase);

// Thresholds on the mu axis plus the growth exponent evaluated at par.mu.
// Conventions in corners the theory leaves open:
//   - tau > 3: mu_log clamps to 0, explosion_threshold is NaN.
//   - alpha <= 2 finite: mu_pol_alpha, mu_pol, eta_0 are NaN (no polynomial
//     regime exists there).
//   - eta_0 below mu_pol is the raw min{d(mu - mu_log), mu / mu_pol_alpha};
//     it is only meaningful above mu_log and may be <= 0 below it.
struct PhaseReport {
  double mu_log = 0.0;
  double mu_pol = 0.0;
  double mu_pol_alpha = 0.0;
  double eta_0 = 0.0;
  double explosion_threshold = 0.0;
  Phase phase = Phase::Unclassified;
};

// Returns one message per violated constraint; empty means valid.
std::vector<std::string> validate_params(const ModelParams& par);

// Throws std::invalid_argument listing every violation.
void require_valid(const ModelParams& par);

// Relative tolerance for declaring mu to sit on a phase boundary.
inline constexpr double kBoundaryTol = 1e-9;

PhaseReport compute_thresholds(const ModelParams& par);

Phase classify_phase(const ModelParams& par, double boundary_tol = kBoundaryTol);

}  // namespace fpp
