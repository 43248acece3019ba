#include "fpp/params.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <stdexcept>

namespace fpp {

std::string fmt_g17(double x) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

const char* to_string(Phase phase) {
  switch (phase) {
    case Phase::Explosive: return "Explosive";
    case Phase::Polylogarithmic: return "Polylogarithmic";
    case Phase::StrictPolynomial: return "StrictPolynomial";
    case Phase::Linear: return "Linear";
    case Phase::NonScaleFreeLinear: return "NonScaleFreeLinear";
    case Phase::Boundary: return "Boundary";
    case Phase::Unclassified: return "Unclassified";
  }
  return "Unclassified";
}

std::vector<std::string> validate_params(const ModelParams& par) {
  std::vector<std::string> errs;
  if (par.d < 1) errs.push_back("d must be a positive integer");
  if (!(par.tau > 2.0)) errs.push_back("tau must exceed 2");
  if (!is_infinite(par.alpha) && !(par.alpha > 1.0))
    errs.push_back("alpha must exceed 1 or be infinite");
  if (!(par.mu >= 0.0)) errs.push_back("mu must be >= 0");
  if (!is_infinite(par.beta) && !(par.beta > 0.0))
    errs.push_back("beta must be positive or infinite");
  if (!(par.c_lower > 0.0)) errs.push_back("c_lower must be positive");
  if (!(par.c_lower <= par.c_upper)) errs.push_back("c_lower must be <= c_upper");
  if (!(par.c_upper <= 1.0)) errs.push_back("c_upper must be <= 1 (h is a probability)");
  if (!(par.c1 > 0.0)) errs.push_back("c1 must be positive");
  if (!(par.c1 <= par.c2)) errs.push_back("c1 must be <= c2");
  if (!(par.t0 > 0.0 && par.t0 <= 1.0)) errs.push_back("t0 must lie in (0, 1]");
  if (is_infinite(par.alpha)) {
    if (!par.c_prime_set) errs.push_back("c_prime must be set when alpha is infinite");
    else if (!(par.c_prime > 0.0 && par.c_prime <= 1.0))
      errs.push_back("c_prime must lie in (0, 1]");
  }
  // beta = INFINITE additionally requires an L-distribution with no polynomial
  // mass at 0; that cross-check lives in graph_gen where the L spec is known.
  return errs;
}

void require_valid(const ModelParams& par) {
  auto errs = validate_params(par);
  if (errs.empty()) return;
  std::string joined = "invalid parameters:";
  for (const auto& e : errs) joined += " [" + e + "]";
  throw std::invalid_argument(joined);
}

PhaseReport compute_thresholds(const ModelParams& par) {
  require_valid(par);
  const double nan = std::numeric_limits<double>::quiet_NaN();
  const double d = static_cast<double>(par.d);
  const bool alpha_inf = is_infinite(par.alpha);
  const bool beta_inf = is_infinite(par.beta);

  PhaseReport rep;
  rep.mu_log = beta_inf ? 0.0 : std::max(0.0, (3.0 - par.tau) / par.beta);

  if (alpha_inf) {
    rep.mu_pol_alpha = 1.0 / d;
  } else if (par.alpha > 2.0) {
    rep.mu_pol_alpha = (par.alpha - (par.tau - 1.0)) / (d * (par.alpha - 2.0));
  } else {
    rep.mu_pol_alpha = nan;
  }

  rep.mu_pol = std::isnan(rep.mu_pol_alpha)
                   ? nan
                   : std::max(rep.mu_log + 1.0 / d, rep.mu_pol_alpha);

  rep.explosion_threshold = (par.tau > 2.0 && par.tau < 3.0)
                                ? (beta_inf ? 0.0 : (3.0 - par.tau) / (2.0 * par.beta))
                                : nan;

  if (par.tau > 3.0) {
    rep.eta_0 = (alpha_inf || par.alpha > 2.0) ? 1.0 : nan;
  } else if (std::isnan(rep.mu_pol)) {
    rep.eta_0 = nan;
  } else if (par.mu > rep.mu_pol) {
    rep.eta_0 = 1.0;
  } else {
    rep.eta_0 = std::min(d * (par.mu - rep.mu_log), par.mu / rep.mu_pol_alpha);
  }

  rep.phase = classify_phase(par);
  return rep;
}

namespace {

bool near(double mu, double thr, double tol) {
  return std::isfinite(thr) && std::abs(mu - thr) <= tol * std::max(1.0, std::abs(thr));
}

}  // namespace

Phase classify_phase(const ModelParams& par, double boundary_tol) {
  require_valid(par);
  const double d = static_cast<double>(par.d);
  const bool alpha_inf = is_infinite(par.alpha);
  const bool beta_inf = is_infinite(par.beta);

  if (!alpha_inf && std::abs(par.alpha - 2.0) <= boundary_tol * 2.0)
    return Phase::Unclassified;
  if (std::abs(par.tau - 3.0) <= boundary_tol * 3.0) return Phase::Boundary;

  const double mu_log = beta_inf ? 0.0 : std::max(0.0, (3.0 - par.tau) / par.beta);
  const double mu_pol_alpha =
      alpha_inf ? 1.0 / d
                : (par.alpha > 2.0
                       ? (par.alpha - (par.tau - 1.0)) / (d * (par.alpha - 2.0))
                       : std::numeric_limits<double>::quiet_NaN());
  const double mu_pol = std::isnan(mu_pol_alpha)
                            ? std::numeric_limits<double>::quiet_NaN()
                            : std::max(mu_log + 1.0 / d, mu_pol_alpha);

  if (par.tau > 3.0) {
    // mu plays no boundary role; weights have finite variance.
    return (alpha_inf || par.alpha > 2.0) ? Phase::NonScaleFreeLinear
                                          : Phase::Unclassified;
  }

  // tau in (2,3): thresholds that partition the mu axis for this (alpha, tau).
  const double expl = beta_inf ? 0.0 : (3.0 - par.tau) / (2.0 * par.beta);
  if (near(par.mu, expl, boundary_tol)) return Phase::Boundary;
  if (alpha_inf || par.alpha > 2.0) {
    if (near(par.mu, mu_log, boundary_tol)) return Phase::Boundary;
    if (near(par.mu, mu_pol, boundary_tol)) return Phase::Boundary;
  }

  if (par.mu < expl) return Phase::Explosive;
  if (!alpha_inf && par.alpha < 2.0) return Phase::Polylogarithmic;
  if (par.mu < mu_log) return Phase::Polylogarithmic;
  if (par.mu < mu_pol) return Phase::StrictPolynomial;
  return Phase::Linear;
}

}  // namespace fpp
