#!/usr/bin/env python3
"""Independent re-derivation of the phase thresholds and growth exponent.

This deliberately evaluates different expression forms than the C++ library
(mu_pol via 1/d + (3-tau)/min{beta, d(alpha-2)} instead of the max form;
eta_0 via a flat three-way min; each limit regime written out explicitly) so
agreement is evidence the formulas are implemented correctly, not a tautology.

Writes tests/data/phase_grid_expected.csv: a deterministic 500-point grid of
(d, tau, alpha, beta, mu) with the expected threshold values. Re-run only to
regenerate the frozen table.
"""

import itertools
import math
import os

INF = math.inf
NAN = math.nan


def thresholds(d, tau, alpha, beta, mu):
    """Returns (mu_log, mu_pol_alpha, mu_pol, eta_0, explosion_threshold).

    Conventions (mirrored from the library's documented corner rules):
    tau > 3 clamps mu_log to 0 and voids the explosion threshold; finite
    alpha <= 2 has no polynomial regime (NaN); eta_0 below mu_log is the raw
    formula value.
    """
    a_inf = math.isinf(alpha)
    b_inf = math.isinf(beta)

    if a_inf and b_inf:
        mu_log = 0.0
        mu_pol_alpha = 1.0 / d
        mu_pol = 1.0 / d
        eta_0 = min(1.0, d * mu)
    elif a_inf:
        mu_log = max(0.0, (3.0 - tau) / beta)
        mu_pol_alpha = 1.0 / d
        mu_pol = 1.0 / d + max(0.0, (3.0 - tau) / beta)
        eta_0 = min(1.0, d * (mu - mu_log))
    elif b_inf:
        mu_log = 0.0
        if alpha > 2.0:
            mu_pol_alpha = (alpha - (tau - 1.0)) / (d * (alpha - 2.0))
            mu_pol = max(1.0 / d, mu_pol_alpha)
            eta_0 = min(1.0, d * mu, mu / mu_pol_alpha)
        else:
            mu_pol_alpha = NAN
            mu_pol = NAN
            eta_0 = NAN
    else:
        mu_log = max(0.0, (3.0 - tau) / beta)
        if alpha > 2.0:
            mu_pol_alpha = (alpha - (tau - 1.0)) / (d * (alpha - 2.0))
            if tau <= 3.0:
                mu_pol = 1.0 / d + (3.0 - tau) / min(beta, d * (alpha - 2.0))
            else:
                mu_pol = max(mu_log + 1.0 / d, mu_pol_alpha)
            eta_0 = min(1.0, d * (mu - mu_log), mu / mu_pol_alpha)
        else:
            mu_pol_alpha = NAN
            mu_pol = NAN
            eta_0 = NAN

    if tau > 3.0 and (a_inf or alpha > 2.0):
        eta_0 = 1.0
    if 2.0 < tau < 3.0:
        explosion = 0.0 if b_inf else (3.0 - tau) / (2.0 * beta)
    else:
        explosion = NAN
    return mu_log, mu_pol_alpha, mu_pol, eta_0, explosion


def main():
    ds = [1, 2, 3]
    taus = [2.05, 2.2, 2.35, 2.5, 2.65, 2.8, 2.95, 3.0]
    alphas = [1.3, 1.7, 2.5, 3.5, 7.0, INF]
    betas = [0.4, 1.0, 2.5, INF]
    mus = [0.02, 0.2, 0.45, 0.8, 1.6, 4.0]

    grid = list(itertools.product(ds, taus, alphas, betas, mus))
    stride = len(grid) // 500
    rows = [grid[i * stride] for i in range(500)]

    out = os.path.join(os.path.dirname(__file__), "..", "..", "tests", "data",
                       "phase_grid_expected.csv")
    with open(out, "w") as f:
        f.write("d,tau,alpha,beta,mu,mu_log,mu_pol_alpha,mu_pol,eta_0,explosion_threshold\n")
        for d, tau, alpha, beta, mu in rows:
            vals = thresholds(d, tau, alpha, beta, mu)
            cells = [repr(d), repr(tau), repr(alpha), repr(beta), repr(mu)]
            cells += [repr(v) for v in vals]
            f.write(",".join(cells) + "\n")
    print(f"wrote {out}: {len(rows)} rows")


if __name__ == "__main__":
    main()
