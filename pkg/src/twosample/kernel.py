"""Exact probability engine for the statistic V.

Conditioned on the variance-ratio statistic, V is a rescaled Student-t
variable: V | Z=z is distributed as T_nu * K_{z,zeta}, with

    K_{z,zeta}^2 = (nu1*z/zeta + nu2)(n2*zeta + n1) / (nu (n2*z + n1)).

Averaging S_nu(v(z)/K) over the law of Z gives Pr{V <= v(Z) | zeta} for any
criterion curve v.  After the change of variables x = nu1*z/(nu1*z + nu2*zeta)
(a Beta(nu1/2, nu2/2) variable) the average becomes a finite-interval
integral,

    Pr = 1/B(nu1/2, nu2/2) * int_0^1 S_nu(v(c*(x)) / K_{x,gamma})
                                  x^(nu1/2-1) (1-x)^(nu2/2-1) dx,

with K_{x,gamma}^2 = nu1*nu2 / (nu [nu1(1-gamma)(1-x) + nu2*gamma*x]) and the
criterion read at c*(x) = nu2*gamma*x / [nu1(1-gamma)(1-x) + nu2*gamma*x],
which depends on the samples only through the degrees of freedom.

The limit of the x-form as n1 -> inf is

    Pr = E_T Phi( v_c(gamma / ((1-gamma) T + gamma)) * sqrt(gamma + (1-gamma) T) ),

where T ~ chi2_{nu2}/nu2.  (At gamma = 0 this collapses to S_{nu2}(v(0)) and
at gamma = 1 to Phi(v(1)), matching the exact boundary behaviour of V.)

All operations are pure; integrand evaluation is vectorized numpy.
"""

from __future__ import annotations

import math

import numpy as np
from scipy import integrate as _integrate

from .design import Design, VariancePoint
from .distributions import (
    INFINITY,
    normal_cdf,
    student_t_cdf,
    z_density,
)
from .quadrature import beta_rule, gamma_rule

__all__ = [
    "DegenerateCornerError",
    "k_factor_general",
    "k_factor_x",
    "k_factor_z",
    "prob_v_below",
    "prob_v_below_inf_n1",
    "prob_v_below_two_tailed",
    "prob_v_below_zform",
    "prob_t_guess_below",
]


class DegenerateCornerError(ValueError):
    """K_{x,gamma} is unbounded at the corners (x, gamma) = (0, 1) and (1, 0)."""


def _require_finite(d: Design) -> None:
    if d.is_infinite:
        raise ValueError("finite sample sizes required here; use the inf-limit form")


def k_factor_z(z: float, zeta: float, d: Design) -> float:
    """K_{z,zeta}, the conditional scale linking V to a central t variable."""
    _require_finite(d)
    if not (z > 0 and zeta > 0):
        raise ValueError("z and zeta must be positive; use k_factor_x for the limits")
    k2 = (d.nu1 * z / zeta + d.nu2) * (d.n2 * zeta + d.n1) / (d.nu * (d.n2 * z + d.n1))
    return math.sqrt(k2)


def k_factor_x(x, gamma: float, d: Design):
    """K_{x,gamma} in the bounded coordinates; accepts array-valued x."""
    _require_finite(d)
    x_arr = np.asarray(x, dtype=float)
    if np.any((x_arr < 0) | (x_arr > 1)) or not (0.0 <= gamma <= 1.0):
        raise ValueError("x and gamma must lie in [0, 1]")
    bracket = d.nu1 * (1.0 - gamma) * (1.0 - x_arr) + d.nu2 * gamma * x_arr
    if np.any(bracket <= 0):
        raise DegenerateCornerError("K is unbounded at (x, gamma) = (0, 1) or (1, 0)")
    out = np.sqrt(d.nu1 * d.nu2 / (d.nu * bracket))
    return float(out) if np.isscalar(x) else out


def k_factor_general(x, gamma: float, f1: float, f2: float, d: Design):
    """k_{x,gamma} for a statistic normalized by S1^2 f1 + S2^2 f2.

    k^2 = nu * (f1 n1 gamma x / nu1 + f2 n2 (1-gamma)(1-x) / nu2); with the
    weights f1 = 1/n1, f2 = 1/n2 of V itself, k*K = 1 identically.
    """
    _require_finite(d)
    if not (f1 > 0 and f2 > 0):
        raise ValueError("weights must be positive")
    x_arr = np.asarray(x, dtype=float)
    k2 = d.nu * (
        f1 * d.n1 * gamma * x_arr / d.nu1
        + f2 * d.n2 * (1.0 - gamma) * (1.0 - x_arr) / d.nu2
    )
    out = np.sqrt(k2)
    return float(out) if np.isscalar(x) else out


def _criterion_knot_images(criterion, gamma: float, d: Design):
    """x positions where the criterion's lattice knots land, for panel alignment."""
    knots_c = getattr(criterion, "knots_c", None)
    if knots_c is None or gamma <= 0.0 or gamma >= 1.0:
        return None
    kc = np.asarray(knots_c, dtype=float)
    kc = kc[(kc > 0.0) & (kc < 1.0)]
    num = kc * d.nu1 * (1.0 - gamma)
    return num / (d.nu2 * gamma * (1.0 - kc) + num)


def _beta_nodes(criterion, gamma: float, d: Design):
    """Quadrature nodes for the x-form: (x, weights, criterion values, K)."""
    x, w = beta_rule(0.5 * d.nu1, 0.5 * d.nu2, _criterion_knot_images(criterion, gamma, d))
    denom = d.nu1 * (1.0 - gamma) * (1.0 - x) + d.nu2 * gamma * x
    c_star = d.nu2 * gamma * x / denom
    k = np.sqrt(d.nu1 * d.nu2 / (d.nu * denom))
    return x, w, np.asarray(criterion.at_c(c_star), dtype=float), k


def prob_v_below(criterion, vp: VariancePoint, d: Design) -> float:
    """Pr{V <= v(Theta) | nuisance} for an arbitrary criterion curve."""
    _require_finite(d)
    _, w, vals, k = _beta_nodes(criterion, vp.gamma, d)
    return float(np.sum(w * student_t_cdf(vals / k, d.nu)))


def prob_v_below_two_tailed(criterion, vp: VariancePoint, d: Design) -> float:
    """Type-I error of the two-tailed test: 1 - [P(v) - P(-v)], via two calls."""
    upper = prob_v_below(criterion, vp, d)
    lower = prob_v_below(criterion.negated(), vp, d)
    return 1.0 - (upper - lower)


def prob_v_below_zform(criterion, vp: VariancePoint, d: Design) -> float:
    """Debug path: direct quadrature over z in (0, inf) against the Z density.

    Slower and adaptive; kept as an independent route for cross-checking the
    finite-interval form.
    """
    _require_finite(d)
    zeta = vp.zeta
    if not (0.0 < zeta < INFINITY):
        raise ValueError("the z-form needs 0 < zeta < inf")
    nu = d.nu

    def integrand(z):
        c = d.n2 * z / (d.n1 + d.n2 * z)
        k2 = (d.nu1 * z / zeta + d.nu2) * (d.n2 * zeta + d.n1) / (nu * (d.n2 * z + d.n1))
        val = float(np.asarray(criterion.at_c(c)).reshape(()))
        return student_t_cdf(val / math.sqrt(k2), nu) * z_density(z, d.nu1, d.nu2, zeta)

    scale = zeta * d.nu2 / d.nu1  # median-ish scale of Z
    total = 0.0
    edges = [0.0, 0.1 * scale, scale, 10.0 * scale, np.inf]
    for lo, hi in zip(edges[:-1], edges[1:]):
        part, _ = _integrate.quad(integrand, lo, hi, epsabs=1e-12, epsrel=1e-10, limit=200)
        total += part
    return total


def prob_v_below_inf_n1(criterion, gamma: float, nu2: float) -> float:
    """Limit of Pr{V <= v_c(C) | gamma} as n1 -> inf, criterion given over c.

    Evaluates E Phi(v_c(gamma/((1-gamma)T + gamma)) * sqrt(gamma + (1-gamma)T))
    with T ~ chi2_{nu2}/nu2.  nu2 = INFINITY degenerates to Phi(v_c(gamma)).
    """
    if not (0.0 <= gamma <= 1.0):
        raise ValueError("gamma must lie in [0, 1]")
    if nu2 == INFINITY:
        return float(normal_cdf(np.asarray(criterion.at_c(gamma)).reshape(())))
    knots_t = None
    knots_c = getattr(criterion, "knots_c", None)
    if knots_c is not None and 0.0 < gamma < 1.0:
        kc = np.asarray(knots_c, dtype=float)
        kc = kc[(kc > 0.0) & (kc < 1.0)]
        knots_t = gamma * (1.0 - kc) / ((1.0 - gamma) * kc)
    t, w = gamma_rule(nu2, knots_t)
    if gamma == 0.0:
        c_arg = np.zeros_like(t)
    else:
        c_arg = gamma / ((1.0 - gamma) * t + gamma)
    scale = np.sqrt(gamma + (1.0 - gamma) * t)
    vals = np.asarray(criterion.at_c(c_arg), dtype=float)
    return float(np.sum(w * normal_cdf(vals * scale)))


def t_guess_weights(zeta_guess: float, d: Design) -> tuple[float, float]:
    """The normalizing weights of the pooled-style statistic T(zeta_guess)."""
    _require_finite(d)
    if not zeta_guess > 0:
        raise ValueError("zeta_guess must be positive")
    f1 = d.nu1 / d.nu * (1.0 / d.n1 + 1.0 / (d.n2 * zeta_guess))
    f2 = d.nu2 / d.nu * (zeta_guess / d.n1 + 1.0 / d.n2)
    return f1, f2


def prob_t_guess_below(t_crit: float, zeta_guess: float, vp: VariancePoint, d: Design) -> float:
    """Pr{T(zeta_guess) <= t_crit | nuisance}; exactly 1 - alpha when the guess is right."""
    f1, f2 = t_guess_weights(zeta_guess, d)
    x, w = beta_rule(0.5 * d.nu1, 0.5 * d.nu2)
    k = k_factor_general(x, vp.gamma, f1, f2, d)
    return float(np.sum(w * student_t_cdf(t_crit * k, d.nu)))
