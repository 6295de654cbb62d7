"""Fisher-Behrens test criteria and confidence levels.

Conditionally on the observed variance angle Theta = theta, the
Fisher-Behrens solution assigns V (under equal means) the nominal law

    Pr{V < v | theta} = (1/B(nu1/2, nu2/2))
        * int_0^1 S_nu(v / K(xi, theta)) xi^(nu2/2-1) (1-xi)^(nu1/2-1) dxi,

    K^2(xi, theta) = [nu1 sin^2(theta)/(1 - xi) + nu2 cos^2(theta)/xi] / nu.

This is the Behrens distribution: a beta-weighted scale mixture of the
pooled Student law.  Note the exponent roles are swapped relative to the
exact-probability kernel (nu2 rides on xi here) — the mixing variable is
the nominal, not the true, variance split.  Unlike the similarity problem
there is no coupling across theta: the criterion value at each angle is a
scalar root of a strictly increasing function, so tables are computed by
independent bracketed root solves and are exact to quadrature accuracy.

The nominal probability is a *fiducial* one: the attained Type-I error of
the resulting test differs from alpha (it is conservative; see the size
scans in the linnik module and the acceptance tests).

For the limiting tabulation nu1 = inf the mixture collapses onto

    E Phi(v / sqrt(sin^2 theta + cos^2 theta / T)),   T ~ chi2_nu2 / nu2.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.optimize import brentq

from .criteria import CriterionTable, build_psi_lattice
from .design import Design
from .distributions import (
    INFINITY,
    normal_cdf,
    student_t_cdf,
    student_t_quantile,
)
from .quadrature import beta_rule, gamma_rule

__all__ = [
    "FBQuery",
    "fb_confidence",
    "fb_criterion_inf_n1",
    "fb_prob",
    "solve_fb_criterion",
]

_ROOT_XTOL = 1e-12


@dataclass(frozen=True)
class FBQuery:
    """A single nominal-probability evaluation point."""

    design: Design
    theta_deg: float
    v: float

    def __post_init__(self):
        if not 0.0 <= self.theta_deg <= 90.0:
            raise ValueError("theta_deg must lie in [0, 90]")


def _require_finite(d: Design) -> None:
    if d.n1 == INFINITY or d.n2 == INFINITY:
        raise ValueError("Fisher-Behrens mixture needs finite sample sizes; "
                         "use fb_criterion_inf_n1 for the n1 = inf tabulation")


@lru_cache(maxsize=None)
def _xi_rule(nu1: float, nu2: float) -> tuple[np.ndarray, np.ndarray]:
    # weight xi^(nu2/2-1) (1-xi)^(nu1/2-1) / B: swapped exponents on purpose
    return beta_rule(0.5 * nu2, 0.5 * nu1)


def _prob_arrays(d: Design, v: np.ndarray, theta_deg: np.ndarray) -> np.ndarray:
    """Vectorized nominal probability over broadcast (v, theta) pairs."""
    xi, w = _xi_rule(d.nu1, d.nu2)
    theta = np.radians(theta_deg)
    s2 = np.sin(theta) ** 2
    c2 = np.cos(theta) ** 2
    k2 = (d.nu1 * s2[..., None] / (1.0 - xi) + d.nu2 * c2[..., None] / xi) / d.nu
    args = v[..., None] / np.sqrt(k2)
    return student_t_cdf(args, d.nu) @ w


def fb_prob(q: FBQuery) -> float:
    """Nominal Pr{V < v | Theta = theta} under the Fisher-Behrens solution."""
    _require_finite(q.design)
    v = np.asarray(float(q.v))
    theta = np.asarray(float(q.theta_deg))
    return float(_prob_arrays(q.design, v, theta))


def fb_confidence(abs_v, theta_deg, d: Design):
    """Confidence level 1 - 2*alpha assigned to |V| = abs_v at angle theta.

    Equals 2 * fb_prob(|V|, theta) - 1; zero at abs_v = 0, tending to 1 as
    abs_v grows.  Accepts scalars or broadcastable arrays.
    """
    _require_finite(d)
    v = np.abs(np.asarray(abs_v, dtype=float))
    theta = np.asarray(theta_deg, dtype=float)
    v_b, theta_b = np.broadcast_arrays(v, theta)
    out = 2.0 * _prob_arrays(d, v_b, theta_b) - 1.0
    return float(out) if np.isscalar(abs_v) and np.isscalar(theta_deg) else out


def solve_fb_criterion(
    d: Design, alpha: float, lattice: np.ndarray | None = None
) -> CriterionTable:
    """Fisher-Behrens critical values on the psi lattice.

    Each interior node is an independent bracketed root solve of the
    strictly increasing map v -> fb_prob; the endpoints degenerate to pure
    Student laws and are pinned to the corresponding quantiles.
    """
    _require_finite(d)
    if not 0.0 < alpha < 0.5:
        raise ValueError("alpha must lie in (0, 0.5)")
    nodes = build_psi_lattice() if lattice is None else np.asarray(lattice, dtype=float)
    target = 1.0 - alpha
    hi = 10.0 * student_t_quantile(target, min(d.nu1, d.nu2))

    values = np.empty(nodes.size)
    values[0] = student_t_quantile(target, d.nu2)
    values[-1] = student_t_quantile(target, d.nu1)
    for i in range(1, nodes.size - 1):
        theta = np.asarray(nodes[i])
        f = lambda v: float(_prob_arrays(d, np.asarray(v), theta)) - target
        values[i] = brentq(f, 0.0, hi, xtol=_ROOT_XTOL)

    residuals = _prob_arrays(d, values, nodes) - target
    residuals[0] = residuals[-1] = 0.0
    return CriterionTable(
        family="fisher-behrens", design=d, alpha=alpha, lattice_kind="psi91",
        nodes=nodes, values=values, residuals=residuals, converged=True,
        tolerance=_ROOT_XTOL, sweeps=0,
    )


def fb_criterion_inf_n1(nu2: float, theta_deg: float, alpha: float) -> float:
    """Critical value at theta for the n1 = inf Fisher-Behrens tabulation.

    Solves E Phi(v / sqrt(sin^2 theta + cos^2 theta / T)) = 1 - alpha with
    T ~ chi2_nu2 / nu2.  At theta = 90 this is the normal quantile; at
    theta = 0 it collapses to the Student quantile for nu2.
    """
    if nu2 == INFINITY:
        raise ValueError("nu2 must be finite")
    if not 0.0 <= theta_deg <= 90.0:
        raise ValueError("theta_deg must lie in [0, 90]")
    if not 0.0 < alpha < 0.5:
        raise ValueError("alpha must lie in (0, 0.5)")
    target = 1.0 - alpha
    t, w = gamma_rule(nu2)
    theta = np.radians(theta_deg)
    scale = 1.0 / np.sqrt(np.sin(theta) ** 2 + np.cos(theta) ** 2 / t)

    def f(v: float) -> float:
        return float(normal_cdf(v * scale) @ w) - target

    hi = 10.0 * student_t_quantile(target, nu2)
    return brentq(f, 0.0, hi, xtol=_ROOT_XTOL)
