"""Composite Gauss-Legendre rules for the probability integrals.

Two weight families appear throughout:

* beta weights x^(a-1) (1-x)^(b-1) / B(a, b) on (0, 1).  The substitution
  x = sin^2 phi absorbs the endpoint singularities (a or b < 1 happens for
  the smallest designs), after which the integrand is analytic per panel.
* gamma weights (nu/2)^(nu/2)/Gamma(nu/2) t^(nu/2-1) e^(-nu t/2) on
  (0, inf), the law of a chi-square over its df.  Here t = w^2 removes the
  t^(-1/2) singularity at nu = 1 and the range is cut where the remaining
  tail mass drops below 1e-13.

Panel edges can be augmented with interior knots (images of criterion
lattice nodes) so that piecewise-cubic criteria stay smooth inside every
panel.  Node placement is fully deterministic, so results never depend on
evaluation order or thread count.
"""

from __future__ import annotations

import math

import numpy as np
from numpy.polynomial.legendre import leggauss

from .distributions import chi2_quantile, lbeta

__all__ = ["beta_rule", "gamma_rule"]

_POINTS_PER_PANEL = 12
_BASE_PANELS = 24
_TAIL_MASS = 1e-13

_GL_X, _GL_W = leggauss(_POINTS_PER_PANEL)


def _composite(edges: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Flattened Gauss-Legendre nodes/weights over consecutive panels."""
    mid = 0.5 * (edges[1:] + edges[:-1])
    half = 0.5 * (edges[1:] - edges[:-1])
    x = (mid[:, None] + half[:, None] * _GL_X[None, :]).ravel()
    w = (half[:, None] * _GL_W[None, :]).ravel()
    return x, w


def _merged_edges(lo: float, hi: float, interior) -> np.ndarray:
    base = np.linspace(lo, hi, _BASE_PANELS + 1)
    if interior is None or len(interior) == 0:
        return base
    pts = np.asarray(interior, dtype=float)
    pts = pts[(pts > lo) & (pts < hi)]
    edges = np.union1d(base, pts)
    # collapse near-duplicate edges; zero-width panels add nothing
    keep = np.concatenate(([True], np.diff(edges) > 1e-12 * (hi - lo)))
    return edges[keep]


def beta_rule(a: float, b: float, knots_x=None) -> tuple[np.ndarray, np.ndarray]:
    """Nodes x and weights w with sum w*f(x) ~ int_0^1 f(x) x^(a-1)(1-x)^(b-1)/B(a,b) dx.

    ``knots_x`` are optional interior x values to align panel edges with.
    """
    if not (a > 0 and b > 0):
        raise ValueError("beta exponents must be positive")
    knots_phi = None
    if knots_x is not None and len(knots_x):
        kx = np.clip(np.asarray(knots_x, dtype=float), 0.0, 1.0)
        knots_phi = np.arcsin(np.sqrt(kx))
    edges = _merged_edges(0.0, 0.5 * math.pi, knots_phi)
    phi, w_phi = _composite(edges)
    s, c = np.sin(phi), np.cos(phi)
    x = s * s
    # 2 sin^(2a-1) cos^(2b-1) / B(a, b); evaluated in log space so large
    # exponents (nu up to the hundreds) neither overflow nor lose the tail
    log_w = math.log(2.0) - lbeta(a, b) + (2.0 * a - 1.0) * np.log(s) + (2.0 * b - 1.0) * np.log(c)
    return x, w_phi * np.exp(log_w)


def gamma_rule(nu: float, knots_t=None) -> tuple[np.ndarray, np.ndarray]:
    """Nodes t and weights w with sum w*f(t) ~ E f(T), T ~ chi2_nu / nu.

    The weight is (nu/2)^(nu/2)/Gamma(nu/2) t^(nu/2-1) e^(-nu t/2) on
    (0, cut), with the cut at the 1 - 1e-13 quantile.
    """
    if not nu > 0:
        raise ValueError("nu must be positive")
    t_cut = chi2_quantile(1.0 - _TAIL_MASS, nu) / nu
    w_hi = math.sqrt(t_cut)
    knots_w = None
    if knots_t is not None and len(knots_t):
        kt = np.asarray(knots_t, dtype=float)
        kt = kt[(kt > 0.0) & (kt < t_cut)]
        knots_w = np.sqrt(kt)
    edges = _merged_edges(0.0, w_hi, knots_w)
    w_nodes, w_gl = _composite(edges)
    t = w_nodes * w_nodes
    half = 0.5 * nu
    log_c = half * math.log(half) - math.lgamma(half) + math.log(2.0)
    log_w = log_c + (nu - 1.0) * np.log(w_nodes) - half * t
    return t, w_gl * np.exp(log_w)
