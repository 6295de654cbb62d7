"""Special-function kernel: densities, CDFs and quantiles.

Chi-square, central and non-central Student-t, F, the scaled variance-ratio
density of the statistic Z, and the (incomplete) beta functions that underlie
them.  Degrees of freedom may take the distinguished value ``INFINITY``, in
which case every routine dispatches to the exact normal / chi-square limit
formula instead of a large-df approximation.

All functions are pure and accept numpy arrays transparently where that is
useful to callers (the quadrature code feeds large node vectors through
``student_t_cdf`` and friends).
"""

from __future__ import annotations

import math

import numpy as np
from scipy import special as _sp
from scipy import stats as _st

INFINITY = math.inf

__all__ = [
    "INFINITY",
    "chi2_cdf",
    "chi2_quantile",
    "f_cdf",
    "f_quantile",
    "incomplete_beta",
    "lbeta",
    "normal_cdf",
    "normal_pdf",
    "normal_quantile",
    "noncentral_t_cdf",
    "student_t_cdf",
    "student_t_pdf",
    "student_t_quantile",
    "z_density",
    "z_moments",
]

# central fallback threshold for the noncentral t; below this the
# noncentrality is numerically indistinguishable from zero
_DELTA_TINY = 1e-12


def _require_positive_df(v: float, name: str = "v") -> None:
    if v == INFINITY:
        return
    if not (v > 0) or math.isnan(v):
        raise ValueError(f"{name} must be positive or INFINITY, got {v!r}")


def normal_cdf(x):
    """Standard normal CDF."""
    return _sp.ndtr(x)


def normal_pdf(x):
    """Standard normal density."""
    x_arr = np.asarray(x, dtype=float)
    out = np.exp(-0.5 * x_arr * x_arr) / math.sqrt(2.0 * math.pi)
    return float(out) if np.isscalar(x) else out


def normal_quantile(p: float) -> float:
    """Inverse standard normal CDF for p in (0, 1)."""
    if not (0.0 < p < 1.0):
        raise ValueError(f"p must lie in (0, 1), got {p!r}")
    return float(_sp.ndtri(p))


def chi2_cdf(y, v: float):
    """Chi-square CDF with v degrees of freedom, y >= 0."""
    _require_positive_df(v)
    if v == INFINITY:
        raise ValueError("chi2_cdf requires finite degrees of freedom")
    y_arr = np.asarray(y, dtype=float)
    if np.any(y_arr < 0):
        raise ValueError("chi-square variate must be nonnegative")
    out = _sp.chdtr(v, y_arr)
    return float(out) if np.isscalar(y) else out


def chi2_quantile(p: float, v: float) -> float:
    """Inverse chi-square CDF for p in (0, 1)."""
    if not (0.0 < p < 1.0):
        raise ValueError(f"p must lie in (0, 1), got {p!r}")
    _require_positive_df(v)
    if v == INFINITY:
        raise ValueError("chi2_quantile requires finite degrees of freedom")
    # chdtri takes the upper tail mass, which keeps precision for p near 1
    return float(_sp.chdtri(v, 1.0 - p))


def student_t_cdf(t, v: float):
    """Student-t CDF S_v(t); v = INFINITY gives the standard normal CDF."""
    _require_positive_df(v)
    t_arr = np.asarray(t, dtype=float)
    out = _sp.ndtr(t_arr) if v == INFINITY else _sp.stdtr(v, t_arr)
    return float(out) if np.isscalar(t) else out


def student_t_pdf(t, v: float):
    """Student-t density; v = INFINITY gives the standard normal density."""
    _require_positive_df(v)
    t_arr = np.asarray(t, dtype=float)
    if v == INFINITY:
        out = np.exp(-0.5 * t_arr * t_arr) / math.sqrt(2.0 * math.pi)
    else:
        log_norm = (
            math.lgamma(0.5 * (v + 1.0))
            - math.lgamma(0.5 * v)
            - 0.5 * math.log(v * math.pi)
        )
        out = np.exp(log_norm - 0.5 * (v + 1.0) * np.log1p(t_arr * t_arr / v))
    return float(out) if np.isscalar(t) else out


def student_t_quantile(p: float, v: float) -> float:
    """Inverse Student-t CDF for p in (0, 1); normal quantile at v = INFINITY."""
    if not (0.0 < p < 1.0):
        raise ValueError(f"p must lie in (0, 1), got {p!r}")
    _require_positive_df(v)
    if v == INFINITY:
        return normal_quantile(p)
    return float(_sp.stdtrit(v, p))


def noncentral_t_cdf(t, v: float, delta: float):
    """Noncentral Student-t CDF with noncentrality delta.

    Falls back to the central CDF when |delta| is below 1e-12 and to the
    shifted normal when v = INFINITY.
    """
    _require_positive_df(v)
    if not math.isfinite(delta):
        raise ValueError("noncentrality must be finite")
    t_arr = np.asarray(t, dtype=float)
    if v == INFINITY:
        out = _sp.ndtr(t_arr - delta)
    elif abs(delta) < _DELTA_TINY:
        out = _sp.stdtr(v, t_arr)
    else:
        out = np.asarray(_st.nct.cdf(t_arr, v, delta))
        # deep-tail evaluations can come back NaN where the true value
        # underflows; resolve them to the limit on the proper side
        bad = np.isnan(out)
        if np.any(bad):
            out = np.where(bad, np.where(t_arr < delta, 0.0, 1.0), out)
    return float(out) if np.isscalar(t) else out


def f_cdf(x, v1: float, v2: float):
    """F(v1, v2) CDF."""
    _require_positive_df(v1, "v1")
    _require_positive_df(v2, "v2")
    if v1 == INFINITY or v2 == INFINITY:
        raise ValueError("f_cdf requires finite degrees of freedom")
    x_arr = np.asarray(x, dtype=float)
    out = _sp.fdtr(v1, v2, x_arr)
    return float(out) if np.isscalar(x) else out


def f_quantile(p: float, v1: float, v2: float) -> float:
    if not (0.0 < p < 1.0):
        raise ValueError(f"p must lie in (0, 1), got {p!r}")
    return float(_sp.fdtri(v1, v2, p))


def lbeta(a: float, b: float) -> float:
    """log B(a, b)."""
    return float(_sp.betaln(a, b))


def incomplete_beta(a: float, b: float, x) :
    """Regularized incomplete beta function I_x(a, b)."""
    if a <= 0 or b <= 0:
        raise ValueError("beta parameters must be positive")
    x_arr = np.asarray(x, dtype=float)
    if np.any((x_arr < 0) | (x_arr > 1)):
        raise ValueError("x must lie in [0, 1]")
    out = _sp.betainc(a, b, x_arr)
    return float(out) if np.isscalar(x) else out


def z_density(z, v1: float, v2: float, zeta: float):
    """Density of the variance-ratio statistic Z = S1^2/S2^2 at ratio zeta.

    Z is zeta times an F(v1, v2) variable; the density is

        v1^(v1/2) v2^(v2/2) / B(v1/2, v2/2)
            * z^(v1/2-1) * zeta^(v2/2) / (v2*zeta + v1*z)^(v/2),

    normalized so it integrates to one over (0, inf).
    """
    _require_positive_df(v1, "v1")
    _require_positive_df(v2, "v2")
    if v1 == INFINITY or v2 == INFINITY:
        raise ValueError("z_density requires finite degrees of freedom")
    if not zeta > 0:
        raise ValueError("zeta must be positive")
    z_arr = np.asarray(z, dtype=float)
    if np.any(z_arr <= 0):
        raise ValueError("z must be positive")
    v = v1 + v2
    log_c = 0.5 * v1 * math.log(v1) + 0.5 * v2 * math.log(v2) - lbeta(0.5 * v1, 0.5 * v2)
    log_pdf = (
        log_c
        + (0.5 * v1 - 1.0) * np.log(z_arr)
        + 0.5 * v2 * math.log(zeta)
        - 0.5 * v * np.log(v2 * zeta + v1 * z_arr)
    )
    out = np.exp(log_pdf)
    return float(out) if np.isscalar(z) else out


def z_moments(v1: float, v2: float, zeta: float) -> tuple[float | None, float | None]:
    """(mean, variance) of Z; either entry is None where the moment is undefined.

    The mean needs v2 >= 3 and the variance v2 >= 5.
    """
    _require_positive_df(v1, "v1")
    _require_positive_df(v2, "v2")
    if v1 == INFINITY or v2 == INFINITY:
        raise ValueError("z_moments requires finite degrees of freedom")
    if not zeta > 0:
        raise ValueError("zeta must be positive")
    mean = zeta * v2 / (v2 - 2.0) if v2 >= 3 else None
    if v2 >= 5:
        scale = (zeta * v2 / v1) ** 2
        var = scale * (v1 / (v2 - 2.0)) * ((v1 + 2.0) / (v2 - 4.0) - v1 / (v2 - 2.0))
    else:
        var = None
    return mean, var
