"""Seeded replication of the two-sample experiment and calibration displays.

Each replicate draws sample 1 of size n1 from N(0, zeta) and sample 2 of
size n2 from N(0, 1), then records (V, Z, Theta).  A confidence level
pi = 1 - 2*alpha is attached to each record either by evaluating the
variance-angle integral at (|V|, Theta) — always assignable — or by
quadratic Lagrange interpolation of |V| through the per-Theta critical
values of a family of similar criteria at levels 0.1, 0.2, ...

If the criterion family is exactly calibrated, the assigned pi are
uniform on [0, 1], so the ranked empirical CDF should hug the diagonal;
for the variance-angle criteria the reference is instead the exact
confidence curve computed from the probability kernel.  Both comparisons
are summarised by Kolmogorov-Smirnov distances.

Reproducibility: replicate k draws from its own Philox stream keyed by
(seed, spawn_key=(k,)); normals come from the exact inverse CDF applied
to 53-bit uniforms.  Records are therefore bit-identical for a given
(seed, design, psi, n_reps) regardless of evaluation order.
"""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.interpolate import PchipInterpolator
from scipy.special import ndtri

from .criteria import CriterionTable
from .design import Design, VariancePoint, angle_from_z
from .distributions import INFINITY
from .fisher_behrens import fb_confidence, solve_fb_criterion
from .ideal import SolverSettings, solve_ideal_criterion
from .kernel import prob_v_below_two_tailed

__all__ = [
    "EcdfCurve",
    "LevelSet",
    "SimulationRun",
    "TheoreticalCurve",
    "assign_confidence_fb",
    "assign_confidence_ideal",
    "build_level_set",
    "default_levels",
    "ks_band",
    "ks_to_curve",
    "ks_to_diagonal",
    "lagrange_quadratic",
    "ranked_ecdf",
    "run_simulation",
    "theoretical_curve",
]

_INV_2_53 = 2.0 ** -53


# --------------------------------------------------------------------------
# replicate generation


@dataclass(frozen=True)
class SimulationRun:
    """Record arrays for one seeded batch of replicates.

    ``pi`` is NaN wherever ``unassignable`` is set; ``clamped`` marks
    records whose raw interpolated confidence was pulled back into [0, 1].
    """

    seed: int
    design: Design
    psi: VariancePoint
    n_reps: int
    v: np.ndarray
    z: np.ndarray
    theta_deg: np.ndarray
    pi: np.ndarray | None = None
    unassignable: np.ndarray | None = None
    clamped: np.ndarray | None = None
    confidence_family: str | None = None

    @property
    def n_unassignable(self) -> int:
        return 0 if self.unassignable is None else int(np.sum(self.unassignable))

    @property
    def n_assigned(self) -> int:
        if self.pi is None:
            return 0
        return self.n_reps - self.n_unassignable

    def assigned_pis(self) -> np.ndarray:
        """Confidence values of the assignable records, in replicate order."""
        if self.pi is None:
            raise ValueError("no confidence levels assigned yet")
        if self.unassignable is None:
            return self.pi.copy()
        return self.pi[~self.unassignable]


def _replicate_normals(seed: int, k: int, count: int) -> np.ndarray:
    # one independent Philox stream per replicate; exact inverse-CDF normals
    bits = np.random.Generator(
        np.random.Philox(np.random.SeedSequence(entropy=seed, spawn_key=(k,)))
    ).integers(0, 1 << 53, size=count)
    return ndtri((bits + 0.5) * _INV_2_53)


def run_simulation(seed: int, d: Design, psi: VariancePoint, n_reps: int = 5000) -> SimulationRun:
    """Draw ``n_reps`` seeded replicates of (V, Z, Theta) at nuisance ``psi``."""
    if d.is_infinite:
        raise ValueError("simulation requires finite sample sizes")
    if n_reps < 1:
        raise ValueError(f"n_reps must be >= 1, got {n_reps}")
    if psi.zeta == INFINITY:
        raise ValueError("simulation requires a finite variance ratio")
    n1, n2 = int(d.n1), int(d.n2)
    root_zeta = math.sqrt(psi.zeta)

    v = np.empty(n_reps)
    z = np.empty(n_reps)
    for k in range(n_reps):
        g = _replicate_normals(seed, k, n1 + n2)
        x1 = root_zeta * g[:n1]
        x2 = g[n1:]
        s1 = x1.var(ddof=1)
        s2 = x2.var(ddof=1)
        v[k] = (x1.mean() - x2.mean()) / math.sqrt(s1 / n1 + s2 / n2)
        z[k] = s1 / s2

    return SimulationRun(
        seed=seed, design=d, psi=psi, n_reps=n_reps,
        v=v, z=z, theta_deg=angle_from_z(z, d),
    )


# --------------------------------------------------------------------------
# confidence assignment


def assign_confidence_fb(run: SimulationRun) -> SimulationRun:
    """Attach pi = 2 Pr{V < |V| at Theta} - 1 from the variance-angle integral."""
    pis = np.asarray(fb_confidence(np.abs(run.v), run.theta_deg, run.design))
    return dataclasses.replace(
        run,
        pi=pis,
        unassignable=np.zeros(run.n_reps, dtype=bool),
        clamped=np.zeros(run.n_reps, dtype=bool),
        confidence_family="fisher-behrens",
    )


def default_levels(d: Design, family: str = "ideal") -> np.ndarray:
    """Confidence levels 0.1, 0.2, ... up to the tabulable top.

    The similar-criterion ladder stops at 0.7 for the smallest designs
    (level 0.9 means alpha = 0.05, out of tabulable reach at two degrees
    of freedom); the variance-angle criteria solve at any level.
    """
    top = 7 if family == "ideal" and min(d.nu1, d.nu2) <= 2 else 9
    return np.round(np.arange(1, top + 1) * 0.1, 10)


@dataclass(frozen=True)
class LevelSet:
    """Similar criteria at a ladder of confidence levels 1 - 2*alpha.

    The level-0 member (a criterion identically zero) is implicit: every
    per-Theta ladder of critical values starts at x_0 = 0.  Above the top
    tabulated level, either plain quadratic extrapolation through the top
    three points is allowed for a confidence overshoot of at most
    ``extrap_window``, or — when ``inverse_tail`` is set — the top three
    points are used in reciprocal coordinates (x -> 1/x), which saturates
    gracefully as |V| grows and never gives up on a record.
    """

    levels: tuple[float, ...]
    tables: tuple[CriterionTable, ...]
    inverse_tail: bool = False
    extrap_window: float = 0.15

    def __post_init__(self):
        lv = np.asarray(self.levels, dtype=float)
        if lv.size < 2:
            raise ValueError("need at least two levels for quadratic interpolation")
        if np.any(lv <= 0.0) or np.any(lv >= 1.0) or np.any(np.diff(lv) <= 0.0):
            raise ValueError("levels must be strictly increasing inside (0, 1)")
        if len(self.tables) != lv.size:
            raise ValueError("one criterion table per level required")
        if self.inverse_tail and lv.size < 3:
            raise ValueError("reciprocal tail needs three tabulated levels")
        d = self.tables[0].design
        for level, tab in zip(lv, self.tables):
            if tab.design != d:
                raise ValueError("all tables must share one design")
            if abs(tab.alpha - 0.5 * (1.0 - level)) > 1e-12:
                raise ValueError(
                    f"table at alpha={tab.alpha} does not match level {level}"
                )

    @property
    def design(self) -> Design:
        return self.tables[0].design

    @property
    def top_level(self) -> float:
        """Highest tabulated level; confidence resolution stops here."""
        return float(self.levels[-1])

    def critical_values(self, theta_deg) -> np.ndarray:
        """Ladder x_0 = 0 < x_1 < ... at each angle; shape (..., k+1)."""
        t = np.asarray(theta_deg, dtype=float)
        out = np.empty(t.shape + (len(self.tables) + 1,))
        out[..., 0] = 0.0
        for j, tab in enumerate(self.tables):
            out[..., j + 1] = tab.criterion().at_theta(t)
        return out


def build_level_set(
    d: Design,
    levels: Sequence[float] | None = None,
    family: str = "ideal",
    *,
    inverse_tail: bool | None = None,
    settings: SolverSettings | None = None,
) -> LevelSet:
    """Solve the criterion family for ``d`` at each level 1 - 2*alpha."""
    lv = default_levels(d, family) if levels is None else np.asarray(levels, dtype=float)
    if family == "ideal":
        tables = tuple(
            solve_ideal_criterion(d, 0.5 * (1.0 - level), settings=settings) for level in lv
        )
    elif family == "fisher-behrens":
        tables = tuple(solve_fb_criterion(d, 0.5 * (1.0 - level)) for level in lv)
    else:
        raise ValueError(f"unknown criterion family {family!r}")
    if inverse_tail is None:
        # reciprocal-coordinate tail only where the ladder reaches level 0.9
        inverse_tail = bool(np.max(lv) >= 0.9 - 1e-12)
    return LevelSet(levels=tuple(float(x) for x in lv), tables=tables, inverse_tail=inverse_tail)


def lagrange_quadratic(xs, ys, t: float) -> float:
    """The quadratic through three (x, y) points, evaluated at ``t``."""
    (x0, x1, x2), (y0, y1, y2) = (np.asarray(xs, float), np.asarray(ys, float))
    return float(
        y0 * (t - x1) * (t - x2) / ((x0 - x1) * (x0 - x2))
        + y1 * (t - x0) * (t - x2) / ((x1 - x0) * (x1 - x2))
        + y2 * (t - x0) * (t - x1) / ((x2 - x0) * (x2 - x1))
    )


def _assign_one(a: float, x: np.ndarray, lv: np.ndarray, inverse_tail: bool,
                window: float) -> float | None:
    """Raw confidence for |V| = a against ladder x (returns None if out of range)."""
    m = x.size - 1
    if a >= x[m]:
        if inverse_tail:
            # top triple in reciprocal coordinates; saturates as a -> inf
            return lagrange_quadratic(1.0 / x[m - 2 :], lv[m - 2 :], 1.0 / a)
        p = lagrange_quadratic(x[m - 2 :], lv[m - 2 :], a)
        if p < lv[m] - 1e-12 or p > lv[m] + window + 1e-12:
            return None
        return p
    j = int(np.searchsorted(x, a, side="right")) - 1  # x[j] <= a < x[j+1]
    # nearest three nodes: lower half of the interval leans on the stencil below
    i0 = j - 1 if a <= 0.5 * (x[j] + x[j + 1]) else j
    i0 = min(max(i0, 0), m - 2)
    return lagrange_quadratic(x[i0 : i0 + 3], lv[i0 : i0 + 3], a)


def assign_confidence_ideal(run: SimulationRun, ls: LevelSet) -> SimulationRun:
    """Attach pi by quadratic interpolation of |V| in the level-set ladder.

    Records whose ladder is not strictly increasing at their Theta, or that
    fall beyond the allowed extrapolation window, are tagged unassignable.
    """
    if ls.design != run.design:
        raise ValueError("level set was solved for a different design")
    lv = np.concatenate(([0.0], np.asarray(ls.levels, dtype=float)))
    ladders = ls.critical_values(run.theta_deg)
    monotone = np.all(np.diff(ladders, axis=-1) > 0.0, axis=-1)

    pis = np.full(run.n_reps, np.nan)
    unassignable = np.ones(run.n_reps, dtype=bool)
    clamped = np.zeros(run.n_reps, dtype=bool)
    abs_v = np.abs(run.v)
    for i in range(run.n_reps):
        if not monotone[i]:
            continue
        p = _assign_one(abs_v[i], ladders[i], lv, ls.inverse_tail, ls.extrap_window)
        if p is None:
            continue
        if p < 0.0 or p > 1.0:
            clamped[i] = True
            p = min(max(p, 0.0), 1.0)
        pis[i] = p
        unassignable[i] = False

    return dataclasses.replace(
        run, pi=pis, unassignable=unassignable, clamped=clamped, confidence_family="ideal",
    )


# --------------------------------------------------------------------------
# calibration displays


@dataclass(frozen=True)
class EcdfCurve:
    """Ranked step function: height i/n on the segment [rho_i, rho_{i+1}].

    ``rho`` has length n + 2 with rho_0 = 0 and rho_{n+1} = 1 adjoined.
    """

    rho: np.ndarray

    @property
    def n(self) -> int:
        return self.rho.size - 2

    def heights(self) -> np.ndarray:
        return np.arange(self.n + 1) / self.n

    def segments(self) -> np.ndarray:
        """Rows (x_i, y_i, x_{i+1}, y_i), one horizontal segment per rank."""
        y = self.heights()
        return np.column_stack((self.rho[:-1], y, self.rho[1:], y))

    def value_at(self, x) -> np.ndarray:
        """Fraction of ranked values <= x."""
        inner = self.rho[1:-1]
        return np.searchsorted(inner, np.asarray(x, dtype=float), side="right") / self.n

    def ks_to_diagonal(self, upper: float = 1.0) -> float:
        """Sup distance to the diagonal over confidences in [0, upper].

        Level-set assignment saturates above the top tabulated level (the
        tail quadratic is clamped at 1), so calibration comparisons pass
        ``upper`` = that level; the default covers the whole unit interval.
        """
        n = self.n
        inner = self.rho[1:-1]
        i = np.arange(1, n + 1)
        keep = inner <= upper
        dev = 0.0
        if np.any(keep):
            dev = float(np.max(np.maximum(inner[keep] - (i[keep] - 1) / n,
                                          i[keep] / n - inner[keep])))
        boundary = abs(upper - float(self.value_at(upper)))
        return max(dev, boundary)


def ranked_ecdf(pis) -> EcdfCurve:
    """Rank confidences and adjoin the endpoints 0 and 1."""
    arr = np.sort(np.asarray(pis, dtype=float), kind="stable")
    if arr.size == 0:
        raise ValueError("need at least one confidence value")
    if np.any(~np.isfinite(arr)) or arr[0] < 0.0 or arr[-1] > 1.0:
        raise ValueError("confidence values must lie in [0, 1]")
    return EcdfCurve(rho=np.concatenate(([0.0], arr, [1.0])))


def ks_to_diagonal(pis, upper: float = 1.0) -> float:
    """Sup distance between the ranked ECDF and the uniform diagonal."""
    return ranked_ecdf(pis).ks_to_diagonal(upper)


def ks_band(n: int, confidence: float = 0.95) -> float:
    """Asymptotic two-sided KS acceptance radius (1.36/sqrt(n) at 95%)."""
    if n < 1:
        raise ValueError("need a positive sample count")
    if not (0.0 < confidence < 1.0):
        raise ValueError("confidence must lie in (0, 1)")
    return math.sqrt(-0.5 * math.log(0.5 * (1.0 - confidence))) / math.sqrt(n)


@dataclass(frozen=True)
class TheoreticalCurve:
    """Exact acceptance probability against confidence level, with (0,0), (1,1)."""

    levels: np.ndarray
    probs: np.ndarray

    def __post_init__(self):
        if self.levels.shape != self.probs.shape or self.levels.ndim != 1:
            raise ValueError("levels and probs must be matching 1-d arrays")
        if np.any(np.diff(self.levels) <= 0.0):
            raise ValueError("levels must be strictly increasing")
        if np.any(np.diff(self.probs) <= 0.0):
            raise ValueError("acceptance probabilities must be strictly increasing")

    def cdf(self, p) -> np.ndarray:
        """Monotone-spline value of the curve at confidence p."""
        # monotone interpolant: the KS transform below needs a distribution fn
        return PchipInterpolator(self.levels, self.probs)(np.clip(p, 0.0, 1.0))


def theoretical_curve(ls: LevelSet, vp: VariancePoint, d: Design) -> TheoreticalCurve:
    """Exact Pr{|V| < x_level | vp} per level, endpoints adjoined."""
    if ls.design != d:
        raise ValueError("level set was solved for a different design")
    probs = [
        1.0 - prob_v_below_two_tailed(tab.criterion(), vp, d) for tab in ls.tables
    ]
    return TheoreticalCurve(
        levels=np.concatenate(([0.0], ls.levels, [1.0])),
        probs=np.concatenate(([0.0], probs, [1.0])),
    )


def ks_to_curve(pis, curve: TheoreticalCurve, upper: float = 1.0) -> float:
    """KS distance after mapping confidences through the theoretical curve."""
    return ks_to_diagonal(curve.cdf(np.asarray(pis, dtype=float)), upper)
