"""Consistency analysis across significance levels.

For large enough designs the similar criteria are nested: alpha' < alpha
implies v_alpha'(theta) > v_alpha(theta) everywhere, so the rejection
region at the stricter level is contained in the laxer one.  At very
small degrees of freedom this ordering breaks down below some level
alpha_L(n1, n2): criterion curves for two nearby alphas intersect, and
the corresponding tests contradict each other on part of the sample
space.  This module detects such intersections between solved tables and
brackets alpha_L on a level grid.

Because the solved tables themselves carry a residual scale, a
sign change only counts as a detected crossing when the gap clears twice
the residual quality of the pair; candidates inside that noise band are
reported as inconclusive rather than detected.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .criteria import CriterionTable
from .design import Design
from .ideal import SolverSettings, solve_ideal_criterion

__all__ = [
    "AlphaLBracket",
    "CrossingReport",
    "LINNIK_SETTINGS",
    "detect_crossings",
    "estimate_alpha_L",
]

# residual goal matching the documented imbalance scale of the inconsistent regime
LINNIK_SETTINGS = SolverSettings(defect_tolerance=1e-3)


@dataclass(frozen=True)
class CrossingReport:
    """Where (if anywhere) the stricter-level curve dips below the laxer one.

    ``crossing_intervals`` are node-bracketed theta ranges (degrees, or c
    for the n1 = inf lattice) with the sign-change endpoints located by
    linear interpolation; ``inconclusive`` is set when some sign change
    was discarded because its gap stayed within 2x the residual quality.
    """

    design: Design
    alpha_pair: tuple[float, float]
    crossing_intervals: tuple[tuple[float, float], ...]
    residual_quality: float
    inconclusive: bool

    @property
    def has_crossing(self) -> bool:
        return len(self.crossing_intervals) > 0


def _zero_cross(x0: float, x1: float, g0: float, g1: float) -> float:
    # linear zero between nodes with opposite-signed g
    return x0 + (x1 - x0) * g0 / (g0 - g1)


def detect_crossings(t_a: CriterionTable, t_b: CriterionTable) -> CrossingReport:
    """Scan two same-design tables for level-order violations."""
    if t_a.design != t_b.design:
        raise ValueError("tables belong to different designs")
    if t_a.lattice_kind != t_b.lattice_kind:
        raise ValueError("tables live on different lattices")
    if t_a.alpha == t_b.alpha:
        raise ValueError("need two distinct significance levels")
    if t_a.alpha > t_b.alpha:
        t_a, t_b = t_b, t_a
    # g > 0 everywhere iff the two levels are consistent (nested regions)
    g = np.asarray(t_a.values) - np.asarray(t_b.values)
    nodes = np.asarray(t_a.nodes)
    quality = max(t_a.max_abs_residual, t_b.max_abs_residual)

    intervals: list[tuple[float, float]] = []
    inconclusive = False
    below = g < 0.0
    i = 0
    n = g.size
    while i < n:
        if not below[i]:
            i += 1
            continue
        j = i
        while j + 1 < n and below[j + 1]:
            j += 1
        depth = -float(np.min(g[i : j + 1]))
        if depth > 2.0 * quality:
            lo = nodes[i] if i == 0 else _zero_cross(nodes[i - 1], nodes[i], g[i - 1], g[i])
            hi = nodes[j] if j == n - 1 else _zero_cross(nodes[j], nodes[j + 1], g[j], g[j + 1])
            intervals.append((float(lo), float(hi)))
        else:
            inconclusive = True
        i = j + 1

    return CrossingReport(
        design=t_a.design,
        alpha_pair=(t_a.alpha, t_b.alpha),
        crossing_intervals=tuple(intervals),
        residual_quality=float(quality),
        inconclusive=inconclusive,
    )


@dataclass(frozen=True)
class AlphaLBracket:
    """Bracket for the smallest consistent level on a grid.

    ``lower`` is None when no grid pair crossed (alpha_L sits below the
    grid); ``upper`` is None when even the top pair crossed.
    """

    design: Design
    grid: tuple[float, ...]
    lower: float | None
    upper: float | None
    reports: tuple[CrossingReport, ...]

    @property
    def status(self) -> str:
        if self.lower is None:
            return "below grid"
        if self.upper is None:
            return "above grid"
        return "bracketed"


def estimate_alpha_L(
    d: Design,
    alpha_grid: Sequence[float],
    *,
    settings: SolverSettings | None = None,
    tables: Sequence[CriterionTable] | None = None,
) -> AlphaLBracket:
    """Solve the grid and report the highest adjacent pair still crossing.

    Pass ``tables`` (one per grid level, in order) to reuse existing
    solves; otherwise each level is solved with ``settings``.
    """
    grid = [float(a) for a in alpha_grid]
    if len(grid) < 2:
        raise ValueError("need at least two grid levels")
    if any(b <= a for a, b in zip(grid, grid[1:])):
        raise ValueError("alpha grid must be strictly increasing")
    if tables is None:
        tables = [solve_ideal_criterion(d, a, settings=settings) for a in grid]
    elif len(tables) != len(grid):
        raise ValueError("need one table per grid level")

    reports = tuple(detect_crossings(ta, tb) for ta, tb in zip(tables, tables[1:]))
    crossing_pairs = [k for k, rep in enumerate(reports) if rep.has_crossing]
    if not crossing_pairs:
        lower, upper = None, grid[0]
    elif crossing_pairs[-1] == len(reports) - 1:
        lower, upper = grid[-1], None
    else:
        k = crossing_pairs[-1]
        lower, upper = grid[k], grid[k + 1]
    return AlphaLBracket(
        design=d, grid=tuple(grid), lower=lower, upper=upper, reports=reports,
    )
