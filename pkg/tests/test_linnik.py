"""Cross-level consistency: crossing detection and changeover bracketing."""

import numpy as np
import pytest

from twosample.criteria import CriterionTable, build_psi_lattice
from twosample.design import Design
from twosample.linnik import (
    LINNIK_SETTINGS,
    AlphaLBracket,
    detect_crossings,
    estimate_alpha_L,
)

NODES = build_psi_lattice()


def _table(alpha, values, residual=1e-6):
    values = np.asarray(values, dtype=float)
    res = np.zeros(values.size)
    res[1:-1] = residual
    return CriterionTable(
        family="ideal", design=Design(2, 2), alpha=alpha, lattice_kind="psi91",
        nodes=NODES, values=values, residuals=res, converged=True,
        tolerance=1e-7, sweeps=1,
    )


def _bump(center, width, depth):
    # smooth local dip of the given depth around a node position
    return -depth * np.exp(-0.5 * ((NODES - center) / width) ** 2)


def test_nested_tables_report_no_crossing():
    strict = _table(0.25, np.full(NODES.size, 2.0))
    lax = _table(0.30, np.full(NODES.size, 1.8))
    rep = detect_crossings(strict, lax)
    assert not rep.has_crossing and not rep.inconclusive
    assert rep.alpha_pair == (0.25, 0.30)
    assert rep.residual_quality == pytest.approx(1e-6)


def test_clear_crossing_located_symmetrically():
    # strict curve dips 0.05 below the lax one around 45 degrees
    strict = _table(0.25, 2.0 + _bump(45.0, 4.0, 0.06))
    lax = _table(0.30, np.full(NODES.size, 1.97))
    rep = detect_crossings(strict, lax)
    assert rep.has_crossing and not rep.inconclusive
    assert len(rep.crossing_intervals) == 1
    lo, hi = rep.crossing_intervals[0]
    assert lo < 45.0 < hi
    assert lo + hi == pytest.approx(90.0, abs=0.2)  # symmetric dip


def test_dip_within_noise_is_inconclusive():
    strict = _table(0.25, 2.0 + _bump(45.0, 4.0, 0.031), residual=0.02)
    lax = _table(0.30, np.full(NODES.size, 1.97), residual=0.02)
    rep = detect_crossings(strict, lax)
    assert not rep.has_crossing
    assert rep.inconclusive
    assert rep.residual_quality == pytest.approx(0.02)


def test_argument_order_is_normalized():
    strict = _table(0.25, 2.0 + _bump(30.0, 5.0, 0.1))
    lax = _table(0.30, np.full(NODES.size, 1.97))
    a = detect_crossings(strict, lax)
    b = detect_crossings(lax, strict)
    assert a.alpha_pair == b.alpha_pair == (0.25, 0.30)
    assert a.crossing_intervals == b.crossing_intervals


def test_two_lobes_two_intervals():
    dip = _bump(20.0, 3.0, 0.08) + _bump(70.0, 3.0, 0.08)
    strict = _table(0.25, 2.0 + dip)
    lax = _table(0.30, np.full(NODES.size, 1.96))
    rep = detect_crossings(strict, lax)
    assert len(rep.crossing_intervals) == 2
    (a0, a1), (b0, b1) = rep.crossing_intervals
    assert a1 < b0


def test_identical_alphas_rejected():
    t = _table(0.25, np.full(NODES.size, 2.0))
    with pytest.raises(ValueError):
        detect_crossings(t, t)


def test_mismatched_designs_rejected():
    a = _table(0.25, np.full(NODES.size, 2.0))
    b = CriterionTable(
        family="ideal", design=Design(3, 3), alpha=0.3, lattice_kind="psi91",
        nodes=NODES, values=np.full(NODES.size, 1.9),
        residuals=np.zeros(NODES.size), converged=True, tolerance=1e-7,
    )
    with pytest.raises(ValueError):
        detect_crossings(a, b)


# -------------------------------------------------------------- bracketing


def _grid_tables(flags):
    """Adjacent-pair crossing pattern encoded as bools, lowest alpha first."""
    grid = [0.2 + 0.05 * k for k in range(len(flags) + 1)]
    base = 3.0
    tables = [_table(grid[0], np.full(NODES.size, base))]
    for k, crossing in enumerate(flags):
        # each next (laxer) curve steps down; a "crossing" pair instead
        # pokes above the previous curve around 45 degrees
        prev_peak = float(np.max(tables[-1].values))
        base -= 0.2
        values = np.full(NODES.size, base)
        if crossing:
            values = values - _bump(45.0, 4.0, (prev_peak - base) + 0.1)
        tables.append(_table(grid[k + 1], values))
    return grid, tables


def test_bracket_below_grid():
    grid, tables = _grid_tables([False, False, False])
    out = estimate_alpha_L(Design(2, 2), grid, tables=tables)
    assert out.status == "below grid"
    assert out.lower is None and out.upper == grid[0]


def test_bracket_interior():
    grid, tables = _grid_tables([True, False, False])
    out = estimate_alpha_L(Design(2, 2), grid, tables=tables)
    assert out.status == "bracketed"
    assert (out.lower, out.upper) == (grid[0], grid[1])


def test_bracket_takes_highest_crossing_pair():
    grid, tables = _grid_tables([True, True, False])
    out = estimate_alpha_L(Design(2, 2), grid, tables=tables)
    assert (out.lower, out.upper) == (grid[1], grid[2])


def test_bracket_above_grid():
    grid, tables = _grid_tables([False, True])
    out = estimate_alpha_L(Design(2, 2), grid, tables=tables)
    assert out.status == "above grid"
    assert out.lower == grid[-1] and out.upper is None


def test_grid_validation():
    with pytest.raises(ValueError):
        estimate_alpha_L(Design(2, 2), [0.25])
    with pytest.raises(ValueError):
        estimate_alpha_L(Design(2, 2), [0.3, 0.25])
    grid, tables = _grid_tables([False])
    with pytest.raises(ValueError):
        estimate_alpha_L(Design(2, 2), grid, tables=tables[:1])


def test_settings_default_residual_goal():
    assert LINNIK_SETTINGS.defect_tolerance == pytest.approx(1e-3)
