"""Shared fixtures.

The expensive artifacts (solved criterion tables, 5000-replicate runs)
are session-scoped so the acceptance checks and the module tests share
one solve.
"""

from __future__ import annotations

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from twosample.design import Design, VariancePoint
from twosample.distributions import INFINITY
from twosample.fisher_behrens import solve_fb_criterion
from twosample.ideal import solve_ideal_criterion
from twosample.simulate import (
    assign_confidence_fb,
    assign_confidence_ideal,
    build_level_set,
    run_simulation,
)

settings.register_profile(
    "suite", deadline=None, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("suite")

PROTOCOL_SEED = 101


@pytest.fixture(scope="session")
def table2_battery():
    """The thirteen 2.5% tables keyed by degrees of freedom (nu2, nu1)."""
    tables = {}
    for nu2 in (10, 15, 30):
        for nu1 in (10, 15, 30):
            tables[(nu2, nu1)] = solve_ideal_criterion(Design(nu1 + 1, nu2 + 1), 0.025)
        tables[(nu2, INFINITY)] = solve_ideal_criterion(Design(INFINITY, nu2 + 1), 0.025)
    tables[(INFINITY, INFINITY)] = solve_ideal_criterion(Design(INFINITY, INFINITY), 0.025)
    return tables


@pytest.fixture(scope="session")
def table_11x11(table2_battery):
    return table2_battery[(10, 10)]


@pytest.fixture(scope="session")
def level_set_66():
    """Similar-criterion confidence ladder for the 6x6 design (0.1 ... 0.9)."""
    return build_level_set(Design(6, 6))


@pytest.fixture(scope="session")
def ideal_runs(level_set_66):
    """Seeded 6x6 runs at psi = 45 and 30 degrees with assigned confidences."""
    d = Design(6, 6)
    out = {}
    for psi in (45.0, 30.0):
        run = run_simulation(PROTOCOL_SEED, d, VariancePoint.from_psi_deg(psi, d), 5000)
        out[psi] = assign_confidence_ideal(run, level_set_66)
    return out


@pytest.fixture(scope="session")
def fb_runs():
    """Seeded variance-angle runs on the smallest designs at zeta = 1."""
    out = {}
    for n1, n2 in ((2, 2), (3, 2)):
        d = Design(n1, n2)
        run = run_simulation(PROTOCOL_SEED, d, VariancePoint.from_zeta(1.0, d), 5000)
        out[(n1, n2)] = assign_confidence_fb(run)
    return out


@pytest.fixture(scope="session")
def fb_ladders():
    """Variance-angle level sets used for the theoretical calibration curves."""
    return {
        (n1, n2): build_level_set(Design(n1, n2), family="fisher-behrens",
                                  inverse_tail=False)
        for n1, n2 in ((2, 2), (3, 2))
    }


@pytest.fixture(scope="session")
def fb_size_tables():
    """Variance-angle criteria on (3,3) and (6,6) for levels 0.1 ... 0.9."""
    levels = np.round(np.arange(1, 10) * 0.1, 10)
    out = {}
    for n in (3, 6):
        d = Design(n, n)
        out[n] = {lv: solve_fb_criterion(d, (1.0 - lv) / 2.0) for lv in levels}
    return out
