"""Coordinate bookkeeping: designs, nuisance points, statistic points."""

import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from twosample.design import (
    Design,
    StatPoint,
    VariancePoint,
    angle_from_z,
    c_from_theta_deg,
    theta_deg_from_c,
)
from twosample.distributions import INFINITY

sizes = st.integers(2, 40)


def test_design_validation():
    with pytest.raises(ValueError):
        Design(1, 5)
    with pytest.raises(ValueError):
        Design(5, 1)
    with pytest.raises(ValueError):
        Design(2.5, 4)
    with pytest.raises(ValueError):
        Design(4, INFINITY)  # infinite second sample: swap instead
    Design(INFINITY, 4)
    Design(INFINITY, INFINITY)


@given(sizes, sizes)
def test_degrees_of_freedom(n1, n2):
    d = Design(n1, n2)
    assert (d.nu1, d.nu2, d.nu) == (n1 - 1, n2 - 1, n1 + n2 - 2)


def test_infinite_design_properties():
    d = Design(INFINITY, 11)
    assert d.is_infinite
    assert d.nu1 == INFINITY and d.nu2 == 10 and d.nu == INFINITY
    with pytest.raises(ValueError):
        d.harmonic_zeta
    with pytest.raises(ValueError):
        d.swapped()


@given(sizes, sizes)
def test_swap_involution(n1, n2):
    d = Design(n1, n2)
    assert d.swapped().swapped() == d


@given(st.floats(0.0, 1.0))
def test_angle_round_trip(c):
    assert c_from_theta_deg(theta_deg_from_c(c)) == pytest.approx(c, abs=1e-12)


def test_angle_vectorized():
    thetas = theta_deg_from_c(np.array([0.0, 0.5, 1.0]))
    assert thetas == pytest.approx([0.0, 45.0, 90.0])


@given(st.floats(1e-6, 1e6), sizes, sizes)
def test_variance_point_constructors_agree(zeta, n1, n2):
    d = Design(n1, n2)
    a = VariancePoint.from_zeta(zeta, d)
    b = VariancePoint.from_gamma(a.gamma, d)
    c = VariancePoint.from_psi_deg(a.psi_deg, d)
    assert b.zeta == pytest.approx(zeta, rel=1e-9)
    assert c.gamma == pytest.approx(a.gamma, abs=1e-12)
    assert 0.0 <= a.gamma <= 1.0
    assert 0.0 <= a.psi_deg <= 90.0


@given(st.floats(1e-6, 1e6), sizes, sizes)
def test_swap_symmetry_of_gamma(zeta, n1, n2):
    # swapping samples sends zeta -> 1/zeta and gamma -> 1 - gamma
    d = Design(n1, n2)
    g = VariancePoint.from_zeta(zeta, d).gamma
    g_swapped = VariancePoint.from_zeta(1.0 / zeta, d.swapped()).gamma
    assert g_swapped == pytest.approx(1.0 - g, abs=1e-9)


def test_variance_point_boundaries():
    d = Design(5, 7)
    assert VariancePoint.from_zeta(0.0, d).gamma == 0.0
    top = VariancePoint.from_gamma(1.0, d)
    assert top.zeta == INFINITY and top.psi_deg == 90.0
    assert VariancePoint.from_zeta(INFINITY, d).gamma == 1.0
    with pytest.raises(ValueError):
        VariancePoint.from_zeta(-0.5, d)
    with pytest.raises(ValueError):
        VariancePoint.from_gamma(1.5, d)
    with pytest.raises(ValueError):
        VariancePoint.from_psi_deg(90.5, d)


def test_harmonic_zeta_values():
    assert Design(5, 7).harmonic_zeta == pytest.approx(5 * 4 / (7 * 6))
    assert Design(7, 7).harmonic_zeta == 1.0


@given(st.floats(-5, 5), st.floats(0.0, 1e5), sizes, sizes)
def test_stat_point_constructors_agree(v, z, n1, n2):
    d = Design(n1, n2)
    p = StatPoint.from_z(v, z, d)
    q = StatPoint.from_c(v, p.c, d)
    r = StatPoint.from_theta_deg(v, p.theta_deg, d)
    assert q.z == pytest.approx(z, rel=1e-9, abs=1e-12)
    assert r.c == pytest.approx(p.c, abs=1e-9)
    assert p.v == v


def test_angle_from_z_matches_stat_point():
    d = Design(6, 9)
    z = np.array([0.0, 0.3, 1.0, 4.0])
    expected = [StatPoint.from_z(0.0, float(zi), d).theta_deg for zi in z]
    assert angle_from_z(z, d) == pytest.approx(expected, abs=1e-12)
    assert angle_from_z(1.0, d) == pytest.approx(expected[2])


def test_harmonic_angle_is_design_independent_at_equal_sizes():
    # at z equal to the harmonic ratio, c = nu1/nu for every design
    for n1, n2 in ((3, 5), (7, 4), (12, 12)):
        d = Design(n1, n2)
        p = StatPoint.from_z(0.0, d.harmonic_zeta, d)
        assert p.c == pytest.approx(d.nu1 / d.nu, abs=1e-12)
