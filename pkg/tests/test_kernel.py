"""Probability engine: K-factor identities, endpoint reductions, dual routes."""

import numpy as np
import pytest
from hypothesis import given, strategies as st

from twosample.criteria import ConstantCriterion, TableCriterion, build_psi_lattice
from twosample.design import Design, VariancePoint
from twosample.distributions import normal_cdf, student_t_cdf, student_t_quantile
from twosample.kernel import (
    DegenerateCornerError,
    k_factor_general,
    k_factor_x,
    k_factor_z,
    prob_t_guess_below,
    prob_v_below,
    prob_v_below_inf_n1,
    prob_v_below_two_tailed,
    prob_v_below_zform,
    t_guess_weights,
)

sizes = st.integers(2, 25)


@given(st.floats(1e-3, 1e3), st.floats(1e-3, 1e3), sizes, sizes)
def test_k_z_form_equals_x_form(z, zeta, n1, n2):
    # same scale in either coordinate system:
    # x = nu1 z / (nu1 z + nu2 zeta), gamma = n2 zeta / (n1 + n2 zeta)
    d = Design(n1, n2)
    x = d.nu1 * z / (d.nu1 * z + d.nu2 * zeta)
    gamma = VariancePoint.from_zeta(zeta, d).gamma
    assert k_factor_z(z, zeta, d) == pytest.approx(
        k_factor_x(x, gamma, d), rel=1e-12)


@given(st.floats(0.01, 0.99), sizes, sizes)
def test_k_equals_one_at_harmonic_gamma(x, n1, n2):
    # at gamma = nu1/nu the conditional scale drops out: V is exactly t_nu
    d = Design(n1, n2)
    assert k_factor_x(x, d.nu1 / d.nu, d) == pytest.approx(1.0, abs=1e-13)


@given(st.floats(0.0, 1.0), st.floats(0.01, 0.99), sizes, sizes)
def test_k_general_inverts_k_for_v_weights(x, gamma, n1, n2):
    # with f1 = 1/n1, f2 = 1/n2 the statistic *is* V, so k * K = 1
    d = Design(n1, n2)
    k = k_factor_general(x, gamma, 1.0 / n1, 1.0 / n2, d)
    assert k * k_factor_x(x, gamma, d) == pytest.approx(1.0, rel=1e-12)


def test_k_unbounded_corners_raise():
    d = Design(5, 5)
    with pytest.raises(DegenerateCornerError):
        k_factor_x(0.0, 1.0, d)
    with pytest.raises(DegenerateCornerError):
        k_factor_x(1.0, 0.0, d)
    with pytest.raises(ValueError):
        k_factor_z(0.0, 1.0, d)
    with pytest.raises(ValueError):
        k_factor_z(1.0, -2.0, d)


# ------------------------------------------------------- endpoint reductions


@given(st.floats(-3, 3), sizes, sizes)
def test_prob_at_gamma_zero_is_second_sample_t(v0, n1, n2):
    # zeta = 0 freezes the first sample: V ~ t_{nu2}, criterion read at c = 0
    d = Design(n1, n2)
    p = prob_v_below(ConstantCriterion(v0), VariancePoint.from_gamma(0.0, d), d)
    assert p == pytest.approx(student_t_cdf(v0, d.nu2), abs=1e-10)


@given(st.floats(-3, 3), sizes, sizes)
def test_prob_at_gamma_one_is_first_sample_t(v0, n1, n2):
    d = Design(n1, n2)
    p = prob_v_below(ConstantCriterion(v0), VariancePoint.from_gamma(1.0, d), d)
    assert p == pytest.approx(student_t_cdf(v0, d.nu1), abs=1e-10)


@given(st.floats(-3, 3), sizes, sizes)
def test_prob_at_harmonic_is_pooled_t(v0, n1, n2):
    # the pivot identity that anchors the whole construction
    d = Design(n1, n2)
    vp = VariancePoint.from_zeta(d.harmonic_zeta, d)
    p = prob_v_below(ConstantCriterion(v0), vp, d)
    assert p == pytest.approx(student_t_cdf(v0, d.nu), abs=1e-11)


def test_two_tailed_size_is_2alpha_at_harmonic():
    d = Design(5, 7)
    alpha = 0.025
    crit = ConstantCriterion(student_t_quantile(1.0 - alpha, d.nu))
    vp = VariancePoint.from_zeta(d.harmonic_zeta, d)
    assert prob_v_below_two_tailed(crit, vp, d) == pytest.approx(
        2 * alpha, abs=1e-11)


# ------------------------------------------------------------- dual routes


@pytest.fixture()
def bowl_criterion():
    nodes = build_psi_lattice()
    return TableCriterion(nodes, 2.0 + 0.3 * ((nodes - 45.0) / 45.0) ** 2)


@pytest.mark.parametrize("zeta", [0.25, 1.0, 3.7])
def test_beta_form_matches_z_form(bowl_criterion, zeta):
    # finite-interval quadrature vs adaptive integral over z in (0, inf)
    d = Design(5, 8)
    vp = VariancePoint.from_zeta(zeta, d)
    a = prob_v_below(bowl_criterion, vp, d)
    b = prob_v_below_zform(bowl_criterion, vp, d)
    assert a == pytest.approx(b, abs=2e-9)


def test_frozen_monte_carlo_check():
    # 2e6-replicate simulation, independent generator (PCG64 seed 20260823):
    # P(V <= 2.5 | 7x7, zeta = 3) = 0.984389, 3 s.e. = 2.63e-4
    d = Design(7, 7)
    p = prob_v_below(ConstantCriterion(2.5), VariancePoint.from_zeta(3.0, d), d)
    assert p == pytest.approx(0.984389, abs=2.7e-4)


@given(st.floats(0.1, 10.0), st.floats(-2.5, 2.5), sizes, sizes)
def test_swap_symmetry(zeta, v0, n1, n2):
    # exchanging the samples flips V's sign and mirrors the angle
    d = Design(n1, n2)
    vp = VariancePoint.from_zeta(zeta, d)
    ds = d.swapped()
    vps = VariancePoint.from_zeta(1.0 / zeta, ds)
    crit = ConstantCriterion(v0)
    lhs = prob_v_below(crit, vp, d)
    rhs = 1.0 - prob_v_below(crit.negated(), vps, ds)
    assert lhs == pytest.approx(rhs, abs=1e-10)


def test_swap_symmetry_table_criterion(bowl_criterion):
    # table criteria mirror node-for-node thanks to the symmetric lattice
    d = Design(4, 9)
    zeta = 2.3
    mirrored = TableCriterion(bowl_criterion.nodes, bowl_criterion.values[::-1])
    lhs = prob_v_below(bowl_criterion, VariancePoint.from_zeta(zeta, d), d)
    rhs = 1.0 - prob_v_below(
        mirrored.negated(), VariancePoint.from_zeta(1.0 / zeta, d.swapped()),
        d.swapped())
    assert lhs == pytest.approx(rhs, abs=1e-9)


# --------------------------------------------------------------- inf limit


@given(st.floats(-3, 3), st.sampled_from([2, 6, 15]))
def test_inf_limit_endpoints(v0, nu2):
    crit = ConstantCriterion(v0)
    assert prob_v_below_inf_n1(crit, 0.0, nu2) == pytest.approx(
        student_t_cdf(v0, nu2), abs=1e-10)
    assert prob_v_below_inf_n1(crit, 1.0, nu2) == pytest.approx(
        normal_cdf(v0), abs=1e-12)


def test_inf_limit_degenerate_nu2():
    from twosample.distributions import INFINITY
    crit = ConstantCriterion(1.7)
    assert prob_v_below_inf_n1(crit, 0.4, INFINITY) == pytest.approx(
        normal_cdf(1.7), abs=1e-13)


def test_inf_limit_approached_by_large_n1():
    # finite evaluation at n1 = 4000 should be close to the limit form
    crit = ConstantCriterion(2.0)
    gamma = 0.35
    lim = prob_v_below_inf_n1(crit, gamma, 9)
    d = Design(4000, 10)
    fin = prob_v_below(crit, VariancePoint.from_gamma(gamma, d), d)
    assert fin == pytest.approx(lim, abs=5e-4)


# ------------------------------------------------------------ guessed ratio


@given(st.floats(0.2, 5.0), st.floats(-2.5, 2.5), sizes, sizes)
def test_t_guess_exact_when_guess_right(zeta_guess, t_crit, n1, n2):
    d = Design(n1, n2)
    vp = VariancePoint.from_zeta(zeta_guess, d)
    p = prob_t_guess_below(t_crit, zeta_guess, vp, d)
    assert p == pytest.approx(student_t_cdf(t_crit, d.nu), abs=1e-11)


def test_t_guess_frozen_monte_carlo():
    # same 2e6-replicate protocol as above, wrong guess (zt = 4, true zeta = 1):
    # P(T(4) <= 1.9) = 0.979519, 3 s.e. = 3.00e-4
    d = Design(7, 7)
    p = prob_t_guess_below(1.9, 4.0, VariancePoint.from_zeta(1.0, d), d)
    assert p == pytest.approx(0.979519, abs=3.1e-4)


def test_t_guess_weights_match_pooled_at_unit_guess():
    # T(1) is the classical pooled statistic; its weights recover the
    # textbook (1/n1 + 1/n2) * pooled-variance normalization
    d = Design(5, 9)
    expected = ((4 / 12) * (1 / 5 + 1 / 9), (8 / 12) * (1 / 5 + 1 / 9))
    assert np.allclose(t_guess_weights(1.0, d), expected)
