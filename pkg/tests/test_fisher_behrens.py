"""Variance-angle (Fisher-Behrens) criteria: mixture law, roots, tables."""

import numpy as np
import pytest
from hypothesis import given, strategies as st

from twosample.design import Design
from twosample.distributions import (
    INFINITY,
    normal_quantile,
    student_t_cdf,
    student_t_quantile,
)
from twosample.fisher_behrens import (
    FBQuery,
    fb_confidence,
    fb_criterion_inf_n1,
    fb_prob,
    solve_fb_criterion,
)

sizes = st.integers(2, 20)


def test_frozen_convolution_value():
    # two independent Student variables combined at 40 degrees; frozen from a
    # 30-digit double quadrature of the t6/t4 convolution.  The implementation
    # evaluates the equivalent beta scale mixture, so agreement here ties the
    # two representations together.
    assert fb_confidence(2.0, 40.0, Design(7, 5)) == pytest.approx(
        0.88680573537686675186, abs=1e-12)


def test_frozen_one_df_value():
    # one-sided cdf frozen 0.72397523450429211657 at v=1.2, 45 degrees, t1/t1
    expected = 2.0 * 0.72397523450429211657 - 1.0
    assert fb_confidence(1.2, 45.0, Design(2, 2)) == pytest.approx(
        expected, abs=1e-11)


@given(st.floats(0.05, 6.0), st.floats(0.0, 90.0), sizes, sizes)
def test_confidence_swap_symmetry(v, theta, n1, n2):
    d = Design(n1, n2)
    assert fb_confidence(v, theta, d) == pytest.approx(
        fb_confidence(v, 90.0 - theta, d.swapped()), abs=1e-10)


@given(st.floats(0.05, 6.0), sizes, sizes)
def test_confidence_endpoints_are_student(v, n1, n2):
    # the mixture collapses onto a single Student law at theta = 0 and 90
    d = Design(n1, n2)
    assert fb_confidence(v, 0.0, d) == pytest.approx(
        2.0 * student_t_cdf(v, d.nu2) - 1.0, abs=1e-10)
    assert fb_confidence(v, 90.0, d) == pytest.approx(
        2.0 * student_t_cdf(v, d.nu1) - 1.0, abs=1e-10)


@given(st.floats(0.0, 5.5), st.floats(0.0, 90.0))
def test_confidence_monotone_in_v(v, theta):
    d = Design(4, 6)
    assert fb_confidence(v, theta, d) <= fb_confidence(v + 0.25, theta, d) + 1e-12


def test_confidence_at_zero_is_zero():
    assert fb_confidence(0.0, 30.0, Design(5, 5)) == pytest.approx(0.0, abs=1e-12)


def test_confidence_array_broadcast():
    d = Design(5, 4)
    v = np.array([0.5, 1.5, 2.5])
    out = fb_confidence(v, 37.0, d)
    assert out.shape == (3,)
    assert out[0] < out[1] < out[2]
    scalar = fb_confidence(1.5, 37.0, d)
    assert out[1] == pytest.approx(scalar, abs=1e-14)


def test_fb_prob_query_validation():
    with pytest.raises(ValueError):
        FBQuery(Design(4, 4), 91.0, 2.0)
    with pytest.raises(ValueError):
        fb_prob(FBQuery(Design(INFINITY, 4), 45.0, 2.0))


def test_fb_prob_consistent_with_confidence():
    d = Design(6, 3)
    v, theta = 1.8, 52.0
    p = fb_prob(FBQuery(d, theta, v))
    assert fb_confidence(v, theta, d) == pytest.approx(2.0 * p - 1.0, abs=1e-13)


# ------------------------------------------------------------------ tables


def test_solve_table_pins_and_roots():
    d = Design(4, 7)
    alpha = 0.05
    t = solve_fb_criterion(d, alpha)
    assert t.family == "fisher-behrens" and t.converged and t.sweeps == 0
    assert t.values[0] == student_t_quantile(0.95, d.nu2)
    assert t.values[-1] == student_t_quantile(0.95, d.nu1)
    # interior nodes solve the confidence equation
    for i in (13, 45, 77):
        conf = fb_confidence(float(t.values[i]), float(t.nodes[i]), d)
        assert conf == pytest.approx(1.0 - 2 * alpha, abs=1e-10)
    assert t.max_abs_residual < 1e-10


def test_symmetric_design_gives_symmetric_table():
    t = solve_fb_criterion(Design(5, 5), 0.025)
    assert t.values == pytest.approx(t.values[::-1], abs=1e-9)


def test_table_dominates_pooled_quantile():
    # conservatism: the criterion never dips below t_nu at the same level
    for d, alpha in ((Design(3, 3), 0.05), (Design(6, 6), 0.2)):
        t = solve_fb_criterion(d, alpha)
        assert np.min(t.values) >= student_t_quantile(1.0 - alpha, d.nu) - 1e-12


def test_solve_rejects_bad_alpha():
    with pytest.raises(ValueError):
        solve_fb_criterion(Design(4, 4), 0.5)


# ---------------------------------------------------------------- inf limit


def test_inf_limit_frozen_root():
    # 30-digit root of the normal/t10 convolution at 45 degrees
    assert fb_criterion_inf_n1(10, 45.0, 0.025) == pytest.approx(
        2.0888784986018511629, abs=1e-9)


def test_inf_limit_endpoints():
    assert fb_criterion_inf_n1(8, 90.0, 0.025) == pytest.approx(
        normal_quantile(0.975), abs=1e-9)
    assert fb_criterion_inf_n1(8, 0.0, 0.025) == pytest.approx(
        student_t_quantile(0.975, 8), abs=1e-8)


def test_inf_limit_validation():
    with pytest.raises(ValueError):
        fb_criterion_inf_n1(INFINITY, 45.0, 0.025)
    with pytest.raises(ValueError):
        fb_criterion_inf_n1(8, 95.0, 0.025)
    with pytest.raises(ValueError):
        fb_criterion_inf_n1(8, 45.0, 0.6)


def test_inf_limit_is_limit_of_finite_tables():
    # large-but-finite first sample approaches the limiting tabulation
    value_fin = solve_fb_criterion(Design(2001, 9), 0.025).value_at_theta(45.0)
    assert float(value_fin) == pytest.approx(
        fb_criterion_inf_n1(8, 45.0, 0.025), abs=2e-3)
