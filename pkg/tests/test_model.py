from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from travelwave.errors import DomainError, UncoveredRegime
from travelwave.model import (
    Balance,
    End,
    SpeedSign,
    c_star,
    classify_regime,
    covered_ends,
    critical_curve,
    phase_rhs,
    profile_asymptote,
    separable_law,
    trajectory_asymptote,
    validate_params,
)
from travelwave.profile import power_law_travel_time

SQRT_1_6 = math.sqrt(1.6)


@pytest.mark.parametrize(
    "args, fragment",
    [
        ((0.0, 1, 0.5, 1, 0), "m must be positive"),
        ((2, -1, 0.5, 1, 0), "p must be positive"),
        ((2, 1, 0.5, 0, 0), "b must be positive"),
        ((2, 1, 0.0, 1, 0), "beta"),
        ((2, 1, 1.0, 1, 0), "beta"),
        ((0.5, 1, 0.5, 1, 0), "mp <= 1"),
        ((1, 1, 0.5, 1, 0), "mp <= 1"),
        ((2, 1, 0.5, 1, math.nan), "finite"),
        ((2, 1, 0.5, math.inf, 0), "finite"),
        ((1.5, 1, 0.5, 1, 1), "critical"),
        ((1.5, 1, 0.5 + 1e-13, 1, 1), "critical"),
        ((1.5, 1, 0.5 - 1e-13, 1, 1), "critical"),
        (("x", 1, 0.5, 1, 0), "non-numeric"),
    ],
)
def test_validation_rejects(args, fragment):
    with pytest.raises(DomainError, match=fragment):
        validate_params(*args)


def test_validation_accepts_tuple_and_just_outside_band():
    params = validate_params((2, 1, 0.5, 1, 0))
    assert params.as_tuple() == (2.0, 1.0, 0.5, 1.0, 0.0)
    validate_params(1.5, 1, 0.5 + 1e-9, 1, 1)
    with pytest.raises(DomainError):
        validate_params((2, 1, 0.5))


def test_classify_regime():
    r = classify_regime(validate_params(2, 1, 0.5, 1, 1))
    assert r.speed_sign is SpeedSign.POSITIVE and r.balance is Balance.SUPER
    r = classify_regime(validate_params(0.8, 2, 0.3, 1, -1))
    assert r.speed_sign is SpeedSign.NEGATIVE and r.balance is Balance.SUB
    assert classify_regime(validate_params(2, 1, 0.5, 1, 0)).label == "zero/super"


@settings(max_examples=60, deadline=None)
@given(
    m=st.floats(0.3, 5), p=st.floats(0.3, 5), beta=st.floats(0.01, 0.99),
    b=st.floats(1e-3, 1e3), k=st.floats(1e-3, 1e3), sign=st.sampled_from([-1.0, 1.0]),
    scale_b=st.floats(1e-3, 1e3), scale_k=st.floats(1e-3, 1e3),
)
def test_balance_is_scale_invariant(m, p, beta, b, k, sign, scale_b, scale_k):
    try:
        base = validate_params(m, p, beta, b, sign * k)
    except DomainError:
        return
    scaled = validate_params(m, p, beta, b * scale_b, sign * k * scale_k)
    assert classify_regime(base) == classify_regime(scaled)


def test_phase_rhs_values_and_domain():
    params = validate_params(2, 1, 0.5, 1, 0)
    # 2 * theta^1.5 / upsilon at theta=1, upsilon=2
    assert phase_rhs(params, 1.0, 2.0) == pytest.approx(1.0, rel=1e-15)
    with pytest.raises(DomainError):
        phase_rhs(params, 0.0, 1.0)
    with pytest.raises(DomainError):
        phase_rhs(params, 1.0, 0.0)


def test_critical_curve_examples():
    params = validate_params(2, 1, 0.5, 1, -1)
    assert critical_curve(params, 1.0) == pytest.approx(2.0, rel=1e-14)
    assert critical_curve(params, 4.0) == pytest.approx(16.0, rel=1e-14)
    assert critical_curve(validate_params(1.5, 1, 0.5 + 1e-6, 1, -2), 1.0) == pytest.approx(0.75, rel=1e-5)
    with pytest.raises(DomainError):
        critical_curve(validate_params(2, 1, 0.5, 1, 1), 1.0)


@pytest.mark.parametrize("args", [(2, 1, 0.5, 1, -1), (0.8, 2, 0.3, 1, -1), (3, 0.6, 0.2, 2, -0.5)])
def test_rhs_vanishes_on_critical_curve(args):
    params = validate_params(*args)
    for j in range(-3, 4):
        theta = 10.0 ** j
        ups = critical_curve(params, theta)
        term = params.b * params.m * theta ** (params.m + params.beta - 1) * ups ** (-1 / params.p)
        assert abs(phase_rhs(params, theta, ups)) <= 1e-12 * abs(term)


def test_trajectory_asymptote_examples():
    s = trajectory_asymptote(validate_params(2, 1, 0.5, 1, 1), End.ORIGIN)
    assert (s.item, s.constant, s.exponent) == (4, pytest.approx(1.0), 1.0)
    s = trajectory_asymptote(validate_params(2, 1, 0.5, 1, 1), End.INFINITY)
    assert s.item == 2
    assert s.constant == pytest.approx(1.264911, abs=1e-6)
    assert s.exponent == pytest.approx(1.25)
    s = trajectory_asymptote(validate_params(2, 1, 0.5, 1, -1), End.ORIGIN)
    assert (s.item, s.constant, s.exponent) == (6, pytest.approx(2.0), pytest.approx(1.5))
    sub = validate_params(0.8, 2, 0.3, 1, 1)
    assert trajectory_asymptote(sub, End.ORIGIN).item == 1
    assert trajectory_asymptote(sub, End.INFINITY).item == 3
    assert trajectory_asymptote(validate_params(0.8, 2, 0.3, 1, -1), End.INFINITY).item == 5


def test_uncovered_pairs_for_zero_speed():
    with pytest.raises(UncoveredRegime):
        trajectory_asymptote(validate_params(2, 1, 0.5, 1, 0), End.ORIGIN)
    with pytest.raises(UncoveredRegime):
        profile_asymptote(validate_params(0.8, 2, 0.3, 1, 0), End.INFINITY)
    assert covered_ends(validate_params(2, 1, 0.5, 1, 0)) == [End.INFINITY]
    assert covered_ends(validate_params(0.8, 2, 0.3, 1, 0)) == [End.ORIGIN]
    assert covered_ends(validate_params(2, 1, 0.5, 1, 1)) == [End.ORIGIN, End.INFINITY]


@pytest.mark.parametrize("args", [(2, 1, 0.5, 1, -1), (3, 0.6, 0.2, 2, -3), (1.2, 2, 0.4, 0.7, -0.2)])
def test_critical_law_matches_critical_curve(args):
    params = validate_params(*args)
    spec = trajectory_asymptote(params, End.ORIGIN)
    thetas = np.geomspace(1e-4, 1e4, 10)
    np.testing.assert_allclose(spec(thetas), critical_curve(params, thetas), rtol=1e-12)


@pytest.mark.parametrize("args", [(2, 1, 0.5, 1), (3, 0.6, 0.2, 2), (0.8, 2, 0.3, 1), (1, 3, 0.5, 0.1)])
def test_reaction_law_is_exact_for_zero_speed(args):
    params = validate_params(*args, 0.0)
    law = separable_law(params)
    for theta in np.geomspace(1e-3, 1e3, 7):
        slope = law.exponent * law(theta) / theta
        assert phase_rhs(params, theta, law(theta)) == pytest.approx(slope, rel=1e-10)


def test_profile_asymptote_examples():
    s = profile_asymptote(validate_params(2, 1, 0.5, 1, 0), End.INFINITY)
    assert s.constant == pytest.approx(0.225 ** (2 / 3), rel=1e-12)
    assert s.constant == pytest.approx(0.369928, abs=1e-5)
    assert s.exponent == pytest.approx(4 / 3)
    s = profile_asymptote(validate_params(2, 1, 0.5, 1, 1), End.ORIGIN)
    assert (s.constant, s.exponent) == (pytest.approx(0.5), pytest.approx(1.0))
    s = profile_asymptote(validate_params(2, 1, 0.5, 1, -1), End.ORIGIN)
    assert (s.constant, s.exponent) == (pytest.approx(0.25), pytest.approx(2.0))


def test_worked_constants_for_second_reference_set():
    # (m, p, beta, b) = (3, 0.6, 0.2, 2): A = 5^{3/8}, q = 6/5, C_* = 5^{5/8}/3, profile exponent 1
    params = validate_params(3, 0.6, 0.2, 2, 0)
    law = separable_law(params)
    assert law.constant == pytest.approx(5 ** 0.375, rel=1e-13)
    assert law.exponent == pytest.approx(1.2, rel=1e-13)
    assert c_star(params) == pytest.approx(5 ** 0.625 / 3, rel=1e-13)


@settings(max_examples=80, deadline=None)
@given(m=st.floats(0.3, 6), p=st.floats(0.2, 6), beta=st.floats(0.01, 0.99), b=st.floats(1e-2, 1e2))
def test_c_star_matches_quadrature_of_reaction_law(m, p, beta, b):
    try:
        params = validate_params(m, p, beta, b, 0.0)
    except DomainError:
        return
    law = separable_law(params)
    # phi(z) = C_* z^{q_z} inverts z(phi) = m A^{-1/p} phi^e / e
    z1 = power_law_travel_time(params, law, 1.0)
    q_z = (1 + p) / (m * p - beta)
    assert c_star(params) * z1 ** q_z == pytest.approx(1.0, rel=1e-10)
