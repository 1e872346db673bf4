from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import SUB, trajectory_for
from travelwave.errors import DomainError, RangeExceeded
from travelwave.model import c_star, origin_seed_law, validate_params
from travelwave.phase_plane import solve_trajectory
from travelwave.profile import (
    check_integrable,
    default_z_grid,
    origin_exponent,
    power_law_travel_time,
    profile_flux,
    reconstruct_profile,
    travel_time,
    travel_time_map,
)
from travelwave.verify import profile_fits

Z_AT_ONE = (2 / math.sqrt(1.6)) / 0.75


@pytest.fixture(scope="module")
def ref0():
    return trajectory_for(2, 1, 0.5, 1, 0)


def test_travel_time_examples(ref0):
    p = ref0.params
    assert travel_time(p, ref0, 1.0) == pytest.approx(2.108185, abs=1e-6)
    assert travel_time(p, ref0, 1.0) == pytest.approx(Z_AT_ONE, rel=1e-9)
    assert travel_time(p, ref0, 1e-12) == pytest.approx(Z_AT_ONE * 1e-9, rel=1e-9)
    with pytest.raises(RangeExceeded):
        travel_time(p, ref0, 2 * ref0.theta_max)


def test_closed_form_head_example():
    params = validate_params(2, 1, 0.5, 1, -1)
    law = origin_seed_law(params)
    assert law.exponent == pytest.approx(1.5)
    assert power_law_travel_time(params, law, 0.01) == pytest.approx(0.2, rel=1e-12)
    assert power_law_travel_time(params, law, 0.0) == 0.0


def test_inverse_examples(ref0):
    p = ref0.params
    prof = reconstruct_profile(p, ref0, [1.0, 2.108185, Z_AT_ONE])
    assert prof.phis[0] == pytest.approx(c_star(p), rel=1e-8)
    assert prof.phis[1] == pytest.approx(1.0, abs=1e-6)
    assert prof.phis[2] == pytest.approx(1.0, rel=1e-9)
    assert prof.phi_at(0.0) == 0.0
    assert prof.phi_at(-3.0) == 0.0


def test_flux_examples(ref0):
    p = ref0.params
    prof = reconstruct_profile(p, ref0, [Z_AT_ONE])
    assert profile_flux(p, ref0, prof, Z_AT_ONE) == pytest.approx(1.264911, abs=1e-6)
    assert profile_flux(p, ref0, prof, 0.0) == 0.0
    assert profile_flux(p, ref0, prof, -1.0) == 0.0
    small = profile_flux(p, ref0, prof, np.array([1e-2, 1e-4, 1e-6]))
    assert np.all(np.diff(small) < 0) and small[-1] < 1e-3
    with pytest.raises(RangeExceeded):
        profile_flux(p, ref0, prof, 10 * prof.z_reach)


def test_errors(ref0):
    p = ref0.params
    with pytest.raises(RangeExceeded):
        reconstruct_profile(p, ref0, [1.0, 2 * travel_time_map(ref0).z_max])
    with pytest.raises(DomainError):
        reconstruct_profile(p, ref0, [2.0, 1.0])
    with pytest.raises(DomainError):
        reconstruct_profile(p, ref0, [])
    with pytest.raises(DomainError):
        reconstruct_profile(validate_params(2, 1, 0.5, 1, 1), ref0, [1.0])


@pytest.mark.parametrize("args", [(2, 1, 0.5, 1, 0), (2, 1, 0.5, 1, 1), (2, 1, 0.5, 1, -1), (*SUB, 1), (*SUB, -1)])
def test_round_trip_and_monotone(args):
    traj = trajectory_for(*args)
    qtol = 1e-10
    zs = default_z_grid(traj, 60, qtol)
    prof = reconstruct_profile(traj.params, traj, zs, qtol)
    assert np.all(np.diff(prof.phis) > 0)
    assert np.all(prof.fluxes > 0)
    back = np.array([travel_time(traj.params, traj, phi, qtol) for phi in prof.phis])
    np.testing.assert_allclose(back, zs, rtol=10 * qtol)


@pytest.mark.parametrize("args", [(2, 1, 0.5, 1, 0), (2, 1, 0.5, 1, 1), (*SUB, -1), (1.2, 1, 0.5, 1, 1)])
def test_profile_limit_ratios(args):
    traj = trajectory_for(*args)
    fits = profile_fits(traj)
    assert fits
    for fit in fits:
        assert fit.status == "pass", fit


def test_integrability_exponent():
    for args in [(2, 1, 0.5, 1, 0), (2, 1, 0.5, 1, 1), (2, 1, 0.5, 1, -1), (*SUB, -1), (1, 3, 0.5, 1, -1)]:
        params = validate_params(*args)
        assert check_integrable(params) == origin_exponent(params) > -1


@settings(max_examples=12, deadline=None)
@given(
    m=st.floats(0.6, 3.0),
    p=st.floats(0.6, 3.0),
    beta=st.floats(0.05, 0.9),
    b=st.floats(0.2, 3.0),
)
def test_zero_speed_exactness(m, p, beta, b):
    try:
        params = validate_params(m, p, beta, b, 0.0)
    except DomainError:
        return
    traj = solve_trajectory(params, 1e4)
    tmap = travel_time_map(traj)
    zs = np.geomspace(tmap.cum[0], 0.99 * tmap.z_max, 25)
    prof = reconstruct_profile(params, traj, zs)
    expo = (1 + p) / (m * p - beta)
    np.testing.assert_allclose(prof.phis, c_star(params) * zs ** expo, rtol=1e-8)
