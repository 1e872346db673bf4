from __future__ import annotations

import functools

import pytest

from travelwave.model import validate_params
from travelwave.phase_plane import default_theta_max, solve_trajectory

REFERENCE = (2.0, 1.0, 0.5, 1.0)
SUB = (0.8, 2.0, 0.3, 1.0)


@functools.lru_cache(maxsize=None)
def trajectory_for(m, p, beta, b, k, theta_max=None, tol=1e-10):
    params = validate_params(m, p, beta, b, k)
    tm = default_theta_max(params) if theta_max is None else theta_max
    return solve_trajectory(params, tm, tol)


@pytest.fixture
def ref0():
    return validate_params(*REFERENCE, 0.0)
