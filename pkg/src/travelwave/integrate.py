"""Scalar Dormand-Prince 5(4) integrator with adaptive step size.

Every ODE in this package is scalar, so the stepper works on plain floats
rather than arrays; that keeps the per-step overhead low enough to push
through the stiff stretches near the critical curve with an explicit method.
"""
from __future__ import annotations

import math

from .errors import IntegrationFailure

# Butcher tableau (Hairer, Norsett & Wanner, table 5.2)
_C2, _C3, _C4, _C5 = 1 / 5, 3 / 10, 4 / 5, 8 / 9
_A21 = 1 / 5
_A31, _A32 = 3 / 40, 9 / 40
_A41, _A42, _A43 = 44 / 45, -56 / 15, 32 / 9
_A51, _A52, _A53, _A54 = 19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729
_A61, _A62, _A63, _A64, _A65 = 9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656
_B1, _B3, _B4, _B5, _B6 = 35 / 384, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84
# b - b_hat
_E1, _E3, _E4, _E5, _E6, _E7 = (
    71 / 57600, -71 / 16695, 71 / 1920, -17253 / 339200, 22 / 525, -1 / 40,
)

_SAFETY = 0.9
_MIN_FACTOR = 0.2
_MAX_FACTOR = 5.0


def dopri5(fun, t0, y0, t_end, tol, *, h0=None, max_step=math.inf, max_steps=2_000_000, stop=None):
    """Integrate ``y' = fun(t, y)`` from ``t0`` to ``t_end`` (``t_end > t0``).

    The local error estimate of each accepted step is kept below ``tol``
    (absolute, so callers integrate log-scaled quantities to get relative
    control). ``stop(t, y)`` may end the run early after any accepted step.

    Returns lists ``ts, ys, fs`` of accepted nodes and derivatives there.
    """
    if not t_end > t0:
        raise ValueError("t_end must exceed t0")
    t, y = float(t0), float(y0)
    f = fun(t, y)
    if not math.isfinite(f):
        raise IntegrationFailure(f"non-finite derivative at start t={t}")
    span = t_end - t0
    if h0 is None:
        h = min(max_step, span, 0.01 * tol ** 0.2 / max(abs(f), 1e-300) if f else span)
    else:
        h = min(h0, max_step, span)
    ts, ys, fs = [t], [y], [f]
    hmin = 1e-14 * max(abs(t0), abs(t_end), 1.0)
    steps = 0
    while t < t_end:
        if steps >= max_steps:
            raise IntegrationFailure(f"step budget exhausted at t={t}")
        steps += 1
        last = t + h >= t_end
        if last:
            h = t_end - t
        k1 = f
        k2 = fun(t + _C2 * h, y + h * _A21 * k1)
        k3 = fun(t + _C3 * h, y + h * (_A31 * k1 + _A32 * k2))
        k4 = fun(t + _C4 * h, y + h * (_A41 * k1 + _A42 * k2 + _A43 * k3))
        k5 = fun(t + _C5 * h, y + h * (_A51 * k1 + _A52 * k2 + _A53 * k3 + _A54 * k4))
        k6 = fun(t + h, y + h * (_A61 * k1 + _A62 * k2 + _A63 * k3 + _A64 * k4 + _A65 * k5))
        y_new = y + h * (_B1 * k1 + _B3 * k3 + _B4 * k4 + _B5 * k5 + _B6 * k6)
        t_new = t_end if last else t + h
        k7 = fun(t_new, y_new)
        err = abs(h * (_E1 * k1 + _E3 * k3 + _E4 * k4 + _E5 * k5 + _E6 * k6 + _E7 * k7))
        if not (math.isfinite(err) and math.isfinite(k7)):
            err = math.inf
        if err <= tol:
            t, y, f = t_new, y_new, k7
            ts.append(t)
            ys.append(y)
            fs.append(f)
            if stop is not None and stop(t, y):
                break
            factor = _MAX_FACTOR if err == 0 else min(_MAX_FACTOR, _SAFETY * (tol / err) ** 0.2)
        else:
            factor = _MIN_FACTOR if not math.isfinite(err) else max(_MIN_FACTOR, _SAFETY * (tol / err) ** 0.2)
        h = min(h * factor, max_step)
        if h < hmin:
            raise IntegrationFailure(f"step size collapsed to {h:.3e} at t={t}")
    return ts, ys, fs
