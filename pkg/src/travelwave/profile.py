"""Traveling-wave profile phi(z) reconstructed from a phase-plane trajectory.

Along the wave, ``dz = m theta^{m-1} upsilon(theta)^{-1/p} d theta``, so the
travel time to reach level ``phi`` is

    z(phi) = m * integral_0^phi theta^{m-1} upsilon(theta)^{-1/p} d theta.

The integrand blows up at the origin (exponent in (-1, 0)); the head
``[0, seed_end]`` is integrated in closed form against the seed law and the
rest by adaptive Gauss-Legendre quadrature over the trajectory's Hermite
pieces in ``ln theta``.  ``z`` is strictly increasing in ``phi``, so the
profile is recovered by bracketed root finding.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .errors import DomainError, QuadratureFailure, RangeExceeded
from .model import ModelParams, origin_seed_law
from .phase_plane import Kind, PowerSeed, SlowManifoldSeed, Trajectory, eval_trajectory

_GL_X, _GL_W = np.polynomial.legendre.leggauss(8)
_MAX_DEPTH = 40


def origin_exponent(params: ModelParams) -> float:
    """Exponent ``m - 1 - q/p`` of the travel-time integrand at the origin."""
    law = origin_seed_law(params)
    return params.m - 1.0 - law.exponent / params.p


def check_integrable(params: ModelParams) -> float:
    e = origin_exponent(params)
    if not e > -1.0:
        raise DomainError(f"travel-time integrand not integrable at the origin (exponent {e:.6g})")
    return e


def power_law_travel_time(params: ModelParams, law, phi: float) -> float:
    """Closed-form ``m int_0^phi theta^{m-1} (A theta^q)^{-1/p} d theta``."""
    if phi <= 0:
        return 0.0
    e = params.m - law.exponent / params.p
    if not e > 0:
        raise DomainError(f"travel-time integrand not integrable at the origin (exponent {e - 1:.6g})")
    return params.m * math.exp(-law.log_constant / params.p + e * math.log(phi)) / e


def _illinois(fun, a, b, fa, fb, xtol, max_iter=200):
    """Root of a monotone function on ``[a, b]`` by regula falsi with the Illinois fix.

    Stops when the bracket or the last secant step is below ``xtol``.
    """
    if fa == 0.0:
        return a
    if fb == 0.0:
        return b
    if fa * fb > 0:
        raise ValueError("root not bracketed")
    side = 0
    c_prev = a
    c = b
    for _ in range(max_iter):
        c = (a * fb - b * fa) / (fb - fa)
        if not a < c < b:
            c = 0.5 * (a + b)
        fc = fun(c)
        if fc == 0.0:
            return c
        if fc * fb > 0:
            b, fb = c, fc
            if side == -1:
                fa *= 0.5
            side = -1
        else:
            a, fa = c, fc
            if side == 1:
                fb *= 0.5
            side = 1
        if b - a <= xtol or abs(c - c_prev) <= xtol:
            return c
        c_prev = c
    return c


class TravelTimeMap:
    """Monotone map ``phi -> z`` for one singular trajectory, with its inverse."""

    def __init__(self, traj: Trajectory, qtol: float = 1e-10):
        if traj.kind is not Kind.SINGULAR:
            raise DomainError("travel time needs the singular trajectory")
        if not qtol > 0:
            raise DomainError("qtol must be positive")
        self.traj = traj
        self.params = traj.params
        self.qtol = qtol
        self.exponent = check_integrable(self.params)
        self.theta0 = traj.seed_end
        self._x = np.log(traj.thetas)
        self._dz = self._integrand(self._x)
        pieces = self._quad(self._x[:-1], self._x[1:])
        self.cum = self.head(self.theta0) + np.concatenate([[0.0], np.cumsum(pieces)])

    # head [0, theta] under the seed law
    def head(self, theta: float) -> float:
        if theta <= 0:
            return 0.0
        seed = self.traj.seed
        m, p, beta, b, k = self.params.as_tuple()
        if isinstance(seed, SlowManifoldSeed):
            # integrand (|k|/b) theta^{-beta} U^{-1/p}, with U^{-1/p} = 1 + gU + c g^2 U'
            u = seed.coefficients
            n = len(u)
            q = seed.law.exponent
            c = (q - 1.0) / q
            v = np.zeros(n + 1)
            v[0] = 1.0
            v[1:] += u
            v[2:] += c * (np.arange(n) * u)[1:]
            gamma = q * seed.law.constant / abs(k)
            j = np.arange(n + 1)
            powers = 1.0 - beta + j * (q - 1.0)
            terms = v * gamma ** j * np.exp(powers * math.log(theta)) / powers
            return float(abs(k) / b * math.fsum(terms))
        if isinstance(seed, PowerSeed):
            return power_law_travel_time(self.params, seed.law, theta)
        raise DomainError(f"no closed-form head for seed {type(seed).__name__}")

    def _integrand(self, s):
        ly = self.traj.log_eval(s)
        m, p = self.params.m, self.params.p
        return m * np.exp(m * s - ly / p)

    def _gl(self, a, b):
        mid = 0.5 * (a + b)
        half = 0.5 * (b - a)
        pts = mid[:, None] + half[:, None] * _GL_X[None, :]
        return half * (self._integrand(pts) @ _GL_W)

    def _quad(self, a, b):
        """Adaptive composite Gauss-Legendre on each ``[a_i, b_i]``, relative tolerance ``qtol``."""
        a = np.asarray(a, dtype=float)
        b = np.asarray(b, dtype=float)
        out = np.zeros(a.shape)
        owner = np.arange(a.size)
        coarse = self._gl(a, b)
        for _ in range(_MAX_DEPTH):
            mid = 0.5 * (a + b)
            left = self._gl(a, mid)
            right = self._gl(mid, b)
            fine = left + right
            ok = np.abs(fine - coarse) <= self.qtol * np.abs(fine)
            np.add.at(out, owner[ok], fine[ok])
            if np.all(ok):
                return out
            bad = ~ok
            a = np.concatenate([a[bad], mid[bad]])
            b = np.concatenate([mid[bad], b[bad]])
            owner = np.concatenate([owner[bad], owner[bad]])
            coarse = np.concatenate([left[bad], right[bad]])
        raise QuadratureFailure(f"adaptive quadrature did not reach qtol={self.qtol:g}")

    @property
    def z_max(self) -> float:
        return float(self.cum[-1])

    def __call__(self, phi: float) -> float:
        """Travel time ``z`` at level ``phi``."""
        if phi <= 0:
            return 0.0
        if phi > self.traj.theta_max * (1 + 1e-12):
            raise RangeExceeded(f"phi={phi:.6e} above computed range {self.traj.theta_max:.6e}")
        if phi <= self.theta0:
            return self.head(phi)
        s = min(math.log(phi), self._x[-1])
        i = min(int(np.searchsorted(self._x, s, side="right")) - 1, len(self._x) - 2)
        if s == self._x[i]:
            return float(self.cum[i])
        return float(self.cum[i] + self._quad([self._x[i]], [s])[0])

    def inverse(self, z: float) -> float:
        """Level ``phi`` reached at travel time ``z`` (0 for ``z <= 0``)."""
        if z <= 0:
            return 0.0
        if z > self.z_max * (1 + 1e-12):
            raise RangeExceeded(f"z={z:.6e} beyond reachable range {self.z_max:.6e}")
        xtol = 0.1 * self.qtol
        if z <= self.cum[0]:
            seed = self.traj.seed
            if isinstance(seed, PowerSeed):
                e = self.exponent + 1.0
                law = seed.law
                m, p = self.params.m, self.params.p
                return math.exp((math.log(z * e / m) + law.log_constant / p) / e)
            lo = math.log(self.theta0) - 50.0
            hi = math.log(self.theta0)
            fun = lambda s: math.log(self.head(math.exp(s)) / z)  # noqa: E731
            return math.exp(_illinois(fun, lo, hi, fun(lo), fun(hi), xtol))
        i = int(np.searchsorted(self.cum, z, side="left")) - 1
        i = min(max(i, 0), len(self._x) - 2)
        if z >= self.cum[i + 1]:
            return float(self.traj.thetas[i + 1])
        base = self.cum[i]
        x0, x1 = self._x[i], self._x[i + 1]

        def fun(s):
            if s <= x0:
                return base - z
            return base + self._quad([x0], [s])[0] - z

        # cubic Hermite guess for s(z) with slopes 1/(dz/ds), then a tight bracket
        h = self.cum[i + 1] - base
        t = (z - base) / h
        span = x1 - x0
        guess = (x0 * (2 * t**3 - 3 * t**2 + 1) + x1 * (-2 * t**3 + 3 * t**2)
                 + h * (t**3 - 2 * t**2 + t) / self._dz[i] + h * (t**3 - t**2) / self._dz[i + 1])
        delta = 1e-6 * span
        lo, hi = max(x0, guess - delta), min(x1, guess + delta)
        if lo < hi:
            f_lo, f_hi = fun(lo), fun(hi)
            if f_lo <= 0.0 <= f_hi:
                return math.exp(_illinois(fun, lo, hi, f_lo, f_hi, xtol))
        s = _illinois(fun, x0, x1, base - z, self.cum[i + 1] - z, xtol)
        return math.exp(s)


@lru_cache(maxsize=16)
def travel_time_map(traj: Trajectory, qtol: float = 1e-10) -> TravelTimeMap:
    return TravelTimeMap(traj, qtol)


def travel_time(params: ModelParams, traj: Trajectory, phi_target: float, qtol: float = 1e-10) -> float:
    _same_params(params, traj)
    return travel_time_map(traj, qtol)(phi_target)


def _same_params(params, traj):
    if params != traj.params:
        raise DomainError("trajectory was computed for different parameters")


@dataclass(frozen=True, eq=False)
class Profile:
    params: ModelParams
    zs: np.ndarray
    phis: np.ndarray
    fluxes: np.ndarray
    tmap: TravelTimeMap = field(repr=False)

    @property
    def z_reach(self) -> float:
        """Largest reachable z (the computed part of the maximal interval)."""
        return self.tmap.z_max

    def phi_at(self, z):
        z = np.asarray(z, dtype=float)
        out = np.array([self._phi_scalar(v) for v in z.ravel()]).reshape(z.shape)
        return float(out) if out.ndim == 0 else out

    def _phi_scalar(self, z: float) -> float:
        if z <= 0:
            return 0.0
        hit = np.nonzero(self.zs == z)[0]
        if hit.size:
            return float(self.phis[hit[0]])
        return self.tmap.inverse(z)


def reconstruct_profile(params: ModelParams, traj: Trajectory, z_grid, qtol: float = 1e-10) -> Profile:
    """Solve ``z(phi) = z`` for each grid value; zero for ``z <= 0``."""
    _same_params(params, traj)
    zs = np.asarray(z_grid, dtype=float)
    if zs.ndim != 1 or zs.size == 0:
        raise DomainError("z_grid must be a non-empty 1-D sequence")
    if np.any(np.diff(zs) <= 0):
        raise DomainError("z_grid must be strictly increasing")
    tmap = travel_time_map(traj, qtol)
    if zs[-1] > tmap.z_max * (1 + 1e-12):
        raise RangeExceeded(f"z={zs[-1]:.6e} beyond reachable range {tmap.z_max:.6e}")
    phis = np.array([tmap.inverse(z) for z in zs])
    pos = phis > 0
    fluxes = np.zeros_like(phis)
    fluxes[pos] = eval_trajectory(traj, phis[pos]) ** (1.0 / params.p)
    return Profile(params, zs, phis, fluxes, tmap)


def profile_flux(params: ModelParams, traj: Trajectory, profile: Profile, z):
    """``(phi^m)'(z) = upsilon(phi(z))^{1/p}``; zero for ``z <= 0``."""
    _same_params(params, traj)
    z_arr = np.asarray(z, dtype=float)
    if np.any(z_arr > profile.z_reach * (1 + 1e-12)):
        raise RangeExceeded("z beyond reachable range")
    phi = np.atleast_1d(profile.phi_at(z_arr))
    out = np.zeros_like(phi)
    pos = phi > 0
    out[pos] = eval_trajectory(traj, phi[pos]) ** (1.0 / params.p)
    return float(out[0]) if z_arr.ndim == 0 else out.reshape(z_arr.shape)


def default_z_grid(traj: Trajectory, n: int = 200, qtol: float = 1e-10, decades: float | None = None):
    """Geometric grid over ``[z(seed_end), 0.99 z(theta_max)]``, optionally only its top decades."""
    tmap = travel_time_map(traj, qtol)
    hi = 0.99 * tmap.z_max
    lo = tmap.cum[0]
    if decades is not None:
        lo = max(lo, hi * 10.0 ** (-decades))
    return np.geomspace(lo, hi, n)
