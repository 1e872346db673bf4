"""Phase-plane trajectories ``upsilon(theta)`` through the degenerate origin.

Production path
    The singular trajectory is integrated in the desingularized variable
    ``W = upsilon^{(p+1)/p}``, whose equation

        dW/dtheta = (1+p)/p * (k W^{1/(p+1)} + b m theta^{m+beta-1})

    has no ``upsilon^{-1/p}`` blow-up.  We integrate ``ln W`` against
    ``ln theta`` so that both power-law ends become straight lines, and start
    from the origin asymptote at a seed radius where the neglected term is
    below the requested tolerance.

Verification path
    Upper family: ``upsilon(0) = eps``.  Lower family: ``upsilon(eps) = 0``,
    started through the inverse function ``v(t)`` (theta as a function of
    upsilon), whose right side is regular at the start point, then continued
    directly in theta.  Both families squeeze the singular trajectory.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .errors import BracketStall, DomainError, IntegrationFailure, RangeExceeded
from .integrate import dopri5
from .model import (
    AsymptoteSpec,
    Balance,
    End,
    ModelParams,
    classify_regime,
    origin_seed_law,
    profile_asymptote,
    trajectory_asymptote,
)

#: Largest step in ln(theta); keeps the log-log Hermite interpolant accurate.
MAX_LOG_STEP = 0.125
#: Stiffness ratio theta*|df/dupsilon| tolerated at the seed on the critical-curve law.
STIFF_SEED_RATIO = 1e3
#: Underflow floor on upsilon.
UPSILON_FLOOR = 1e-300
_EXP_MAX = 700.0


class Kind(enum.Enum):
    SINGULAR = "singular"
    UPPER = "regularized-upper"
    LOWER = "regularized-lower"
    ORACLE = "fixed-step-oracle"


# -- seeds -----------------------------------------------------------------------


@dataclass(frozen=True)
class PowerSeed:
    law: AsymptoteSpec
    valid_from: float = 0.0

    def __call__(self, theta):
        return self.law(theta)


@dataclass(frozen=True)
class SlowManifoldSeed:
    """Critical-curve law with its slow-manifold correction.

    Writing ``upsilon = C(theta) U(g)`` with ``C`` the critical curve and
    ``g = q C(theta) / (|k| theta)``, the trajectory equation becomes
    ``U = (1 + g U + (q-1)/q g^2 U')^{-p}``, solved here as a power series
    in ``g``.  The seed radius keeps ``g`` of order 1e-3, so eight terms are
    exact to rounding.
    """

    law: AsymptoteSpec
    params: ModelParams
    order: int = 8
    valid_from: float = 0.0

    @cached_property
    def coefficients(self) -> np.ndarray:
        q = self.law.exponent
        p = self.params.p
        n = self.order + 1
        c = (q - 1.0) / q
        binom = np.ones(n)
        for j in range(1, n):
            binom[j] = binom[j - 1] * (-p - j + 1) / j
        u = np.zeros(n)
        u[0] = 1.0
        for _ in range(n):
            du = np.arange(n) * u  # g U'
            x = np.zeros(n)
            x[1:] = u[:-1] + c * du[:-1]
            acc = np.zeros(n)
            power = np.zeros(n)
            power[0] = 1.0
            for j in range(n):
                acc += binom[j] * power
                power = np.convolve(power, x)[:n]
            u = acc
        return u

    def g(self, theta):
        return self.law.exponent * self.law(theta) / (abs(self.params.k) * theta)

    def log_slope(self, theta):
        """``d ln upsilon / d ln theta`` of the series: ``q + (q-1) g U'(g) / U(g)``."""
        q = self.law.exponent
        g = self.g(np.asarray(theta, dtype=float))
        u = np.polynomial.polynomial.polyval(g, self.coefficients)
        du = np.polynomial.polynomial.polyval(g, np.polynomial.polynomial.polyder(self.coefficients))
        return q + (q - 1.0) * g * du / u

    def __call__(self, theta):
        theta = np.asarray(theta, dtype=float)
        safe = np.where(theta > 0, theta, 1.0)
        poly = np.polynomial.polynomial.polyval(self.g(safe), self.coefficients)
        out = np.where(theta > 0, self.law(safe) * poly, 0.0)
        return float(out) if out.ndim == 0 else out


@dataclass(frozen=True)
class UpperSeed:
    """First Picard iterate of ``upsilon(0) = eps``."""

    params: ModelParams
    eps: float
    valid_from: float = 0.0

    def __call__(self, theta):
        m, p, beta, b, k = self.params.as_tuple()
        theta = np.asarray(theta, dtype=float)
        out = self.eps + k * theta + b * m / (m + beta) * self.eps ** (-1.0 / p) * theta ** (m + beta)
        return float(out) if out.ndim == 0 else out


@dataclass(frozen=True)
class LowerSeed:
    """Local law ``[b m (1+p)/p eps^{m+beta-1} (theta - eps)]^{p/(1+p)}`` near ``theta = eps``."""

    params: ModelParams
    eps: float

    @property
    def valid_from(self) -> float:
        return self.eps

    def __call__(self, theta):
        m, p, beta, b, _ = self.params.as_tuple()
        theta = np.asarray(theta, dtype=float)
        c = b * m * (1.0 + p) / p * self.eps ** (m + beta - 1.0)
        out = (c * np.clip(theta - self.eps, 0.0, None)) ** (p / (1.0 + p))
        return float(out) if out.ndim == 0 else out


# -- trajectory container and interpolation -------------------------------------------


def _limit_slopes(x, y, d):
    """Fritsch-Carlson limiting so the cubic Hermite interpolant is monotone per interval."""
    d = d.copy()
    h = np.diff(x)
    delta = np.diff(y) / h
    flat = delta == 0.0
    d[:-1][flat] = 0.0
    d[1:][flat] = 0.0
    for side in (slice(None, -1), slice(1, None)):
        wrong = ~flat & (np.sign(d[side]) * np.sign(delta) < 0)
        d[side][wrong] = 0.0
    with np.errstate(divide="ignore", invalid="ignore"):
        a = np.where(flat, 0.0, d[:-1] / delta)
        c = np.where(flat, 0.0, d[1:] / delta)
    r2 = a * a + c * c
    big = r2 > 9.0
    if np.any(big):
        tau = 3.0 / np.sqrt(r2[big])
        idx = np.nonzero(big)[0]
        d[idx] = tau * a[big] * delta[big]
        d[idx + 1] = tau * c[big] * delta[big]
    return d


@dataclass(frozen=True, eq=False)
class Trajectory:
    """Sampled ``upsilon(theta)`` with an analytic seed below ``seed_end``.

    Between nodes, ``ln upsilon`` is a monotone cubic Hermite interpolant in
    ``ln theta`` using the ODE slopes, so power laws are reproduced exactly.
    """

    params: ModelParams
    thetas: np.ndarray
    upsilons: np.ndarray
    rhs: np.ndarray
    seed_end: float
    seed: object
    kind: Kind
    eps: float | None = None
    _lx: np.ndarray = field(init=False, repr=False)
    _ly: np.ndarray = field(init=False, repr=False)
    _ld: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        lx = np.log(self.thetas)
        ly = np.log(self.upsilons)
        raw = self.rhs * self.thetas / self.upsilons
        object.__setattr__(self, "_lx", lx)
        object.__setattr__(self, "_ly", ly)
        object.__setattr__(self, "_ld", _limit_slopes(lx, ly, raw))
        for arr in (self.thetas, self.upsilons, self.rhs, lx, ly, self._ld):
            arr.setflags(write=False)

    @property
    def theta_max(self) -> float:
        return float(self.thetas[-1])

    def log_eval(self, log_theta):
        """``ln upsilon`` at ``ln theta`` inside the node range (no seed, no checks)."""
        s = np.asarray(log_theta, dtype=float)
        x, y, d = self._lx, self._ly, self._ld
        i = np.clip(np.searchsorted(x, s, side="right") - 1, 0, len(x) - 2)
        h = x[i + 1] - x[i]
        t = (s - x[i]) / h
        t2 = t * t
        t3 = t2 * t
        return ((2 * t3 - 3 * t2 + 1) * y[i] + (t3 - 2 * t2 + t) * h * d[i]
                + (-2 * t3 + 3 * t2) * y[i + 1] + (t3 - t2) * h * d[i + 1])

    def __call__(self, theta):
        return eval_trajectory(self, theta)


def eval_trajectory(traj: Trajectory, theta):
    theta_arr = np.asarray(theta, dtype=float)
    if np.any(~np.isfinite(theta_arr)) or np.any(theta_arr < 0):
        raise DomainError("theta must be finite and non-negative")
    if np.any(theta_arr > traj.theta_max * (1.0 + 1e-12)):
        raise RangeExceeded(f"theta above computed range {traj.theta_max:.6e}")
    if np.any(theta_arr < traj.seed.valid_from):
        raise RangeExceeded(f"theta below start of the trajectory ({traj.seed.valid_from:.6e})")
    out = np.empty_like(theta_arr)
    below = theta_arr < traj.seed_end
    if np.any(below):
        out[below] = traj.seed(theta_arr[below])
    above = ~below
    if np.any(above):
        at_node = above & (theta_arr == traj.seed_end)
        out[above] = np.exp(traj.log_eval(np.log(theta_arr[above])))
        out[at_node] = traj.upsilons[0]
    return float(out) if out.ndim == 0 else out


# -- right-hand sides --------------------------------------------------------------


def _log_w_rhs(params: ModelParams):
    """``d ln W / d ln theta`` as a closure over plain floats."""
    m, p, beta, b, k = params.as_tuple()
    c = (1.0 + p) / p
    a = p / (1.0 + p)
    log_bm = math.log(b * m)
    mb = m + beta
    log_abs_k = math.log(abs(k)) if k else 0.0
    sign_k = math.copysign(1.0, k) if k else 0.0

    def rhs(s, u):
        e2 = log_bm + mb * s - u
        if e2 > _EXP_MAX:
            return math.inf
        val = math.exp(e2)
        if sign_k:
            e1 = log_abs_k + s - a * u
            if e1 > _EXP_MAX:
                return math.inf
            val += sign_k * math.exp(e1)
        return c * val

    return rhs


def _integrate_log_w(params, theta_start, upsilon_start, theta_max, tol):
    p = params.p
    c = (1.0 + p) / p
    rhs = _log_w_rhs(params)
    s0 = math.log(theta_start)
    s1 = math.log(theta_max)
    u0 = c * math.log(max(upsilon_start, UPSILON_FLOOR))
    if s1 <= s0:
        return [s0], [u0], [rhs(s0, u0)]
    return dopri5(rhs, s0, u0, s1, tol, max_step=MAX_LOG_STEP)


def _nodes_from_log_w(params, ss, us, dus):
    a = params.p / (1.0 + params.p)
    s = np.asarray(ss)
    ly = a * np.asarray(us)
    theta = np.exp(s)
    ups = np.exp(ly)
    if np.any(ups <= 0) or not np.all(np.isfinite(ups)):
        raise IntegrationFailure("upsilon underflowed or overflowed")
    rhs = ups / theta * a * np.asarray(dus)
    return theta, ups, rhs


def _tail_nodes(seed: SlowManifoldSeed, theta_start: float, theta_max: float):
    """Nodes on the slow-manifold series from just past ``theta_start`` to ``theta_max``."""
    s0, s1 = math.log(theta_start), math.log(theta_max)
    n = max(1, math.ceil((s1 - s0) / MAX_LOG_STEP))
    thetas = np.exp(np.linspace(s0, s1, n + 1)[1:])
    thetas[-1] = theta_max
    ups = seed(thetas)
    return thetas, ups, ups / thetas * seed.log_slope(thetas)


def far_tail(params: ModelParams) -> tuple[SlowManifoldSeed, float] | None:
    """Analytic tail and its start for the stiff far field (k < 0, sub balance), else None."""
    if params.k >= 0 or classify_regime(params).balance is not Balance.SUB:
        return None
    law = trajectory_asymptote(params, End.INFINITY)
    return SlowManifoldSeed(law, params), _stiff_radius(params, law)


def _march(params: ModelParams, theta_start: float, upsilon_start: float, theta_max: float, tol: float,
           *, skip_first: bool = False):
    """Integrate in ``ln W`` from ``theta_start``; hand over to the analytic tail where it is stiff."""
    tail = far_tail(params)
    stop = theta_max
    if tail is not None and tail[1] < theta_max:
        stop = max(tail[1], theta_start)
    ss, us, dus = _integrate_log_w(params, theta_start, upsilon_start, stop, tol)
    i = 1 if skip_first else 0
    thetas, ups, rhs = _nodes_from_log_w(params, ss[i:], us[i:], dus[i:])
    if stop < theta_max:
        extra = _tail_nodes(tail[0], stop, theta_max)
        thetas, ups, rhs = (np.concatenate(pair) for pair in zip((thetas, ups, rhs), extra))
    return thetas, ups, rhs


# -- seed radius ---------------------------------------------------------------------


def _neglected_term(params: ModelParams, law: AsymptoteSpec):
    """``(r0, g)`` with the neglected/retained ratio ``r0 * theta**g`` for ``law``.

    The reaction law neglects the ``k`` term, the wave law the absorption
    term, and the critical-curve law the slope of ``upsilon``.
    """
    m, p, beta, b, k = params.as_tuple()
    if law.item in (1, 2):
        return abs(k) * math.exp(law.log_constant / p) / (b * m), 1.0 - law.exponent
    if law.item in (3, 4):
        return b * m * k ** (-(1.0 + p) / p), params.balance_gap / p
    if law.item in (5, 6):
        return law.exponent * law.constant / abs(k), law.exponent - 1.0
    return None


def _stiff_radius(params: ModelParams, law: AsymptoteSpec) -> float:
    """Theta where the stiffness ratio on the critical-curve law equals STIFF_SEED_RATIO."""
    q = law.exponent
    return (STIFF_SEED_RATIO * params.p * law.constant / abs(params.k)) ** (1.0 / (1.0 - q))


def seed_radius(params: ModelParams, tol: float, theta_max: float) -> float:
    """Radius below which the origin law stands in for the numerical solution."""
    cap = 1e-6 * theta_max
    law = origin_seed_law(params)
    neglected = None if params.k == 0 else _neglected_term(params, law)
    if neglected is None:
        return cap
    r0, g = neglected
    theta0 = (tol / r0) ** (1.0 / g)
    if law.item == 6:
        # stiff slow manifold: seed errors are damped super-exponentially,
        # so start where an explicit method is still affordable
        theta0 = max(theta0, _stiff_radius(params, law))
    return min(theta0, cap)


def origin_probe(params: ModelParams, theta0: float, level: float = 1e-3) -> float:
    """Smallest theta (>= 10 theta0) where the neglected origin term has grown to ``level``."""
    law = origin_seed_law(params)
    neglected = None if params.k == 0 else _neglected_term(params, law)
    if neglected is None:
        return 10.0 * theta0
    r0, g = neglected
    return max((level / r0) ** (1.0 / g), 10.0 * theta0)


# -- solvers ---------------------------------------------------------------------------


def _check_positive(**kw):
    for name, v in kw.items():
        if not (isinstance(v, (int, float)) and math.isfinite(v) and v > 0):
            raise DomainError(f"{name} must be a positive finite number, got {v!r}")


def solve_trajectory(params: ModelParams, theta_max: float, tol: float = 1e-10) -> Trajectory:
    """Singular trajectory through the origin on ``(0, theta_max]``."""
    _check_positive(theta_max=theta_max, tol=tol)
    law = origin_seed_law(params)
    seed = SlowManifoldSeed(law, params) if law.item == 6 else PowerSeed(law)
    theta0 = seed_radius(params, tol, theta_max)
    thetas, ups, rhs = _march(params, theta0, seed(theta0), theta_max, tol)
    return Trajectory(params, thetas, ups, rhs, seed_end=float(thetas[0]), seed=seed, kind=Kind.SINGULAR)


def solve_regularized_upper(params: ModelParams, eps: float, theta_max: float, tol: float = 1e-10) -> Trajectory:
    """Trajectory with ``upsilon(0) = eps``."""
    _check_positive(eps=eps, theta_max=theta_max, tol=tol)
    m, p, beta, b, k = params.as_tuple()
    seed = UpperSeed(params, eps)
    growth = b * m / (m + beta) * eps ** (-1.0 / p)
    budget = math.sqrt(tol) * eps
    start = (budget / growth) ** (1.0 / (m + beta))
    if k:
        start = min(start, budget / abs(k))
    start = min(start, 1e-6 * theta_max)
    thetas, ups, rhs = _march(params, start, seed(start), theta_max, tol)
    return Trajectory(params, thetas, ups, rhs, seed_end=float(thetas[0]), seed=seed, kind=Kind.UPPER, eps=eps)


def _inverse_start(params: ModelParams, eps: float, theta_stop: float, tol: float):
    """Integrate the inverse function ``v(t)`` (theta of upsilon) off ``v(0) = eps``.

    Works in ``tau = ln t`` and ``y = ln(v - eps)``; the local law
    ``v - eps = c t^{(1+p)/p}`` supplies the first point.  Stops once theta
    has doubled (the start singularity is then behind us) or, for k < 0,
    once the trajectory gets close to the critical curve.
    """
    m, p, beta, b, k = params.as_tuple()
    bm = b * m
    cv = p / ((1.0 + p) * bm) * eps ** (1.0 - m - beta)
    delta = math.sqrt(tol)
    t1 = (delta * eps / cv) ** (p / (1.0 + p))
    if k:
        t1 = min(t1, (delta * bm * eps ** (m + beta - 1.0) / abs(k)) ** p)
    tau1 = math.log(t1)
    y1 = math.log(cv) + (1.0 + p) / p * tau1
    mb1 = m + beta - 1.0
    inv_p = 1.0 / p

    def f_of(tau, y):
        v = eps + math.exp(y)
        return k + bm * math.exp(mb1 * math.log(v) - inv_p * tau)

    def rhs(tau, y):
        if y - tau > _EXP_MAX:
            return math.inf
        f = f_of(tau, y)
        if f <= 0.0:
            return math.inf
        return math.exp(tau - y) / f

    stop_v = min(2.0 * eps, theta_stop)

    def stop(tau, y):
        if eps + math.exp(y) >= stop_v:
            return True
        return k < 0 and f_of(tau, y) < 0.5 * abs(k)

    taus, ys, _ = dopri5(rhs, tau1, y1, tau1 + 400.0, tol, stop=stop, max_step=0.25)
    if not stop(taus[-1], ys[-1]):
        raise IntegrationFailure("inverse-function start did not leave the neighbourhood of eps")
    t = np.exp(taus)
    v = eps + np.exp(ys)
    f = np.array([f_of(a, c) for a, c in zip(taus, ys)])
    return v, t, f


def solve_regularized_lower(params: ModelParams, eps: float, theta_max: float, tol: float = 1e-10) -> Trajectory:
    """Trajectory with ``upsilon(eps) = 0``."""
    _check_positive(eps=eps, theta_max=theta_max, tol=tol)
    if not theta_max > eps:
        raise DomainError("theta_max must exceed eps")
    v, t, f = _inverse_start(params, eps, theta_max, tol)
    thetas, ups, rhs = v, t, f
    if v[-1] < theta_max:
        th2, up2, rhs2 = _march(params, float(v[-1]), float(t[-1]), theta_max, tol, skip_first=True)
        thetas = np.concatenate([v, th2])
        ups = np.concatenate([t, up2])
        rhs = np.concatenate([f, rhs2])
    keep = np.concatenate([[True], np.diff(np.log(thetas)) > 0])
    thetas, ups, rhs = thetas[keep], ups[keep], rhs[keep]
    seed = LowerSeed(params, eps)
    return Trajectory(params, thetas, ups, rhs, seed_end=float(thetas[0]), seed=seed, kind=Kind.LOWER, eps=eps)


# -- bracketing ----------------------------------------------------------------------------


@dataclass(frozen=True)
class BracketPair:
    lower: Trajectory
    upper: Trajectory
    eps: float  # schedule factor; absolute eps values live on the trajectories

    @property
    def eps_lower(self) -> float:
        return self.lower.eps

    @property
    def eps_upper(self) -> float:
        return self.upper.eps


@dataclass(frozen=True)
class BracketEvidence:
    pairs: tuple
    gaps: tuple
    window: tuple
    order_violation: float  # worst relative excess of lower over singular / singular over upper
    monotone_violation: float  # worst relative violation of family monotonicity in eps
    slack: float
    gap_tol: float

    @property
    def final_gap(self) -> float:
        return self.gaps[-1]

    @property
    def ordered(self) -> bool:
        return self.order_violation <= self.slack

    @property
    def monotone(self) -> bool:
        return self.monotone_violation <= self.slack

    @property
    def gap_decreasing(self) -> bool:
        g = self.gaps
        return all(b < a or b <= 100 * self.slack for a, b in zip(g, g[1:]))

    @property
    def converged(self) -> bool:
        return self.final_gap < self.gap_tol


def bracket_trajectory(
    params: ModelParams,
    singular: Trajectory,
    *,
    tol: float = 1e-10,
    gap_tol: float = 1e-4,
    window_start: float | None = None,
    min_levels: int = 3,
    max_refinements: int = 12,
    strict: bool = True,
) -> BracketEvidence:
    """Squeeze ``singular`` between the regularized families with eps shrinking by 10.

    The schedule is ``eps = 10^{-2-j} * scale`` with ``scale`` the theta of
    the window start (lower family) and the larger of ``upsilon`` there and
    ``|k| theta`` (upper family).  Gaps are relative to the singular
    trajectory on its nodes inside ``[window_start, theta_max]``.
    """
    theta_max = singular.theta_max
    if window_start is None:
        window_start = origin_probe(params, singular.seed_end)
    window_start = min(max(window_start, singular.seed_end), theta_max)
    nodes = singular.thetas
    win = np.unique(np.concatenate([[window_start], nodes[nodes >= window_start]]))
    s_win = eval_trajectory(singular, win)
    scale_up = max(float(eval_trajectory(singular, window_start)), abs(params.k) * window_start)
    scale_lo = window_start
    slack = 10.0 * tol
    pairs, gaps = [], []
    order_violation = 0.0
    monotone_violation = 0.0
    prev = None
    for j in range(max_refinements):
        factor = 10.0 ** (-2 - j)
        lower = solve_regularized_lower(params, factor * scale_lo, theta_max, tol)
        upper = solve_regularized_upper(params, factor * scale_up, theta_max, tol)
        pair = BracketPair(lower, upper, factor)
        pairs.append(pair)
        # ordering against the singular trajectory on every node right of eps
        sel = nodes[nodes > lower.eps * (1 + 1e-12)]
        s_val = singular.upsilons[-len(sel):] if len(sel) else np.empty(0)
        lo_val = eval_trajectory(lower, sel)
        up_val = eval_trajectory(upper, sel)
        if len(sel):
            order_violation = max(order_violation, float(np.max((lo_val - s_val) / s_val)),
                                  float(np.max((s_val - up_val) / s_val)))
        lo_w = eval_trajectory(lower, win)
        up_w = eval_trajectory(upper, win)
        gaps.append(float(np.max((up_w - lo_w) / s_win)))
        if prev is not None:
            common = sel[sel > prev.lower.eps * (1 + 1e-12)]
            if len(common):
                u_old, u_new = eval_trajectory(prev.upper, common), eval_trajectory(upper, common)
                l_old, l_new = eval_trajectory(prev.lower, common), eval_trajectory(lower, common)
                s_c = eval_trajectory(singular, common)
                monotone_violation = max(monotone_violation, float(np.max((u_new - u_old) / s_c)),
                                         float(np.max((l_old - l_new) / s_c)))
        prev = pair
        if j + 1 >= min_levels and gaps[-1] < gap_tol:
            break
    evidence = BracketEvidence(tuple(pairs), tuple(gaps), (window_start, theta_max),
                               order_violation, monotone_violation, slack, gap_tol)
    if strict and not evidence.converged:
        raise BracketStall(f"bracket gap {evidence.final_gap:.3e} did not fall below {gap_tol:.1e}",
                           evidence.final_gap)
    return evidence


def default_theta_max(params: ModelParams, level: float = 1e-3) -> float:
    """Far end where the infinity laws have settled to about ``level``.

    Two corrections decay at the far end: the neglected term of the
    trajectory law, like ``(theta/theta_c)^g``, and the integration offset in
    the travel time, like ``(theta/theta_c)^{-s}`` with ``s`` the exponent of
    ``z`` in ``theta``.  ``theta_c`` is where the neglected term is of order
    one.  The result is clipped to ``[1e4, 1e100]`` and to keep ``upsilon``
    representable.
    """
    if params.k == 0:
        return 1e4
    law = trajectory_asymptote(params, End.INFINITY)
    r0, g = _neglected_term(params, law)
    s = 1.0 / profile_asymptote(params, End.INFINITY).exponent
    log_c = -math.log(r0) / g
    log_t = math.log(10.0) + log_c - math.log(level) / min(abs(g), s)
    log_t = min(log_t, (600.0 - law.log_constant) / law.exponent, 100.0 * math.log(10.0))
    return float(math.exp(max(log_t, 4.0 * math.log(10.0))))
