"""Parameters, regime logic and closed-form asymptotic constants.

The traveling-wave ansatz ``u(x, t) = phi(k t - x)`` for

    u_t = (|(u^m)_x|^{p-1} (u^m)_x)_x - b u^beta

leads, in the phase variables ``theta = phi`` and ``upsilon = ((phi^m)')^p``,
to the first-order problem

    d upsilon / d theta = k + b m theta^{m+beta-1} upsilon^{-1/p},
    upsilon(0) = 0.

Everything in this module is a pure function of a :class:`ModelParams`.
Constants are assembled in log space so that large exponents such as
``1/(mp - beta)`` do not overflow.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .errors import DomainError, UncoveredRegime

#: Half-width of the band around p(m+beta) = 1+p that is rejected as critical.
CRITICAL_BAND = 1e-12


class SpeedSign(enum.Enum):
    NEGATIVE = "negative"
    ZERO = "zero"
    POSITIVE = "positive"


class Balance(enum.Enum):
    SUB = "sub"  # p(m+beta) < 1+p
    SUPER = "super"  # p(m+beta) > 1+p


class End(enum.Enum):
    ORIGIN = "origin"
    INFINITY = "infinity"


class Target(enum.Enum):
    TRAJECTORY = "trajectory"
    PROFILE = "profile"


@dataclass(frozen=True)
class ModelParams:
    m: float
    p: float
    beta: float
    b: float
    k: float

    @property
    def mp(self) -> float:
        return self.m * self.p

    @property
    def balance_gap(self) -> float:
        """p(m+beta) - (1+p); negative in the sub regime."""
        return self.p * (self.m + self.beta) - (1.0 + self.p)

    def as_tuple(self) -> tuple[float, float, float, float, float]:
        return (self.m, self.p, self.beta, self.b, self.k)


@dataclass(frozen=True)
class Regime:
    speed_sign: SpeedSign
    balance: Balance

    @property
    def label(self) -> str:
        return f"{self.speed_sign.value}/{self.balance.value}"


@dataclass(frozen=True)
class AsymptoteSpec:
    """Power law ``A * X**q`` valid at one end of the computed range.

    ``item`` numbers the (balance, speed, end) case 1-6; ``source`` is
    ``"trajectory"`` for trajectory laws and ``"profile"`` for profile laws, or
    ``"separable"`` for the exact k = 0 law used outside those cases.
    """

    log_constant: float
    exponent: float
    end: End
    target: Target
    item: int
    source: str

    @property
    def constant(self) -> float:
        return math.exp(self.log_constant)

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        with np.errstate(divide="ignore"):
            out = np.exp(self.exponent * np.log(x) + self.log_constant)
        out = np.where(x > 0.0, out, 0.0)
        return float(out) if out.ndim == 0 else out

    def log_eval(self, log_x):
        return self.exponent * np.asarray(log_x, dtype=float) + self.log_constant


def _exact_gap(m: float, p: float, beta: float) -> Fraction:
    fm, fp, fb = Fraction(m), Fraction(p), Fraction(beta)
    return fp * (fm + fb) - (1 + fp)


def validate_params(m, p=None, beta=None, b=None, k=None) -> ModelParams:
    """Check the slow-diffusion constraints and return a :class:`ModelParams`.

    Accepts either five scalars or a single 5-tuple ``(m, p, beta, b, k)``.
    """
    if p is None and beta is None and b is None and k is None:
        try:
            m, p, beta, b, k = m
        except (TypeError, ValueError) as exc:
            raise DomainError("expected five values (m, p, beta, b, k)") from exc
    try:
        vals = [float(v) for v in (m, p, beta, b, k)]
    except (TypeError, ValueError) as exc:
        raise DomainError(f"non-numeric parameter: {exc}") from exc
    names = ("m", "p", "beta", "b", "k")
    for name, v in zip(names, vals):
        if not math.isfinite(v):
            raise DomainError(f"{name} must be finite, got {v}")
    m, p, beta, b, k = vals
    if m <= 0:
        raise DomainError(f"m must be positive, got {m}")
    if p <= 0:
        raise DomainError(f"p must be positive, got {p}")
    if b <= 0:
        raise DomainError(f"b must be positive, got {b}")
    if not 0.0 < beta < 1.0:
        raise DomainError(f"beta must lie in (0, 1), got {beta}")
    if Fraction(m) * Fraction(p) <= 1:
        raise DomainError(f"mp <= 1 (mp = {m * p}); only slow diffusion mp > 1 is supported")
    if abs(_exact_gap(m, p, beta)) <= Fraction(CRITICAL_BAND):
        raise DomainError(
            f"critical balance p(m+beta) = 1+p (gap {float(_exact_gap(m, p, beta)):.3e}"
            f" within +/-{CRITICAL_BAND:g}); no asymptotic law is available there"
        )
    return ModelParams(m, p, beta, b, k)


def classify_regime(params: ModelParams) -> Regime:
    k = params.k
    if k > 0:
        sign = SpeedSign.POSITIVE
    elif k < 0:
        sign = SpeedSign.NEGATIVE
    else:
        sign = SpeedSign.ZERO
    gap = _exact_gap(params.m, params.p, params.beta)
    return Regime(sign, Balance.SUB if gap < 0 else Balance.SUPER)


def phase_rhs(params: ModelParams, theta: float, upsilon: float) -> float:
    """Right side ``k + b m theta^{m+beta-1} upsilon^{-1/p}``."""
    if theta <= 0 or upsilon <= 0:
        raise DomainError(f"phase_rhs needs theta > 0 and upsilon > 0, got ({theta}, {upsilon})")
    m, p, beta, b, k = params.as_tuple()
    return k + b * m * math.exp((m + beta - 1.0) * math.log(theta) - math.log(upsilon) / p)


def critical_curve(params: ModelParams, theta):
    """Locus where the phase right side vanishes (k < 0 only)."""
    m, p, beta, b, k = params.as_tuple()
    if k >= 0:
        raise DomainError("the critical curve exists only for k < 0")
    theta = np.asarray(theta, dtype=float)
    if np.any(theta <= 0):
        raise DomainError("critical_curve needs theta > 0")
    out = np.exp(-p * (math.log(-k / (b * m)) + (1.0 - m - beta) * np.log(theta)))
    return float(out) if out.ndim == 0 else out


# -- trajectory laws


def _reaction_law(params: ModelParams, end: End, item: int, source: str) -> AsymptoteSpec:
    m, p, beta, b, _ = params.as_tuple()
    log_a = p / (1.0 + p) * math.log(b * m * (1.0 + p) / (p * (m + beta)))
    return AsymptoteSpec(log_a, p * (m + beta) / (1.0 + p), end, Target.TRAJECTORY, item, source)


def _wave_law(params: ModelParams, end: End, item: int) -> AsymptoteSpec:
    return AsymptoteSpec(math.log(params.k), 1.0, end, Target.TRAJECTORY, item, "trajectory")


def _critical_law(params: ModelParams, end: End, item: int) -> AsymptoteSpec:
    m, p, beta, b, k = params.as_tuple()
    return AsymptoteSpec(
        -p * math.log(-k / (b * m)), p * (m + beta - 1.0), end, Target.TRAJECTORY, item, "trajectory"
    )


def covered_item(params: ModelParams, end: End) -> int:
    """Number (1-6) of the asymptotic case covering ``end``, or raise."""
    regime = classify_regime(params)
    sub = regime.balance is Balance.SUB
    sign = regime.speed_sign
    if sub and end is End.ORIGIN:
        return 1
    if not sub and end is End.INFINITY:
        return 2
    if sign is SpeedSign.POSITIVE:
        return 3 if sub else 4
    if sign is SpeedSign.NEGATIVE:
        return 5 if sub else 6
    raise UncoveredRegime(f"no asymptotic law for k = 0, {regime.balance.value} regime, {end.value} end")


def trajectory_asymptote(params: ModelParams, end: End) -> AsymptoteSpec:
    end = End(end)
    item = covered_item(params, end)
    if item in (1, 2):
        return _reaction_law(params, end, item, "trajectory")
    if item in (3, 4):
        return _wave_law(params, end, item)
    return _critical_law(params, end, item)


def separable_law(params: ModelParams, end: End = End.ORIGIN) -> AsymptoteSpec:
    """Exact trajectory for k = 0 (the reaction-balance law holds everywhere)."""
    return _reaction_law(params, End(end), 0, "separable")


def origin_seed_law(params: ModelParams) -> AsymptoteSpec:
    """Law used to start the singular trajectory near the origin."""
    if params.k == 0:
        return separable_law(params, End.ORIGIN)
    return trajectory_asymptote(params, End.ORIGIN)


# -- profile laws


def c_star_log(params: ModelParams) -> float:
    m, p, beta, b, _ = params.as_tuple()
    d = m * p - beta
    return (math.log(b) + (1.0 + p) * math.log(d) - p * math.log(m * (1.0 + p))
            - math.log(p * (m + beta))) / d


def c_star(params: ModelParams) -> float:
    return math.exp(c_star_log(params))


def profile_asymptote(params: ModelParams, end: End) -> AsymptoteSpec:
    end = End(end)
    item = covered_item(params, end)
    m, p, beta, b, k = params.as_tuple()
    if item in (1, 2):
        return AsymptoteSpec(c_star_log(params), (1.0 + p) / (m * p - beta), end, Target.PROFILE, item, "profile")
    if item in (3, 4):
        mp = m * p
        log_a = p / (mp - 1.0) * math.log((mp - 1.0) / mp) + math.log(k) / (mp - 1.0)
        return AsymptoteSpec(log_a, p / (mp - 1.0), end, Target.PROFILE, item, "profile")
    log_a = math.log((1.0 - beta) * (-b / k)) / (1.0 - beta)
    return AsymptoteSpec(log_a, 1.0 / (1.0 - beta), end, Target.PROFILE, item, "profile")


def covered_ends(params: ModelParams) -> list[End]:
    ends = []
    for end in (End.ORIGIN, End.INFINITY):
        try:
            covered_item(params, end)
        except UncoveredRegime:
            continue
        ends.append(end)
    return ends
