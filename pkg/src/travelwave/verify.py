"""Independent checks on trajectories and profiles, and the report that collects them."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numba
import numpy as np

from .errors import DomainError, IntegrationFailure, RangeExceeded, TravelWaveError
from .model import (
    AsymptoteSpec,
    End,
    ModelParams,
    SpeedSign,
    c_star,
    classify_regime,
    covered_ends,
    origin_seed_law,
    phase_rhs,
    profile_asymptote,
    trajectory_asymptote,
)
from .phase_plane import (
    BracketEvidence,
    Kind,
    PowerSeed,
    Trajectory,
    bracket_trajectory,
    default_theta_max,
    eval_trajectory,
    origin_probe,
    solve_trajectory,
)
from .profile import Profile, reconstruct_profile, travel_time_map

FIT_TOL = 0.02
RESIDUAL_TOL = 1e-3
RESIDUAL_DROP = 3.0
ORACLE_TOL = 1e-6
#: Deviations below this are treated as converged when judging monotone decay.
FIT_NOISE_FLOOR = 1e-6


# -- ODE residual ------------------------------------------------------------------


def centered_derivative(x, y):
    """Second-order three-point derivative at interior points of a non-uniform grid."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    h1 = x[1:-1] - x[:-2]
    h2 = x[2:] - x[1:-1]
    if np.any(h1 <= 0) or np.any(h2 <= 0):
        raise DomainError("grid must be strictly increasing")
    return (-h2 / (h1 * (h1 + h2)) * y[:-2] + (h2 - h1) / (h1 * h2) * y[1:-1]
            + h1 / (h2 * (h1 + h2)) * y[2:])


@dataclass(frozen=True)
class ResidualStats:
    max_rel: float
    median_rel: float
    values: np.ndarray = field(repr=False)


def ode_residual(params: ModelParams, profile: Profile, flux=None) -> ResidualStats:
    """Normalized residual of ``F' - k phi' - b phi^beta = 0`` at interior points.

    ``F = |(phi^m)'|^{p-1} (phi^m)'`` is built from the sampled flux (the
    profile's own unless given) and differentiated together with ``phi`` by
    centered differences.  Points where ``phi = 0`` contribute zero.
    """
    zs = np.asarray(profile.zs, dtype=float)
    phis = np.asarray(profile.phis, dtype=float)
    flux = np.asarray(profile.fluxes if flux is None else flux, dtype=float)
    if zs.size < 7 or flux.shape != zs.shape:
        raise DomainError("need at least 5 interior points with matching flux samples")
    p, beta, b, k = params.p, params.beta, params.b, params.k
    big_f = np.sign(flux) * np.abs(flux) ** p
    lhs = centered_derivative(zs, big_f) - k * centered_derivative(zs, phis)
    absorb = b * phis[1:-1] ** beta
    with np.errstate(divide="ignore", invalid="ignore"):
        rel = np.where(absorb > 0, np.abs(lhs - absorb) / absorb, np.abs(lhs))
    return ResidualStats(float(np.max(rel)), float(np.median(rel)), rel)


RESIDUAL_DECADES = 3.0


def residual_grids(traj: Trajectory, qtol: float = 1e-10, n: int = 200, decades: float = RESIDUAL_DECADES):
    """Geometric grids of ``n`` points over ``decades`` of z at each end of the computed range."""
    tmap = travel_time_map(traj, qtol)
    z_top = 0.99 * tmap.z_max
    z_bottom = tmap(origin_probe(traj.params, traj.seed_end))
    span = 10.0 ** decades
    top = np.geomspace(z_top / span, z_top, n)
    bottom = np.geomspace(z_bottom, min(z_bottom * span, z_top), n)
    return [bottom, top]


def combine_residuals(stats) -> ResidualStats:
    values = np.concatenate([s.values for s in stats])
    return ResidualStats(float(np.max(values)), float(np.median(values)), values)


def refine_grid(zs) -> np.ndarray:
    """Insert the geometric midpoint of every interval (halves the log spacing)."""
    zs = np.asarray(zs, dtype=float)
    out = np.empty(2 * zs.size - 1)
    out[0::2] = zs
    out[1::2] = np.sqrt(zs[:-1] * zs[1:])
    return out


# -- energy --------------------------------------------------------------------------


def energy_phi(params: ModelParams, phi, flux):
    """``p/(p+1) |(phi^m)'|^{p+1} - bm/(m+beta) phi^{m+beta}``."""
    m, p, beta, b, _ = params.as_tuple()
    phi = np.asarray(phi, dtype=float)
    flux = np.asarray(flux, dtype=float)
    out = p / (p + 1.0) * np.abs(flux) ** (p + 1.0) - b * m / (m + beta) * np.maximum(phi, 0.0) ** (m + beta)
    return float(out) if out.ndim == 0 else out


@dataclass(frozen=True)
class EnergyCheck:
    checked: bool
    monotone: bool
    worst_violation: float


def energy_monotonicity(params: ModelParams, profile: Profile, rel_tol: float = 1e-8) -> EnergyCheck:
    """Non-decrease of the energy along the profile (k > 0 only).

    A step counts as a violation when it drops by more than
    ``rel_tol * max(1, size of the two terms)``; the terms grow like powers
    of ``phi`` so a fixed absolute floor would be meaningless far out.
    """
    if params.k <= 0:
        return EnergyCheck(False, True, 0.0)
    m, p, beta, b, _ = params.as_tuple()
    phi, flux = profile.phis, profile.fluxes
    energy = energy_phi(params, phi, flux)
    term = p / (p + 1.0) * flux ** (p + 1.0) + b * m / (m + beta) * phi ** (m + beta)
    scale = np.maximum(1.0, np.maximum(term[1:], term[:-1]))
    drop = (energy[:-1] - energy[1:]) / scale
    worst = float(max(0.0, np.max(drop))) if drop.size else 0.0
    return EnergyCheck(True, worst <= rel_tol, worst)


# -- asymptote fitting -----------------------------------------------------------------


@dataclass(frozen=True)
class AsymptoteFit:
    spec: AsymptoteSpec
    measured_constant: float
    deviation: float
    deviations: tuple
    decreasing: bool
    status: str

    @property
    def end(self) -> End:
        return self.spec.end


def _decreasing_toward_end(devs, floor=FIT_NOISE_FLOOR) -> bool:
    return all(b <= a or b <= floor for a, b in zip(devs, devs[1:]))


def fit_asymptote(samples, spec: AsymptoteSpec, tol: float = FIT_TOL) -> AsymptoteFit:
    """Compare ``(X, Y)`` samples with ``A X^q``.

    Status is ``pass`` when the worst deviation is within ``tol`` and the
    deviation shrinks toward the spec's end, ``inconclusive`` when only one
    of the two holds, and ``fail`` otherwise.
    """
    arr = np.asarray(samples, dtype=float)
    if arr.ndim != 2 or arr.shape[1] != 2 or arr.shape[0] < 3:
        raise DomainError("need at least 3 (X, Y) samples")
    if np.any(arr <= 0) or not np.all(np.isfinite(arr)):
        raise DomainError("samples must be positive and finite")
    order = np.argsort(arr[:, 0])
    if spec.end is End.ORIGIN:
        order = order[::-1]
    x, y = arr[order, 0], arr[order, 1]
    log_ratio = np.log(y) - spec.log_eval(np.log(x))
    measured = math.exp(float(np.mean(np.log(y) - spec.exponent * np.log(x))))
    devs = np.abs(np.expm1(log_ratio))
    deviation = float(np.max(devs))
    decreasing = _decreasing_toward_end(devs)
    within = deviation <= tol
    if within and decreasing:
        status = "pass"
    elif within or decreasing:
        status = "inconclusive"
    else:
        status = "fail"
    return AsymptoteFit(spec, measured, deviation, tuple(float(d) for d in devs), decreasing, status)


def fit_windows(traj: Trajectory):
    """One-decade theta windows at each end: just past the seed, and the top decade."""
    params = traj.params
    lo = origin_probe(params, traj.seed_end)
    hi = traj.theta_max
    return {End.ORIGIN: (lo, 10.0 * lo), End.INFINITY: (hi / 10.0, hi)}


def trajectory_fits(traj: Trajectory, n: int = 8, tol: float = FIT_TOL) -> list[AsymptoteFit]:
    params = traj.params
    windows = fit_windows(traj)
    out = []
    for end in covered_ends(params):
        spec = trajectory_asymptote(params, end)
        x = np.geomspace(*windows[end], n)
        out.append(fit_asymptote(np.column_stack([x, eval_trajectory(traj, x)]), spec, tol))
    return out


def profile_fits(traj: Trajectory, qtol: float = 1e-10, n: int = 8, tol: float = FIT_TOL) -> list[AsymptoteFit]:
    params = traj.params
    tmap = travel_time_map(traj, qtol)
    windows = fit_windows(traj)
    out = []
    for end in covered_ends(params):
        spec = profile_asymptote(params, end)
        lo, hi = (tmap(t) for t in windows[end])
        z = np.geomspace(lo, hi, n)
        phi = np.array([tmap.inverse(v) for v in z])
        out.append(fit_asymptote(np.column_stack([z, phi]), spec, tol))
    return out


def ratio_curves(traj: Trajectory, qtol: float = 1e-10, n: int = 64):
    """Rows ``(target, end, X, Y/(A X^q))`` over the whole computed range, per covered law."""
    params = traj.params
    tmap = travel_time_map(traj, qtol)
    lo = traj.seed_end
    hi = traj.theta_max
    thetas = np.geomspace(lo, hi, n)
    rows = []
    for end in covered_ends(params):
        spec = trajectory_asymptote(params, end)
        ups = eval_trajectory(traj, thetas)
        rows += [("trajectory", end.value, t, u / spec(t)) for t, u in zip(thetas, ups)]
        spec = profile_asymptote(params, end)
        zs = np.array([tmap(t) for t in thetas])
        rows += [("profile", end.value, z, t / spec(z)) for z, t in zip(zs, thetas)]
    return rows


# -- trajectory self-check --------------------------------------------------------------


def trajectory_residual(traj: Trajectory, rel_step: float = 1e-4) -> float:
    """Worst relative mismatch between a centered difference of the interpolant and ``phase_rhs``.

    The difference is taken in ``ln theta`` with half-width ``rel_step`` about
    each interior node.
    """
    params = traj.params
    th = traj.thetas[1:-1]
    th = th[(th * math.exp(-rel_step) > traj.seed_end) & (th * math.exp(rel_step) < traj.theta_max)]
    if th.size == 0:
        return 0.0
    hi = th * math.exp(rel_step)
    lo = th * math.exp(-rel_step)
    fd = (eval_trajectory(traj, hi) - eval_trajectory(traj, lo)) / (hi - lo)
    rhs = np.array([phase_rhs(params, t, u) for t, u in zip(th, eval_trajectory(traj, th))])
    return float(np.max(np.abs(fd - rhs) / np.abs(rhs)))


# -- fixed-step oracle ------------------------------------------------------------------


@numba.njit(cache=True)
def _rk4_kernel(theta0, ups0, h, n, stride, m, p, beta, b, k):
    n_out = n // stride + 2
    th = np.empty(n_out)
    ys = np.empty(n_out)
    fs = np.empty(n_out)
    bm = b * m
    e = m + beta - 1.0
    inv_p = -1.0 / p
    t = theta0
    y = ups0
    th[0] = t
    ys[0] = y
    fs[0] = k + bm * t ** e * y ** inv_p
    j = 1
    for i in range(1, n + 1):
        k1 = k + bm * t ** e * y ** inv_p
        y2 = y + 0.5 * h * k1
        if y2 <= 0.0:
            return th[:j], ys[:j], fs[:j], False
        k2 = k + bm * (t + 0.5 * h) ** e * y2 ** inv_p
        y3 = y + 0.5 * h * k2
        if y3 <= 0.0:
            return th[:j], ys[:j], fs[:j], False
        k3 = k + bm * (t + 0.5 * h) ** e * y3 ** inv_p
        y4 = y + h * k3
        if y4 <= 0.0:
            return th[:j], ys[:j], fs[:j], False
        k4 = k + bm * (t + h) ** e * y4 ** inv_p
        y = y + h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        if not y > 0.0:
            return th[:j], ys[:j], fs[:j], False
        t = theta0 + i * h
        if i % stride == 0 or i == n:
            th[j] = t
            ys[j] = y
            fs[j] = k + bm * t ** e * y ** inv_p
            j += 1
    return th[:j], ys[:j], fs[:j], True


def oracle_fixed_step(params: ModelParams, eps: float, theta_range, h: float, *,
                      upsilon0: float | None = None, stride: int | None = None) -> Trajectory:
    """Classical RK4 on ``d upsilon/d theta = phase_rhs`` at constant step ``h``.

    The start value is ``max(eps, origin law at theta_range[0])`` unless
    ``upsilon0`` is given.  Only every ``stride``-th step is stored (by
    default about 2000 nodes); the last step always is.
    """
    t0, t1 = (float(v) for v in theta_range)
    if not (0 < t0 < t1) or not h > 0 or not eps > 0:
        raise DomainError("need 0 < theta_start < theta_end, h > 0 and eps > 0")
    n = max(1, int(round((t1 - t0) / h)))
    h = (t1 - t0) / n
    if upsilon0 is None:
        upsilon0 = max(eps, float(origin_seed_law(params)(t0)))
    if stride is None:
        stride = max(1, n // 2000)
    m, p, beta, b, k = params.as_tuple()
    th, ys, fs, ok = _rk4_kernel(t0, float(upsilon0), h, n, int(stride), m, p, beta, b, k)
    if not ok:
        raise IntegrationFailure(f"upsilon would cross zero near theta={th[-1]:.6e}; reduce h")
    seed = PowerSeed(origin_seed_law(params), valid_from=t0)
    return Trajectory(params, th.copy(), ys.copy(), fs.copy(), t0, seed, Kind.ORACLE, eps)


def oracle_deviation(traj: Trajectory, oracle: Trajectory) -> float:
    """Max relative difference on the oracle's nodes inside the trajectory's range."""
    th = oracle.thetas
    sel = (th >= traj.seed.valid_from) & (th <= traj.theta_max)
    if not np.any(sel):
        raise RangeExceeded("no overlap between trajectory and oracle")
    ref = oracle.upsilons[sel]
    return float(np.max(np.abs(eval_trajectory(traj, th[sel]) / ref - 1.0)))


def richardson_ratio(params: ModelParams, exact, theta_range, h: float) -> tuple[float, float, float]:
    """Errors against ``exact`` at steps ``h`` and ``h/2`` and their ratio (16 for order 4)."""
    errs = []
    for step in (h, h / 2):
        orc = oracle_fixed_step(params, 1e-300, theta_range, step, stride=1)
        errs.append(float(np.max(np.abs(orc.upsilons / exact(orc.thetas) - 1.0))))
    return errs[0], errs[1], errs[0] / errs[1]


# -- report -------------------------------------------------------------------------------


@dataclass(frozen=True)
class BracketSummary:
    final_eps_lower: float
    final_eps_upper: float
    gap: float
    gaps: tuple
    ordered: bool
    monotone: bool
    order_violation: float
    monotone_violation: float
    converged: bool

    @classmethod
    def from_evidence(cls, ev: BracketEvidence) -> BracketSummary:
        last = ev.pairs[-1]
        return cls(last.eps_lower, last.eps_upper, ev.final_gap, ev.gaps, ev.ordered, ev.monotone,
                   ev.order_violation, ev.monotone_violation, ev.converged)

    @property
    def ok(self) -> bool:
        return self.ordered and self.monotone and self.converged


@dataclass(frozen=True)
class VerificationReport:
    params: ModelParams
    regime: str
    theta_max: float
    residual: ResidualStats | None
    residual_refined: ResidualStats | None
    energy: EnergyCheck
    trajectory_fits: list
    profile_fits: list
    bracket: BracketSummary | None
    oracle_deviation: float | None
    trajectory_residual: float
    c_star: float
    notes: tuple
    errors: tuple
    thresholds: dict

    @property
    def residual_drop(self) -> float:
        if self.residual is None or self.residual_refined is None or self.residual_refined.max_rel == 0:
            return math.inf
        return self.residual.max_rel / self.residual_refined.max_rel

    @property
    def asymptote_fits(self) -> list:
        return list(self.trajectory_fits) + list(self.profile_fits)

    def check_results(self) -> dict[str, bool]:
        t = self.thresholds
        res = {}
        if self.residual is not None:
            res["residual"] = self.residual.max_rel <= t["residual"] and self.residual_drop >= t["residual_drop"]
        res["energy"] = self.energy.monotone
        res["asymptotes"] = all(f.status == "pass" for f in self.asymptote_fits)
        if self.bracket is not None:
            res["bracket"] = self.bracket.ok
        if self.oracle_deviation is not None:
            res["oracle"] = self.oracle_deviation <= t["oracle"]
        res["errors"] = not self.errors
        return res

    @property
    def passed(self) -> bool:
        return all(self.check_results().values())

    @property
    def status(self) -> str:
        if self.passed:
            return "pass"
        failing = [k for k, ok in self.check_results().items() if not ok]
        if failing == ["asymptotes"] and not any(f.status == "fail" for f in self.asymptote_fits):
            return "inconclusive"
        return "fail"

    def lines(self) -> list[tuple[str, object]]:
        p = self.params
        out: list[tuple[str, object]] = [
            ("params.m", p.m), ("params.p", p.p), ("params.beta", p.beta), ("params.b", p.b), ("params.k", p.k),
            ("regime", self.regime), ("theta_max", self.theta_max), ("c_star", self.c_star),
        ]
        if self.residual is not None:
            out += [("residual.max_rel", self.residual.max_rel), ("residual.median_rel", self.residual.median_rel)]
        if self.residual_refined is not None:
            out += [("residual.refined_max_rel", self.residual_refined.max_rel),
                    ("residual.drop", self.residual_drop)]
        out += [("trajectory.residual", self.trajectory_residual),
                ("energy.checked", self.energy.checked), ("energy.monotone", self.energy.monotone),
                ("energy.worst_violation", self.energy.worst_violation)]
        for i, fit in enumerate(self.asymptote_fits):
            s = fit.spec
            key = f"asymptote[{i}]"
            out += [(f"{key}.target", s.target.value), (f"{key}.end", s.end.value), (f"{key}.item", s.item),
                    (f"{key}.constant", s.constant), (f"{key}.exponent", s.exponent),
                    (f"{key}.measured_constant", fit.measured_constant), (f"{key}.deviation", fit.deviation),
                    (f"{key}.decreasing", fit.decreasing), (f"{key}.status", fit.status)]
        if self.bracket is not None:
            bk = self.bracket
            out += [("bracket.eps_lower", bk.final_eps_lower), ("bracket.eps_upper", bk.final_eps_upper),
                    ("bracket.gap", bk.gap), ("bracket.levels", len(bk.gaps)), ("bracket.ordered", bk.ordered),
                    ("bracket.order_violation", bk.order_violation), ("bracket.monotone", bk.monotone),
                    ("bracket.monotone_violation", bk.monotone_violation)]
        if self.oracle_deviation is not None:
            out.append(("oracle.deviation", self.oracle_deviation))
        for i, note in enumerate(self.notes):
            out.append((f"note[{i}]", note))
        for i, err in enumerate(self.errors):
            out.append((f"error[{i}]", err))
        out += [("status", self.status), ("pass", self.passed)]
        return out

    def render(self) -> str:
        return "".join(f"{k} = {_fmt(v)}\n" for k, v in self.lines())


def _fmt(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return f"{v:.17e}"
    return str(v)


def run_verification(
    params: ModelParams,
    *,
    theta_max: float | None = None,
    tol: float = 1e-10,
    qtol: float = 1e-10,
    grid_points: int = 200,
    gap_tol: float = 1e-4,
    oracle_h: float | None = 1e-6,
    oracle_range=(1e-3, 1.0),
    bracket: bool = True,
) -> VerificationReport:
    """Solve, bracket, reconstruct and check; failed checks are reported, not raised.

    Validation of ``params`` is the caller's job.  Numeric failures inside a
    check are recorded in ``errors`` and make the report fail.
    """
    regime = classify_regime(params)
    theta_max = default_theta_max(params) if theta_max is None else theta_max
    traj = solve_trajectory(params, theta_max, tol)
    notes = []
    errors = []
    if regime.speed_sign is SpeedSign.ZERO:
        notes.append("zero speed: profile laws are taken from the exact separable solution")

    residual = refined = None
    try:
        grids = residual_grids(traj, qtol, grid_points)
        residual = combine_residuals([ode_residual(params, reconstruct_profile(params, traj, g, qtol))
                                      for g in grids])
        refined = combine_residuals([ode_residual(params, reconstruct_profile(params, traj, refine_grid(g), qtol))
                                     for g in grids])
        z_top = 0.99 * travel_time_map(traj, qtol).z_max
        prof = reconstruct_profile(params, traj, np.geomspace(traj.seed_end, z_top, grid_points), qtol)
        energy = energy_monotonicity(params, prof)
    except TravelWaveError as exc:
        errors.append(f"profile: {exc}")
        energy = EnergyCheck(params.k > 0, False, math.nan)

    try:
        t_fits = trajectory_fits(traj)
        p_fits = profile_fits(traj, qtol)
    except TravelWaveError as exc:
        errors.append(f"asymptotes: {exc}")
        t_fits, p_fits = [], []

    summary = None
    if bracket:
        try:
            ev = bracket_trajectory(params, traj, tol=tol, gap_tol=gap_tol, strict=False)
            summary = BracketSummary.from_evidence(ev)
        except TravelWaveError as exc:
            errors.append(f"bracket: {exc}")

    dev = None
    if oracle_h is not None:
        lo, hi = (float(v) for v in oracle_range)
        hi = min(hi, theta_max)
        try:
            start = None if params.k == 0 else float(eval_trajectory(traj, lo))
            orc = oracle_fixed_step(params, 1e-300, (lo, hi), oracle_h, upsilon0=start)
            dev = oracle_deviation(traj, orc)
        except TravelWaveError as exc:
            errors.append(f"oracle: {exc}")
            dev = math.inf

    thresholds = {"residual": RESIDUAL_TOL, "residual_drop": RESIDUAL_DROP, "oracle": ORACLE_TOL,
                  "fit": FIT_TOL, "gap": gap_tol}
    return VerificationReport(
        params, regime.label, theta_max, residual, refined, energy, t_fits, p_fits, summary, dev,
        trajectory_residual(traj), c_star(params), tuple(notes), tuple(errors), thresholds,
    )


__all__ = [
    "AsymptoteFit", "EnergyCheck", "ResidualStats", "VerificationReport",
    "centered_derivative", "energy_monotonicity", "energy_phi", "fit_asymptote", "ode_residual",
    "oracle_deviation", "oracle_fixed_step", "profile_fits", "ratio_curves", "refine_grid",
    "residual_grids", "combine_residuals", "richardson_ratio", "run_verification", "trajectory_fits", "trajectory_residual",
]
