"""Command-line front end: trajectory, profile, verify and sweep.

Exit codes: 0 success, 1 invalid input, 2 numerical failure, 3 I/O error,
4 request outside the computed range, 5 verification did not pass.
"""
from __future__ import annotations

import argparse
import io
import itertools
import json
import math
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, RangeExceeded, TravelWaveError, UncoveredRegime
from .model import ModelParams, c_star, classify_regime, phase_rhs, validate_params
from .phase_plane import default_theta_max, eval_trajectory, solve_trajectory
from .profile import reconstruct_profile, travel_time_map
from .verify import ratio_curves, run_verification

EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_NUMERIC = 2
EXIT_IO = 3
EXIT_RANGE = 4
EXIT_VERIFY = 5

PARAM_NAMES = ("m", "p", "beta", "b", "k")
FLOAT_OPTIONS = ("theta_max", "theta_min", "z_max", "z_min", "tol", "qtol", "speed_frame", "oracle_h")
INT_OPTIONS = ("grid_points", "workers", "points_per_decade")
DEFAULTS = {"tol": 1e-10, "qtol": 1e-10, "workers": 1, "points_per_decade": 20, "oracle_h": 1e-6}


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    """Argument errors exit with the validation code instead of argparse's 2."""

    def error(self, message):
        raise UsageError(message)


def fmt(x: float) -> str:
    return "%.17e" % x


def write_csv(path, header, rows):
    text = io.StringIO(newline="")
    text.write(",".join(header) + "\n")
    for row in rows:
        text.write(",".join(v if isinstance(v, str) else fmt(v) for v in row) + "\n")
    _emit(path, text.getvalue())


def _emit(path, content: str):
    if path is None or path == "-":
        sys.stdout.write(content)
        sys.stdout.flush()
        return
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(content)


# -- configuration -----------------------------------------------------------------


def read_config(path) -> dict:
    """``key = value`` lines; ``#`` starts a comment; ``sweep.<name> = v1,v2`` adds a sweep axis."""
    cfg: dict = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise DomainError(f"{path}:{lineno}: expected key = value")
            key, value = (part.strip() for part in line.split("=", 1))
            key = key.replace("-", "_")
            if key.startswith("sweep."):
                cfg.setdefault("sweep", []).append(f"{key[6:]}={value}")
            else:
                cfg[key] = value
    return cfg


def _to_float(name, value):
    try:
        return float(value)
    except (TypeError, ValueError):
        raise DomainError(f"{name} must be a number, got {value!r}") from None


def _to_int(name, value):
    try:
        return int(value)
    except (TypeError, ValueError):
        raise DomainError(f"{name} must be an integer, got {value!r}") from None


def merge_options(args: argparse.Namespace) -> dict:
    """Flags override the config file, which overrides the defaults."""
    opts = dict(DEFAULTS)
    if getattr(args, "config", None):
        opts.update(read_config(args.config))
    for key, value in vars(args).items():
        if value is None or key in ("config", "command", "func"):
            continue
        if key == "sweep":
            opts["sweep"] = list(opts.get("sweep", [])) + list(value)
        elif key in ("zero_extend", "nodes") and value is False:
            continue
        else:
            opts[key] = value
    for key in PARAM_NAMES + FLOAT_OPTIONS:
        if key in opts and opts[key] is not None:
            opts[key] = _to_float(key, opts[key])
    for key in INT_OPTIONS:
        if key in opts and opts[key] is not None:
            opts[key] = _to_int(key, opts[key])
    for key in ("tol", "qtol"):
        if not opts[key] > 0:
            raise DomainError(f"{key} must be positive")
    if opts.get("grid_points") is not None and opts["grid_points"] < 3:
        raise DomainError("grid_points must be at least 3")
    if opts["workers"] < 1:
        raise DomainError("workers must be at least 1")
    return opts


def params_from(opts: dict) -> ModelParams:
    missing = [n for n in PARAM_NAMES if opts.get(n) is None]
    if missing:
        raise UsageError("missing required parameter(s): " + ", ".join("--" + n for n in missing))
    return validate_params(*(opts[n] for n in PARAM_NAMES))


def _theta_max(params, opts):
    tm = opts.get("theta_max")
    if tm is None:
        return default_theta_max(params)
    if not tm > 0:
        raise DomainError("theta_max must be positive")
    return tm


# -- commands ---------------------------------------------------------------------------


def _decade_grid(lo: float, hi: float, per_decade: int) -> np.ndarray:
    """Points ``10^{j/per_decade}`` inside ``[lo, hi]`` plus ``hi`` itself."""
    j0 = math.ceil(math.log10(lo) * per_decade - 1e-9)
    j1 = math.floor(math.log10(hi) * per_decade + 1e-9)
    pts = 10.0 ** (np.arange(j0, j1 + 1) / per_decade)
    pts = pts[(pts >= lo) & (pts <= hi)]
    if pts.size == 0 or pts[-1] < hi:
        pts = np.append(pts, hi)
    return pts


def _write_plot_data(opts, traj):
    path = opts.get("plot_data")
    if path:
        rows = [(t, e, x, r) for t, e, x, r in ratio_curves(traj, opts["qtol"])]
        write_csv(path, ("target", "end", "x", "ratio"), rows)


def cmd_trajectory(opts) -> int:
    params = params_from(opts)
    theta_max = _theta_max(params, opts)
    traj = solve_trajectory(params, theta_max, opts["tol"])
    if opts.get("nodes"):
        thetas = traj.thetas
    else:
        lo = opts.get("theta_min") or traj.seed_end
        if not 0 < lo < theta_max:
            raise DomainError("theta_min must lie in (0, theta_max)")
        if opts.get("grid_points"):
            thetas = np.geomspace(lo, theta_max, opts["grid_points"])
        else:
            thetas = _decade_grid(lo, theta_max, opts["points_per_decade"])
    ups = eval_trajectory(traj, thetas)
    rhs = [phase_rhs(params, t, u) for t, u in zip(thetas, ups)]
    write_csv(opts.get("out"), ("theta", "upsilon", "rhs"), zip(thetas, ups, rhs))
    _write_plot_data(opts, traj)
    return EXIT_OK


def _z_grid(opts, tmap) -> np.ndarray:
    if opts.get("z_values"):
        zs = np.array([_to_float("z_values", v) for v in str(opts["z_values"]).split(",")])
        if np.any(np.diff(zs) <= 0):
            raise DomainError("z_values must be strictly increasing")
        return zs
    z_hi = opts.get("z_max") or 0.99 * tmap.z_max
    z_lo = opts.get("z_min") or min(tmap.cum[0], 1e-6 * z_hi)
    if not 0 < z_lo < z_hi:
        raise DomainError("need 0 < z_min < z_max")
    zs = np.geomspace(z_lo, z_hi, opts.get("grid_points") or 200)
    if opts.get("zero_extend"):
        zs = np.concatenate([-zs[::-1], [0.0], zs])
    return zs


def cmd_profile(opts) -> int:
    params = params_from(opts)
    theta_max = _theta_max(params, opts)
    traj = solve_trajectory(params, theta_max, opts["tol"])
    tmap = travel_time_map(traj, opts["qtol"])
    zs = _z_grid(opts, tmap)
    if zs[-1] > tmap.z_max * (1 + 1e-12):
        raise RangeExceeded(f"z = {zs[-1]:.6e} exceeds the reachable range {tmap.z_max:.6e}")
    pos = zs > 0
    phis = np.zeros_like(zs)
    fluxes = np.zeros_like(zs)
    if np.any(pos):
        prof = reconstruct_profile(params, traj, zs[pos], opts["qtol"])
        phis[pos] = prof.phis
        fluxes[pos] = prof.fluxes
    header = ["z", "phi", "flux"]
    cols = [zs, phis, fluxes]
    if opts.get("speed_frame") is not None:
        # u(x, t) = phi(k t - x): the same samples located at x = k t - z
        header.append("x")
        cols.append(params.k * opts["speed_frame"] - zs)
    write_csv(opts.get("out"), header, zip(*cols))
    _write_plot_data(opts, traj)
    return EXIT_OK


def cmd_verify(opts) -> int:
    params = params_from(opts)
    theta_max = _theta_max(params, opts)
    report = run_verification(
        params, theta_max=theta_max, tol=opts["tol"], qtol=opts["qtol"],
        grid_points=opts.get("grid_points") or 200, oracle_h=opts["oracle_h"] or None,
    )
    _emit(opts.get("out"), report.render())
    if opts.get("plot_data"):
        _write_plot_data(opts, solve_trajectory(params, theta_max, opts["tol"]))
    return EXIT_OK if report.passed else EXIT_VERIFY


# -- sweep -----------------------------------------------------------------------------


@dataclass(frozen=True)
class SweepCell:
    values: tuple
    tol: float
    qtol: float
    oracle_h: float | None


def parse_axes(specs) -> dict:
    axes: dict = {}
    for spec in specs:
        if "=" not in spec:
            raise DomainError(f"sweep axis must look like name=v1,v2; got {spec!r}")
        name, vals = spec.split("=", 1)
        name = name.strip()
        if name not in PARAM_NAMES:
            raise DomainError(f"unknown sweep parameter {name!r}")
        values = [_to_float(name, v) for v in vals.split(",") if v.strip()]
        if not values:
            raise DomainError(f"sweep axis {name!r} is empty")
        axes[name] = values
    return axes


def sweep_cells(opts) -> list[SweepCell]:
    axes = parse_axes(opts.get("sweep") or [])
    if not axes:
        raise UsageError("sweep needs at least one --sweep name=v1,v2 axis")
    fixed = [n for n in PARAM_NAMES if n not in axes]
    missing = [n for n in fixed if opts.get(n) is None]
    if missing:
        raise UsageError("missing required parameter(s): " + ", ".join("--" + n for n in missing))
    grids = [axes.get(n, [opts.get(n)]) for n in PARAM_NAMES]
    return [SweepCell(tuple(v), opts["tol"], opts["qtol"], opts["oracle_h"] or None)
            for v in itertools.product(*grids)]


def run_cell(cell: SweepCell) -> tuple:
    """One sweep row: parameters, regime, C_* and status; never raises."""
    try:
        params = validate_params(*cell.values)
    except DomainError:
        return (*cell.values, "", "", "invalid")
    # speed sign is already in the k column
    regime = classify_regime(params).balance.value.capitalize()
    cs = fmt(c_star(params))
    try:
        report = run_verification(params, tol=cell.tol, qtol=cell.qtol, oracle_h=cell.oracle_h)
        status = report.status
    except (TravelWaveError, ArithmeticError, ValueError):
        status = "fail"
    return (*cell.values, regime, cs, status)


def cmd_sweep(opts) -> int:
    cells = sweep_cells(opts)
    workers = opts["workers"]
    if workers == 1:
        rows = [run_cell(c) for c in cells]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(run_cell, cells))
    write_csv(opts.get("out"), (*PARAM_NAMES, "regime", "c_star", "status"), rows)
    return EXIT_OK


# -- entry point -----------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    g = common.add_argument_group("model parameters")
    for name in PARAM_NAMES:
        g.add_argument(f"--{name}", type=str, default=None)
    common.add_argument("--theta-max", dest="theta_max", type=str)
    common.add_argument("--tol", type=str, help="integrator tolerance (default 1e-10)")
    common.add_argument("--qtol", type=str, help="quadrature/root tolerance (default 1e-10)")
    common.add_argument("--grid-points", dest="grid_points", type=str)
    common.add_argument("--out", help="output path (default: standard output)")
    common.add_argument("--config", help="file of key = value lines; flags take precedence")
    common.add_argument("--plot-data", dest="plot_data", metavar="PATH",
                        help="also write asymptote ratio curves (target,end,x,ratio) to PATH")

    parser = _Parser(prog="travelwave", description="Finite traveling waves of doubly degenerate "
                     "reaction-diffusion equations via the phase plane.")
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)

    p = sub.add_parser("trajectory", parents=[common], help="singular phase-plane trajectory as CSV")
    p.add_argument("--theta-min", dest="theta_min", type=str)
    p.add_argument("--points-per-decade", dest="points_per_decade", type=str)
    p.add_argument("--nodes", action="store_true", help="emit the solver nodes instead of a grid")
    p.set_defaults(func=cmd_trajectory)

    p = sub.add_parser("profile", parents=[common], help="wave profile phi(z) and flux as CSV")
    p.add_argument("--z-max", dest="z_max", type=str)
    p.add_argument("--z-min", dest="z_min", type=str)
    p.add_argument("--z-values", dest="z_values", help="comma-separated increasing z values")
    p.add_argument("--zero-extend", dest="zero_extend", action="store_true",
                   help="add the mirrored grid of z <= 0 rows (phi = flux = 0)")
    p.add_argument("--speed-frame", dest="speed_frame", type=str, metavar="T",
                   help="add x = k T - z so rows sample u(x, T)")
    p.set_defaults(func=cmd_profile)

    p = sub.add_parser("verify", parents=[common], help="run all checks and print a key = value report")
    p.add_argument("--oracle-h", dest="oracle_h", type=str, help="fixed-step oracle step (0 disables)")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("sweep", parents=[common], help="verification status over a parameter grid")
    p.add_argument("--sweep", action="append", metavar="NAME=V1,V2", help="sweep axis (repeatable)")
    p.add_argument("--workers", type=str)
    p.add_argument("--oracle-h", dest="oracle_h", type=str)
    p.set_defaults(func=cmd_sweep)
    return parser


def _fail(code: int, category: str, message: str, usage: str | None = None) -> int:
    if usage:
        sys.stderr.write(usage)
    sys.stderr.write(json.dumps({"error": category, "code": code, "message": message}) + "\n")
    return code


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if args.command is None:
            raise UsageError("a command is required")
        opts = merge_options(args)
        return args.func(opts)
    except UsageError as exc:
        return _fail(EXIT_VALIDATION, "usage", str(exc), parser.format_usage())
    except RangeExceeded as exc:
        return _fail(EXIT_RANGE, "range", str(exc))
    except (DomainError, UncoveredRegime) as exc:
        return _fail(EXIT_VALIDATION, "validation", str(exc))
    except OSError as exc:
        return _fail(EXIT_IO, "io", str(exc))
    except (TravelWaveError, ArithmeticError) as exc:
        return _fail(EXIT_NUMERIC, "numeric", str(exc))


if __name__ == "__main__":
    sys.exit(main())
