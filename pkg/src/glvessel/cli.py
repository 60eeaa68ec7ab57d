"""Command-line entry point: ``glvessel {potential,evolve,verify,gl-compare,boundary}``.

Exit status: 0 pass, 1 verification failure, 2 configuration error,
3 numerical singularity.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from dataclasses import dataclass
from typing import Any

import numpy as np

from . import _checks
from .gl_oracle import IllConditionedError, q_at, solve_gl
from .kdv import EvolvedVessel, boundary_trace, kdv_residual
from .measures import MeasureError, SpectralMeasure, measure_from_dict, random_measure
from .sl import kernel_K, potential
from .vessel import SingularGramError, SLVessel

EXIT_OK, EXIT_FAIL, EXIT_CONFIG, EXIT_SINGULAR = 0, 1, 2, 3

DEFAULT_TOL = {"potential": 1e-5, "evolve": 1e-3, "verify": 1e-5, "gl-compare": 1e-7, "boundary": 1e-5}
DEFAULT_FD = {"potential": 1e-3, "evolve": 1e-3, "verify": 1e-3, "gl-compare": 1e-3, "boundary": 1e-3}
CONFIG_KEYS = {"measure", "atoms", "density", "x_range", "t_range", "fd_step", "quad_points", "tol"}


class ConfigError(ValueError):
    def __init__(self, key: str, message: str):
        super().__init__(f"{key}: {message}")
        self.key = key


@dataclass(frozen=True)
class RunConfig:
    measure: SpectralMeasure
    x_range: tuple[float, float, int]
    t_range: tuple[float, float, int]
    fd_step: float
    quad_points: int
    tol: float
    corrupt_gram: float = 0.0

    @property
    def xs(self) -> np.ndarray:
        return np.linspace(*self.x_range)

    @property
    def ts(self) -> np.ndarray:
        return np.linspace(*self.t_range)


def _parse_range(value: Any, key: str) -> tuple[float, float, int]:
    if not (isinstance(value, list) and len(value) == 3):
        raise ConfigError(key, "expected [min, max, steps]")
    lo, hi, steps = value
    if not all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in (lo, hi)):
        raise ConfigError(key, "min and max must be numbers")
    if not isinstance(steps, int) or isinstance(steps, bool):
        raise ConfigError(key, "steps must be an integer")
    if hi < lo:
        raise ConfigError(key, "max must not be below min")
    # a single point is allowed only for a degenerate range
    if steps < 2 and not (steps == 1 and lo == hi):
        raise ConfigError(key, "steps must be >= 2")
    return float(lo), float(hi), steps


def _read_config(path: str | None) -> dict:
    if path is None:
        return {}
    try:
        with open(path) as fh:
            doc = json.load(fh)
    except OSError as exc:
        raise ConfigError("config", str(exc)) from exc
    except json.JSONDecodeError as exc:
        raise ConfigError("config", f"invalid JSON at line {exc.lineno} column {exc.colno}") from exc
    if not isinstance(doc, dict):
        raise ConfigError("config", "top level must be a JSON object")
    unknown = sorted(set(doc) - CONFIG_KEYS)
    if unknown:
        raise ConfigError(unknown[0], "unknown key")
    return doc


def build_config(args: argparse.Namespace) -> RunConfig:
    doc = _read_config(args.config)
    if "measure" in doc:
        measure = measure_from_dict(doc["measure"])
    elif "atoms" in doc or "density" in doc:
        measure = measure_from_dict({k: doc[k] for k in ("atoms", "density") if k in doc})
    else:
        measure = random_measure(args.seed, n_atoms=3)

    x_range = _parse_range(doc.get("x_range", [0.0, 2.0, 21]), "x_range")
    t_range = _parse_range(doc.get("t_range", [0.0, 1.0, 11]), "t_range")
    if args.command in ("potential", "gl-compare", "verify") and x_range[0] < 0:
        raise ConfigError("x_range", "GL comparisons need x >= 0")

    fd = args.fd_step if args.fd_step is not None else doc.get("fd_step", DEFAULT_FD[args.command])
    if not isinstance(fd, (int, float)) or isinstance(fd, bool) or not 0 < fd <= 0.1:
        raise ConfigError("fd_step", "must lie in (0, 0.1]")
    quad = args.quad_points if args.quad_points is not None else doc.get("quad_points", 64)
    if not isinstance(quad, int) or isinstance(quad, bool) or quad < 8 or quad % 8:
        raise ConfigError("quad_points", "must be a positive multiple of 8")
    tol = args.tol if args.tol is not None else doc.get("tol", DEFAULT_TOL[args.command])
    if not isinstance(tol, (int, float)) or isinstance(tol, bool) or tol <= 0:
        raise ConfigError("tol", "must be a positive number")
    return RunConfig(measure, x_range, t_range, float(fd), quad, float(tol), args.corrupt_gram)


def _fmt(v: float) -> str:
    return "%.17g" % v


def _write_csv(out, header, rows) -> None:
    w = csv.writer(out, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([_fmt(v) for v in row])


def cmd_potential(cfg: RunConfig, out) -> int:
    """Rows (x, q_vessel, q_gl, abs_diff); passes when every diff is within tol."""
    v = SLVessel(cfg.measure, cfg.corrupt_gram)
    rows = []
    for x in cfg.xs:
        qv = potential(v, x)
        qg = q_at(cfg.measure, x, cfg.fd_step, cfg.quad_points)
        rows.append((x, qv, qg, abs(qv - qg)))
    _write_csv(out, ("x", "q_vessel", "q_gl", "abs_diff"), rows)
    return EXIT_OK if max(r[3] for r in rows) <= cfg.tol else EXIT_FAIL


def cmd_evolve(cfg: RunConfig, out) -> int:
    """Rows (x, t, q, kdv_residual).  The residual is reported as 0 on a single time slice."""
    rows = []
    single = cfg.ts.size == 1
    for t in cfg.ts:
        v = EvolvedVessel(cfg.measure, t, cfg.corrupt_gram)
        for x in cfg.xs:
            res = 0.0 if single else kdv_residual(cfg.measure, x, t, cfg.fd_step)
            rows.append((x, t, potential(v, x), res))
    _write_csv(out, ("x", "t", "q", "kdv_residual"), rows)
    for x, t, q, _ in rows:
        if x == 0.0:
            trace = boundary_trace(cfg.measure, t)
            if abs(q - trace) > DEFAULT_TOL["boundary"]:
                print(f"warning: q(0, {t:g}) = {q:.6g} differs from boundary_trace = {trace:.6g}", file=sys.stderr)
    return EXIT_OK if max(abs(r[3]) for r in rows) <= cfg.tol else EXIT_FAIL


def cmd_boundary(cfg: RunConfig, out) -> int:
    """Rows (t, q_at_zero, boundary_trace, abs_diff)."""
    rows = []
    for t in cfg.ts:
        q0 = potential(EvolvedVessel(cfg.measure, t, cfg.corrupt_gram), 0.0)
        bt = boundary_trace(cfg.measure, t)
        rows.append((t, q0, bt, abs(q0 - bt)))
    _write_csv(out, ("t", "q_at_zero", "boundary_trace", "abs_diff"), rows)
    return EXIT_OK if max(r[3] for r in rows) <= cfg.tol else EXIT_FAIL


def cmd_gl_compare(cfg: RunConfig, out) -> int:
    """Rows (x, max |K_gl - K_vessel| over the nodes, condition number of the GL system)."""
    v = SLVessel(cfg.measure, cfg.corrupt_gram)
    rows = []
    for x in cfg.xs:
        if x <= 0:
            continue
        row = solve_gl(cfg.measure, x, cfg.quad_points)
        diff = np.max(np.abs(row.values - kernel_K(v, x, row.nodes)))
        rows.append((x, diff, row.cond))
    _write_csv(out, ("x", "max_abs_diff", "cond"), rows)
    return EXIT_OK if max((r[1] for r in rows), default=0.0) <= cfg.tol else EXIT_FAIL


def cmd_verify(cfg: RunConfig, out) -> int:
    """JSON report {check: {max_residual, tolerance, pass, ...}}."""
    m, h, eps = cfg.measure, cfg.fd_step, cfg.corrupt_gram
    v = SLVessel(m, eps)
    x0, x1, _ = cfg.x_range
    xs = np.linspace(x0, x1, 5)
    inner = np.linspace(max(x0, 0.1), x1, 5) if x1 > 0.1 else np.array([0.1])
    pre = np.concatenate([[-1.0, -0.5], xs])
    t1 = cfg.t_range[1] if cfg.t_range[1] > 0 else 1.0
    xts = [(x, t) for x in (inner[0], inner[-1]) for t in (0.2 * t1, t1)]
    report = {
        "lyapunov": _checks.lyapunov(v, pre),
        "symmetry": _checks.symmetry(v, pre),
        "backlund": _checks.backlund(v, inner, h),
        "db": _checks.db(v, xs, h),
        "dx": _checks.dx(v, xs, h),
        "dx_inv_b": _checks.dx_inv_b(v, xs, h),
        "tau_gk": _checks.tau_gk(v, inner, h),
        "dbt": _checks.dbt(m, xts, h, eps),
        "dxt": _checks.dxt(m, xts, h, eps),
        "kdv": _checks.kdv(m, xts),
        "enls": _checks.enls(),
    }
    if not m.signed:
        report["gl_vs_vessel"] = _checks.gl_vs_vessel(m, v, np.linspace(max(x0, 0.1), max(x1, 0.1), 9), h, cfg.quad_points, cfg.tol)
    out.write(json.dumps(report, sort_keys=True, indent=2) + "\n")
    return EXIT_OK if all(c["pass"] for c in report.values()) else EXIT_FAIL


COMMANDS = {
    "potential": cmd_potential,
    "evolve": cmd_evolve,
    "verify": cmd_verify,
    "gl-compare": cmd_gl_compare,
    "boundary": cmd_boundary,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="glvessel", description=__doc__.splitlines()[0])
    parser.add_argument("command", choices=sorted(COMMANDS))
    parser.add_argument("--config", metavar="PATH", help="JSON run config; without it a seeded 3-atom measure is used")
    parser.add_argument("--out", metavar="PATH", help="output file (default: stdout)")
    parser.add_argument("--seed", type=int, default=0, help="seed for the random measure (default: 0)")
    parser.add_argument("--tol", type=float, default=None, help="pass/fail tolerance of the command")
    parser.add_argument("--fd-step", type=float, default=None, help="finite-difference step")
    parser.add_argument("--quad-points", type=int, default=None, help="Gauss-Legendre points per GL solve")
    parser.add_argument("--corrupt-gram", type=float, default=0.0, help=argparse.SUPPRESS)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = build_config(args)
    except (ConfigError, MeasureError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        if args.out:
            with open(args.out, "w", newline="") as fh:
                return COMMANDS[args.command](cfg, fh)
        return COMMANDS[args.command](cfg, sys.stdout)
    except SingularGramError as exc:
        print(f"singular: {exc}", file=sys.stderr)
        return EXIT_SINGULAR
    except IllConditionedError as exc:
        print(f"singular: {exc}", file=sys.stderr)
        return EXIT_SINGULAR


if __name__ == "__main__":
    sys.exit(main())
