"""Command-line interface: ``fracboussinesq {evaluate,verify,simulate,converge}``.

Exit codes: 0 success, 1 verification failure, 2 usage or admissibility
error, 3 numerical failure (instability or an unconverged special function).
CSV output uses 17 significant digits and LF line endings. Whenever a CSV
is written to a file, a ``<file>.manifest`` record is written next to it.
"""

from __future__ import annotations

import argparse
import csv
import io
import math
import sys
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from .checks import SUITES, observed_orders, run_suite
from .exceptions import ConvergenceError, DomainError, FracBoussinesqError, InstabilityError
from .operators import Field, Grid1D, boussinesq_rhs, caputo_l1, caputo_power_rule
from .params import AquiferParams
from .solutions import Family, evaluate, make_solution, sample, sink_rate, time_rate, to_keyvalue
from .validator import RightBC, SimConfig, csv_text, error_report, simulate

EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_NUMERIC = 0, 1, 2, 3


class UsageError(Exception):
    """Bad flag values detected after argparse (reported with exit code 2)."""


@dataclass
class RunManifest:
    command: str
    parameters: dict
    artifact_version: str = __version__
    wall_time_s: float = 0.0
    outputs: list = field(default_factory=list)

    def to_text(self) -> str:
        lines = [
            f"command={self.command}",
            f"artifact_version={self.artifact_version}",
            f"wall_time_s={self.wall_time_s:.6f}",
            f"outputs={','.join(str(p) for p in self.outputs)}",
        ]
        lines += [f"param.{k}={self.parameters[k]}" for k in sorted(self.parameters)]
        return "\n".join(lines) + "\n"

    def write(self, path) -> Path:
        path = Path(path)
        path.write_text(self.to_text(), newline="\n")
        return path


def _fmt(v) -> str:
    return format(float(v), ".17g")


def _csv(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


def _emit(text: str, output, manifest: RunManifest | None, started: float) -> None:
    """Write CSV text to ``output`` (or stdout) plus its manifest."""
    if output is None:
        sys.stdout.write(text)
        return
    out = Path(output)
    out.write_text(text, newline="\n")
    if manifest is not None:
        manifest.outputs = [str(out)]
        manifest.wall_time_s = time.perf_counter() - started
        manifest.write(str(out) + ".manifest")


def _info(args, msg: str) -> None:
    if not args.quiet:
        print(msg, file=sys.stderr)


def _float_list(text: str) -> list:
    try:
        return [float(s) for s in text.split(",") if s.strip()]
    except ValueError:
        raise UsageError(f"expected comma-separated numbers, got {text!r}") from None


def _int_list(text: str) -> list:
    try:
        return [int(s) for s in text.split(",") if s.strip()]
    except ValueError:
        raise UsageError(f"expected comma-separated integers, got {text!r}") from None


def parse_time(token: str, t_blowup: float | None) -> float:
    """``0.5``, ``t_blowup`` or ``0.9*t_blowup``."""
    token = token.strip()
    if "t_blowup" not in token:
        try:
            return float(token)
        except ValueError:
            raise UsageError(f"cannot parse time {token!r}") from None
    if t_blowup is None:
        raise DomainError(f"time {token!r} refers to t_blowup, but this solution has no blow-up time")
    coef, _, rest = token.partition("*")
    if token == "t_blowup":
        return t_blowup
    if rest.strip() != "t_blowup":
        raise UsageError(f"cannot parse time {token!r}")
    try:
        return float(coef) * t_blowup
    except ValueError:
        raise UsageError(f"cannot parse time {token!r}") from None


def _params(args) -> AquiferParams:
    return AquiferParams(k=args.k, phi=args.phi, lam=args.lam, beta=args.beta)


def _add_physics(p, nu_help="fractional order in space, (0, 1]"):
    p.add_argument("--nu", type=float, default=0.5, help=nu_help)
    p.add_argument("--gamma", type=float, default=1.0, help="fractional order in time, (0, 1]")
    p.add_argument("--k", type=float, default=1.0, help="diffusivity factor")
    p.add_argument("--phi", type=float, default=0.0, help="transfer coefficient")
    p.add_argument("--lambda", dest="lam", type=float, default=0.0, help="lam in phi(t) = lam*t^beta")
    p.add_argument("--beta", type=float, default=0.0, help="beta in phi(t) = lam*t^beta")


# ---------------------------------------------------------------- evaluate


def cmd_evaluate(args) -> int:
    started = time.perf_counter()
    sol = make_solution(args.family, args.nu, args.gamma, _params(args))
    if args.N < 2:
        raise UsageError("--N needs at least 2 points")
    grid = Grid1D(args.L, args.N - 1, args.grading)
    times = [parse_time(tok, sol.t_blowup) for tok in args.t.split(",") if tok.strip()]
    if not times:
        raise UsageError("--t is empty")
    rows = []
    for t in times:
        h = evaluate(sol, grid.nodes, t)
        rows += [[_fmt(t), _fmt(x), _fmt(v)] for x, v in zip(grid.nodes, h)]
    params = _describe(args)
    params["solution"] = to_keyvalue(sol).strip().replace("\n", ";")
    _emit(_csv(["t", "x", "h"], rows), args.output, RunManifest("evaluate", params), started)
    return EXIT_OK


def _describe(args) -> dict:
    skip = {"func", "quiet", "output", "command"}
    return {k: v for k, v in sorted(vars(args).items()) if k not in skip}


# ------------------------------------------------------------------ verify


def cmd_verify(args) -> int:
    started = time.perf_counter()
    rows = run_suite(args.suite, args.seed)
    width = max(len(r.name) for r in rows)
    for r in rows:
        status = "PASS" if r.passed else "FAIL"
        print(f"{r.name:<{width}}  {r.measured:<24.17g}  {r.tolerance:<22}  {status}")
    failed = sum(not r.passed for r in rows)
    _info(args, f"{len(rows) - failed}/{len(rows)} checks passed")
    if args.output is not None:
        table = _csv(
            ["name", "measured", "tolerance", "status"],
            [[r.name, _fmt(r.measured), r.tolerance, "PASS" if r.passed else "FAIL"] for r in rows],
        )
        _emit(table, args.output, RunManifest("verify", _describe(args)), started)
    return EXIT_FAIL if failed else EXIT_OK


# ---------------------------------------------------------------- simulate

_CONFIG_KEYS = {
    "family", "nu", "gamma", "k", "phi", "lambda", "beta", "L", "N", "grading",
    "dt", "t_end", "right_bc", "cfl_safety", "auto_dt", "snapshot_stride", "output",
}


def read_config(path) -> dict:
    """Flat ``key=value`` file; ``#`` starts a comment."""
    conf = {}
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, val = line.partition("=")
        key = key.strip()
        if not sep or not key:
            raise UsageError(f"{path}:{lineno}: expected key=value")
        if key not in _CONFIG_KEYS:
            raise UsageError(f"{path}:{lineno}: unknown key {key!r}")
        conf[key] = val.strip()
    if "family" not in conf:
        raise UsageError(f"{path}: 'family' is required")
    return conf


def _bool(text: str) -> bool:
    t = text.lower()
    if t in ("1", "true", "yes", "on"):
        return True
    if t in ("0", "false", "no", "off"):
        return False
    raise UsageError(f"cannot parse boolean {text!r}")


def build_config(conf: dict) -> SimConfig:
    """Turn a parsed config map into a :class:`SimConfig`.

    ``N`` counts grid intervals. ``dt`` defaults to ``t_end`` and is
    capped by the stability heuristic while ``auto_dt`` is on.
    """
    num = lambda key, default: float(conf.get(key, default))  # noqa: E731
    try:
        params = AquiferParams(
            k=num("k", 1.0), phi=num("phi", 0.0), lam=num("lambda", 0.0), beta=num("beta", 0.0)
        )
        sol = make_solution(conf["family"], num("nu", 0.5), num("gamma", 1.0), params)
        grid = Grid1D(num("L", 1.0), int(conf.get("N", 200)), num("grading", 1.0))
        t_end = parse_time(conf.get("t_end", "1"), sol.t_blowup)
        right_bc = RightBC(conf.get("right_bc", RightBC.EXACT_DIRICHLET.value))
        return SimConfig(
            grid=grid,
            dt=float(conf.get("dt", t_end)),
            t_end=t_end,
            nu=sol.nu,
            gamma=sol.gamma,
            params=params,
            right_bc=right_bc,
            cfl_safety=num("cfl_safety", 0.5),
            auto_dt=_bool(conf.get("auto_dt", "true")),
            solution=sol,
            snapshot_stride=int(conf.get("snapshot_stride", 0)),
        )
    except ValueError as exc:
        if isinstance(exc, DomainError):
            raise
        raise UsageError(str(exc)) from None


def cmd_simulate(args) -> int:
    started = time.perf_counter()
    conf = read_config(args.config)
    cfg = build_config(conf)
    res = simulate(cfg)
    if not res.stability_flag:
        print(f"error: simulation unstable; last stable time t={res.last_stable_time:.17g}", file=sys.stderr)
        return EXIT_NUMERIC
    stepper = "step_explicit" if float(cfg.gamma) == 1.0 else "step_l1_time"
    rep = error_report(res, cfg.solution)
    if not args.quiet:
        print(f"solution={cfg.solution.label()}")
        print(f"stepper={stepper}")
        print(f"steps={res.steps}")
        print(f"t_final={res.times[-1]:.17g}")
        print(f"l2_rel={rep.l2_rel:.17g}")
        print(f"linf_rel={rep.linf_rel:.17g}")
    output = args.output or conf.get("output") or str(Path(args.config).with_suffix(".csv"))
    params = dict(sorted(conf.items()))
    params.update(stepper=stepper, l2_rel=repr(rep.l2_rel), linf_rel=repr(rep.linf_rel))
    _emit(csv_text(res, cfg.solution), output, RunManifest("simulate", params), started)
    return EXIT_OK


# ---------------------------------------------------------------- converge


def _converge_error(args, nu: float, n: int) -> float:
    if args.family == "power-rule":
        beta = nu + 1.0 if args.power is None else args.power
        grid = Grid1D(args.L, n)
        mask = grid.window(0.1)
        x = grid.nodes
        approx = caputo_l1(Field(grid, x**beta), nu).values[mask]
        exact = caputo_power_rule(beta, nu, x[mask])
        return float(np.max(np.abs(approx - exact) / np.abs(exact)))
    params = _params(args)
    sol = make_solution(args.family, nu, args.gamma, params)
    grid = Grid1D(args.L, n, args.grading)
    if args.measure == "residual":
        t = parse_time(args.t, sol.t_blowup)
        h = sample(sol, grid, t)
        r = boussinesq_rhs(h, sol.nu, params, phi=sink_rate(sol, t))
        mask = grid.window(args.lo)
        return float(np.max(np.abs(r.values - time_rate(sol, grid.nodes, t))[mask]))
    t_end = parse_time(args.t_end, sol.t_blowup)
    cfg = SimConfig(grid, t_end, t_end, sol.nu, sol.gamma, params, solution=sol)
    res = simulate(cfg)
    if not res.stability_flag:
        raise InstabilityError(f"simulation at N={n} unstable", res.last_stable_time)
    return error_report(res, sol).l2_rel


def cmd_converge(args) -> int:
    started = time.perf_counter()
    grids = _int_list(args.grids)
    if len(grids) < 3:
        raise UsageError("--grids needs at least three sizes")
    if any(b != 2 * a for a, b in zip(grids, grids[1:])):
        raise UsageError("--grids must double at every step, e.g. 128,256,512")
    nus = sorted(_float_list(args.nu))
    if not nus:
        raise UsageError("--nu is empty")
    rows = []
    for nu in nus:
        errs = [_converge_error(args, nu, n) for n in grids]
        orders = observed_orders(grids, errs) if all(e > 0 for e in errs) else [math.nan] * (len(grids) - 1)
        if any(b >= a for a, b in zip(errs, errs[1:])):
            print(f"WARN: non-monotone error sequence for nu={nu:g}: {', '.join(f'{e:.3g}' for e in errs)}", file=sys.stderr)
        for i, (n, e) in enumerate(zip(grids, errs)):
            rows.append([args.family, _fmt(nu), str(n), _fmt(e), "" if i == 0 else _fmt(orders[i - 1])])
        _info(args, f"nu={nu:g}: final order estimate {orders[-1]:.4f}")
    table = _csv(["family", "nu", "N", "error", "order"], rows)
    _emit(table, args.output, RunManifest("converge", _describe(args)), started)
    return EXIT_OK


# -------------------------------------------------------------------- main


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--output", help="write CSV here (and <output>.manifest) instead of stdout")
    common.add_argument("--seed", type=int, default=42, help="seed for randomized sampling (default 42)")
    common.add_argument("--quiet", action="store_true", help="suppress informational output")

    parser = argparse.ArgumentParser(
        prog="fracboussinesq",
        description="Exact solutions and numerical checks for the fractional Boussinesq equation.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    families = [f.value for f in Family]

    p = sub.add_parser("evaluate", parents=[common], help="tabulate a closed-form solution")
    p.add_argument("--family", required=True, choices=families)
    _add_physics(p)
    p.add_argument("--L", type=float, default=1.0, help="domain length")
    p.add_argument("--N", type=int, default=11, help="number of grid points (including x=0)")
    p.add_argument("--grading", type=float, default=1.0, help="mesh grading exponent r >= 1")
    p.add_argument("--t", default="0", help="comma list of times; accepts c*t_blowup")
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("verify", parents=[common], help="run built-in verification checks")
    p.add_argument("--suite", required=True, choices=[*SUITES, "all"])
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("simulate", parents=[common], help="run the finite-difference validator")
    p.add_argument("config", help="key=value config file")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("converge", parents=[common], help="observed convergence orders")
    p.add_argument("--family", required=True, choices=["power-rule", *families])
    p.add_argument("--grids", required=True, help="comma list of interval counts, each double the last")
    p.add_argument("--nu", default="0.5", help="comma list of orders")
    p.add_argument("--gamma", type=float, default=1.0)
    p.add_argument("--k", type=float, default=1.0)
    p.add_argument("--phi", type=float, default=0.0)
    p.add_argument("--lambda", dest="lam", type=float, default=0.0)
    p.add_argument("--beta", type=float, default=0.0)
    p.add_argument("--L", type=float, default=1.0)
    p.add_argument("--grading", type=float, default=1.0)
    p.add_argument("--power", type=float, default=None, help="power-rule exponent (default nu+1)")
    p.add_argument("--measure", choices=["residual", "simulate"], default="residual",
                   help="operator residual at --t, or validator l2_rel at --t-end")
    p.add_argument("--t", default="0", help="time for the residual measure")
    p.add_argument("--t-end", dest="t_end", default="1", help="final time for the simulate measure")
    p.add_argument("--lo", type=float, default=0.1, help="residual window starts at lo*L")
    p.set_defaults(func=cmd_converge)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except DomainError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except InstabilityError as exc:
        print(f"error: {exc}; last stable time t={exc.last_stable_time:.17g}", file=sys.stderr)
        return EXIT_NUMERIC
    except (ConvergenceError, FracBoussinesqError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
