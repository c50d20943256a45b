"""Explicit finite-difference solver used as an oracle for the closed forms.

Space: L1 Caputo derivative, product with h, centred outer derivative
(:func:`fracboussinesq.operators.boussinesq_rhs`). Time: forward Euler for
``gamma = 1``; for ``gamma < 1`` the L1 scheme in time with the spatial
operator frozen at the previous level, which keeps the whole history.

The half-line is truncated to ``[0, L]``; the right boundary takes its
value from a catalog solution (``EXACT_DIRICHLET``) or carries zero flux
(``ZERO_FLUX``, only meaningful for compactly supported data).
"""

from __future__ import annotations

import csv
import enum
import io
import math
from dataclasses import dataclass, field
from typing import NamedTuple, Sequence

import numpy as np

from .exceptions import DomainError, InstabilityError, MismatchError
from .operators import Field, Grid1D, flux, gamma as gamma_fn
from .params import AquiferParams, FractionalOrder
from .solutions import ClosedFormSolution, evaluate, sample, sink_rate

__all__ = [
    "RightBC",
    "SimConfig",
    "SimResult",
    "ErrorReport",
    "cfl_dt",
    "step_explicit",
    "step_l1_time",
    "simulate",
    "error_report",
    "richardson_order",
    "mass_weights",
    "boundary_flux",
    "write_csv",
    "csv_text",
    "INSTABILITY_LEVEL",
]

INSTABILITY_LEVEL = 1e8


class RightBC(enum.Enum):
    EXACT_DIRICHLET = "exact"
    ZERO_FLUX = "zero-flux"


@dataclass(frozen=True)
class SimConfig:
    grid: Grid1D
    dt: float
    t_end: float
    nu: float
    gamma: float = 1.0
    params: AquiferParams = field(default_factory=AquiferParams)
    right_bc: RightBC = RightBC.EXACT_DIRICHLET
    cfl_safety: float = 0.5
    auto_dt: bool = True
    solution: ClosedFormSolution | None = None
    snapshot_stride: int = 0

    def __post_init__(self):
        object.__setattr__(self, "nu", FractionalOrder(self.nu))
        object.__setattr__(self, "gamma", FractionalOrder(self.gamma))
        if not self.dt > 0 or not self.t_end > 0:
            raise DomainError("dt and t_end must be positive")
        if not 0 < self.cfl_safety <= 1:
            raise DomainError("cfl_safety must lie in (0, 1]")
        if self.right_bc is RightBC.EXACT_DIRICHLET and self.solution is None:
            raise DomainError("exact Dirichlet data needs a catalog solution")
        if self.solution is not None:
            s = self.solution
            if (float(s.nu), float(s.gamma), s.params) != (float(self.nu), float(self.gamma), self.params):
                raise MismatchError("solution record and simulation parameters differ")
            if s.t_blowup is not None and self.t_end >= s.t_blowup:
                raise DomainError(f"t_end={self.t_end:g} reaches the blow-up time {s.t_blowup:g}")
            if not math.isfinite(sink_rate(s, 0.0)):
                raise DomainError("the sink rate lam*t^beta is infinite at t=0; the stepper needs beta >= 0")


@dataclass
class SimResult:
    config: SimConfig
    times: list = field(default_factory=list)
    fields: list = field(default_factory=list)
    stability_flag: bool = True
    max_residual_trace: list = field(default_factory=list)
    last_stable_time: float = 0.0
    steps: int = 0

    @property
    def final(self) -> Field:
        return self.fields[-1]


def cfl_dt(h: Field, nu, k: float, safety: float = 0.5) -> float:
    """Largest forward-Euler step the heuristic allows for this field.

    ``safety * sin(pi nu / 2) * min_i dx_i**(1+nu) / (k * h_i)``, with ``h_i``
    the larger end value of cell i. On a uniform grid this is
    ``dx**(1+nu) / (k h_max)`` times the safety and angle factors; the sine
    is the damping fraction of the symbol ``(i xi)**(1+nu)``.
    """
    nu = float(nu)
    dx = np.diff(h.x)
    hv = np.abs(h.values)
    hcell = np.maximum(hv[:-1], hv[1:])
    ok = hcell > 0
    if not ok.any():
        return math.inf
    with np.errstate(over="ignore"):
        limits = dx[ok] ** (1 + nu) / (k * hcell[ok])
    return float(safety * math.sin(math.pi * nu / 2) * np.min(limits))


def _rhs(h: Field, cfg: SimConfig, t: float) -> np.ndarray:
    g = flux(h, cfg.nu).values.copy()
    if cfg.right_bc is RightBC.ZERO_FLUX:
        g[-1] = 0.0
    dg = np.gradient(g, h.x, edge_order=2)
    phi = sink_rate(cfg.solution, t) if cfg.solution is not None else cfg.params.phi
    return cfg.params.k * dg - phi * h.values


def _apply_bc(values: np.ndarray, cfg: SimConfig, t_new: float) -> None:
    values[0] = 0.0
    if cfg.right_bc is RightBC.EXACT_DIRICHLET:
        values[-1] = evaluate(cfg.solution, cfg.grid.length, t_new)


def _check(values: np.ndarray, t_old: float) -> None:
    if not np.all(np.isfinite(values)) or np.max(np.abs(values)) > INSTABILITY_LEVEL:
        raise InstabilityError(
            f"solution exceeded {INSTABILITY_LEVEL:g} or became non-finite after t={t_old:.6g}",
            last_stable_time=t_old,
        )


def step_explicit(h: Field, cfg: SimConfig, t: float = 0.0, dt: float | None = None) -> Field:
    """One forward-Euler step ``h + dt * F[h]`` from time ``t``."""
    dt = cfg.dt if dt is None else dt
    new = h.values + dt * _rhs(h, cfg, t)
    _apply_bc(new, cfg, t + dt)
    _check(new, t)
    return Field(h.grid, new)


def _l1_time_weights(m: int, g: float) -> np.ndarray:
    j = np.arange(m + 1, dtype=float)
    return (j + 1) ** (1 - g) - j ** (1 - g)


def _l1_update(h_m: np.ndarray, diffs: np.ndarray, m: int, rhs: np.ndarray, cfg: SimConfig, b: np.ndarray, dt: float):
    g = float(cfg.gamma)
    new = h_m + gamma_fn(2 - g) * dt**g * rhs
    if m > 0:
        # sum_{j=1..m} b_j (h^{m+1-j} - h^{m-j}) with diffs[i] = h^{i+1} - h^i
        new -= b[m:0:-1] @ diffs[:m]
    return new


def step_l1_time(history: Sequence[Field], cfg: SimConfig, dt: float | None = None) -> Field:
    """Advance the time-fractional problem by one L1 step.

    ``history`` holds every level ``h^0 .. h^m`` on a uniform time grid;
    returns ``h^{m+1}`` from
    ``h^m + Gamma(2-g) dt**g F[h^m] - sum_{j>=1} b_j (h^{m+1-j} - h^{m-j})``.
    """
    g = float(cfg.gamma)
    if g == 1.0:
        raise DomainError("use step_explicit for gamma = 1")
    dt = cfg.dt if dt is None else dt
    m = len(history) - 1
    t = m * dt
    vals = np.array([f.values for f in history])
    diffs = np.diff(vals, axis=0)
    b = _l1_time_weights(m, g)
    new = _l1_update(vals[-1], diffs, m, _rhs(history[-1], cfg, t), cfg, b, dt)
    _apply_bc(new, cfg, t + dt)
    _check(new, t)
    return Field(history[-1].grid, new)


def _trace_value(h: Field, cfg: SimConfig, t: float) -> float:
    if cfg.solution is None:
        return float(np.max(np.abs(h.values)))
    mask = cfg.grid.window(0.1, 0.9)
    return float(np.max(np.abs(h.values - evaluate(cfg.solution, h.x, t))[mask]))


def simulate(cfg: SimConfig, h0: Field | None = None) -> SimResult:
    """Run from ``h0`` (default: the catalog solution at t = 0) to ``t_end``.

    Snapshots are stored every ``snapshot_stride`` steps (0 keeps only the
    initial and final fields). An instability stops the run and returns a
    result with ``stability_flag = False``.
    """
    if h0 is None:
        if cfg.solution is None:
            raise DomainError("initial field required when no solution is referenced")
        h0 = sample(cfg.solution, cfg.grid, 0.0)
    res = SimResult(cfg)

    def snap(h, t):
        res.times.append(t)
        res.fields.append(h)
        res.max_residual_trace.append(_trace_value(h, cfg, t))

    snap(h0, 0.0)
    try:
        if float(cfg.gamma) == 1.0:
            _run_explicit(cfg, h0, res, snap)
        else:
            _run_l1(cfg, h0, res, snap)
    except InstabilityError as exc:
        res.stability_flag = False
        res.last_stable_time = exc.last_stable_time
    return res


def _run_explicit(cfg, h, res, snap):
    t = 0.0
    step = 0
    k = cfg.params.k
    while t < cfg.t_end * (1 - 1e-14):
        dt = cfg.dt
        if cfg.auto_dt:
            dt = min(dt, cfl_dt(h, cfg.nu, k, cfg.cfl_safety))
        last = t + dt >= cfg.t_end * (1 - 1e-12)
        if last:
            dt = cfg.t_end - t
        h = step_explicit(h, cfg, t, dt)
        t = cfg.t_end if last else t + dt
        step += 1
        res.last_stable_time = t
        res.steps = step
        if last or (cfg.snapshot_stride and step % cfg.snapshot_stride == 0):
            snap(h, t)


def _run_l1(cfg, h, res, snap):
    g = float(cfg.gamma)
    dt = cfg.dt
    if cfg.auto_dt:
        tau = cfl_dt(h, cfg.nu, cfg.params.k, cfg.cfl_safety)
        dt = min(dt, (tau / gamma_fn(2 - g)) ** (1 / g))
    n_steps = max(1, int(math.ceil(cfg.t_end / dt - 1e-9)))
    dt = cfg.t_end / n_steps
    b = _l1_time_weights(n_steps, g)
    diffs = np.empty((n_steps, h.values.size))
    cur = h.values.copy()
    for m in range(n_steps):
        t = m * dt
        new = _l1_update(cur, diffs, m, _rhs(Field(cfg.grid, cur), cfg, t), cfg, b, dt)
        _apply_bc(new, cfg, (m + 1) * dt)
        _check(new, t)
        diffs[m] = new - cur
        cur = new
        res.last_stable_time = (m + 1) * dt
        res.steps = m + 1
        if m + 1 == n_steps or (cfg.snapshot_stride and (m + 1) % cfg.snapshot_stride == 0):
            snap(Field(cfg.grid, cur), cfg.t_end if m + 1 == n_steps else (m + 1) * dt)


class ErrorReport(NamedTuple):
    l2_rel: float
    linf_rel: float
    order_estimate: float | None = None


def richardson_order(coarse: Field, medium: Field, fine: Field, lo=0.1, hi=0.9) -> float:
    """Observed order from three solutions on grids with n, 2n, 4n intervals.

    Compares at the coarse nodes, which every finer grid contains.
    """
    gc, gm, gf = coarse.grid, medium.grid, fine.grid
    if not (gm.n == 2 * gc.n and gf.n == 2 * gm.n) or len({gc.length, gm.length, gf.length}) > 1:
        raise MismatchError("Richardson triplet needs grids of n, 2n, 4n intervals on one domain")
    mask = gc.window(lo, hi)
    uc = coarse.values[mask]
    um = medium.values[::2][mask]
    uf = fine.values[::4][mask]
    return float(np.log2(np.linalg.norm(uc - um) / np.linalg.norm(um - uf)))


def error_report(
    sim: SimResult,
    sol: ClosedFormSolution,
    triplet: Sequence[SimResult] | None = None,
) -> ErrorReport:
    """Relative l2 and max errors on ``[L/10, 9L/10]`` at the final time."""
    cfg = sim.config
    if (float(sol.nu), float(sol.gamma), sol.params) != (float(cfg.nu), float(cfg.gamma), cfg.params):
        raise MismatchError("simulation and solution parameter records differ")
    h = sim.final
    t = sim.times[-1]
    mask = cfg.grid.window(0.1, 0.9)
    exact = evaluate(sol, h.x, t)[mask]
    diff = h.values[mask] - exact
    l2 = float(np.linalg.norm(diff) / np.linalg.norm(exact))
    linf = float(np.max(np.abs(diff)) / np.max(np.abs(exact)))
    order = None
    if triplet is not None:
        c, m, f = triplet
        order = richardson_order(c.final, m.final, f.final)
    return ErrorReport(l2, linf, order)


def _gradient_matrix(grid: Grid1D) -> np.ndarray:
    eye = np.eye(grid.n + 1)
    return np.gradient(eye, grid.nodes, axis=0, edge_order=2)


def mass_weights(grid: Grid1D) -> np.ndarray:
    """Quadrature weights compatible with the outer difference operator.

    Chosen so that ``w @ D g == g[-1] - g[0]`` for every ``g``, which makes
    the discrete mass ``w @ h`` change only through the boundary fluxes.
    """
    D = _gradient_matrix(grid)
    rhs = np.zeros(grid.n + 1)
    rhs[0], rhs[-1] = -1.0, 1.0
    w, *_ = np.linalg.lstsq(D.T, rhs, rcond=None)
    return w


def boundary_flux(h: Field, cfg: SimConfig) -> float:
    """``k * (g(L) - g(0))`` with ``g = h D^nu h``, honouring zero-flux data."""
    g = flux(h, cfg.nu).values
    gl = 0.0 if cfg.right_bc is RightBC.ZERO_FLUX else g[-1]
    return cfg.params.k * (gl - g[0])


def _fmt(v: float) -> str:
    return format(float(v), ".17g")


def write_csv(sim: SimResult, out, sol: ClosedFormSolution | None = None) -> None:
    """Write ``t,x,h,exact,abs_err`` rows for every snapshot and node.

    ``out`` is a path or a text stream. Without a solution the last two
    columns are empty.
    """
    if isinstance(out, (str, bytes)) or hasattr(out, "__fspath__"):
        with open(out, "w", newline="") as fh:
            write_csv(sim, fh, sol)
        return
    w = csv.writer(out, lineterminator="\n")
    w.writerow(["t", "x", "h", "exact", "abs_err"])
    for t, h in zip(sim.times, sim.fields):
        exact = evaluate(sol, h.x, t) if sol is not None else None
        for i, (x, v) in enumerate(zip(h.x, h.values)):
            if exact is None:
                w.writerow([_fmt(t), _fmt(x), _fmt(v), "", ""])
            else:
                w.writerow([_fmt(t), _fmt(x), _fmt(v), _fmt(exact[i]), _fmt(abs(v - exact[i]))])


def csv_text(sim: SimResult, sol: ClosedFormSolution | None = None) -> str:
    buf = io.StringIO()
    write_csv(sim, buf, sol)
    return buf.getvalue()
