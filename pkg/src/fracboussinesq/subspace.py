"""Invariant subspaces of the space-fractional Boussinesq operator.

For ``F[h] = k d/dx (h D^nu h) - phi h`` and ``h = sum_k f_k x**e_k`` the
power rule gives ``F[h]`` exactly as a finite sum of powers of x. If every
power produced lies in the span of the basis, the span is invariant and
``dh/dt = F[h]`` collapses to an ODE system for the coefficients ``f_k``.

Certification follows that recipe numerically: the image of random
coefficient vectors is sampled on a grid and least-squares projected back
onto the basis. :func:`reduce` extracts the ODE right-hand side
symbolically and :func:`integrate` advances it with classical RK4.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from .exceptions import BlowUpError, DomainError, InvarianceError
from .operators import Grid1D, caputo_power_rule
from .params import AquiferParams, FractionalOrder

__all__ = [
    "PowerBasis",
    "Term",
    "OdeReduction",
    "Certificate",
    "Trajectory",
    "operator_image",
    "certify_invariance",
    "reduce",
    "integrate",
    "CERTIFY_TOL",
    "BLOWUP_LEVEL",
]

CERTIFY_TOL = 1e-8
BLOWUP_LEVEL = 1e12
MAX_DIM = 2
_EXP_TOL = 1e-12


@dataclass(frozen=True)
class PowerBasis:
    """Basis functions ``x**e`` (``e = 0`` is the constant function)."""

    exponents: tuple

    def __post_init__(self):
        exps = tuple(sorted(float(e) for e in self.exponents))
        if not exps:
            raise DomainError("basis needs at least one exponent")
        if len(exps) > MAX_DIM:
            raise DomainError(f"bases are limited to dimension {MAX_DIM}")
        if any(e < 0 for e in exps):
            raise DomainError("basis exponents must be non-negative")
        if any(abs(a - b) < _EXP_TOL for a, b in zip(exps, exps[1:])):
            raise DomainError("basis exponents must be distinct")
        object.__setattr__(self, "exponents", exps)

    def __len__(self):
        return len(self.exponents)

    def matrix(self, x: np.ndarray) -> np.ndarray:
        return np.column_stack([x**e for e in self.exponents])

    def index(self, e: float) -> int | None:
        for i, b in enumerate(self.exponents):
            if abs(b - e) < _EXP_TOL:
                return i
        return None


def _derivative_coef(e: float, nu) -> float:
    """Coefficient of ``x**(e - nu)`` in ``D^nu x**e``; zero for constants."""
    if e == 0.0:
        return 0.0
    return caputo_power_rule(e, nu, 1.0)


def operator_image(exponents, coeffs, nu, params: AquiferParams) -> dict:
    """``F[sum c_i x**e_i]`` as a map exponent -> coefficient (exact path).

    ``h D^nu h`` is a sum of products ``c_a c_b G(e_b) x**(e_a+e_b-nu)``; its
    x-derivative multiplies by ``e_a+e_b-nu`` and lowers the power by one.
    Terms whose coefficient vanishes identically are dropped.
    """
    nu = FractionalOrder(nu)
    image: dict = {}

    def add(p, c):
        if c == 0.0:
            return
        for q in image:
            if abs(q - p) < _EXP_TOL:
                image[q] += c
                return
        image[p] = c

    for ea, ca in zip(exponents, coeffs):
        for eb, cb in zip(exponents, coeffs):
            g = _derivative_coef(eb, nu)
            power = ea + eb - nu
            add(power - 1.0, params.k * ca * cb * g * power)
    for e, c in zip(exponents, coeffs):
        add(e, -params.phi * c)
    return image


class Certificate(NamedTuple):
    certified: bool
    max_projection_residual: float


def certify_invariance(
    basis: PowerBasis,
    nu,
    params: AquiferParams,
    grid: Grid1D,
    samples: int = 20,
    seed: int = 42,
    scale: float = 1.0,
) -> Certificate:
    """Test numerically whether ``span(basis)`` is invariant under F.

    Draws ``samples`` coefficient vectors from ``scale * [-1, 1]**n``,
    evaluates F exactly, and projects the image onto the basis by least
    squares on the nodes with ``x >= L/10``. The relative projection
    residual must stay below ``CERTIFY_TOL`` for every sample.
    """
    if samples < 1:
        raise DomainError("need at least one sample")
    rng = np.random.default_rng(seed)
    x = grid.nodes[grid.window(0.1)]
    B = basis.matrix(x)
    worst = 0.0
    for _ in range(samples):
        coeffs = scale * rng.uniform(-1.0, 1.0, len(basis))
        image = operator_image(basis.exponents, coeffs, nu, params)
        Fx = sum((c * x**p for p, c in image.items()), np.zeros_like(x))
        norm = np.linalg.norm(Fx)
        if norm == 0.0:
            continue
        sol, *_ = np.linalg.lstsq(B, Fx, rcond=None)
        worst = max(worst, float(np.linalg.norm(Fx - B @ sol) / norm))
    return Certificate(worst < CERTIFY_TOL, worst)


@dataclass(frozen=True)
class Term:
    """``value * f_a * f_b`` contributes to equation ``row`` (b is None for linear)."""

    row: int
    a: int
    b: int | None
    value: float
    formula: str


@dataclass(frozen=True)
class OdeReduction:
    """Coefficient ODE ``f' = Phi(f)`` induced by an invariant basis.

    ``Phi_m(f) = sum_ab Q[m, a, b] f_a f_b + sum_a L[m, a] f_a``.
    """

    basis: PowerBasis
    quadratic: np.ndarray = field(repr=False)
    linear: np.ndarray = field(repr=False)
    provenance: tuple = ()

    def rhs_map(self, f) -> np.ndarray:
        f = np.asarray(f, dtype=float)
        return np.einsum("mab,a,b->m", self.quadratic, f, f) + self.linear @ f

    __call__ = rhs_map

    def describe(self) -> str:
        rows = []
        for m in range(len(self.basis)):
            parts = [f"{t.value:+.10g}*{t.formula}" for t in self.provenance if t.row == m]
            rows.append(f"f{m + 1}' = " + (" ".join(parts) if parts else "0"))
        return "\n".join(rows)


def reduce(basis: PowerBasis, nu, params: AquiferParams) -> OdeReduction:
    """Extract the reduced ODE system for an invariant power basis.

    Raises :class:`InvarianceError` when some product term lands outside
    the span, i.e. the basis is not invariant.
    """
    nu = FractionalOrder(nu)
    n = len(basis)
    Q = np.zeros((n, n, n))
    Lmat = np.zeros((n, n))
    terms = []
    for a, ea in enumerate(basis.exponents):
        for b, eb in enumerate(basis.exponents):
            g = _derivative_coef(eb, nu)
            power = ea + eb - float(nu)
            value = params.k * g * power
            if value == 0.0:
                continue
            m = basis.index(power - 1.0)
            if m is None:
                raise InvarianceError(
                    f"f{a + 1}*f{b + 1} produces x**{power - 1.0:g}, outside span{basis.exponents}"
                )
            Q[m, a, b] += value
            terms.append(
                Term(m, a, b, value, f"f{a + 1}*f{b + 1}  [k*({ea:g}+{eb:g}-nu)*Gamma({eb + 1:g})/Gamma({eb + 1 - float(nu):g})]")
            )
    for m in range(n):
        if params.phi:
            Lmat[m, m] = -params.phi
            terms.append(Term(m, m, None, -params.phi, f"f{m + 1}  [-phi]"))
    Q.setflags(write=False)
    Lmat.setflags(write=False)
    return OdeReduction(basis, Q, Lmat, tuple(terms))


class Trajectory(NamedTuple):
    t: np.ndarray
    f: np.ndarray  # shape (len(t), n)


def integrate(red: OdeReduction, init, t_end: float, dt: float) -> Trajectory:
    """Classical fourth-order Runge-Kutta from t = 0 to ``t_end``.

    The final step is shortened to land on ``t_end``. If any coefficient
    exceeds ``BLOWUP_LEVEL`` a :class:`BlowUpError` carrying the partial
    trajectory is raised.
    """
    if not dt > 0:
        raise DomainError("dt must be positive")
    if t_end < 0:
        raise DomainError("t_end must be non-negative")
    f = np.array(init, dtype=float)
    if f.shape != (len(red.basis),):
        raise DomainError(f"initial vector needs {len(red.basis)} entries")
    n_steps = int(np.ceil(t_end / dt - 1e-9))
    ts = [0.0]
    fs = [f.copy()]
    t = 0.0
    rhs = red.rhs_map
    for i in range(n_steps):
        h = min(dt, t_end - t) if i == n_steps - 1 else dt
        k1 = rhs(f)
        k2 = rhs(f + 0.5 * h * k1)
        k3 = rhs(f + 0.5 * h * k2)
        k4 = rhs(f + h * k3)
        f = f + h / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4)
        t = t_end if i == n_steps - 1 else (i + 1) * dt
        if not np.all(np.isfinite(f)) or np.max(np.abs(f)) > BLOWUP_LEVEL:
            raise BlowUpError(
                f"coefficients exceeded {BLOWUP_LEVEL:g} at t={t:.6g}",
                Trajectory(np.array(ts), np.array(fs)),
            )
        ts.append(t)
        fs.append(f.copy())
    return Trajectory(np.array(ts), np.array(fs))
