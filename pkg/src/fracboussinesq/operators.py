"""Caputo derivatives in one variable: exact power rule and the L1 scheme.

Everything else in the package (closed forms, the reduction engine, the
finite-difference validator) differentiates through the functions here, and
every Gamma value is taken from :func:`gamma` so that independent code paths
agree to the last bit.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property, lru_cache

import numpy as np
from scipy import special

from .exceptions import DomainError
from .params import AquiferParams, FractionalOrder

__all__ = [
    "gamma",
    "gammaln",
    "Grid1D",
    "Field",
    "caputo_power_rule",
    "caputo_l1",
    "l1_matrix",
    "l1_weights",
    "flux",
    "boussinesq_rhs",
]


def gamma(x):
    """Gamma function, raising at the poles instead of returning inf."""
    arr = np.asarray(x, dtype=float)
    if np.any((arr <= 0) & (arr == np.round(arr))):
        raise DomainError(f"Gamma has a pole at {x!r}")
    out = special.gamma(arr)
    return float(out) if out.ndim == 0 else out


def gammaln(x):
    """log|Gamma(x)| for x > 0."""
    out = special.gammaln(np.asarray(x, dtype=float))
    return float(out) if out.ndim == 0 else out


@dataclass(frozen=True)
class Grid1D:
    """Nodes ``x_i = length * (i / n) ** grading`` for ``i = 0..n``.

    ``n`` counts intervals, so there are ``n + 1`` nodes. ``grading = 1``
    gives a uniform mesh; larger values cluster nodes near ``x = 0``.
    """

    length: float
    n: int
    grading: float = 1.0

    def __post_init__(self):
        if not self.length > 0:
            raise DomainError(f"grid length must be positive, got {self.length}")
        if int(self.n) != self.n or self.n < 2:
            raise DomainError(f"grid needs at least 2 intervals, got {self.n}")
        if not self.grading >= 1:
            raise DomainError(f"grading must be >= 1, got {self.grading}")

    @cached_property
    def nodes(self) -> np.ndarray:
        x = self.length * (np.arange(self.n + 1) / self.n) ** self.grading
        x[-1] = self.length
        x.setflags(write=False)
        return x

    @property
    def is_uniform(self) -> bool:
        return self.grading == 1.0

    @property
    def dx_min(self) -> float:
        return float(self.nodes[1] - self.nodes[0])

    def window(self, lo: float = 0.1, hi: float = 1.0) -> np.ndarray:
        """Boolean mask of nodes with ``lo*L <= x <= hi*L``."""
        x = self.nodes
        return (x >= lo * self.length * (1 - 1e-12)) & (x <= hi * self.length * (1 + 1e-12))


@dataclass(frozen=True, eq=False)
class Field:
    """Values of a function sampled on every node of a grid."""

    grid: Grid1D
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        v = np.array(self.values, dtype=float)
        if v.shape != (self.grid.n + 1,):
            raise DomainError(
                f"field has {v.shape} values for a grid of {self.grid.n + 1} nodes"
            )
        if not np.all(np.isfinite(v)):
            raise DomainError("field values must be finite")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    @classmethod
    def sample(cls, grid: Grid1D, func) -> "Field":
        return cls(grid, func(grid.nodes))

    @property
    def x(self) -> np.ndarray:
        return self.grid.nodes

    def __add__(self, other):
        return Field(self.grid, self.values + _values(other))

    def __sub__(self, other):
        return Field(self.grid, self.values - _values(other))

    def __mul__(self, scalar):
        return Field(self.grid, self.values * _values(scalar))

    __rmul__ = __mul__


def _values(obj):
    return obj.values if isinstance(obj, Field) else obj


def caputo_power_rule(beta, nu, x):
    """Caputo derivative of order ``nu`` of ``x**beta``.

    ``Gamma(beta+1) / Gamma(beta+1-nu) * x**(beta-nu)``, which reduces to
    ``beta * x**(beta-1)`` for ``nu = 1``. Works elementwise on arrays.
    For ``beta < nu`` the result is infinite at ``x = 0``.
    """
    nu = FractionalOrder(nu)
    if not beta > 0:
        raise DomainError(f"power rule needs beta > 0, got {beta}")
    coef = gamma(beta + 1) / gamma(beta + 1 - nu)
    x = np.asarray(x, dtype=float)
    if np.any(x < 0):
        raise DomainError("power rule is defined for x >= 0")
    with np.errstate(divide="ignore"):
        out = coef * x ** (beta - nu)
    return float(out) if out.ndim == 0 else out


def _kernel_increments(x: np.ndarray, p: float) -> np.ndarray:
    """Matrix ``K[n, j] = (x_n - x_{j-1})**p - (x_n - x_j)**p`` for j <= n.

    Uses ``u**p * expm1(p*log1p(d/u))`` so that short cells far from x_n
    keep full relative accuracy on graded meshes.
    """
    d = np.diff(x)  # d[j-1] = x_j - x_{j-1}
    u = x[:, None] - x[None, 1:]  # u[n, j-1] = x_n - x_j
    out = np.zeros_like(u)
    lower = u > 0
    uu = np.where(lower, u, 1.0)
    dd = np.broadcast_to(d, u.shape)
    out[lower] = (uu**p * np.expm1(p * np.log1p(dd / uu)))[lower]
    last = u == 0.0
    out[last] = dd[last] ** p
    return out


@lru_cache(maxsize=32)
def l1_weights(grid: Grid1D, nu: float) -> np.ndarray:
    """Matrix ``W`` with ``D^nu f(x_n) ~ sum_j W[n, j-1] (f_j - f_{j-1})``.

    On a uniform grid the entries are the classical weights
    ``b_{n-j} = (n-j+1)**(1-nu) - (n-j)**(1-nu)`` scaled by
    ``dx**-nu / Gamma(2-nu)``. Row 0 is zero.
    """
    nu = FractionalOrder(nu)
    if nu.is_local:
        raise DomainError("L1 scheme needs nu < 1; use a standard difference for nu = 1")
    x = grid.nodes
    if np.any(np.diff(x) <= 0):
        raise DomainError("L1 scheme needs strictly increasing nodes")
    p = 1.0 - nu
    if grid.is_uniform:
        dx = grid.length / grid.n
        j = np.arange(grid.n + 1, dtype=float)
        b = (j + 1) ** p - j**p
        idx = np.arange(grid.n + 1)
        lag = idx[:, None] - idx[None, 1:]  # n - j for difference f_j - f_{j-1}
        K = np.where(lag >= 0, b[np.clip(lag, 0, None)], 0.0) * dx**p
    else:
        K = _kernel_increments(x, p)
    W = K / np.diff(x)[None, :] / gamma(2.0 - nu)
    W[0, :] = 0.0
    W.setflags(write=False)
    return W


def l1_matrix(grid: Grid1D, nu: float) -> np.ndarray:
    """Dense matrix ``A`` acting on node values, ``A @ f == W @ diff(f)``."""
    W = l1_weights(grid, float(FractionalOrder(nu)))
    A = np.zeros((grid.n + 1, grid.n + 1))
    A[:, 1:] += W
    A[:, :-1] -= W
    return A


def caputo_l1(samples: Field, nu) -> Field:
    """L1 approximation of the Caputo derivative at every node.

    Exact for piecewise-linear data (and exactly zero for constants, since
    it acts on increments); accurate to ``O(dx**(2-nu))`` for smooth data
    away from ``x = 0``. Cost is O(N^2).
    """
    W = l1_weights(samples.grid, float(FractionalOrder(nu)))
    return Field(samples.grid, W @ np.diff(samples.values))


def flux(h: Field, nu) -> Field:
    """Nonlinear flux ``h * D^nu h`` (Darcy flow rate divided by ``-k``).

    For ``nu = 1`` the classical derivative is used. Otherwise, at ``x = 0`` the
    product is extrapolated from the next three nodes: the L1 value there
    is zero by construction, which is wrong in the limit when ``h`` behaves
    like ``x**e`` with ``e <= nu``.
    """
    nu = FractionalOrder(nu)
    if nu.is_local:
        d = np.gradient(h.values, h.x, edge_order=2)
    else:
        d = caputo_l1(h, nu).values
    g = h.values * d
    x = h.x
    if not nu.is_local and h.values[0] == 0.0 and len(x) > 3:
        # quadratic extrapolation through nodes 1..3
        x1, x2, x3 = x[1:4]
        l1 = (x2 * x3) / ((x1 - x2) * (x1 - x3))
        l2 = (x1 * x3) / ((x2 - x1) * (x2 - x3))
        l3 = (x1 * x2) / ((x3 - x1) * (x3 - x2))
        g[0] = l1 * g[1] + l2 * g[2] + l3 * g[3]
    return Field(h.grid, g)


def boussinesq_rhs(h: Field, nu, params: AquiferParams, phi: float | None = None) -> Field:
    """Right-hand side ``k d/dx(h D^nu h) - phi h`` sampled on the grid.

    The outer derivative uses second-order centred differences with
    second-order one-sided stencils at both ends. ``phi`` overrides
    ``params.phi`` (time-dependent transfer coefficients).
    """
    phi = params.phi if phi is None else phi
    g = flux(h, nu).values
    dg = np.gradient(g, h.x, edge_order=2)
    return Field(h.grid, params.k * dg - phi * h.values)
