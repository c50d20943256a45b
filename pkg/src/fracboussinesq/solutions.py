"""Catalog of closed-form solutions of the fractional Boussinesq problem.

The governing equation is

    D_t^gamma h = k d/dx (h D_x^nu h) - phi h,   h(x, 0) = x**sigma,  h(0, t) = 0,

posed for x > 0, t > 0. Each family below is an exact solution for a
particular choice of ``sigma``, orders and parameters. Records are
immutable, validated on construction, and evaluated pointwise with
:func:`evaluate`.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .exceptions import AdmissibilityError, DomainError
from .operators import Field, Grid1D, caputo_power_rule, gamma as gamma_fn
from .params import AquiferParams, FractionalOrder
from .special import kilbas_saigo, ks_window, mittag_leffler

__all__ = [
    "Family",
    "ClosedFormSolution",
    "PowerLawMatch",
    "FamilyStatus",
    "AdmissibilityReport",
    "BLOWUP_GUARD",
    "make_solution",
    "steady_powerlaw_match",
    "growth_rate",
    "evaluate",
    "time_rate",
    "sink_rate",
    "sample",
    "admissibility_report",
    "to_keyvalue",
    "from_keyvalue",
]

# relative width of the forbidden band just below a blow-up time
BLOWUP_GUARD = 1e-6


class Family(enum.Enum):
    SteadyFractional = "steady-frac"
    SteadyLocal = "steady-local"
    UnsteadyFractional = "unsteady-frac"
    UnsteadyLocal = "unsteady-local"
    ExpPowerHalf = "exp-half"
    TimeFractionalML = "tf-ml"
    TimeFractionalKS = "tf-ks"

    @classmethod
    def parse(cls, name: str) -> "Family":
        for fam in cls:
            if name in (fam.value, fam.name):
                return fam
        raise DomainError(f"unknown solution family {name!r}")

    @property
    def is_local(self) -> bool:
        return self in (Family.SteadyLocal, Family.UnsteadyLocal)

    @property
    def is_steady(self) -> bool:
        return self in (Family.SteadyFractional, Family.SteadyLocal)

    @property
    def is_unsteady_power(self) -> bool:
        return self in (Family.UnsteadyFractional, Family.UnsteadyLocal)

    @property
    def is_time_fractional(self) -> bool:
        return self in (Family.TimeFractionalML, Family.TimeFractionalKS)

    @property
    def half_power(self) -> bool:
        return self in (Family.ExpPowerHalf, Family.TimeFractionalML, Family.TimeFractionalKS)


def growth_rate(nu, k: float) -> float:
    """``k * Gamma(nu + 3)``, the quadratic coefficient of the similarity ODE.

    Equals ``6k`` in the local case.
    """
    return k * gamma_fn(float(nu) + 3.0)


@dataclass(frozen=True)
class ClosedFormSolution:
    """One exact solution together with the data that selects it.

    ``sigma`` is the initial-data exponent (``None`` for steady families)
    and is stored, not inferred, so that mismatches fail at construction.
    Use :func:`make_solution` to fill ``sigma`` and ``t_blowup``.
    """

    family: Family
    nu: FractionalOrder
    gamma: FractionalOrder
    params: AquiferParams
    sigma: float | None
    t_blowup: float | None = None

    def __post_init__(self):
        object.__setattr__(self, "nu", FractionalOrder(self.nu))
        object.__setattr__(self, "gamma", FractionalOrder(self.gamma))
        fam, nu, p = self.family, self.nu, self.params
        if fam.is_local and not nu.is_local:
            raise DomainError(f"{fam.value} is a local family and needs nu = 1")
        if not fam.is_time_fractional and not self.gamma.is_local:
            raise DomainError(f"{fam.value} needs gamma = 1; use a time-fractional family")
        expected = _expected_sigma(fam, nu)
        if expected is None:
            if self.sigma is not None:
                raise DomainError(f"{fam.value} is steady and takes no initial exponent")
        elif self.sigma is None or not math.isclose(self.sigma, expected, rel_tol=1e-12, abs_tol=1e-15):
            raise DomainError(
                f"{fam.value} needs initial data x**{expected:g}, got sigma={self.sigma!r}"
            )
        if fam.is_unsteady_power:
            rate = growth_rate(nu, p.k)
            if p.phi == 0.0:
                tb = 1.0 / rate
                if self.t_blowup is None or not math.isclose(self.t_blowup, tb, rel_tol=1e-12):
                    raise DomainError(f"phi = 0 requires t_blowup = 1/(k*Gamma(nu+3)) = {tb!r}")
            else:
                if p.phi < rate:
                    raise AdmissibilityError(_inadmissible_message(nu, p))
                if self.t_blowup is not None:
                    raise DomainError("phi >= k*Gamma(nu+3) solutions have no blow-up time")
        elif self.t_blowup is not None:
            raise DomainError(f"{fam.value} has no blow-up time")
        if fam is Family.TimeFractionalKS:
            g = float(self.gamma)
            if not ks_window(g, p.beta):
                raise DomainError(
                    f"Kilbas-Saigo family needs -gamma < beta <= 1 - gamma, got beta={p.beta}"
                )

    @property
    def x_exponent(self) -> float:
        """Power of x multiplying the time factor."""
        if self.family.half_power:
            return self.nu / 2.0
        return self.nu + 1.0

    def label(self) -> str:
        return f"{self.family.value}(nu={float(self.nu):g}, gamma={float(self.gamma):g})"


def _expected_sigma(fam: Family, nu: float) -> float | None:
    if fam.is_steady:
        return None
    if fam.half_power:
        return nu / 2.0
    return nu + 1.0


def _singular_time(nu, p: AquiferParams) -> float | None:
    """Pole of the phi > 0 closed form when phi < k*Gamma(nu+3)."""
    rate = growth_rate(nu, p.k)
    if 0 < p.phi < rate:
        return math.log(rate / (rate - p.phi)) / p.phi
    return None


def _inadmissible_message(nu, p: AquiferParams) -> str:
    rate = growth_rate(nu, p.k)
    ts = _singular_time(nu, p)
    return (
        f"phi={p.phi:g} < k*Gamma(nu+3)={rate:.6g}: unsteady power-law family inadmissible, "
        f"it requires phi >= k*Gamma(nu+3) (otherwise h increases in time and is singular "
        f"at t={ts:.6g})"
    )


def make_solution(
    family: Family | str,
    nu=1.0,
    gamma=1.0,
    params: AquiferParams | None = None,
) -> ClosedFormSolution:
    """Build a validated catalog record, filling ``sigma`` and ``t_blowup``."""
    fam = Family.parse(family) if isinstance(family, str) else family
    params = params or AquiferParams()
    if fam.is_local:
        nu = 1.0
    nu = FractionalOrder(nu)
    tb = None
    if fam.is_unsteady_power and params.phi == 0.0:
        tb = 1.0 / growth_rate(nu, params.k)
    return ClosedFormSolution(fam, nu, FractionalOrder(gamma), params, _expected_sigma(fam, nu), tb)


@dataclass(frozen=True)
class PowerLawMatch:
    beta: float
    c: float
    trivial: bool


def steady_powerlaw_match(nu, params: AquiferParams) -> PowerLawMatch:
    """Exponent and amplitude of the steady power law ``c * x**beta``.

    Substituting into ``k (h D^nu h)' = phi h`` gives
    ``k c (2 beta - nu) Gamma(beta+1)/Gamma(beta+1-nu) x**(2 beta - nu - 1) = phi x**beta``.
    Matching powers forces ``beta = nu + 1``; matching coefficients gives
    ``c``. With ``phi = 0`` only ``c = 0`` works and ``trivial`` is set.
    """
    nu = FractionalOrder(nu)
    # 2*beta - nu - 1 == beta
    beta = nu + 1.0
    if params.phi == 0.0:
        return PowerLawMatch(beta, 0.0, True)
    ratio = caputo_power_rule(beta, nu, 1.0)  # Gamma(beta+1)/Gamma(beta+1-nu)
    c = params.phi / (params.k * (2.0 * beta - nu) * ratio)
    return PowerLawMatch(beta, c, False)


def _check_time(sol: ClosedFormSolution, t):
    t = np.asarray(t, dtype=float)
    if np.any(t < 0):
        raise DomainError("closed forms are defined for t >= 0")
    if sol.t_blowup is not None:
        limit = sol.t_blowup * (1.0 - BLOWUP_GUARD)
        if np.any(t >= limit):
            raise DomainError(
                f"t={float(np.max(t)):.6g} is not below the blow-up time t_blowup={sol.t_blowup:.6g} "
                f"minus the guard band {BLOWUP_GUARD:g}*t_blowup"
            )
    return t


def _time_factor(sol: ClosedFormSolution, t):
    """Coefficient f(t) with ``h = x**e * f(t)``."""
    fam, p, nu = sol.family, sol.params, sol.nu
    if fam.is_steady:
        m = steady_powerlaw_match(nu, p)
        return np.full_like(t, m.c)
    if fam.is_unsteady_power:
        rate = growth_rate(nu, p.k)
        if p.phi == 0.0:
            return 1.0 / (1.0 - rate * t)
        return p.phi / (np.exp(p.phi * t) * (p.phi - rate) + rate)
    if fam is Family.ExpPowerHalf:
        return np.exp(-p.phi * t)
    if fam is Family.TimeFractionalML:
        return np.asarray(mittag_leffler(sol.gamma, -p.phi * t**sol.gamma), dtype=float)
    return np.asarray(kilbas_saigo(sol.gamma, p.beta, p.lam, t), dtype=float)


def evaluate(sol: ClosedFormSolution, x, t):
    """Closed-form water depth ``h(x, t)``; broadcasts over arrays.

    Raises :class:`DomainError` for ``x < 0``, ``t < 0`` or ``t`` inside the
    guard band below a blow-up time.
    """
    x = np.asarray(x, dtype=float)
    if np.any(x < 0):
        raise DomainError("closed forms are defined for x >= 0")
    t = _check_time(sol, t)
    out = x**sol.x_exponent * _time_factor(sol, t)
    return float(out) if out.ndim == 0 else out


def sink_rate(sol: ClosedFormSolution, t: float) -> float:
    """Transfer coefficient in effect at time t."""
    if sol.family is Family.TimeFractionalKS:
        return sol.params.phi_at(t)
    return sol.params.phi


def time_rate(sol: ClosedFormSolution, x, t):
    """Exact left-hand side of the equation: ``D_t^gamma h`` at (x, t).

    For ``gamma = 1`` families this is ``dh/dt``; for the time-fractional
    families it is the Caputo derivative in time, which equals
    ``-phi(t) h`` because the nonlinear term vanishes on ``x**(nu/2)``.
    """
    x = np.asarray(x, dtype=float)
    t = _check_time(sol, t)
    fam, p = sol.family, sol.params
    h = x**sol.x_exponent * _time_factor(sol, t)
    if fam.is_steady:
        out = np.zeros_like(h)
    elif fam.is_unsteady_power:
        f = _time_factor(sol, t)
        # df/dt = rate f^2 - phi f
        out = x**sol.x_exponent * (growth_rate(sol.nu, p.k) * f * f - p.phi * f)
    elif fam is Family.TimeFractionalKS:
        with np.errstate(divide="ignore"):
            out = -p.lam * t**p.beta * h
    else:
        out = -p.phi * h
    return float(out) if np.ndim(out) == 0 else out


def sample(sol: ClosedFormSolution, grid: Grid1D, t: float) -> Field:
    return Field(grid, evaluate(sol, grid.nodes, t))


@dataclass(frozen=True)
class FamilyStatus:
    family: Family
    admissible: bool
    window: str
    binding: str
    t_blowup: float | None = None
    t_singular: float | None = None
    note: str = ""


@dataclass(frozen=True)
class AdmissibilityReport:
    nu: float
    gamma: float
    params: AquiferParams
    entries: tuple

    def status(self, family: Family | str) -> FamilyStatus:
        fam = Family.parse(family) if isinstance(family, str) else family
        for e in self.entries:
            if e.family is fam:
                return e
        raise KeyError(fam)

    def to_text(self) -> str:
        lines = [f"nu={self.nu:g} gamma={self.gamma:g} k={self.params.k:g} phi={self.params.phi:g}"]
        for e in self.entries:
            flag = "admissible" if e.admissible else "rejected"
            extra = []
            if e.t_blowup is not None:
                extra.append(f"t_blowup={e.t_blowup:.6g}")
            if e.t_singular is not None:
                extra.append(f"t_singular={e.t_singular:.6g}")
            tail = (" " + " ".join(extra)) if extra else ""
            lines.append(f"{e.family.value:15s} {flag:10s} window: {e.window}; binding: {e.binding}{tail}")
            if e.note:
                lines.append(f"{'':15s} {e.note}")
        return "\n".join(lines)


def _unsteady_status(fam: Family, nu, p: AquiferParams, gamma_local: bool) -> FamilyStatus:
    if not gamma_local:
        return FamilyStatus(fam, False, "-", "time order", note="needs gamma = 1")
    rate = growth_rate(nu, p.k)
    sym = "6k" if fam is Family.UnsteadyLocal else "k*Gamma(nu+3)"
    if p.phi == 0.0:
        tb = 1.0 / rate
        return FamilyStatus(
            fam, True, f"x >= 0, 0 <= t < {tb:.6g}", "non-negativity (h < 0 after blow-up)", t_blowup=tb
        )
    if p.phi < rate:
        ts = _singular_time(nu, p)
        return FamilyStatus(
            fam,
            False,
            "-",
            f"time monotonicity: phi={p.phi:g} < {sym}={rate:.6g}",
            t_singular=ts,
            note=f"closed form increases in time and is singular at t={ts:.6g}",
        )
    return FamilyStatus(fam, True, "x >= 0, t >= 0", f"time monotonicity holds: phi >= {sym}={rate:.6g}")


def admissibility_report(nu, gamma, params: AquiferParams) -> AdmissibilityReport:
    """Which catalog families exist for these parameters, and why."""
    nu = FractionalOrder(nu)
    gamma = FractionalOrder(gamma)
    p = params
    g_local = gamma.is_local
    entries = []
    for fam in (Family.SteadyFractional, Family.SteadyLocal):
        if p.phi > 0:
            entries.append(FamilyStatus(fam, True, "x >= 0 (time independent)", "phi > 0"))
        else:
            entries.append(
                FamilyStatus(fam, False, "-", "phi = 0 forces c = 0", note="only the trivial solution h = 0")
            )
    entries.append(_unsteady_status(Family.UnsteadyFractional, nu, p, g_local))
    entries.append(_unsteady_status(Family.UnsteadyLocal, 1.0, p, g_local))
    if g_local:
        entries.append(FamilyStatus(Family.ExpPowerHalf, True, "x >= 0, t >= 0", "none"))
    else:
        entries.append(FamilyStatus(Family.ExpPowerHalf, False, "-", "time order", note="needs gamma = 1"))
    entries.append(FamilyStatus(Family.TimeFractionalML, True, "x >= 0, t >= 0", "none"))
    g = float(gamma)
    if ks_window(g, p.beta):
        entries.append(FamilyStatus(Family.TimeFractionalKS, True, "x >= 0, t >= 0", f"-gamma < beta={p.beta:g} <= 1-gamma"))
    else:
        entries.append(
            FamilyStatus(Family.TimeFractionalKS, False, "-", f"beta={p.beta:g} outside (-gamma, 1-gamma]")
        )
    return AdmissibilityReport(float(nu), g, p, tuple(entries))


def _fmt(v) -> str:
    if v is None:
        return "none"
    return repr(float(v))


def to_keyvalue(sol: ClosedFormSolution) -> str:
    """Flat ``key=value`` block, one pair per line."""
    p = sol.params
    pairs = [
        ("family", sol.family.value),
        ("nu", _fmt(sol.nu)),
        ("gamma", _fmt(sol.gamma)),
        ("k", _fmt(p.k)),
        ("phi", _fmt(p.phi)),
        ("lambda", _fmt(p.lam)),
        ("beta", _fmt(p.beta)),
        ("sigma", _fmt(sol.sigma)),
        ("t_blowup", _fmt(sol.t_blowup)),
    ]
    return "\n".join(f"{k}={v}" for k, v in pairs) + "\n"


def from_keyvalue(text: str) -> ClosedFormSolution:
    """Inverse of :func:`to_keyvalue`; ignores blank lines and ``#`` comments."""
    kv = {}
    for line in text.splitlines():
        line = line.split("#", 1)[0].strip()
        if line:
            key, _, val = line.partition("=")
            kv[key.strip()] = val.strip()

    def num(key):
        v = kv.get(key, "none")
        return None if v == "none" else float(v)

    params = AquiferParams(k=num("k"), phi=num("phi"), lam=num("lambda") or 0.0, beta=num("beta") or 0.0)
    return ClosedFormSolution(
        Family.parse(kv["family"]), num("nu"), num("gamma"), params, num("sigma"), num("t_blowup")
    )
