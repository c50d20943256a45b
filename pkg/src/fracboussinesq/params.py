"""Validated scalar parameters: fractional orders and aquifer constants."""

from __future__ import annotations

import math
from dataclasses import dataclass

from .exceptions import DomainError

__all__ = ["FractionalOrder", "AquiferParams"]


class FractionalOrder(float):
    """Order of a Caputo derivative, a float restricted to (0, 1].

    The value 1 is the local (classical first derivative) limit.

    >>> FractionalOrder(0.5).is_local
    False
    >>> FractionalOrder(1).is_local
    True
    """

    def __new__(cls, value):
        value = float(value)
        if not (0.0 < value <= 1.0) or math.isnan(value):
            raise DomainError(f"fractional order must lie in (0, 1], got {value!r}")
        return super().__new__(cls, value)

    @property
    def is_local(self) -> bool:
        return float(self) == 1.0

    def __repr__(self):
        return f"FractionalOrder({float(self)!r})"


@dataclass(frozen=True)
class AquiferParams:
    """Physical constants of the horizontal unconfined aquifer.

    Attributes
    ----------
    k : float
        Hydraulic diffusivity factor ``K_s / n`` (bed slope zero).
    phi : float
        Seepage transfer coefficient of the sink ``-n*phi*h`` [1/time].
    n : float
        Porosity in (0, 1). Only carried along for provenance; it cancels
        out of every formula.
    lam, beta : float
        Time-dependent transfer coefficient ``phi(t) = lam * t**beta`` used
        by the Kilbas-Saigo family.
    """

    k: float = 1.0
    phi: float = 0.0
    n: float = 0.3
    lam: float = 0.0
    beta: float = 0.0

    def __post_init__(self):
        for name in ("k", "phi", "n", "lam", "beta"):
            if not math.isfinite(getattr(self, name)):
                raise DomainError(f"{name} must be finite")
        if self.k <= 0:
            raise DomainError(f"k must be positive, got {self.k}")
        if self.phi < 0:
            raise DomainError(f"phi must be non-negative, got {self.phi}")
        if self.lam < 0:
            raise DomainError(f"lambda must be non-negative, got {self.lam}")
        if not 0 < self.n < 1:
            raise DomainError(f"porosity n must lie in (0, 1), got {self.n}")

    def phi_at(self, t: float) -> float:
        """Transfer coefficient at time t when it follows ``lam * t**beta``."""
        if t == 0.0:
            return 0.0 if self.beta > 0 else (self.lam if self.beta == 0 else math.inf)
        return self.lam * t**self.beta
