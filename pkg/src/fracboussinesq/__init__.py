"""Exact solutions and numerical checks for the fractional Boussinesq equation.

``D_t^gamma h = k d/dx (h D_x^nu h) - phi h`` on the half-line, with Caputo
derivatives in space and time. The package provides the Caputo operators,
Mittag-Leffler and Kilbas-Saigo functions, a catalog of closed-form
solutions, the invariant-subspace reduction to ODEs, and an explicit
finite-difference solver that cross-checks the catalog.
"""

__version__ = "0.1.0"

from .exceptions import (  # noqa: E402
    AdmissibilityError,
    BlowUpError,
    ConvergenceError,
    DomainError,
    FracBoussinesqError,
    InstabilityError,
    InvarianceError,
    MismatchError,
)
from .operators import Field, Grid1D, boussinesq_rhs, caputo_l1, caputo_power_rule  # noqa: E402
from .params import AquiferParams, FractionalOrder  # noqa: E402
from .solutions import (  # noqa: E402
    ClosedFormSolution,
    Family,
    admissibility_report,
    evaluate,
    make_solution,
)
from .special import SeriesControl, kilbas_saigo, mittag_leffler  # noqa: E402
from .subspace import PowerBasis, certify_invariance, integrate, reduce  # noqa: E402
from .validator import RightBC, SimConfig, error_report, simulate  # noqa: E402

__all__ = [
    "AdmissibilityError",
    "AquiferParams",
    "BlowUpError",
    "ClosedFormSolution",
    "ConvergenceError",
    "DomainError",
    "Family",
    "Field",
    "FracBoussinesqError",
    "FractionalOrder",
    "Grid1D",
    "InstabilityError",
    "InvarianceError",
    "MismatchError",
    "PowerBasis",
    "RightBC",
    "SeriesControl",
    "SimConfig",
    "admissibility_report",
    "boussinesq_rhs",
    "caputo_l1",
    "caputo_power_rule",
    "certify_invariance",
    "error_report",
    "evaluate",
    "integrate",
    "kilbas_saigo",
    "make_solution",
    "mittag_leffler",
    "reduce",
    "simulate",
]
