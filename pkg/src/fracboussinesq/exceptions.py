"""Exception hierarchy shared by all modules."""


class FracBoussinesqError(Exception):
    """Base class for errors raised by this package."""


class DomainError(FracBoussinesqError, ValueError):
    """An argument lies outside the domain where a formula is defined."""


class AdmissibilityError(DomainError):
    """A solution family was requested with parameters it does not admit."""


class ConvergenceError(FracBoussinesqError, ArithmeticError):
    """A series or iteration failed to reach the requested accuracy."""


class InvarianceError(FracBoussinesqError):
    """A basis does not span a subspace invariant under the operator."""


class BlowUpError(FracBoussinesqError, ArithmeticError):
    """An ODE trajectory exceeded the blow-up threshold.

    The samples computed before the threshold was crossed are kept on
    ``trajectory``.
    """

    def __init__(self, message, trajectory=None):
        super().__init__(message)
        self.trajectory = trajectory


class InstabilityError(FracBoussinesqError, ArithmeticError):
    """An explicit simulation produced non-finite or runaway values."""

    def __init__(self, message, last_stable_time=0.0):
        super().__init__(message)
        self.last_stable_time = last_stable_time


class MismatchError(FracBoussinesqError, ValueError):
    """Two records that must describe the same problem do not."""
