"""Exception hierarchy shared by every module."""


class UnruhBerryError(Exception):
    """Base class for all errors raised by this package."""


class DomainError(UnruhBerryError, ValueError):
    """An argument lies outside the domain of the operation."""


class ValidationError(DomainError):
    """A configuration object failed validation.

    ``key`` names the offending field when one can be identified.
    """

    def __init__(self, message, key=None):
        super().__init__(message)
        self.key = key


class InstabilityError(DomainError):
    """The quadratic form is not positive definite."""


class DecompositionError(UnruhBerryError):
    """Root-finding for the operator decomposition did not converge."""

    def __init__(self, message, best_residual=float("nan")):
        super().__init__(message)
        self.best_residual = best_residual


class UnreachableTargetError(UnruhBerryError):
    """A phase target cannot be reached with zero phase per cycle."""


class OracleError(UnruhBerryError):
    """Base class for failures of the Fock-space oracle."""


class GridTooCoarseError(OracleError):
    """Adjacent eigenvectors on the loop overlap too weakly to be tracked."""


class SingularLoopError(OracleError):
    """A Wilson loop contains a vanishing overlap."""


class DegenerateBranchError(OracleError):
    """A tracked branch is (nearly) degenerate with a neighbour."""


class TruncationError(OracleError):
    """A truncated sum discards more weight than allowed."""


class UndefinedPhaseError(OracleError):
    """The argument of a vanishing complex number was requested."""


class ConvergenceError(OracleError):
    """Doubling the cutoff or the grid moved a phase by more than tolerance."""
