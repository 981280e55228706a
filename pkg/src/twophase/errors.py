"""Exception hierarchy shared by all modules."""


class TwoPhaseError(Exception):
    """Base class for all package errors."""


class ConfigError(TwoPhaseError, ValueError):
    """Invalid or inconsistent configuration."""


class DomainError(TwoPhaseError, ValueError):
    """Argument outside the domain of a state function (e.g. theta <= 0)."""


class NoEquilibriumError(TwoPhaseError):
    """Conserved quantities admit no equilibrium."""


class InfeasibleError(TwoPhaseError):
    """Requested configuration does not fit in the domain."""


class RangeError(TwoPhaseError):
    """A root bracket could not be found in the admissible range."""


class GeometryError(TwoPhaseError):
    """Height field violates the admissibility bounds."""


class ResolutionError(TwoPhaseError):
    """Field is not resolved by the spectral grid."""


class BranchError(TwoPhaseError, ValueError):
    """Point lies on a branch cut of a symbol."""


class DegeneracyError(TwoPhaseError):
    """A quantity that must not vanish came out (numerically) zero."""


class ZeroOnContourError(TwoPhaseError):
    """Function modulus below tolerance somewhere on a contour."""


class SolvabilityError(TwoPhaseError):
    """Linear problem is not uniquely solvable for the given data."""


class ConvergenceError(TwoPhaseError):
    """Discretization failed to converge or is ill-conditioned."""
