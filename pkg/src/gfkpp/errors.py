"""Exception types shared across the package."""
from __future__ import annotations


class GfkppError(Exception):
    """Base class for all package-specific errors."""


class DegenerateReactionError(GfkppError):
    """Reaction term is identically zero or has a non-simple root."""


class AssumptionViolationError(GfkppError):
    """Nonlinearity violates the standing assumptions (simple roots, f(0)=f(1)=0)."""


class NotAnEquilibriumError(GfkppError):
    """Requested linearization point is not a root of the reaction term."""


class InvalidManifoldError(GfkppError):
    """Manifold branch is inconsistent with the equilibrium type at this wave speed."""


class IntegrationFailureError(GfkppError):
    """Phase-plane integration stalled; carries the last computed point."""

    def __init__(self, message: str, last_point: tuple[float, float] | None = None):
        super().__init__(message)
        self.last_point = last_point


class WindowViolationError(GfkppError):
    """A manifold failed to reach the comparison section; names the failing side."""

    def __init__(self, side: str, message: str = ""):
        super().__init__(f"{side}: {message}" if message else side)
        self.side = side


class BracketFailureError(GfkppError):
    """Sign bracket for the section-gap root could not be established."""


class NoUpperBoundError(GfkppError):
    """Doubling search for an admissible upper wave speed exceeded its cap."""


class WrongOracleError(GfkppError):
    """Closed-form solver invoked outside its validity preconditions."""


class PreconditionError(GfkppError):
    """Operation invoked on a model outside its stated preconditions."""


class UnsupportedCaseError(GfkppError):
    """Existence configuration outside the implemented saddle-chain constructions."""


class NonFrontError(GfkppError):
    """Field frame does not contain exactly one monotone level crossing."""


class InstabilityError(GfkppError):
    """Simulation left the invariant box; carries the offending frame."""

    def __init__(self, message: str, frame=None):
        super().__init__(message)
        self.frame = frame


class AlignmentError(GfkppError):
    """Two simulations do not share grid and save times."""


class NoTransitionError(GfkppError):
    """Pulled/pushed predicate is constant over the scanned advection range."""
