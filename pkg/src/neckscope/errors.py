"""Exception types shared across the toolkit.

Every failure mode named in an operation contract maps to one class here so
callers (and the CLI) can branch on type rather than message text.
"""


class NeckscopeError(Exception):
    """Base class for all toolkit errors."""


class InvalidSpec(NeckscopeError):
    """Warp specification violates its invariants (bad grid, nonpositive warp, ...)."""


class OutOfDomain(NeckscopeError):
    """A query parameter lies outside the metric's domain."""


class InvalidWindow(NeckscopeError):
    """A parameter window is unusable (warp nonpositive, endpoints reversed, ...)."""


class InvalidInput(NeckscopeError):
    """Scalar arguments outside an operation's precondition range."""


class InvalidRange(NeckscopeError):
    """Radius pair with R1 >= R2 or similar degenerate range."""


class NoConvergence(NeckscopeError):
    """Iterative solver failed; carries the best bracketing values found."""

    def __init__(self, message, best_bounds=None):
        super().__init__(message)
        self.best_bounds = best_bounds


class ExitedDomain(NeckscopeError):
    """Geodesic left the parameter domain; carries exit data."""

    def __init__(self, message, exit_point=None, exit_length=None):
        super().__init__(message)
        self.exit_point = exit_point
        self.exit_length = exit_length


class RequiresPole(NeckscopeError):
    """Operation needs a pole-anchored metric."""


class RequiresNoncompact(NeckscopeError):
    """Operation needs a noncompact (or explicitly truncated) metric."""


class RequiresPositiveScalar(NeckscopeError):
    """Curvature quantity undefined unless the scalar curvature is positive."""


class UndefinedQuantity(NeckscopeError):
    """Quantity undefined at this input (e.g. zero curvature operator)."""


class PreconditionNeck(NeckscopeError):
    """Metric lacks the certified neck an operation requires."""


class NotSmooth(NeckscopeError):
    """Parallel hypersurface outside its guaranteed smoothness window."""

    def __init__(self, message, eps_bound=None):
        super().__init__(message)
        self.eps_bound = eps_bound


class HypothesisFail(NeckscopeError):
    """A curvature hypothesis required by an estimate does not hold."""


class OddDimensionOnly(NeckscopeError):
    """Gauss-Bonnet hypersurface machinery requires odd ambient dimension."""


class BelowFloor(NeckscopeError):
    """Neck half-length below the floor the volume estimate requires."""


class SingularityReached(NeckscopeError):
    """Flow hit a singularity; carries location and time."""

    def __init__(self, message, location=None, time=None):
        super().__init__(message)
        self.location = location
        self.time = time


class StepTooLarge(NeckscopeError):
    """Requested flow step violates the diffusive stability bound."""


class InvalidProfile(NeckscopeError):
    """Initial flow profile incompatible with its boundary conditions."""


class NotStored(NeckscopeError):
    """Requested (point, time) not present in the stored flow history."""
