"""Exception types raised across the package."""


class DomainError(ValueError):
    """An argument lies outside the mathematical domain of an operation."""


class ConfigurationError(ValueError):
    """Inconsistent discretization settings (cutoffs, node counts, grids)."""


class SingularityError(ValueError):
    """An evaluation point sits on a kernel singularity."""


class PreconditionError(ValueError):
    """A documented precondition of an operation does not hold."""


class LiftOverflowError(OverflowError):
    """A stereographic lift produced non-finite values."""
