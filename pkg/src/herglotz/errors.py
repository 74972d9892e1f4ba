"""Exception hierarchy shared across the package."""


class HerglotzError(Exception):
    """Base class for all package-specific errors."""


class EvaluationError(HerglotzError):
    """A user-supplied field produced a non-finite value."""


class RegularityError(HerglotzError):
    """The fiber Hessian of the Lagrangian is singular or too ill-conditioned
    to solve for the fiber acceleration."""


class IntegrationError(HerglotzError):
    """Time integration aborted.  Carries the failure time in ``time``."""

    def __init__(self, message, time=None):
        super().__init__(message)
        self.time = time


class ConfigError(HerglotzError):
    """Invalid run configuration (unknown scenario, missing parameter,
    malformed syntax, unknown check name)."""
