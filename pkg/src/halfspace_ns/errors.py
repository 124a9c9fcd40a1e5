"""Exception hierarchy shared by all subpackages."""


class HalfspaceError(Exception):
    """Base class for errors raised by halfspace_ns."""


class DomainError(HalfspaceError, ValueError):
    """An input violates a positivity or sign precondition."""


class RegimeError(HalfspaceError, ValueError):
    """An operation was requested for a flow regime it does not support."""


class SingularityError(HalfspaceError, ArithmeticError):
    """The stationary vector field was evaluated at its pole u = 0."""


class NoStationarySolution(HalfspaceError):
    """Boundary data lie outside the existence region."""

    def __init__(self, message, diagnostic=None):
        super().__init__(message)
        self.diagnostic = diagnostic or {}


class ShootingError(HalfspaceError):
    """Shooting along the stable manifold failed to reach the boundary data."""


class DomainTooShort(HalfspaceError):
    """The sampled domain ends before the tail has settled."""


class IntegrationError(HalfspaceError):
    """An ODE integration did not succeed."""


class ConvergenceError(HalfspaceError):
    """A fixed-point or collocation iteration did not converge."""


class PositivityError(HalfspaceError):
    """Density or temperature became non-positive, or u lost its sign."""

    def __init__(self, message, snapshot=None):
        super().__init__(message)
        self.snapshot = snapshot


class InsufficientData(HalfspaceError, ValueError):
    """Not enough samples or span for a requested fit."""


class ConfigError(HalfspaceError, ValueError):
    """Run configuration failed validation."""
