"""Exception types shared across the package."""


class ConfigError(ValueError):
    """Bad or inconsistent run configuration (unknown key, conflicting blocks, ...)."""


class SingularityError(ValueError):
    """A formula was evaluated at a pole (zero denominator)."""


class UnsupportedRegimeError(ValueError):
    """The requested closed-form result does not cover this parameter regime."""


class StabilityError(RuntimeError):
    """A steady state was requested for a drift matrix that is not strictly stable."""


class NoFeasiblePointError(RuntimeError):
    """Every grid point of an optimization was unstable or failed."""


class DivergenceError(RuntimeError):
    """Propagation produced non-finite values."""

    def __init__(self, message, step=None):
        super().__init__(message)
        self.step = step


class NumericalError(RuntimeError):
    """A linear solve did not reach the accuracy contract."""


class PhysicalityError(ValueError):
    """A covariance matrix violates the uncertainty principle beyond tolerance."""
