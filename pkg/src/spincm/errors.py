"""Exception hierarchy shared by all modules."""


class SpinCMError(Exception):
    """Base class for every error raised by this package."""


class DimensionError(SpinCMError, ValueError):
    """Matrix shapes do not agree."""


class StructureError(SpinCMError, ValueError):
    """A matrix is not of the required type (Hermitian, anti-Hermitian, unitary...)."""


class NotRegularError(SpinCMError):
    """A configuration has (nearly) coincident eigenvalues.

    ``min_gap`` carries the smallest eigenvalue gap that was found.
    """

    def __init__(self, message, min_gap=None):
        super().__init__(message)
        self.min_gap = min_gap


class WallCollisionError(NotRegularError):
    """A trajectory reached a chamber wall at time ``time``."""

    def __init__(self, message, time, min_gap=None):
        super().__init__(message, min_gap=min_gap)
        self.time = time


class OrbitSearchError(SpinCMError):
    """No point of the orbit with vanishing diagonal was found."""

    def __init__(self, message, best_residual):
        super().__init__(message)
        self.best_residual = best_residual


class DriftError(SpinCMError):
    """Structural drift of the spin variable exceeded its bound."""


class SpinSignError(SpinCMError):
    """Neither orientation of the spin equation reproduces the projected flow."""

    def __init__(self, message, residuals):
        super().__init__(message)
        self.residuals = residuals


class IllConditionedError(SpinCMError):
    """A least-squares solve could not reproduce its right-hand side."""


class ConfigError(SpinCMError, ValueError):
    """Invalid scenario configuration."""
