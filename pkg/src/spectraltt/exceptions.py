"""Exception hierarchy shared across the package."""


class SpectralTTError(Exception):
    """Base class for all package errors."""


class InvalidInputError(SpectralTTError, ValueError):
    """Malformed or non-finite input data."""


class ConfigurationError(SpectralTTError, ValueError):
    """Unsupported option combination or bad configuration value."""


class DomainError(SpectralTTError, ValueError):
    """Evaluation point outside the domain of the approximation."""


class NumericalFailureError(SpectralTTError, RuntimeError):
    """A numerical routine failed to converge or hit a singular system."""


class FormatError(SpectralTTError, ValueError):
    """Corrupt, truncated or version-mismatched serialized data."""


class ResourceLimitError(SpectralTTError, RuntimeError):
    """A configured resource cap (memory, size) would be exceeded."""


class RankCapError(NumericalFailureError):
    """Adaptive rank growth hit the configured cap.

    Carries the best tensor-train found so far in ``best_tt``.
    """

    def __init__(self, message, best_tt=None):
        super().__init__(message)
        self.best_tt = best_tt


class ConvergenceWarning(UserWarning):
    """An iterative routine stopped at its iteration cap."""
