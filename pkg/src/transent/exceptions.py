"""Exception types raised across the package."""


class TransentError(Exception):
    """Base class for all package errors."""


class InvalidParameterError(TransentError, ValueError):
    """A physical or numerical parameter is outside its valid domain."""


class InvalidGridError(TransentError, ValueError):
    pass


class AngleRangeError(TransentError, ValueError):
    """A single FRFT lens system was asked for an order outside [0, pi]."""


class AdditivityError(TransentError, ValueError):
    """Lens systems with different scale lengths f' cannot be composed."""


class UndefinedThresholdError(TransentError, ValueError):
    pass


class DegenerateDensityError(TransentError, ValueError):
    pass


class FitError(TransentError, RuntimeError):
    """Gaussian fit did not converge or produced a meaningless width."""

    def __init__(self, message, diagnostics=None):
        super().__init__(message)
        self.diagnostics = diagnostics or {}


class ConfigurationError(TransentError, ValueError):
    pass
