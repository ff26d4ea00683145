"""Exception types shared across the package."""


class SampdensError(Exception):
    """Base class for every error raised by this package."""


class DomainError(SampdensError):
    """A point lies outside the surface domain."""


class SingularEvaluationError(SampdensError):
    """Evaluation requested at a coincident pair where the kernel is singular."""


class RadiusRangeError(SampdensError):
    """A radius or scale parameter is outside its admissible range."""


class DegenerateInputError(SampdensError):
    """Coincident or otherwise degenerate input where distinct data is required."""


class DegenerateKernelError(SampdensError):
    """The radial kernel carries no mass on the requested range."""


class AccuracyError(SampdensError):
    """Adaptive quadrature failed to meet tolerance within its refinement budget.

    Carries the best available estimate and the last observed error so callers
    can decide whether to proceed.
    """

    def __init__(self, message, best_estimate=None, error_estimate=None):
        super().__init__(message)
        self.best_estimate = best_estimate
        self.error_estimate = error_estimate


class HypothesisViolationError(SampdensError):
    """A positivity or boundedness hypothesis fails numerically."""


class UnsupportedSurfaceError(SampdensError):
    """The operation is not defined for this surface model."""


class GeometryError(SampdensError):
    """A constructed region exits the surface domain."""


class ConfigError(SampdensError):
    """Invalid, missing, or unknown configuration input."""
