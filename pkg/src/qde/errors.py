"""Exception types raised across the package."""


class QdeError(Exception):
    """Base class for every error raised by :mod:`qde`."""


class NotHermitian(QdeError, ValueError):
    pass


class DimMismatch(QdeError, ValueError):
    pass


class NonSymmetricPoint(QdeError, ValueError):
    pass


class ValidityViolation(QdeError):
    """An approximation was requested outside its declared validity window."""

    def __init__(self, message, ratios=None):
        super().__init__(message)
        self.ratios = dict(ratios or {})


class GeometryOutOfRange(QdeError, ValueError):
    pass


class QuadratureNonConvergence(QdeError, RuntimeError):
    pass


class ConditionViolation(QdeError, ValueError):
    """Gate quantization conditions do not hold."""

    def __init__(self, message, failures=()):
        super().__init__(message)
        self.failures = tuple(failures)


class StepNonConvergence(QdeError, RuntimeError):
    pass


class InvariantBreach(QdeError, RuntimeError):
    pass


class DivisionByZeroRate(QdeError, ZeroDivisionError):
    pass


class ConfigError(QdeError, ValueError):
    pass
