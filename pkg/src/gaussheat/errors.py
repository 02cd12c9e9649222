"""Exception types raised across the package."""


class GaussHeatError(Exception):
    """Base class for all package errors."""


class DomainError(GaussHeatError, ValueError):
    """A time argument lies outside [0, 1]."""


class UnsupportedCovariance(GaussHeatError):
    """The process family has no covariance function available (e.g. fractional OU)."""


class ConvergenceError(GaussHeatError, RuntimeError):
    pass


class FactorizationError(GaussHeatError, RuntimeError):
    pass


class OutsideDomain(GaussHeatError, ValueError):
    pass


class RangeError(GaussHeatError, ValueError):
    pass


class DimensionMismatch(GaussHeatError, ValueError):
    pass


class NotBridgeCorrectable(GaussHeatError):
    """Bridge crossing correction requested for a process without Brownian increments."""


class DegenerateScale(GaussHeatError, ValueError):
    pass


class ValidityError(GaussHeatError, ValueError):
    pass


class UnsupportedTimeChange(GaussHeatError):
    pass


class InsufficientData(GaussHeatError, ValueError):
    pass


class NonPositiveValue(GaussHeatError, ValueError):
    pass


class ConfigError(GaussHeatError, ValueError):
    pass
