"""Exception types raised across the package."""


class NestedMAError(Exception):
    """Base class for all package errors."""


class RankDeficient(NestedMAError):
    """The design matrix does not have full column rank."""


class DimensionMismatch(NestedMAError, ValueError):
    pass


class InvalidParams(NestedMAError, ValueError):
    pass


class EmptyInput(NestedMAError, ValueError):
    pass


class PhiZero(NestedMAError, ValueError):
    """A penalty factor is zero, so the penalized-Stein bound is undefined."""


class ZeroSignal(NestedMAError, ValueError):
    pass


class ConfigError(NestedMAError, ValueError):
    pass
