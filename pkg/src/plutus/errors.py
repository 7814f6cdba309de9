"""Exception hierarchy.

Every error carries a ``category`` that the CLI maps to an exit code:
``config`` -> 2, ``data`` -> 3, ``runtime`` -> 4.
"""

from __future__ import annotations


class PlutusError(Exception):
    category = "runtime"

    @property
    def kind(self) -> str:
        return type(self).__name__


# -- configuration ---------------------------------------------------------

class ConfigError(PlutusError):
    category = "config"


class ParseError(ConfigError):
    pass


class UnknownKey(ConfigError):
    pass


class InvalidValue(ConfigError):
    def __init__(self, key: str, reason: str):
        super().__init__(f"{key}: {reason}")
        self.key = key
        self.reason = reason


# -- input data ------------------------------------------------------------

class DataError(PlutusError):
    category = "data"


class DataFileNotFound(DataError, FileNotFoundError):
    pass


class SchemaError(DataError):
    pass


class EmptySeries(DataError):
    pass


class DuplicateRow(DataError):
    pass


class LengthMismatch(DataError):
    pass


# -- metrics ---------------------------------------------------------------

class MetricError(PlutusError):
    pass


class SeriesTooShort(MetricError):
    pass


class ZeroVolatility(MetricError):
    pass


class ZeroDownside(MetricError):
    pass


class ZeroTrackingError(MetricError):
    pass


# -- strategies / optimizer --------------------------------------------------

class UnknownMonth(PlutusError):
    pass


class MissingPrice(PlutusError):
    pass


class NoActiveQuote(PlutusError):
    pass


class ConstraintViolated(PlutusError):
    """A trial broke an optimizer constraint (e.g. too few qualified stocks)."""


class AllTrialsFailed(PlutusError):
    pass
