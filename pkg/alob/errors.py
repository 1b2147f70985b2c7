"""Exception hierarchy shared by every alob module."""

from typing import Optional


class AlobError(Exception):
    """Base class for all alob errors."""


class InvalidParameters(AlobError, ValueError):
    """A parameter object violates its invariants."""


# book


class BookError(AlobError):
    pass


class EmptySide(BookError):
    pass


class ThinSide(BookError):
    pass


class CrossingOrder(BookError):
    pass


class OutsideGrid(BookError):
    pass


class InsufficientLiquidity(BookError):
    pass


# statistics


class StatsError(AlobError):
    pass


class SeriesTooShort(StatsError):
    pass


class DegenerateSeries(StatsError):
    pass


class SingularSystem(StatsError):
    pass


class InvalidMemory(StatsError):
    pass


class InsufficientHistory(StatsError):
    pass


class LengthMismatch(StatsError):
    pass


class DegenerateBins(StatsError):
    pass


# simulation


class SimulationError(AlobError):
    pass


class ConfigInvalid(SimulationError):
    pass


class NonStationaryWarmup(SimulationError):
    pass


# configuration files


class ConfigError(AlobError):
    pass


class ParseError(ConfigError):
    def __init__(self, message: str, line: Optional[int] = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class ValidationError(ConfigError):
    def __init__(self, message: str, key: Optional[str] = None):
        self.key = key
        super().__init__(message)


# external data


class DataError(AlobError):
    pass


class SchemaError(DataError):
    pass


class UnorderedTimestamps(DataError):
    pass


class IoError(AlobError):
    pass
