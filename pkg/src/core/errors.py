"""Domain errors shared by every package under src/.

Diagnostics (validate, residuals, net-flow reports) never raise for analytic
findings such as loops or non-unitarity; these classes are for inputs that
cannot be represented or computed at all.
"""
from __future__ import annotations


class UnitaryNetworkError(ValueError):
    """Base class; the CLI maps it to exit code 1."""


class DirectionError(UnitaryNetworkError):
    pass


class DimensionError(UnitaryNetworkError):
    pass


class NotUnitaryError(UnitaryNetworkError):
    pass


class LegError(UnitaryNetworkError):
    """Unknown, duplicate or unbound leg id."""


class UnknownVertexError(UnitaryNetworkError, KeyError):
    def __str__(self) -> str:  # KeyError would repr() the message
        return str(self.args[0]) if self.args else "unknown vertex"


class CycleError(UnitaryNetworkError):
    def __init__(self, message: str, cycle=None):
        super().__init__(message)
        self.cycle = cycle or []


class BudgetExceeded(UnitaryNetworkError):
    pass


class InfeasibleConcatenation(UnitaryNetworkError):
    pass


class ConversionError(UnitaryNetworkError):
    pass


class PartitionError(UnitaryNetworkError):
    pass


class SchemaError(UnitaryNetworkError):
    def __init__(self, message: str, path: str = ""):
        super().__init__(f"{path or '/'}: {message}")
        self.path = path or "/"


class VersionError(SchemaError):
    """Unknown document format_version; the CLI treats it as a usage error (exit 2)."""
