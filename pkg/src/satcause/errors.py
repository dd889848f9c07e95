"""Exception hierarchy.

The CLI maps the four top-level families onto its exit codes, so every
error raised inside the package derives from one of them.
"""

from __future__ import annotations


class SatCauseError(Exception):
    """Base class for all package errors."""


class DataError(SatCauseError):
    """Malformed or unusable input data (CLI exit code 2)."""


class LearningError(SatCauseError):
    """Structure learning could not produce a graph (CLI exit code 3)."""


class QueryError(SatCauseError):
    """A query is malformed or references unknown variables (CLI exit code 5)."""


class EstimationError(SatCauseError):
    """Identification or regression failed for an otherwise valid query."""


# -- data --------------------------------------------------------------------


class EmptyFile(DataError):
    pass


class MissingColumn(DataError):
    def __init__(self, column: str):
        super().__init__(f"missing column {column!r}")
        self.column = column


class UnknownColumn(DataError):
    def __init__(self, column: str):
        super().__init__(f"unknown column {column!r}")
        self.column = column


class UnknownCategory(DataError):
    def __init__(self, row: int, column: str, value: str):
        super().__init__(f"row {row}: {value!r} is not a category of column {column!r}")
        self.row, self.column, self.value = row, column, value


class NonNumericCell(DataError):
    def __init__(self, row: int, column: str, value: str):
        super().__init__(f"row {row}: column {column!r} has non-numeric value {value!r}")
        self.row, self.column, self.value = row, column, value


class ZeroVariance(DataError):
    def __init__(self, column: str):
        super().__init__(f"column {column!r} has zero variance")
        self.column = column


class EmptyResult(DataError):
    def __init__(self, predicate: str):
        super().__init__(f"no rows satisfy {predicate}")
        self.predicate = predicate


class BadFoldCount(DataError):
    pass


# -- graphs ------------------------------------------------------------------


class UnknownNode(SatCauseError, KeyError):
    def __init__(self, node: str):
        super().__init__(f"unknown node {node!r}")
        self.node = node

    def __str__(self) -> str:
        return self.args[0]


class CycleError(SatCauseError, ValueError):
    pass


class CyclicWhitelist(LearningError):
    def __init__(self, message: str = "cyclic whitelist"):
        super().__init__(message)


# -- estimation --------------------------------------------------------------


class SingularDesign(EstimationError):
    pass


class TooFewRows(EstimationError):
    pass


class NotIdentifiable(EstimationError):
    pass


class EmptyStratum(EstimationError):
    def __init__(self, stratum):
        super().__init__(f"stratum {stratum!r} lacks one of the treatment values")
        self.stratum = stratum


# -- queries -----------------------------------------------------------------


class QuerySyntaxError(QueryError):
    def __init__(self, message: str, position: int):
        super().__init__(f"{message} at position {position}")
        self.position = position


class ArityError(QueryError):
    pass


class UnknownVariable(QueryError):
    def __init__(self, name: str):
        super().__init__(f"unknown variable {name!r}")
        self.name = name
