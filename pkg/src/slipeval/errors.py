"""Exception and warning types shared across the package."""

from __future__ import annotations


class SlipevalError(Exception):
    """Base class for every error raised by this package."""


class MalformedNotation(SlipevalError):
    """An error-notation token violates the annotation micro-format."""


class SchemaError(SlipevalError):
    """An input file does not match its documented schema."""


class RowError(SlipevalError):
    """A single corpus row failed validation."""

    def __init__(self, row: int, message: str):
        super().__init__(f"row {row}: {message}")
        self.row = row
        self.message = message


class CorpusError(SlipevalError):
    """One or more corpus rows failed validation."""

    def __init__(self, errors: list[RowError]):
        self.errors = list(errors)
        head = "; ".join(str(e) for e in self.errors[:5])
        tail = f" (+{len(self.errors) - 5} more)" if len(self.errors) > 5 else ""
        super().__init__(f"{len(self.errors)} invalid row(s): {head}{tail}")


class EmptyInput(SlipevalError):
    """An aggregate was requested over an empty collection."""


class UnknownCondition(SlipevalError):
    """A condition selector is not one of the supported names."""


class UnknownRecord(SlipevalError):
    """A record id was not found in the corpus."""


class DegenerateTable(SlipevalError):
    """A contingency table has too few informative rows or columns to test."""


class InvalidProbability(SlipevalError):
    """A probability is outside its allowed range."""


class NoPath(SlipevalError):
    """A lattice has no start-to-end path (invariant violation)."""


class ConfigError(SlipevalError):
    """Bad or missing run configuration."""


class FixtureSpecError(SlipevalError):
    """A synthetic-fixture spec is invalid."""


class NonMonotonicTimestamps(UserWarning):
    """Transcript word timestamps were out of order and have been re-sorted."""
