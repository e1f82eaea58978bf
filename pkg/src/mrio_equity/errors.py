"""Exception types shared across the package."""

from __future__ import annotations


class MrioError(Exception):
    """Base class for all errors raised by mrio_equity."""


class DataError(MrioError):
    """Input tables are missing, malformed or inconsistent."""


class MissingFileError(DataError, FileNotFoundError):
    def __init__(self, path, what: str = "file"):
        self.path = path
        super().__init__(f"missing {what}: {path}")


class UnknownYearError(DataError):
    def __init__(self, year: int, available=()):
        self.year = year
        self.available = tuple(available)
        avail = ", ".join(str(y) for y in self.available) or "none"
        super().__init__(f"no data for year {year} (available: {avail})")


class DimensionMismatchError(DataError):
    def __init__(self, what: str, expected: int, found: int, path=None):
        self.expected = expected
        self.found = found
        where = f" in {path}" if path is not None else ""
        super().__init__(f"{what}{where}: index has {expected} entries but found {found}")


class NonNumericCellError(DataError):
    def __init__(self, path, row: int, column: int, value: str):
        self.path = path
        self.row = row
        self.column = column
        self.value = value
        super().__init__(
            f"non-numeric cell {value!r} in {path} at row {row}, column {column}"
        )


class LabelMismatchError(DataError):
    """Region labels of two inputs that must line up do not."""


class UnmappedRegionError(DataError):
    def __init__(self, labels):
        self.labels = tuple(labels)
        super().__init__(f"regions missing from aggregation map: {', '.join(self.labels)}")


class NumericalError(MrioError):
    """A numerical procedure cannot produce a trustworthy result."""


class SingularSystemError(NumericalError):
    def __init__(self, message: str, rcond: float | None = None):
        self.rcond = rcond
        super().__init__(message)


class ConfigError(MrioError):
    """Run configuration is invalid."""
