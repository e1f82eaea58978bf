"""Region-level flow matrices and reporting periods."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Union

import numpy as np

KINDS = ("emission", "value")
UNITS = {"emission": "Mt", "value": "M.EUR"}


@dataclass(frozen=True)
class Period:
    """An inclusive range of years combined into one timeframe."""

    label: str
    start_year: int
    end_year: int
    mode: str = "mean"

    def __post_init__(self):
        if self.start_year > self.end_year:
            raise ValueError(f"period {self.label}: start {self.start_year} > end {self.end_year}")
        if self.mode not in ("mean", "sum"):
            raise ValueError(f"period mode must be 'mean' or 'sum', got {self.mode!r}")

    @property
    def years(self) -> range:
        return range(self.start_year, self.end_year + 1)

    def __str__(self) -> str:
        return self.label


DEFAULT_PERIODS = (
    Period("P1", 1995, 2001),
    Period("P2", 2002, 2008),
    Period("P3", 2009, 2015),
    Period("P4", 2016, 2022),
)

Timeframe = Union[int, Period]


def timeframe_label(timeframe) -> str:
    if isinstance(timeframe, Period):
        return timeframe.label
    return str(timeframe)


@dataclass(frozen=True, eq=False)
class RegionFlowMatrix:
    """Footprint flows between regions.

    ``values[r, s]`` is the footprint physically occurring in region ``r``
    that is attributable to final demand of region ``s``.
    """

    kind: str
    timeframe: Timeframe
    labels: tuple
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"kind must be one of {KINDS}, got {self.kind!r}")
        labels = tuple(str(r) for r in self.labels)
        if len(set(labels)) != len(labels):
            raise ValueError("region labels must be unique")
        values = np.array(self.values, dtype=float)
        m = len(labels)
        if values.shape != (m, m):
            raise ValueError(f"flow matrix shape {values.shape} does not match {m} labels")
        values.flags.writeable = False
        object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "values", values)

    @property
    def unit(self) -> str:
        return UNITS[self.kind]

    @property
    def timeframe_label(self) -> str:
        return timeframe_label(self.timeframe)

    def production_totals(self) -> np.ndarray:
        """Footprint hosted by each region (row sums)."""
        return self.values.sum(axis=1)

    def consumption_totals(self) -> np.ndarray:
        """Footprint driven by each region's final demand (column sums)."""
        return self.values.sum(axis=0)

    def domestic(self) -> np.ndarray:
        return np.diag(self.values).copy()

    def __eq__(self, other):
        if not isinstance(other, RegionFlowMatrix):
            return NotImplemented
        return (
            self.kind == other.kind
            and self.timeframe == other.timeframe
            and self.labels == other.labels
            and np.array_equal(self.values, other.values)
        )

    __hash__ = None
