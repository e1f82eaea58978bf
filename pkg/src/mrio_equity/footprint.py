"""Technical coefficients, the Leontief inverse and region-level footprint flows."""

from __future__ import annotations

import time
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy import linalg as sla
from scipy.linalg import lapack

from .errors import DataError, LabelMismatchError, SingularSystemError
from .flows import KINDS, Period, RegionFlowMatrix

DEFAULT_EPSILON_X = 1e-9
# reciprocal condition numbers below 1 / MAX_CONDITION are refused
MAX_CONDITION = 1e12


@dataclass
class RunReport:
    """Diagnostics gathered while computing footprints for one year."""

    year: int | None = None
    zero_output_sectors: int = 0
    intensity_warnings: int = 0
    balance_violations: int = 0
    condition_estimate: float | None = None
    max_column_sum: float | None = None
    wall_time: float = 0.0
    notes: list = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "year": self.year,
            "zero_output_sectors": self.zero_output_sectors,
            "intensity_warnings": self.intensity_warnings,
            "balance_violations": self.balance_violations,
            "condition_estimate": self.condition_estimate,
            "max_column_sum": self.max_column_sum,
            "wall_time": self.wall_time,
            "notes": list(self.notes),
        }


@dataclass(frozen=True, eq=False)
class TechnologyModel:
    A: np.ndarray = field(repr=False)
    zero_output_sectors: frozenset = frozenset()
    L: np.ndarray | None = field(default=None, repr=False)


def compute_output(Z, Y) -> np.ndarray:
    """Total output: intermediate plus final sales of every sector."""
    Z = np.asarray(Z, dtype=float)
    Y = np.asarray(Y, dtype=float)
    if Y.ndim == 1:
        Y = Y[:, None]
    if Z.ndim != 2 or Z.shape[0] != Z.shape[1]:
        raise DataError(f"Z must be square, got shape {Z.shape}")
    if Y.shape[0] != Z.shape[0]:
        raise DataError(f"Y has {Y.shape[0]} rows but Z has {Z.shape[0]}")
    return Z.sum(axis=1) + Y.sum(axis=1)


def technical_coefficients(Z, x, epsilon_x: float = DEFAULT_EPSILON_X) -> TechnologyModel:
    """Direct requirements ``A = Z diag(x)^-1``.

    Columns whose output does not exceed ``epsilon_x`` are set to zero and
    listed in ``zero_output_sectors``.
    """
    Z = np.asarray(Z, dtype=float)
    x = np.asarray(x, dtype=float)
    if Z.shape != (x.size, x.size):
        raise DataError(f"Z shape {Z.shape} does not match output length {x.size}")
    live = x > epsilon_x
    scale = np.zeros_like(x)
    scale[live] = 1.0 / x[live]
    A = Z * scale[None, :]
    return TechnologyModel(A, frozenset(int(j) for j in np.nonzero(~live)[0]))


class LeontiefSolver:
    """LU factorization of ``I - A``, reusable for several right-hand sides.

    Raises :class:`SingularSystemError` when the system is singular or its
    estimated 1-norm condition number exceeds ``max_condition``.
    """

    def __init__(self, A, max_condition: float = MAX_CONDITION):
        A = np.asarray(A, dtype=float)
        if A.ndim != 2 or A.shape[0] != A.shape[1]:
            raise DataError(f"A must be square, got shape {A.shape}")
        self.n = A.shape[0]
        self.max_column_sum = float(np.abs(A).sum(axis=0).max()) if self.n else 0.0
        M = np.eye(self.n) - A
        anorm = float(np.abs(M).sum(axis=0).max()) if self.n else 0.0
        with warnings.catch_warnings():
            warnings.simplefilter("error", sla.LinAlgWarning)
            try:
                self._lu = sla.lu_factor(M, check_finite=True)
            except (sla.LinAlgWarning, np.linalg.LinAlgError, ValueError) as exc:
                raise SingularSystemError(self._message(0.0, A, str(exc)), 0.0) from None
        rcond, info = lapack.dgecon(self._lu[0], anorm, norm="1")
        rcond = float(rcond)
        if info != 0 or not np.isfinite(rcond) or rcond * max_condition < 1.0:
            raise SingularSystemError(self._message(rcond, A), rcond)
        self.rcond = rcond

    @property
    def condition_estimate(self) -> float:
        return 1.0 / self.rcond if self.rcond > 0 else float("inf")

    def _message(self, rcond, A, detail="") -> str:
        msg = (
            f"I - A is singular or near-singular (reciprocal condition estimate {rcond:.3g}); "
            f"the Leontief inverse needs spectral radius of A below 1"
        )
        if self.n <= 2000:
            rho = float(np.max(np.abs(np.linalg.eigvals(A)))) if self.n else 0.0
            msg += f", found {rho:.6g}"
        else:
            msg += f", largest column sum of A is {self.max_column_sum:.6g}"
        if detail:
            msg += f" ({detail})"
        return msg

    def solve(self, rhs) -> np.ndarray:
        """Return ``(I - A)^-1 rhs``."""
        return sla.lu_solve(self._lu, np.asarray(rhs, dtype=float))


def leontief_inverse(A, max_condition: float = MAX_CONDITION) -> np.ndarray:
    """Explicit Leontief inverse ``(I - A)^-1``."""
    solver = LeontiefSolver(A, max_condition)
    return solver.solve(np.eye(solver.n))


def intensity(direct, x, epsilon_x: float = DEFAULT_EPSILON_X, report: RunReport | None = None) -> np.ndarray:
    """Direct extension per unit of output; zero where output is ~0.

    Sectors with nonzero ``direct`` but no output are counted in
    ``report.intensity_warnings``.
    """
    direct = np.asarray(direct, dtype=float)
    x = np.asarray(x, dtype=float)
    if direct.shape != x.shape:
        raise DataError(f"extension length {direct.shape} does not match output length {x.shape}")
    live = x > epsilon_x
    q = np.zeros_like(x)
    q[live] = direct[live] / x[live]
    if report is not None:
        report.intensity_warnings += int(np.count_nonzero(~live & (direct != 0)))
    return q


def footprint_flows(q, L, Y, schema, kind: str, timeframe=None) -> RegionFlowMatrix:
    """Region-to-region footprints ``F = P^T diag(q) L Y``.

    ``L`` may be the explicit inverse or a :class:`LeontiefSolver`. ``P`` sums
    the sector rows of each producing region.
    """
    if kind not in KINDS:
        raise ValueError(f"kind must be one of {KINDS}, got {kind!r}")
    q = np.asarray(q, dtype=float)
    Y = np.asarray(Y, dtype=float)
    n = schema.flat_size
    if q.shape != (n,) or Y.shape != (n, schema.n_regions):
        raise DataError(
            f"dimension mismatch: q {q.shape}, Y {Y.shape}, schema {n} x {schema.n_regions}"
        )
    if isinstance(L, LeontiefSolver):
        if L.n != n:
            raise DataError(f"solver size {L.n} does not match schema size {n}")
        X = L.solve(Y)
    else:
        L = np.asarray(L, dtype=float)
        if L.shape != (n, n):
            raise DataError(f"L shape {L.shape} does not match schema size {n}")
        X = L @ Y
    G = q[:, None] * X
    F = G.reshape(schema.n_regions, schema.n_sectors, schema.n_regions).sum(axis=1)
    return RegionFlowMatrix(kind, timeframe, schema.regions, F)


def compute_footprints(snapshot, epsilon_x: float = DEFAULT_EPSILON_X,
                       max_condition: float = MAX_CONDITION,
                       report: RunReport | None = None) -> dict:
    """Emission and value-added flow matrices of one snapshot.

    Returns ``{"emission": RegionFlowMatrix, "value": RegionFlowMatrix}`` at
    native region resolution; one factorization serves both kinds.
    """
    t0 = time.perf_counter()
    if report is None:
        report = RunReport()
    report.year = snapshot.year
    tech = technical_coefficients(snapshot.Z, snapshot.x, epsilon_x)
    report.zero_output_sectors = len(tech.zero_output_sectors)
    solver = LeontiefSolver(tech.A, max_condition)
    report.condition_estimate = solver.condition_estimate
    report.max_column_sum = solver.max_column_sum
    out = {}
    for kind, direct in (("emission", snapshot.ext_emission), ("value", snapshot.ext_value)):
        q = intensity(direct, snapshot.x, epsilon_x, report)
        out[kind] = footprint_flows(q, solver, snapshot.Y, snapshot.schema, kind, snapshot.year)
    report.wall_time = time.perf_counter() - t0
    return out


def period_aggregate(flows, period: Period) -> RegionFlowMatrix:
    """Combine yearly flow matrices over ``period`` by mean or sum."""
    flows = list(flows)
    if not flows:
        raise DataError(f"no flows supplied for period {period.label}")
    by_year = {}
    for f in flows:
        if isinstance(f.timeframe, Period) or f.timeframe is None:
            raise DataError(f"period aggregation needs yearly flows, got timeframe {f.timeframe!r}")
        if int(f.timeframe) in by_year:
            raise DataError(f"year {f.timeframe} supplied twice for period {period.label}")
        by_year[int(f.timeframe)] = f
    wanted = list(period.years)
    missing = [y for y in wanted if y not in by_year]
    if missing:
        raise DataError(f"period {period.label} is missing years {missing}")
    extra = sorted(set(by_year) - set(wanted))
    if extra:
        raise DataError(f"years {extra} fall outside period {period.label}")
    first = by_year[wanted[0]]
    for y in wanted:
        f = by_year[y]
        if f.labels != first.labels:
            raise LabelMismatchError(f"labels of year {y} differ from year {wanted[0]}")
        if f.kind != first.kind:
            raise DataError(f"mixed kinds in period {period.label}: {first.kind}, {f.kind}")
    total = np.zeros_like(first.values)
    for y in wanted:
        total = total + by_year[y].values
    if period.mode == "mean":
        total = total / len(wanted)
    return RegionFlowMatrix(first.kind, period, first.labels, total)
