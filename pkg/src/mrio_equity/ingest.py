"""Loading, validating and aggregating EE-MRIO tables.

Two on-disk layouts are understood:

``canonical_csv``
    A workspace directory holding ``index.csv`` (columns ``region,sector``)
    and, per year, ``Z_<year>.csv`` (headerless n x n), ``Y_<year>.csv``
    (header row of destination regions, n rows), ``ext_<year>.csv`` (one row
    per account, first field is the account name) and optionally
    ``x_<year>.csv`` (one value per line).

``exiobase_ixi``
    The industry-by-industry tab-separated files shipped in the ExioBase 3
    archives (``Z.txt``, ``Y.txt``, ``satellite/F.txt``), one directory per
    year named ``IOT_<year>_ixi`` or ``<year>`` below the workspace.
"""

from __future__ import annotations

import csv
import re
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

import numpy as np

from .errors import (
    DataError,
    DimensionMismatchError,
    MissingFileError,
    NonNumericCellError,
    UnknownYearError,
    UnmappedRegionError,
)
from .flows import RegionFlowMatrix

FORMATS = ("canonical_csv", "exiobase_ixi")

CANONICAL_EMISSION_ACCOUNTS = ("emission",)
CANONICAL_VALUE_ACCOUNTS = ("value_added",)

# ExioBase 3.8 satellite rows; F.txt reports emissions in kg.
EXIOBASE_EMISSION_ACCOUNTS = ("CO2 - combustion - air",)
EXIOBASE_VALUE_ACCOUNTS = (
    "Taxes less subsidies on products purchased: Total",
    "Other net taxes on production",
    "Compensation of employees; wages, salaries, & employers' social contributions: Low-skilled",
    "Compensation of employees; wages, salaries, & employers' social contributions: Medium-skilled",
    "Compensation of employees; wages, salaries, & employers' social contributions: High-skilled",
    "Operating surplus: Consumption of fixed capital",
    "Operating surplus: Rents on land",
    "Operating surplus: Royalties on resources",
    "Operating surplus: Remaining net operating surplus",
)
EXIOBASE_EMISSION_SCALE = 1e-9  # kg -> Mt

DEFAULT_BALANCE_EPSILON = 1e-6


# ---------------------------------------------------------------------------
# Data classes
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class RegionSchema:
    """Ordered region and sector labels of a flattened region x sector index."""

    regions: tuple
    sectors: tuple

    def __post_init__(self):
        regions = tuple(str(r) for r in self.regions)
        sectors = tuple(str(s) for s in self.sectors)
        if not regions or not sectors:
            raise DataError("schema needs at least one region and one sector")
        for what, labels in (("region", regions), ("sector", sectors)):
            seen = set()
            for label in labels:
                if label in seen:
                    raise DataError(f"duplicate {what} label {label!r}")
                seen.add(label)
        object.__setattr__(self, "regions", regions)
        object.__setattr__(self, "sectors", sectors)

    @property
    def n_regions(self) -> int:
        return len(self.regions)

    @property
    def n_sectors(self) -> int:
        return len(self.sectors)

    @property
    def flat_size(self) -> int:
        return len(self.regions) * len(self.sectors)

    def flat_index(self, region: int, sector: int) -> int:
        return region * len(self.sectors) + sector

    def unflatten(self, i: int) -> tuple[int, int]:
        return divmod(i, len(self.sectors))

    def region_of(self) -> np.ndarray:
        """Region position of every flat index."""
        return np.repeat(np.arange(self.n_regions), self.n_sectors)

    def pairs(self):
        return [(r, s) for r in self.regions for s in self.sectors]

    @classmethod
    def from_pairs(cls, pairs) -> RegionSchema:
        """Build a schema from (region, sector) rows in flat order.

        The rows must form a full region-major grid: every region lists the
        same sectors in the same order.
        """
        pairs = [(str(r), str(s)) for r, s in pairs]
        if not pairs:
            raise DataError("index is empty")
        regions: list[str] = []
        for r, _ in pairs:
            if not regions or regions[-1] != r:
                regions.append(r)
        n_sec = len(pairs) // len(regions)
        sectors = [s for _, s in pairs[:n_sec]]
        schema = cls(tuple(regions), tuple(sectors))
        if schema.pairs() != pairs:
            raise DataError(
                "index rows are not a region-major grid of "
                f"{len(regions)} regions x {n_sec} sectors"
            )
        return schema


@dataclass(frozen=True)
class AggregationMap:
    """Many-to-one mapping from native region codes to aggregated regions."""

    mapping: dict
    aggregated_order: tuple

    def __post_init__(self):
        order = tuple(self.aggregated_order)
        if len(set(order)) != len(order):
            raise DataError("aggregated_order contains duplicates")
        unknown = sorted({v for v in self.mapping.values()} - set(order))
        if unknown:
            raise DataError(f"mapped values not in aggregated_order: {', '.join(unknown)}")
        object.__setattr__(self, "mapping", dict(self.mapping))
        object.__setattr__(self, "aggregated_order", order)

    def __getitem__(self, code):
        return self.mapping[code]

    @classmethod
    def identity(cls, labels) -> AggregationMap:
        labels = tuple(labels)
        return cls({r: r for r in labels}, labels)


@dataclass(frozen=True, eq=False)
class MrioSnapshot:
    """One year of an environmentally extended MRIO table.

    Monetary quantities are in M.EUR, emissions in Mt CO2e.
    """

    year: int
    Z: np.ndarray = field(repr=False)
    Y: np.ndarray = field(repr=False)
    x: np.ndarray = field(repr=False)
    ext_emission: np.ndarray = field(repr=False)
    ext_value: np.ndarray = field(repr=False)
    schema: RegionSchema = field(repr=False)
    allow_negative_final_demand: bool = field(default=False, repr=False)

    def __post_init__(self):
        n = self.schema.flat_size
        m = self.schema.n_regions
        shapes = {
            "Z": (n, n),
            "Y": (n, m),
            "x": (n,),
            "ext_emission": (n,),
            "ext_value": (n,),
        }
        for name, shape in shapes.items():
            arr = np.array(getattr(self, name), dtype=float)
            if arr.shape != shape:
                raise DataError(f"{name} has shape {arr.shape}, expected {shape}")
            if not np.all(np.isfinite(arr)):
                raise DataError(f"{name} contains non-finite values")
            arr.flags.writeable = False
            object.__setattr__(self, name, arr)
        checks = ["Z", "x", "ext_emission"]
        if not self.allow_negative_final_demand:
            checks.append("Y")
        for name in checks:
            arr = getattr(self, name)
            if arr.size and arr.min() < 0:
                pos = np.unravel_index(int(np.argmin(arr)), arr.shape)
                raise DataError(f"{name} has negative entry {arr[pos]!r} at {tuple(int(p) for p in pos)}")

    @property
    def n(self) -> int:
        return self.schema.flat_size

    def __eq__(self, other):
        if not isinstance(other, MrioSnapshot):
            return NotImplemented
        return (
            self.year == other.year
            and self.schema == other.schema
            and all(
                np.array_equal(getattr(self, k), getattr(other, k))
                for k in ("Z", "Y", "x", "ext_emission", "ext_value")
            )
        )

    __hash__ = None


@dataclass(frozen=True)
class BalanceViolation:
    index: int
    region: str
    sector: str
    x: float
    row_sum: float
    relative_gap: float


@dataclass(frozen=True)
class ValidationReport:
    year: int
    epsilon_rel: float
    violations: tuple = ()

    def __bool__(self):
        return bool(self.violations)

    def __len__(self):
        return len(self.violations)

    def __iter__(self):
        return iter(self.violations)

    def to_dict(self) -> dict:
        return {
            "year": self.year,
            "epsilon_rel": self.epsilon_rel,
            "violations": [
                {
                    "index": v.index,
                    "region": v.region,
                    "sector": v.sector,
                    "x": v.x,
                    "row_sum": v.row_sum,
                    "relative_gap": v.relative_gap,
                }
                for v in self.violations
            ],
        }


# ---------------------------------------------------------------------------
# Canonical CSV
# ---------------------------------------------------------------------------


def _read_rows(path: Path) -> list[list[str]]:
    if not path.is_file():
        raise MissingFileError(path)
    with path.open(newline="", encoding="utf-8") as f:
        return [row for row in csv.reader(f) if row]


def _to_float_matrix(rows, path: Path, row_offset: int = 1, col_offset: int = 1) -> np.ndarray:
    """Convert string cells to floats, reporting 1-based file coordinates on failure."""
    out = np.empty((len(rows), len(rows[0]) if rows else 0))
    for i, row in enumerate(rows):
        if len(row) != out.shape[1]:
            raise DataError(
                f"ragged row {i + row_offset} in {path}: {len(row)} fields, expected {out.shape[1]}"
            )
        for j, cell in enumerate(row):
            try:
                out[i, j] = float(cell)
            except ValueError:
                raise NonNumericCellError(path, i + row_offset, j + col_offset, cell) from None
    return out


def _read_numeric(path: Path) -> np.ndarray:
    if not path.is_file():
        raise MissingFileError(path)
    try:
        arr = np.loadtxt(path, delimiter=",", ndmin=2, dtype=float, encoding="utf-8")
    except ValueError:
        arr = _to_float_matrix(_read_rows(path), path)
    return arr


def _available_years(workspace: Path, fmt: str) -> list[int]:
    years = set()
    if fmt == "canonical_csv":
        # a year exists if any of its tables does, so a lone missing file is reported
        for p in workspace.glob("*_*.csv"):
            m = re.fullmatch(r"(?:Z|Y|ext|x)_(\d{4})\.csv", p.name)
            if m:
                years.add(int(m.group(1)))
    else:
        for p in workspace.iterdir() if workspace.is_dir() else ():
            m = re.fullmatch(r"(?:IOT_)?(\d{4})(?:_ixi)?", p.name)
            if m and p.is_dir():
                years.add(int(m.group(1)))
    return sorted(years)


def read_index(path) -> RegionSchema:
    path = Path(path)
    rows = _read_rows(path)
    if not rows or [c.strip() for c in rows[0]] != ["region", "sector"]:
        raise DataError(f"{path}: expected header 'region,sector'")
    for i, row in enumerate(rows[1:], start=2):
        if len(row) != 2:
            raise DataError(f"{path}: row {i} has {len(row)} fields, expected 2")
    return RegionSchema.from_pairs([(r, s) for r, s in rows[1:]])


def _sum_accounts(names, values, wanted, path) -> np.ndarray:
    index = {}
    for i, name in enumerate(names):
        index.setdefault(name, []).append(i)
    missing = [w for w in wanted if w not in index]
    if missing:
        raise DataError(f"{path}: extension account(s) not found: {', '.join(missing)}")
    rows = [i for w in wanted for i in index[w]]
    return values[rows].sum(axis=0)


def _parse_canonical(workspace: Path, year: int, emission_accounts, value_accounts,
                     emission_scale, allow_negative_final_demand) -> MrioSnapshot:
    index_path = workspace / "index.csv"
    schema = read_index(index_path)
    n, m = schema.flat_size, schema.n_regions

    z_path = workspace / f"Z_{year}.csv"
    if not z_path.is_file():
        years = _available_years(workspace, "canonical_csv")
        if years:
            raise UnknownYearError(year, years)
        raise MissingFileError(z_path)
    Z = _read_numeric(z_path)
    if Z.shape[0] != n:
        raise DimensionMismatchError("Z rows", n, Z.shape[0], z_path)
    if Z.shape[1] != n:
        raise DimensionMismatchError("Z columns", n, Z.shape[1], z_path)

    y_path = workspace / f"Y_{year}.csv"
    y_rows = _read_rows(y_path)
    header = [c.strip() for c in y_rows[0]] if y_rows else []
    if len(header) != m:
        raise DimensionMismatchError("Y columns", m, len(header), y_path)
    if tuple(header) != schema.regions:
        raise DataError(f"{y_path}: header {header} does not match index regions {list(schema.regions)}")
    Y = _to_float_matrix(y_rows[1:], y_path, row_offset=2)
    if Y.shape[0] != n:
        raise DimensionMismatchError("Y rows", n, Y.shape[0], y_path)

    ext_path = workspace / f"ext_{year}.csv"
    ext_rows = _read_rows(ext_path)
    names = [r[0].strip() for r in ext_rows]
    body = [r[1:] for r in ext_rows]
    for i, r in enumerate(body, start=1):
        if len(r) != n:
            raise DimensionMismatchError(f"ext row {i} values", n, len(r), ext_path)
    ext = _to_float_matrix(body, ext_path, col_offset=2)
    ext_emission = _sum_accounts(names, ext, emission_accounts, ext_path) * emission_scale
    ext_value = _sum_accounts(names, ext, value_accounts, ext_path)

    x_path = workspace / f"x_{year}.csv"
    if x_path.is_file():
        x = _read_numeric(x_path).ravel()
        if x.shape[0] != n:
            raise DimensionMismatchError("x entries", n, x.shape[0], x_path)
    else:
        from .footprint import compute_output

        x = compute_output(Z, Y)

    return MrioSnapshot(year, Z, Y, x, ext_emission, ext_value, schema,
                        allow_negative_final_demand=allow_negative_final_demand)


def _fmt(value: float) -> str:
    return repr(float(value))


def write_canonical(snapshot: MrioSnapshot, workspace, *, write_x: bool = True) -> list[Path]:
    """Write ``snapshot`` in the canonical CSV layout; returns the files written.

    An existing ``index.csv`` must describe the same schema.
    """
    workspace = Path(workspace)
    workspace.mkdir(parents=True, exist_ok=True)
    schema = snapshot.schema
    index_path = workspace / "index.csv"
    if index_path.is_file():
        if read_index(index_path) != schema:
            raise DataError(f"{index_path} describes a different region/sector index")
    written = [index_path]
    lines = ["region,sector"] + [_csv_line([r, s]) for r, s in schema.pairs()]
    _write_text(index_path, lines)

    y = snapshot.year
    z_path = workspace / f"Z_{y}.csv"
    _write_text(z_path, [",".join(map(_fmt, row)) for row in snapshot.Z])
    y_path = workspace / f"Y_{y}.csv"
    _write_text(y_path, [_csv_line(schema.regions)] + [",".join(map(_fmt, row)) for row in snapshot.Y])
    ext_path = workspace / f"ext_{y}.csv"
    _write_text(ext_path, [
        _csv_line([CANONICAL_EMISSION_ACCOUNTS[0]]) + "," + ",".join(map(_fmt, snapshot.ext_emission)),
        _csv_line([CANONICAL_VALUE_ACCOUNTS[0]]) + "," + ",".join(map(_fmt, snapshot.ext_value)),
    ])
    written += [z_path, y_path, ext_path]
    if write_x:
        x_path = workspace / f"x_{y}.csv"
        _write_text(x_path, [_fmt(v) for v in snapshot.x])
        written.append(x_path)
    return written


def _csv_line(fields) -> str:
    out = []
    for f in fields:
        f = str(f)
        if any(c in f for c in ',"\n\r'):
            f = '"' + f.replace('"', '""') + '"'
        out.append(f)
    return ",".join(out)


def _write_text(path: Path, lines) -> None:
    with path.open("w", encoding="utf-8", newline="\n") as f:
        for line in lines:
            f.write(line)
            f.write("\n")


# ---------------------------------------------------------------------------
# ExioBase ixi
# ---------------------------------------------------------------------------


def exiobase_year_dir(workspace, year: int) -> Path:
    workspace = Path(workspace)
    if (workspace / "Z.txt").is_file():
        return workspace
    for name in (f"IOT_{year}_ixi", str(year)):
        if (workspace / name).is_dir():
            return workspace / name
    raise UnknownYearError(year, _available_years(workspace, "exiobase_ixi"))


def _read_exiobase_table(path: Path, index_cols: int):
    import pandas as pd

    if not path.is_file():
        raise MissingFileError(path)
    df = pd.read_csv(path, sep="\t", header=[0, 1], index_col=list(range(index_cols)),
                     low_memory=False, keep_default_na=False)
    try:
        return df, df.to_numpy(dtype=float)
    except ValueError:
        values = df.to_numpy(dtype=object)
        for (i, j), cell in np.ndenumerate(values):
            try:
                float(cell)
            except (TypeError, ValueError):
                # two header lines precede the body
                raise NonNumericCellError(path, i + 3, j + index_cols + 1, str(cell)) from None
        raise DataError(f"{path}: non-numeric content") from None


def _parse_exiobase(workspace: Path, year: int, emission_accounts, value_accounts,
                    emission_scale, allow_negative_final_demand) -> MrioSnapshot:
    ydir = exiobase_year_dir(workspace, year)
    z_df, Z = _read_exiobase_table(ydir / "Z.txt", 2)
    pairs = [(str(r), str(s)) for r, s in z_df.index]
    schema = RegionSchema.from_pairs(pairs)
    n = schema.flat_size
    if Z.shape[1] != n:
        raise DimensionMismatchError("Z columns", n, Z.shape[1], ydir / "Z.txt")
    col_pairs = [(str(r), str(s)) for r, s in z_df.columns]
    if col_pairs != pairs:
        raise DataError(f"{ydir / 'Z.txt'}: column index differs from row index")

    y_df, Yfull = _read_exiobase_table(ydir / "Y.txt", 2)
    if Yfull.shape[0] != n:
        raise DimensionMismatchError("Y rows", n, Yfull.shape[0], ydir / "Y.txt")
    if [(str(r), str(s)) for r, s in y_df.index] != pairs:
        raise DataError(f"{ydir / 'Y.txt'}: row index differs from Z")
    y_regions = np.array([str(r) for r, _ in y_df.columns])
    unknown = sorted(set(y_regions) - set(schema.regions))
    if unknown:
        raise DataError(f"{ydir / 'Y.txt'}: unknown demand regions {unknown}")
    Y = np.column_stack([Yfull[:, y_regions == r].sum(axis=1) for r in schema.regions])

    f_path = ydir / "satellite" / "F.txt"
    f_df, F = _read_exiobase_table(f_path, 1)
    if F.shape[1] != n:
        raise DimensionMismatchError("F columns", n, F.shape[1], f_path)
    if [(str(r), str(s)) for r, s in f_df.columns] != pairs:
        raise DataError(f"{f_path}: column index differs from Z")
    names = [str(i).strip() for i in f_df.index]
    ext_emission = _sum_accounts(names, F, emission_accounts, f_path) * emission_scale
    ext_value = _sum_accounts(names, F, value_accounts, f_path)

    from .footprint import compute_output

    x = compute_output(Z, Y)
    return MrioSnapshot(year, Z, Y, x, ext_emission, ext_value, schema,
                        allow_negative_final_demand=allow_negative_final_demand)


def parse_mrio(workspace, year: int, format: str = "canonical_csv", *,
               emission_accounts=None, value_accounts=None, emission_scale=None,
               allow_negative_final_demand=None) -> MrioSnapshot:
    """Load one year of tables from ``workspace``.

    Output ``x`` is read from ``x_<year>.csv`` when present (canonical layout)
    and otherwise computed from Z and Y. The balance identity is not checked
    here; see :func:`validate_balance`.

    ``emission_accounts`` / ``value_accounts`` name the extension rows summed
    into the emission and value-added vectors; ``emission_scale`` converts the
    emission rows to Mt (ExioBase reports kg).
    """
    workspace = Path(workspace)
    if format not in FORMATS:
        raise ValueError(f"unknown format {format!r}; expected one of {FORMATS}")
    if not workspace.is_dir():
        raise MissingFileError(workspace, "workspace directory")
    if format == "canonical_csv":
        return _parse_canonical(
            workspace, int(year),
            tuple(emission_accounts or CANONICAL_EMISSION_ACCOUNTS),
            tuple(value_accounts or CANONICAL_VALUE_ACCOUNTS),
            1.0 if emission_scale is None else float(emission_scale),
            bool(allow_negative_final_demand),
        )
    return _parse_exiobase(
        workspace, int(year),
        tuple(emission_accounts or EXIOBASE_EMISSION_ACCOUNTS),
        tuple(value_accounts or EXIOBASE_VALUE_ACCOUNTS),
        EXIOBASE_EMISSION_SCALE if emission_scale is None else float(emission_scale),
        True if allow_negative_final_demand is None else bool(allow_negative_final_demand),
    )


def available_years(workspace, format: str = "canonical_csv") -> list[int]:
    return _available_years(Path(workspace), format)


# ---------------------------------------------------------------------------
# Validation and aggregation
# ---------------------------------------------------------------------------


def validate_balance(snapshot: MrioSnapshot, epsilon_rel: float = DEFAULT_BALANCE_EPSILON) -> ValidationReport:
    """Check ``x_i = sum_j Z_ij + sum_s Y_is`` for every sector.

    The gap is measured relative to ``max(1, |x_i|)``; violations come back
    sorted by decreasing gap.
    """
    row_sum = snapshot.Z.sum(axis=1) + snapshot.Y.sum(axis=1)
    gap = np.abs(snapshot.x - row_sum) / np.maximum(1.0, np.abs(snapshot.x))
    bad = np.nonzero(gap > epsilon_rel)[0]
    order = bad[np.lexsort((bad, -gap[bad]))]
    schema = snapshot.schema
    violations = []
    for i in order:
        r, k = schema.unflatten(int(i))
        violations.append(BalanceViolation(
            int(i), schema.regions[r], schema.sectors[k],
            float(snapshot.x[i]), float(row_sum[i]), float(gap[i]),
        ))
    return ValidationReport(snapshot.year, float(epsilon_rel), tuple(violations))


def load_aggregation_map(path) -> AggregationMap:
    """Read a ``native_code,aggregated_code`` CSV.

    Aggregated regions are ordered by first appearance in the file.
    """
    path = Path(path)
    rows = _read_rows(path)
    if not rows or [c.strip() for c in rows[0]] != ["native_code", "aggregated_code"]:
        raise DataError(f"{path}: expected header 'native_code,aggregated_code'")
    mapping: dict[str, str] = {}
    order: list[str] = []
    for i, row in enumerate(rows[1:], start=2):
        if len(row) != 2:
            raise DataError(f"{path}: row {i} has {len(row)} fields, expected 2")
        native, agg = row[0].strip(), row[1].strip()
        if native in mapping:
            raise DataError(f"{path}: native region {native!r} mapped twice (row {i})")
        mapping[native] = agg
        if agg not in order:
            order.append(agg)
    return AggregationMap(mapping, tuple(order))


def exiobase_aggregation_map() -> AggregationMap:
    """The 49 ExioBase regions folded into the 13 study regions."""
    ref = resources.files("mrio_equity") / "data" / "table_a2_exiobase.csv"
    with resources.as_file(ref) as path:
        return load_aggregation_map(path)


def aggregate_flows(flow: RegionFlowMatrix, mapping: AggregationMap) -> RegionFlowMatrix:
    """Sum a flow matrix into the aggregated regions of ``mapping``."""
    missing = [r for r in flow.labels if r not in mapping.mapping]
    if missing:
        raise UnmappedRegionError(missing)
    pos = {code: i for i, code in enumerate(mapping.aggregated_order)}
    target = np.array([pos[mapping[r]] for r in flow.labels], dtype=int)
    k = len(mapping.aggregated_order)
    # one-hot membership P (native x aggregate): P^T F P
    P = np.zeros((len(flow.labels), k))
    P[np.arange(len(flow.labels)), target] = 1.0
    out = P.T @ flow.values @ P
    return RegionFlowMatrix(flow.kind, flow.timeframe, mapping.aggregated_order, out)
