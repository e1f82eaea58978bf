"""End-to-end runs: ingest, footprints, EEEI, networks and exports.

Every stage reads only the files written by its upstream stage below the
output directory::

    out/canonical/   canonical CSV tables (ingest)
    out/flows/       flows_<kind>_<timeframe>.csv (footprint)
    out/eeei/        eeei_series.csv, distance_<timeframe>.csv (eeei)
    out/networks/    <kind>_<timeframe>.gexf, metrics_<kind>_<timeframe>.csv,
                     metrics.csv (network)
    out/json/        JSON mirrors of the tables (export)
    out/reports/     per-stage JSON run reports
    out/manifest.json

Outputs are cached by a hash of their inputs and the relevant configuration
section; a rerun rewrites only files that are missing, modified or stale.
"""

from __future__ import annotations

import copy
import hashlib
import json
import logging
import os
import re
import tempfile
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import export, ingest
from .equity import ORIENTATIONS, distance_matrix, eeei_records
from .errors import ConfigError, DataError
from .flows import DEFAULT_PERIODS, KINDS, Period, RegionFlowMatrix, timeframe_label
from .footprint import RunReport, compute_footprints, period_aggregate
from .network import (
    INEQUALITY_RULES,
    build_inequality_graph,
    build_net_flow_graph,
    network_metrics,
)

log = logging.getLogger("mrio_equity")

CACHE_ENV = "MRIO_EQUITY_CACHE"
GRAPH_KINDS = {"emission": "emission_net", "value": "value_net", "inequality": "inequality"}

DEFAULTS = {
    "run": {
        "workspace": ".",
        "format": "canonical_csv",
        "years": None,
        "out": "out",
        "jobs": 1,
        "aggregation_map": "",
    },
    "ingest": {
        "emission_accounts": [],
        "value_accounts": [],
        "emission_scale": None,
        "balance_epsilon": ingest.DEFAULT_BALANCE_EPSILON,
        "allow_negative_final_demand": None,
    },
    "footprint": {
        "epsilon_x": 1e-9,
        "max_condition": 1e12,
        "period_mode": "mean",
    },
    "periods": None,
    "eeei": {"orientation": "advantage_high"},
    "network": {
        "min_weight": 0.0,
        "inequality_rule": "strict_mismatch",
        "tau": 0.0,
        "pagerank": {"damping": 0.85, "tol": 1e-10, "max_iter": 200},
    },
}


# ---------------------------------------------------------------------------
# Configuration
# ---------------------------------------------------------------------------


def parse_years(value) -> tuple[int, int] | None:
    if value is None or value == "":
        return None
    if isinstance(value, (list, tuple)):
        if len(value) != 2:
            raise ConfigError(f"years must have two entries, got {value!r}")
        a, b = int(value[0]), int(value[1])
    elif isinstance(value, int):
        a = b = value
    else:
        m = re.fullmatch(r"\s*(\d{4})\s*(?:\.\.|-)\s*(\d{4})\s*|\s*(\d{4})\s*", str(value))
        if not m:
            raise ConfigError(f"cannot parse years {value!r}; expected A..B")
        if m.group(3):
            a = b = int(m.group(3))
        else:
            a, b = int(m.group(1)), int(m.group(2))
    if a > b:
        raise ConfigError(f"year range {a}..{b} is empty")
    return a, b


def _merge(base: dict, extra: dict) -> dict:
    out = copy.deepcopy(base)
    for k, v in extra.items():
        if isinstance(v, dict) and isinstance(out.get(k), dict):
            out[k] = _merge(out[k], v)
        else:
            out[k] = v
    return out


def _coerce(text: str, current):
    """Convert a command-line string to the type of the value it overrides."""
    if isinstance(current, bool):
        if text.lower() in ("1", "true", "yes", "on"):
            return True
        if text.lower() in ("0", "false", "no", "off"):
            return False
        raise ConfigError(f"expected a boolean, got {text!r}")
    if isinstance(current, int):
        return int(text)
    if isinstance(current, float):
        return float(text)
    if isinstance(current, list):
        return [t.strip() for t in text.split(",") if t.strip()]
    if current is None:
        for conv in (int, float):
            try:
                return conv(text)
            except ValueError:
                pass
    return text


def apply_override(raw: dict, dotted: str, text: str) -> None:
    keys = dotted.split(".")
    node = raw
    ref = DEFAULTS
    for k in keys[:-1]:
        if not isinstance(node.get(k), dict):
            node[k] = {}
        node = node[k]
        ref = ref.get(k, {}) if isinstance(ref, dict) else {}
    leaf = keys[-1]
    if not isinstance(ref, dict) or leaf not in ref:
        raise ConfigError(f"unknown configuration key {dotted!r}")
    current = node.get(leaf, ref[leaf])
    node[leaf] = _coerce(text, current)


@dataclass
class RunConfig:
    workspace: Path
    format: str
    years: tuple[int, int] | None
    out: Path
    jobs: int
    aggregation_map: str
    emission_accounts: list
    value_accounts: list
    emission_scale: float | None
    balance_epsilon: float
    allow_negative_final_demand: bool | None
    epsilon_x: float
    max_condition: float
    period_mode: str
    periods: list
    periods_explicit: bool
    orientation: str
    min_weight: float
    inequality_rule: str
    tau: float
    damping: float
    tol: float
    max_iter: int
    raw: dict = field(default_factory=dict, repr=False)

    @classmethod
    def from_mapping(cls, raw: dict, base_dir=None) -> RunConfig:
        unknown = sorted(set(raw) - set(DEFAULTS))
        if unknown:
            raise ConfigError(f"unknown configuration section(s): {', '.join(unknown)}")
        cfg = _merge(DEFAULTS, raw)
        base = Path(base_dir) if base_dir is not None else Path.cwd()

        def path(p):
            p = Path(str(p)).expanduser()
            return p if p.is_absolute() else base / p

        run, ing, fp, eq, net = cfg["run"], cfg["ingest"], cfg["footprint"], cfg["eeei"], cfg["network"]
        if run["format"] not in ingest.FORMATS:
            raise ConfigError(f"run.format must be one of {ingest.FORMATS}, got {run['format']!r}")
        if fp["period_mode"] not in ("mean", "sum"):
            raise ConfigError(f"footprint.period_mode must be mean or sum, got {fp['period_mode']!r}")
        if eq["orientation"] not in ORIENTATIONS:
            raise ConfigError(f"eeei.orientation must be one of {ORIENTATIONS}, got {eq['orientation']!r}")
        if net["inequality_rule"] not in INEQUALITY_RULES:
            raise ConfigError(f"network.inequality_rule must be one of {INEQUALITY_RULES}")
        tau = float(net["tau"])
        if not -1.0 <= tau <= 1.0:
            raise ConfigError(f"network.tau must lie in [-1, 1], got {tau}")
        pr = net["pagerank"]
        if not 0.0 < float(pr["damping"]) < 1.0:
            raise ConfigError(f"network.pagerank.damping must lie in (0, 1), got {pr['damping']}")

        explicit = cfg["periods"] is not None
        periods = []
        for p in cfg["periods"] if explicit else [
            {"label": d.label, "start": d.start_year, "end": d.end_year} for d in DEFAULT_PERIODS
        ]:
            try:
                periods.append(Period(str(p["label"]), int(p["start"]), int(p["end"]),
                                      str(p.get("mode", fp["period_mode"]))))
            except (KeyError, TypeError, ValueError) as exc:
                raise ConfigError(f"invalid period entry {p!r}: {exc}") from None
        labels = [p.label for p in periods]
        if len(set(labels)) != len(labels):
            raise ConfigError("period labels must be unique")
        if any(lab.isdigit() or not re.fullmatch(r"[A-Za-z0-9_.+-]+", lab) for lab in labels):
            raise ConfigError("period labels must be file-name safe and not purely numeric")
        agg = str(run["aggregation_map"] or "")
        if agg and agg != "exiobase":
            agg = str(path(agg))
        jobs = int(run["jobs"])
        if jobs < 1:
            raise ConfigError("run.jobs must be at least 1")
        return cls(
            workspace=path(run["workspace"]),
            format=run["format"],
            years=parse_years(run["years"]),
            out=path(run["out"]),
            jobs=jobs,
            aggregation_map=agg,
            emission_accounts=list(ing["emission_accounts"] or []),
            value_accounts=list(ing["value_accounts"] or []),
            emission_scale=None if ing["emission_scale"] is None else float(ing["emission_scale"]),
            balance_epsilon=float(ing["balance_epsilon"]),
            allow_negative_final_demand=ing["allow_negative_final_demand"],
            epsilon_x=float(fp["epsilon_x"]),
            max_condition=float(fp["max_condition"]),
            period_mode=fp["period_mode"],
            periods=periods,
            periods_explicit=explicit,
            orientation=eq["orientation"],
            min_weight=float(net["min_weight"]),
            inequality_rule=net["inequality_rule"],
            tau=tau,
            damping=float(pr["damping"]),
            tol=float(pr["tol"]),
            max_iter=int(pr["max_iter"]),
            raw=cfg,
        )

    @classmethod
    def load(cls, path=None, overrides=()) -> RunConfig:
        """Read a TOML file (optional) and apply ``(dotted_key, text)`` overrides."""
        raw: dict = {}
        base = None
        if path is not None:
            path = Path(path)
            if not path.is_file():
                raise ConfigError(f"config file not found: {path}")
            raw = load_toml(path)
            base = path.parent
        for key, text in overrides:
            apply_override(raw, key, text)
        return cls.from_mapping(raw, base)

    def section(self, name: str):
        return self.raw[name]

    # -- derived locations -------------------------------------------------

    @property
    def cache_dir(self) -> Path:
        env = os.environ.get(CACHE_ENV)
        return Path(env) if env else self.out / ".cache"

    def canonical_dir(self) -> Path:
        d = self.out / "canonical"
        if (d / "index.csv").is_file():
            return d
        if self.format == "canonical_csv" and (self.workspace / "index.csv").is_file():
            return self.workspace
        raise DataError(f"no canonical tables in {d}; run the ingest stage first")

    def selected_years(self, available) -> list[int]:
        available = sorted(available)
        if self.years is None:
            return available
        a, b = self.years
        wanted = list(range(a, b + 1))
        missing = [y for y in wanted if y not in available]
        if missing:
            raise ConfigError(
                f"years {missing} requested but not available (have {available or 'none'})"
            )
        return wanted

    def active_periods(self, years) -> list[Period]:
        """Periods fully covered by ``years``.

        Explicitly configured periods outside the years are an error; the
        built-in defaults are silently restricted.
        """
        years = set(years)
        out = []
        for p in self.periods:
            if set(p.years) <= years:
                out.append(p)
            elif self.periods_explicit:
                raise ConfigError(
                    f"period {p.label} ({p.start_year}-{p.end_year}) is not covered by the selected years"
                )
        return out


def load_toml(path: Path) -> dict:
    try:
        import tomllib
    except ModuleNotFoundError:  # Python < 3.11
        import tomli as tomllib
    try:
        with path.open("rb") as f:
            return tomllib.load(f)
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"{path}: {exc}") from None


# ---------------------------------------------------------------------------
# Caching
# ---------------------------------------------------------------------------


def sha256_file(path) -> str:
    h = hashlib.sha256()
    with Path(path).open("rb") as f:
        for chunk in iter(lambda: f.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()


def content_key(*parts) -> str:
    text = json.dumps(parts, sort_keys=True, default=str)
    return hashlib.sha256(text.encode("utf-8")).hexdigest()


class OutputCache:
    """Records, per output file, the input key it was produced from."""

    def __init__(self, out: Path, cache_dir: Path):
        self.out = out
        self.dir = cache_dir
        self.index_path = cache_dir / "outputs.json"
        self.objects = cache_dir / "objects"
        try:
            self.index = json.loads(self.index_path.read_text(encoding="utf-8"))
        except (OSError, ValueError):
            self.index = {}
        self.hits: list[str] = []
        self.written: list[str] = []

    def _rel(self, path: Path) -> str:
        return path.relative_to(self.out).as_posix()

    def fresh(self, path: Path, key: str) -> bool:
        entry = self.index.get(self._rel(path))
        return bool(entry and entry["key"] == key and path.is_file() and sha256_file(path) == entry["sha256"])

    def produce(self, path: Path, key: str, build) -> Path:
        """Write ``build()`` (text or bytes) to ``path`` unless a fresh copy exists."""
        rel = self._rel(path)
        if self.fresh(path, key):
            self.hits.append(rel)
            log.debug("cache hit: %s", rel)
            return path
        data = build()
        if isinstance(data, str):
            data = data.encode("utf-8")
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_bytes(data)
        self.index[rel] = {"key": key, "sha256": hashlib.sha256(data).hexdigest()}
        self.written.append(rel)
        log.info("wrote %s", rel)
        return path

    def load_object(self, key: str):
        p = self.objects / f"{key}.npz"
        if not p.is_file():
            return None
        with np.load(p, allow_pickle=False) as data:
            return {k: data[k] for k in data.files}

    def store_object(self, key: str, **arrays) -> None:
        self.objects.mkdir(parents=True, exist_ok=True)
        tmp = self.objects / f"{key}.tmp.npz"
        np.savez(tmp, **arrays)
        tmp.replace(self.objects / f"{key}.npz")

    def load_json(self, key: str):
        p = self.objects / f"{key}.json"
        try:
            return json.loads(p.read_text(encoding="utf-8"))
        except (OSError, ValueError):
            return None

    def store_json(self, key: str, payload) -> None:
        self.objects.mkdir(parents=True, exist_ok=True)
        (self.objects / f"{key}.json").write_text(json.dumps(payload, sort_keys=True), encoding="utf-8")

    def save(self) -> None:
        self.dir.mkdir(parents=True, exist_ok=True)
        self.index_path.write_text(json.dumps(self.index, indent=2, sort_keys=True) + "\n", encoding="utf-8")


def _write_report(config: RunConfig, stage: str, payload: dict) -> Path:
    d = config.out / "reports"
    d.mkdir(parents=True, exist_ok=True)
    p = d / f"{stage}.json"
    p.write_text(json.dumps(payload, indent=2, sort_keys=True, default=str) + "\n", encoding="utf-8")
    return p


# ---------------------------------------------------------------------------
# Stages
# ---------------------------------------------------------------------------


def _ingest_options(config: RunConfig) -> dict:
    return {
        "emission_accounts": config.emission_accounts or None,
        "value_accounts": config.value_accounts or None,
        "emission_scale": config.emission_scale,
        "allow_negative_final_demand": config.allow_negative_final_demand,
    }


def _raw_inputs(config: RunConfig, year: int) -> list[Path]:
    if config.format == "canonical_csv":
        ws = config.workspace
        files = [ws / "index.csv"] + [ws / f"{p}_{year}.csv" for p in ("Z", "Y", "ext")]
        x = ws / f"x_{year}.csv"
        return files + ([x] if x.is_file() else [])
    d = ingest.exiobase_year_dir(config.workspace, year)
    return [d / "Z.txt", d / "Y.txt", d / "satellite" / "F.txt"]


def run_ingest(config: RunConfig) -> dict:
    """Parse raw tables, check the balance identity and write canonical CSVs."""
    t0 = time.perf_counter()
    if not config.workspace.is_dir():
        raise DataError(f"workspace directory not found: {config.workspace}")
    years = config.selected_years(ingest.available_years(config.workspace, config.format))
    if not years:
        raise DataError(f"no input years found in {config.workspace}")
    cache = OutputCache(config.out, config.cache_dir)
    dest = config.out / "canonical"
    options = _ingest_options(config)
    entries = []
    index_written = False
    for year in years:
        inputs = _raw_inputs(config, year)
        for p in inputs:
            if not p.is_file():
                raise ingest.MissingFileError(p)
        key = content_key("ingest", config.format, options, config.balance_epsilon,
                          config.epsilon_x, [sha256_file(p) for p in inputs])
        names = ["index.csv"] if not index_written else []
        names += [f"{p}_{year}.csv" for p in ("Z", "Y", "ext", "x")]
        index_written = True
        stored = cache.load_json(key)
        if stored is not None and all(cache.fresh(dest / n, key) for n in names):
            cache.hits += names
            log.info("year %d: canonical tables up to date", year)
            entries.append(stored)
            continue
        snap = ingest.parse_mrio(config.workspace, year, config.format, **options)
        report = ingest.validate_balance(snap, config.balance_epsilon)
        zero = int(np.count_nonzero(snap.x <= config.epsilon_x))
        for v in report.violations:
            log.warning("year %d: balance gap %.3g at %s/%s", year, v.relative_gap, v.region, v.sector)
        texts = _canonical_texts(snap)
        for name in names:
            cache.produce(dest / name, key, lambda t=texts[name]: t)
        entry = {"year": year, "balance": report.to_dict(), "zero_output_sectors": zero}
        cache.store_json(key, entry)
        entries.append(entry)
    cache.save()
    payload = {
        "stage": "ingest",
        "years": years,
        "entries": entries,
        "violations": sum(len(e["balance"]["violations"]) for e in entries),
        "written": cache.written,
        "cache_hits": cache.hits,
        "wall_time": time.perf_counter() - t0,
    }
    _write_report(config, "ingest", payload)
    return payload


def _canonical_texts(snap) -> dict:
    """Canonical CSV contents of one snapshot keyed by file name."""
    with tempfile.TemporaryDirectory() as tmp:
        files = ingest.write_canonical(snap, tmp)
        return {p.name: p.read_text(encoding="utf-8") for p in files}


def _aggregation(config: RunConfig):
    if not config.aggregation_map:
        return None
    if config.aggregation_map == "exiobase":
        return ingest.exiobase_aggregation_map()
    p = Path(config.aggregation_map)
    if not p.is_file():
        raise ingest.MissingFileError(p, "aggregation map")
    return ingest.load_aggregation_map(p)


def flow_path(config: RunConfig, kind: str, timeframe) -> Path:
    return config.out / "flows" / f"flows_{kind}_{timeframe_label(timeframe)}.csv"


def _yearly_native_flows(config, cache, canon, year, report_list):
    files = [canon / "index.csv"] + [canon / f"{p}_{year}.csv" for p in ("Z", "Y", "ext")]
    x = canon / f"x_{year}.csv"
    if x.is_file():
        files.append(x)
    for p in files:
        if not p.is_file():
            raise ingest.MissingFileError(p)
    key = content_key("footprint", config.section("footprint"), [sha256_file(p) for p in files])
    obj = cache.load_object(key)
    if obj is not None:
        labels = tuple(str(s) for s in obj["labels"])
        report_list.append({"year": year, "cached": True})
        log.info("year %d: footprints from cache", year)
        return key, {k: RegionFlowMatrix(k, year, labels, obj[k]) for k in KINDS}
    snap = ingest.parse_mrio(canon, year, "canonical_csv")
    rep = RunReport()
    rep.balance_violations = len(ingest.validate_balance(snap, config.balance_epsilon))
    flows = compute_footprints(snap, config.epsilon_x, config.max_condition, rep)
    cache.store_object(key, labels=np.array(snap.schema.regions), **{k: flows[k].values for k in KINDS})
    report_list.append(rep.to_dict())
    log.info("year %d: footprints computed in %.2fs (condition ~%.3g)", year, rep.wall_time,
             rep.condition_estimate)
    return key, flows


def run_footprint(config: RunConfig, period: str | None = None) -> dict:
    """Emission and value flow matrices per year and per period."""
    t0 = time.perf_counter()
    canon = config.canonical_dir()
    years = config.selected_years(ingest.available_years(canon, "canonical_csv"))
    if not years:
        raise DataError(f"no canonical years in {canon}")
    periods = config.active_periods(years)
    if period is not None:
        periods = [p for p in periods if p.label == period]
        if not periods:
            raise ConfigError(f"period {period} is not available for years {years[0]}..{years[-1]}")
        years = list(periods[0].years)
    cache = OutputCache(config.out, config.cache_dir)
    reports: list = []

    def one(year):
        try:
            return year, _yearly_native_flows(config, cache, canon, year, reports)
        except Exception as exc:  # attach the year for diagnostics
            exc.args = (f"year {year}: {exc}",) + exc.args[1:] if exc.args else (f"year {year}",)
            raise

    if config.jobs > 1 and len(years) > 1:
        with ThreadPoolExecutor(config.jobs) as pool:
            results = dict(pool.map(one, years))
    else:
        results = dict(one(y) for y in years)

    agg_map = _aggregation(config)
    agg_key = content_key(config.aggregation_map,
                          sha256_file(config.aggregation_map) if agg_map is not None
                          and config.aggregation_map != "exiobase" else None)
    yearly = {}
    for year in years:
        key, flows = results[year]
        for kind in KINDS:
            f = flows[kind]
            if agg_map is not None:
                f = ingest.aggregate_flows(f, agg_map)
            yearly[(kind, year)] = f
            if period is None:
                cache.produce(flow_path(config, kind, year), content_key(key, agg_key),
                              lambda f=f: export.results_text(f))
    for p in periods:
        for kind in KINDS:
            combined = period_aggregate([yearly[(kind, y)] for y in p.years], p)
            key = content_key([results[y][0] for y in p.years], agg_key, p.mode, p.start_year, p.end_year)
            cache.produce(flow_path(config, kind, p), key, lambda f=combined: export.results_text(f))
    cache.save()
    payload = {
        "stage": "footprint",
        "years": years,
        "periods": [{"label": p.label, "start": p.start_year, "end": p.end_year, "mode": p.mode}
                    for p in periods],
        "period_mode_note": (
            "period flows are per-year means" if config.period_mode == "mean"
            else "period flows are sums over the period's years"
        ),
        "aggregation_map": config.aggregation_map or None,
        "years_detail": sorted(reports, key=lambda r: r["year"]),
        "written": cache.written,
        "cache_hits": cache.hits,
        "wall_time": time.perf_counter() - t0,
    }
    _write_report(config, "footprint", payload)
    return payload


def _timeframes(config: RunConfig) -> list:
    """Timeframes with flow files present, years first then periods in config order."""
    d = config.out / "flows"
    if not d.is_dir():
        raise DataError(f"no flow files in {d}; run the footprint stage first")
    found = set()
    for p in d.glob("flows_emission_*.csv"):
        found.add(p.stem[len("flows_emission_"):])
    years = sorted(int(t) for t in found if t.isdigit())
    if config.years is not None:
        a, b = config.years
        years = [y for y in years if a <= y <= b]
    periods = [p for p in config.periods if p.label in found]
    if not years and not periods:
        raise DataError(f"no flow files in {d}; run the footprint stage first")
    return years + periods


def _load_flows(config, timeframe):
    out = {}
    for kind in KINDS:
        p = flow_path(config, kind, timeframe)
        if not p.is_file():
            raise ingest.MissingFileError(p)
        out[kind] = export.read_flow_csv(p, kind, timeframe)
    return out


def eeei_path(config: RunConfig) -> Path:
    return config.out / "eeei" / "eeei_series.csv"


def run_eeei(config: RunConfig, period: str | None = None) -> dict:
    """EEEI time series over all timeframes plus per-timeframe distance matrices."""
    t0 = time.perf_counter()
    cache = OutputCache(config.out, config.cache_dir)
    timeframes = _timeframes(config)
    records = []
    input_hashes = []
    for tf in timeframes:
        flows = _load_flows(config, tf)
        input_hashes += [sha256_file(flow_path(config, k, tf)) for k in KINDS]
        recs = eeei_records(flows["emission"], flows["value"], config.orientation)
        records += recs
        if period is None or timeframe_label(tf) == period:
            labels = tuple(r.region for r in recs)
            D = distance_matrix([r.eeei for r in recs])
            cols, rows = export.matrix_rows(labels, D)
            key = content_key("distance", config.orientation,
                              [sha256_file(flow_path(config, k, tf)) for k in KINDS])
            cache.produce(config.out / "eeei" / f"distance_{timeframe_label(tf)}.csv", key,
                          lambda c=cols, r=rows: export.csv_text(c, r))
    key = content_key("eeei", config.orientation, input_hashes)
    cache.produce(eeei_path(config), key, lambda: export.results_text(records))
    cache.save()
    payload = {
        "stage": "eeei",
        "orientation": config.orientation,
        "timeframes": [timeframe_label(t) for t in timeframes],
        "written": cache.written,
        "cache_hits": cache.hits,
        "wall_time": time.perf_counter() - t0,
    }
    _write_report(config, "eeei", payload)
    return payload


def _read_eeei_series(config: RunConfig) -> dict:
    p = eeei_path(config)
    if not p.is_file():
        raise ingest.MissingFileError(p, "EEEI series (run the eeei stage first)")
    series: dict = {}
    for row in export.read_table_csv(p):
        series.setdefault(row["year_or_period"], {})[row["region"]] = float(row["eeei"])
    return series


def graph_path(config: RunConfig, kind: str, timeframe) -> Path:
    return config.out / "networks" / f"{GRAPH_KINDS[kind]}_{timeframe_label(timeframe)}.gexf"


def metrics_path(config: RunConfig, kind: str, timeframe) -> Path:
    return config.out / "networks" / f"metrics_{GRAPH_KINDS[kind]}_{timeframe_label(timeframe)}.csv"


def run_network(config: RunConfig, kind: str | None = None, period: str | None = None) -> dict:
    """GEXF graphs and PageRank / clustering tables per kind and timeframe."""
    t0 = time.perf_counter()
    kinds = [kind] if kind else list(GRAPH_KINDS)
    for k in kinds:
        if k not in GRAPH_KINDS:
            raise ConfigError(f"unknown network kind {k!r}; expected one of {list(GRAPH_KINDS)}")
    cache = OutputCache(config.out, config.cache_dir)
    timeframes = _timeframes(config)
    if period is not None:
        timeframes = [t for t in timeframes if timeframe_label(t) == period]
        if not timeframes:
            raise DataError(f"no flow files for period {period}")
    series = _read_eeei_series(config) if "inequality" in kinds else {}
    net = config.section("network")
    for tf in timeframes:
        flows = _load_flows(config, tf)
        hashes = [sha256_file(flow_path(config, k, tf)) for k in KINDS]
        for k in kinds:
            if k == "inequality":
                label = timeframe_label(tf)
                if label not in series:
                    raise DataError(f"EEEI series has no rows for {label}; rerun the eeei stage")
                values = [series[label][r] for r in flows["emission"].labels]
                g = build_inequality_graph(flows["emission"], flows["value"], values,
                                           config.inequality_rule, config.tau)
                g.metadata["orientation"] = config.orientation
                key = content_key("network", k, net, config.orientation, hashes, values)
            else:
                g = build_net_flow_graph(flows[k], config.min_weight)
                key = content_key("network", k, net, hashes)
            cache.produce(graph_path(config, k, tf), key, lambda g=g: export.gexf_bytes(g))
            cache.produce(metrics_path(config, k, tf), key, lambda g=g: export.csv_text(
                export.METRIC_COLUMNS,
                network_metrics(g, config.damping, config.tol, config.max_iter)))
    _combine_metrics(config, cache)
    cache.save()
    payload = {
        "stage": "network",
        "kinds": kinds,
        "timeframes": [timeframe_label(t) for t in timeframes],
        "inequality_rule": config.inequality_rule,
        "tau": config.tau,
        "written": cache.written,
        "cache_hits": cache.hits,
        "wall_time": time.perf_counter() - t0,
    }
    _write_report(config, "network", payload)
    return payload


def _combine_metrics(config: RunConfig, cache: OutputCache) -> None:
    d = config.out / "networks"
    parts = sorted(p for p in d.glob("metrics_*.csv"))
    if not parts:
        return
    rows = []
    for p in parts:
        rows += export.read_table_csv(p)
    key = content_key("metrics", [sha256_file(p) for p in parts])
    cache.produce(d / "metrics.csv", key, lambda: export.csv_text(export.METRIC_COLUMNS, rows))


def run_export(config: RunConfig) -> dict:
    """JSON mirrors of every CSV table, then the manifest."""
    t0 = time.perf_counter()
    cache = OutputCache(config.out, config.cache_dir)
    sources = []
    for sub in ("flows", "eeei", "networks"):
        d = config.out / sub
        if d.is_dir():
            sources += sorted(d.glob("*.csv"))
    if not sources:
        raise DataError(f"nothing to export in {config.out}; run the earlier stages first")
    for src in sources:
        if src.parent.name == "networks" and src.name != "metrics.csv":
            continue
        rows = export.read_table_csv(src)
        if not rows:
            continue
        cols = list(rows[0])
        dest = config.out / "json" / f"{src.stem}.json"
        cache.produce(dest, content_key("json", sha256_file(src)),
                      lambda c=cols, r=rows: export.json_text(c, [_typed(row) for row in r]))
    cache.save()
    manifest = write_manifest(config)
    payload = {
        "stage": "export",
        "written": cache.written,
        "cache_hits": cache.hits,
        "manifest": str(manifest),
        "wall_time": time.perf_counter() - t0,
    }
    _write_report(config, "export", payload)
    return payload


def _typed(row: dict) -> dict:
    out = {}
    for k, v in row.items():
        if v == "":
            out[k] = None
            continue
        try:
            out[k] = float(v) if k not in ("region", "timeframe", "year_or_period", "kind", "quadrant") else v
        except ValueError:
            out[k] = v
    return out


def write_manifest(config: RunConfig) -> Path:
    """List every data artifact with its SHA-256.

    Run reports carry wall times and are left out so that identical inputs
    give an identical manifest.
    """
    files = []
    for p in sorted(config.out.rglob("*")):
        if not p.is_file():
            continue
        rel = p.relative_to(config.out).as_posix()
        if rel == "manifest.json" or rel.startswith((".cache/", "reports/")):
            continue
        if config.cache_dir.resolve() in p.resolve().parents:
            continue
        files.append({"path": rel, "sha256": sha256_file(p), "bytes": p.stat().st_size})
    manifest = {
        "generator": "mrio_equity",
        "config": {
            "orientation": config.orientation,
            "format": config.format,
            "years": list(config.years) if config.years else None,
            "period_mode": config.period_mode,
            "inequality_rule": config.inequality_rule,
            "tau": config.tau,
            "aggregation_map": Path(config.aggregation_map).name if config.aggregation_map else None,
        },
        "files": files,
    }
    p = config.out / "manifest.json"
    p.write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    return p


def run_pipeline(config: RunConfig) -> dict:
    """All stages in order; failures carry the stage name."""
    results = {}
    stages = (
        ("ingest", lambda: run_ingest(config)),
        ("footprint", lambda: run_footprint(config)),
        ("eeei", lambda: run_eeei(config)),
        ("network", lambda: run_network(config)),
        ("export", lambda: run_export(config)),
    )
    for name, fn in stages:
        log.info("stage %s", name)
        try:
            results[name] = fn()
        except Exception as exc:
            exc.stage = name
            raise
    return results
