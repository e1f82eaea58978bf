"""Command-line entry point.

Exit status: 0 success, 1 validation or data error, 2 numerical failure,
3 usage error.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from . import pipeline
from .errors import ConfigError, DataError, NumericalError

EXIT_OK, EXIT_DATA, EXIT_NUMERIC, EXIT_USAGE = 0, 1, 2, 3
COMMANDS = ("ingest", "footprint", "eeei", "network", "export", "pipeline")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--config", help="TOML run configuration")
    common.add_argument("--workspace", help="directory with the input tables")
    common.add_argument("--out", help="output directory")
    common.add_argument("--years", help="inclusive year range A..B")
    common.add_argument("--period", help="restrict to one period label (e.g. P1)")
    common.add_argument("--kind", choices=("emission", "value", "inequality"),
                        help="network kind (network command)")
    common.add_argument("--orientation", choices=("advantage_high", "literal_eq8"))
    common.add_argument("--format", dest="data_format", choices=("canonical_csv", "exiobase_ixi"))
    common.add_argument("--jobs", type=int, help="years processed concurrently")
    common.add_argument("-v", "--verbose", action="store_true")
    common.add_argument("-q", "--quiet", action="store_true")

    parser = _Parser(
        prog="mrio-equity",
        description="Footprint flows, EEEI and trade networks from EE-MRIO tables.",
        epilog="Any configuration value can be overridden as --section.key VALUE, "
               "e.g. --network.pagerank.damping 0.9",
    )
    sub = parser.add_subparsers(dest="command", metavar="command", parser_class=_Parser)
    helps = {
        "ingest": "parse and validate raw tables, write canonical CSVs",
        "footprint": "emission and value-added flow matrices",
        "eeei": "EEEI time series and distance matrices",
        "network": "GEXF networks and PageRank/clustering tables",
        "export": "JSON mirrors of the tables and the manifest",
        "pipeline": "run every stage",
    }
    for name in COMMANDS:
        sub.add_parser(name, parents=[common], help=helps[name])
    return parser


def _split_overrides(extra):
    """Turn leftover ``--a.b VALUE`` / ``--a.b=VALUE`` tokens into pairs."""
    pairs = []
    it = iter(extra)
    for tok in it:
        if not tok.startswith("--") or "." not in tok:
            raise UsageError(f"unrecognized argument: {tok}")
        key = tok[2:]
        if "=" in key:
            key, value = key.split("=", 1)
        else:
            try:
                value = next(it)
            except StopIteration:
                raise UsageError(f"{tok} needs a value") from None
        pairs.append((key, value))
    return pairs


def _abs(path):
    # command-line paths are relative to the working directory, not the config file
    return None if path is None else str(Path(path).resolve())


def _config(args, extra) -> pipeline.RunConfig:
    overrides = _split_overrides(extra)
    flags = {
        "run.workspace": _abs(args.workspace),
        "run.out": _abs(args.out),
        "run.years": args.years,
        "run.format": args.data_format,
        "run.jobs": None if args.jobs is None else str(args.jobs),
        "eeei.orientation": args.orientation,
    }
    overrides += [(k, v) for k, v in flags.items() if v is not None]
    return pipeline.RunConfig.load(args.config, overrides)


def _setup_logging(args):
    level = logging.DEBUG if args.verbose else logging.WARNING if args.quiet else logging.INFO
    handler = logging.StreamHandler(sys.stderr)
    handler.setFormatter(logging.Formatter("%(levelname)s %(message)s"))
    log = logging.getLogger("mrio_equity")
    log.handlers[:] = [handler]
    log.setLevel(level)
    log.propagate = False


def run(args, extra) -> dict:
    config = _config(args, extra)
    cmd = args.command
    if cmd == "ingest":
        return pipeline.run_ingest(config)
    if cmd == "footprint":
        return pipeline.run_footprint(config, args.period)
    if cmd == "eeei":
        return pipeline.run_eeei(config, args.period)
    if cmd == "network":
        return pipeline.run_network(config, args.kind, args.period)
    if cmd == "export":
        return pipeline.run_export(config)
    return pipeline.run_pipeline(config)


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args, extra = parser.parse_known_args(argv)
        if args.command is None:
            raise UsageError("a command is required")
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"mrio-equity: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    _setup_logging(args)
    try:
        result = run(args, extra)
    except UsageError as exc:
        print(f"mrio-equity: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (ConfigError, DataError, FileNotFoundError) as exc:
        _fail(exc)
        return EXIT_DATA
    except NumericalError as exc:
        _fail(exc)
        return EXIT_NUMERIC
    if not args.quiet:
        summary = {k: v for k, v in result.items() if k in ("stage", "written", "cache_hits")}
        if summary:
            print(json.dumps(summary, indent=2), file=sys.stderr)
    return EXIT_OK


def _fail(exc):
    stage = getattr(exc, "stage", None)
    prefix = f"stage {stage} failed: " if stage else ""
    print(f"mrio-equity: error: {prefix}{exc}", file=sys.stderr)


if __name__ == "__main__":
    sys.exit(main())
