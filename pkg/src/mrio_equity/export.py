"""GEXF, CSV and JSON serialization of graphs and result tables."""

from __future__ import annotations

import csv
import io
import json
import math
import warnings
import xml.etree.ElementTree as ET
from pathlib import Path

import numpy as np

from .equity import EEEI_COLUMNS, EeeiRecord
from .errors import DataError
from .flows import Period, RegionFlowMatrix, timeframe_label
from .network import Edge, Node, TradeGraph

GEXF_NS = "http://gexf.net/1.3"
XSI_NS = "http://www.w3.org/2001/XMLSchema-instance"

NODE_ATTRIBUTES = ("domestic", "eeei")
EDGE_ATTRIBUTES = ("raw_delta_e", "raw_delta_v")
METRIC_COLUMNS = ("region", "timeframe", "kind", "pagerank", "clustering")


class GexfFormatError(DataError):
    pass


def format_number(value) -> str:
    """Shortest text that reads back to the same float."""
    value = float(value)
    if not math.isfinite(value):
        raise ValueError(f"cannot serialize non-finite value {value}")
    if value == 0:
        value = 0.0  # drop the sign of -0.0
    return repr(value)


def _cell(value) -> str:
    if value is None:
        return ""
    if isinstance(value, (bool, np.bool_)):
        return str(bool(value)).lower()
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return format_number(value)
    return str(value)


def _json_value(value):
    if isinstance(value, (np.floating, float)):
        return float(format_number(value))
    if isinstance(value, np.integer):
        return int(value)
    return value


# ---------------------------------------------------------------------------
# GEXF
# ---------------------------------------------------------------------------


def _timeframe_meta(timeframe) -> dict:
    if isinstance(timeframe, Period):
        return {"timeframe": timeframe.label, "period": {
            "start_year": timeframe.start_year, "end_year": timeframe.end_year, "mode": timeframe.mode}}
    return {"timeframe": timeframe_label(timeframe) if timeframe is not None else None}


def gexf_bytes(g: TradeGraph) -> bytes:
    """GEXF 1.3 document for ``g`` with nodes sorted by id and edges by (source, target)."""
    ET.register_namespace("", GEXF_NS)
    ET.register_namespace("xsi", XSI_NS)

    def q(tag):
        return f"{{{GEXF_NS}}}{tag}"

    root = ET.Element(q("gexf"), {
        "version": "1.3",
        f"{{{XSI_NS}}}schemaLocation": f"{GEXF_NS} {GEXF_NS}/gexf.xsd",
    })
    meta_el = ET.SubElement(root, q("meta"))
    ET.SubElement(meta_el, q("creator")).text = "mrio_equity"
    meta = dict(g.metadata)
    meta.update(_timeframe_meta(g.timeframe))
    meta["kind"] = g.kind
    ET.SubElement(meta_el, q("description")).text = json.dumps(meta, sort_keys=True)

    graph = ET.SubElement(root, q("graph"), {"mode": "static", "defaultedgetype": "directed"})
    for cls, names in (("node", NODE_ATTRIBUTES), ("edge", EDGE_ATTRIBUTES)):
        attrs = ET.SubElement(graph, q("attributes"), {"class": cls, "mode": "static"})
        for name in names:
            ET.SubElement(attrs, q("attribute"), {"id": name, "title": name, "type": "double"})

    nodes_el = ET.SubElement(graph, q("nodes"))
    for n in sorted(g.nodes, key=lambda n: n.id):
        node_el = ET.SubElement(nodes_el, q("node"), {"id": n.id, "label": n.id})
        values = [(a, getattr(n, a)) for a in NODE_ATTRIBUTES if getattr(n, a) is not None]
        if values:
            att = ET.SubElement(node_el, q("attvalues"))
            for a, v in values:
                ET.SubElement(att, q("attvalue"), {"for": a, "value": format_number(v)})

    edges_el = ET.SubElement(graph, q("edges"))
    for i, e in enumerate(sorted(g.edges, key=lambda e: (e.source, e.target))):
        edge_el = ET.SubElement(edges_el, q("edge"), {
            "id": str(i), "source": e.source, "target": e.target, "weight": format_number(e.weight),
        })
        values = [(a, getattr(e, a)) for a in EDGE_ATTRIBUTES if getattr(e, a) is not None]
        if values:
            att = ET.SubElement(edge_el, q("attvalues"))
            for a, v in values:
                ET.SubElement(att, q("attvalue"), {"for": a, "value": format_number(v)})

    ET.indent(root, space="  ")
    return ET.tostring(root, encoding="UTF-8", xml_declaration=True) + b"\n"


def write_gexf(g: TradeGraph, path) -> Path:
    path = Path(path)
    path.write_bytes(gexf_bytes(g))
    return path


def _local(tag: str) -> str:
    return tag.rsplit("}", 1)[-1]


def _children(el, name):
    return [c for c in el if _local(c.tag) == name]


def _parse_timeframe(meta: dict):
    period = meta.get("period")
    label = meta.get("timeframe")
    if period:
        return Period(label, int(period["start_year"]), int(period["end_year"]), period.get("mode", "mean"))
    if label is None:
        return None
    try:
        return int(label)
    except (TypeError, ValueError):
        return label


def read_gexf(path) -> TradeGraph:
    """Read a GEXF file written by :func:`write_gexf` back into a graph.

    Unknown attributes produce a warning; edges pointing at undeclared nodes
    raise :class:`GexfFormatError`.
    """
    path = Path(path)
    if not path.is_file():
        raise FileNotFoundError(path)
    try:
        root = ET.parse(path).getroot()
    except ET.ParseError as exc:
        raise GexfFormatError(f"{path}: malformed XML: {exc}") from None
    if _local(root.tag) != "gexf":
        raise GexfFormatError(f"{path}: root element is {_local(root.tag)!r}, expected 'gexf'")

    meta: dict = {}
    for meta_el in _children(root, "meta"):
        for desc in _children(meta_el, "description"):
            try:
                parsed = json.loads(desc.text or "")
            except ValueError:
                continue
            if isinstance(parsed, dict):
                meta = parsed
    graphs = _children(root, "graph")
    if len(graphs) != 1:
        raise GexfFormatError(f"{path}: expected exactly one graph element, found {len(graphs)}")
    graph = graphs[0]

    declared = {"node": {}, "edge": {}}
    for attrs in _children(graph, "attributes"):
        cls = attrs.get("class", "node")
        for a in _children(attrs, "attribute"):
            declared.setdefault(cls, {})[a.get("id")] = a.get("title") or a.get("id")

    def attvalues(el, cls, known):
        out = {}
        for att in _children(el, "attvalues"):
            for av in _children(att, "attvalue"):
                key = av.get("for")
                name = declared.get(cls, {}).get(key, key)
                if name not in known:
                    warnings.warn(f"{path}: ignoring unknown {cls} attribute {key!r}", stacklevel=3)
                    continue
                out[name] = float(av.get("value"))
        return out

    nodes = []
    for nodes_el in _children(graph, "nodes"):
        for n in _children(nodes_el, "node"):
            nid = n.get("id")
            if nid is None:
                raise GexfFormatError(f"{path}: node without id")
            vals = attvalues(n, "node", NODE_ATTRIBUTES)
            nodes.append(Node(nid, vals.get("domestic"), vals.get("eeei")))
    ids = {n.id for n in nodes}

    edges = []
    for edges_el in _children(graph, "edges"):
        for e in _children(edges_el, "edge"):
            src, dst = e.get("source"), e.get("target")
            for end in (src, dst):
                if end not in ids:
                    raise GexfFormatError(f"{path}: edge {e.get('id')} references undeclared node {end!r}")
            vals = attvalues(e, "edge", EDGE_ATTRIBUTES)
            edges.append(Edge(src, dst, float(e.get("weight", "1.0")),
                              vals.get("raw_delta_e"), vals.get("raw_delta_v")))

    kind = meta.get("kind")
    if kind is None:
        kind = "inequality" if any(n.eeei is not None for n in nodes) else "emission_net"
    timeframe = _parse_timeframe(meta)
    extra = {k: v for k, v in meta.items() if k not in ("period",)}
    return TradeGraph(kind, timeframe, tuple(nodes), tuple(edges), extra)


# ---------------------------------------------------------------------------
# Tables
# ---------------------------------------------------------------------------


def matrix_rows(labels, values, corner: str = "region") -> tuple[list, list[dict]]:
    columns = [corner] + list(labels)
    rows = []
    for i, r in enumerate(labels):
        row = {corner: r}
        row.update({s: float(values[i, j]) for j, s in enumerate(labels)})
        rows.append(row)
    return columns, rows


def _tabulate(records, columns=None):
    """Normalize supported record types to (columns, list of row dicts)."""
    if isinstance(records, RegionFlowMatrix):
        return matrix_rows(records.labels, records.values)
    records = list(records)
    if not records:
        raise ValueError("nothing to write")
    first = records[0]
    if isinstance(first, EeeiRecord):
        return list(EEEI_COLUMNS), [r.as_row() for r in records]
    if isinstance(first, dict):
        cols = list(columns) if columns else list(first)
        return cols, records
    raise TypeError(f"cannot tabulate records of type {type(first).__name__}")


def csv_text(columns, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n", quoting=csv.QUOTE_MINIMAL)
    w.writerow(columns)
    for row in rows:
        w.writerow([_cell(row.get(c)) for c in columns])
    return buf.getvalue()


def json_text(columns, rows) -> str:
    data = [{c: _json_value(row.get(c)) for c in columns} for row in rows]
    return json.dumps(data, indent=2, ensure_ascii=False) + "\n"


def results_text(records, format: str = "csv", columns=None) -> str:
    cols, rows = _tabulate(records, columns)
    if format == "csv":
        return csv_text(cols, rows)
    if format == "json":
        return json_text(cols, rows)
    raise ValueError(f"format must be 'csv' or 'json', got {format!r}")


def write_results(records, path, format: str = "csv", columns=None) -> Path:
    """Write EEEI records, a flow matrix or metric rows as CSV or JSON.

    JSON output holds one object per CSV row with the same keys in the same
    order.
    """
    path = Path(path)
    text = results_text(records, format, columns)
    with path.open("w", encoding="utf-8", newline="\n") as f:
        f.write(text)
    return path


def read_matrix_csv(path):
    """Parse a labeled square matrix CSV; returns ``(labels, values)``."""
    path = Path(path)
    if not path.is_file():
        raise FileNotFoundError(path)
    with path.open(newline="", encoding="utf-8") as f:
        rows = [r for r in csv.reader(f) if r]
    if not rows:
        raise DataError(f"{path}: empty file")
    labels = tuple(rows[0][1:])
    body = rows[1:]
    if len(body) != len(labels):
        raise DataError(f"{path}: {len(body)} rows for {len(labels)} columns")
    values = np.empty((len(labels), len(labels)))
    for i, row in enumerate(body):
        if row[0] != labels[i]:
            raise DataError(f"{path}: row {i + 2} label {row[0]!r} does not match column {labels[i]!r}")
        if len(row) != len(labels) + 1:
            raise DataError(f"{path}: row {i + 2} has {len(row) - 1} values, expected {len(labels)}")
        values[i] = [float(c) for c in row[1:]]
    return labels, values


def read_flow_csv(path, kind: str, timeframe) -> RegionFlowMatrix:
    labels, values = read_matrix_csv(path)
    return RegionFlowMatrix(kind, timeframe, labels, values)


def read_table_csv(path) -> list[dict]:
    with Path(path).open(newline="", encoding="utf-8") as f:
        return list(csv.DictReader(f))
