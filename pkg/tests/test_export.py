import json
import math
from pathlib import Path

import numpy as np
import pytest
import xmlschema
from hypothesis import given, settings
from hypothesis import strategies as st

from mrio_equity import (
    Edge,
    GexfFormatError,
    Node,
    Period,
    RegionFlowMatrix,
    TradeGraph,
    build_inequality_graph,
    build_net_flow_graph,
    eeei_records,
    read_gexf,
    write_gexf,
    write_results,
)
from mrio_equity.export import format_number, gexf_bytes, read_flow_csv, read_table_csv

SCHEMA = xmlschema.XMLSchema(Path(__file__).parent / "data" / "gexf_1_3.xsd")


def random_trade_graph(r, n=None):
    n = n if n is not None else int(r.integers(1, 14))
    labels = tuple(f"R{i:02d}" for i in r.permutation(n))
    if r.uniform() < 0.5:
        kind = "emission" if r.uniform() < 0.5 else "value"
        F = RegionFlowMatrix(kind, int(r.integers(1995, 2023)), labels, r.lognormal(0, 3, (n, n)))
        return build_net_flow_graph(F)
    E = RegionFlowMatrix("emission", Period("P2", 2002, 2008), labels, r.lognormal(0, 3, (n, n)))
    V = RegionFlowMatrix("value", Period("P2", 2002, 2008), labels, r.lognormal(0, 3, (n, n)))
    rule = "strict_mismatch" if r.uniform() < 0.5 else "score_threshold"
    return build_inequality_graph(E, V, r.uniform(-1, 1, n), rule, float(r.uniform(-1, 1)))


def assert_same_graph(a, b, tol=1e-12):
    assert a.kind == b.kind
    assert a.timeframe == b.timeframe
    assert sorted(n.id for n in a.nodes) == sorted(n.id for n in b.nodes)
    na, nb = {n.id: n for n in a.nodes}, {n.id: n for n in b.nodes}
    for k in na:
        for attr in ("domestic", "eeei"):
            x, y = getattr(na[k], attr), getattr(nb[k], attr)
            assert (x is None) == (y is None)
            if x is not None:
                assert abs(x - y) <= tol
    ea = {(e.source, e.target): e for e in a.edges}
    eb = {(e.source, e.target): e for e in b.edges}
    assert set(ea) == set(eb)
    for k in ea:
        assert abs(ea[k].weight - eb[k].weight) <= tol
        for attr in ("raw_delta_e", "raw_delta_v"):
            x, y = getattr(ea[k], attr), getattr(eb[k], attr)
            assert (x is None) == (y is None)
            if x is not None:
                assert x == y


def triangle():
    nodes = (Node("a", 1.0), Node("b", 2.0), Node("c", 3.0))
    return TradeGraph("emission_net", 2010, nodes,
                      (Edge("a", "b", 1.5, 1.5), Edge("b", "c", 0.25, 0.25), Edge("a", "c", 7.0, 7.0)))


class TestNumbers:
    @settings(max_examples=500, deadline=None)
    @given(st.floats(allow_nan=False, allow_infinity=False))
    def test_round_trip(self, x):
        assert float(format_number(x)) == x

    def test_negative_zero(self):
        assert format_number(-0.0) == "0.0"

    def test_non_finite(self):
        with pytest.raises(ValueError):
            format_number(math.nan)

    def test_precision(self):
        x = 1.0 / 3.0
        assert len(format_number(x).replace("0.", "", 1)) >= 12


class TestGexf:
    def test_nodes_only(self, tmp_path):
        g = TradeGraph("value_net", 2000, (Node("x", 1.0), Node("y", 2.0)))
        p = write_gexf(g, tmp_path / "g.gexf")
        SCHEMA.validate(str(p))
        back = read_gexf(p)
        assert back.edges == () and len(back.nodes) == 2

    def test_single_edge(self, tmp_path):
        g = TradeGraph("emission_net", 2000, (Node("x", 1.0), Node("y", 2.0)), (Edge("y", "x", 4.0),))
        p = write_gexf(g, tmp_path / "g.gexf")
        text = p.read_text()
        assert text.count("<edge ") == 1
        assert 'source="y" target="x"' in text

    def test_triangle_round_trip(self, tmp_path):
        g = triangle()
        assert_same_graph(read_gexf(write_gexf(g, tmp_path / "t.gexf")), g, tol=0)

    def test_sorted_output(self, tmp_path):
        g = TradeGraph("emission_net", 1, (Node("z"), Node("a"), Node("m")),
                       (Edge("z", "a", 1.0), Edge("a", "m", 2.0), Edge("m", "z", 3.0)))
        text = gexf_bytes(g).decode()
        assert text.index('id="a"') < text.index('id="m"') < text.index('id="z"')
        assert (text.index('source="a"') < text.index('source="m"') < text.index('source="z"'))

    def test_random_round_trips_validate(self, tmp_path, rng):
        for i in range(100):
            g = random_trade_graph(rng)
            p = write_gexf(g, tmp_path / f"g{i}.gexf")
            SCHEMA.validate(str(p))
            assert_same_graph(read_gexf(p), g)

    def test_metadata_round_trip(self, tmp_path, rng):
        g = random_trade_graph(rng, 5)
        back = read_gexf(write_gexf(g, tmp_path / "g.gexf"))
        for k, v in g.metadata.items():
            if k != "timeframe":
                assert back.metadata[k] == v

    def test_deterministic_bytes(self, rng):
        g = random_trade_graph(rng, 13)
        shuffled = TradeGraph(g.kind, g.timeframe, tuple(reversed(g.nodes)), tuple(reversed(g.edges)),
                              g.metadata)
        assert gexf_bytes(g) == gexf_bytes(shuffled)

    def test_dangling_edge(self, tmp_path):
        p = tmp_path / "bad.gexf"
        p.write_text(
            '<?xml version="1.0"?><gexf xmlns="http://gexf.net/1.3" version="1.3"><graph>'
            '<nodes><node id="a"/></nodes><edges><edge id="0" source="a" target="b" weight="1"/></edges>'
            '</graph></gexf>')
        with pytest.raises(GexfFormatError, match="'b'"):
            read_gexf(p)

    def test_minimal_single_node(self, tmp_path):
        p = tmp_path / "one.gexf"
        p.write_text('<gexf xmlns="http://gexf.net/1.3" version="1.3"><graph>'
                     '<nodes><node id="solo" label="solo"/></nodes></graph></gexf>')
        g = read_gexf(p)
        assert g.node_ids == ["solo"] and g.edges == ()

    def test_unknown_attribute_warns(self, tmp_path):
        p = tmp_path / "extra.gexf"
        p.write_text(
            '<gexf xmlns="http://gexf.net/1.3" version="1.3"><graph>'
            '<attributes class="node"><attribute id="0" title="colour" type="string"/>'
            '<attribute id="1" title="domestic" type="double"/></attributes>'
            '<nodes><node id="a"><attvalues><attvalue for="0" value="red"/>'
            '<attvalue for="1" value="2.5"/></attvalues></node></nodes></graph></gexf>')
        with pytest.warns(UserWarning, match="unknown node attribute"):
            g = read_gexf(p)
        assert g.nodes[0].domestic == 2.5

    def test_malformed(self, tmp_path):
        p = tmp_path / "broken.gexf"
        p.write_text("<gexf><graph>")
        with pytest.raises(GexfFormatError, match="malformed"):
            read_gexf(p)

    def test_missing_file(self, tmp_path):
        with pytest.raises(FileNotFoundError):
            read_gexf(tmp_path / "nope.gexf")

    def test_unwritable(self, tmp_path):
        with pytest.raises(OSError):
            write_gexf(triangle(), tmp_path / "no" / "such" / "dir.gexf")


def records(rng, m=4):
    labels = tuple(f"R{i}" for i in range(m))
    E = RegionFlowMatrix("emission", 2001, labels, rng.uniform(0, 100, (m, m)))
    V = RegionFlowMatrix("value", 2001, labels, rng.uniform(0, 1e4, (m, m)))
    return eeei_records(E, V)


class TestResults:
    def test_single_record(self, tmp_path, rng):
        p = write_results(records(rng)[:1], tmp_path / "r.csv")
        lines = p.read_text().splitlines()
        assert len(lines) == 2
        assert lines[0] == "region,year_or_period,e_net_Mt,v_net_MEUR,scaled_e,scaled_v,eeei,quadrant"
        assert len(lines[1].split(",")) == 8

    def test_csv_json_equivalence(self, tmp_path, rng):
        recs = records(rng, 6)
        rows = read_table_csv(write_results(recs, tmp_path / "r.csv"))
        data = json.loads(write_results(recs, tmp_path / "r.json", "json").read_text())
        assert len(rows) == len(data) == 6
        for row, obj in zip(rows, data):
            assert list(row) == list(obj)
            for k in row:
                if isinstance(obj[k], float):
                    assert float(row[k]) == obj[k]
                else:
                    assert row[k] == str(obj[k])

    def test_flow_matrix_parse_back(self, tmp_path, rng):
        labels = tuple(f"R{i:02d}" for i in range(13))
        F = RegionFlowMatrix("emission", 2005, labels, rng.lognormal(0, 4, (13, 13)))
        back = read_flow_csv(write_results(F, tmp_path / "f.csv"), "emission", 2005)
        assert back.labels == labels
        np.testing.assert_allclose(back.values, F.values, rtol=1e-12, atol=0)
        assert back == F

    def test_metric_rows_with_columns(self, tmp_path):
        rows = [{"region": "A", "timeframe": "2000", "kind": "value_net", "pagerank": 0.5, "clustering": 0.0},
                {"region": "__network__", "timeframe": "2000", "kind": "value_net", "pagerank": None,
                 "clustering": 0.0}]
        text = write_results(rows, tmp_path / "m.csv").read_text()
        assert text.splitlines()[-1] == "__network__,2000,value_net,,0.0"
        assert json.loads(write_results(rows, tmp_path / "m.json", "json").read_text())[1]["pagerank"] is None

    def test_repeatable_bytes(self, tmp_path, rng):
        recs = records(rng)
        a = write_results(recs, tmp_path / "a.csv").read_bytes()
        b = write_results(recs, tmp_path / "b.csv").read_bytes()
        assert a == b

    def test_empty_and_bad_format(self, tmp_path, rng):
        with pytest.raises(ValueError):
            write_results([], tmp_path / "x.csv")
        with pytest.raises(ValueError):
            write_results(records(rng), tmp_path / "x.xml", "xml")
