"""
Trade networks, centrality and GEXF export
==========================================

Build the net emission network and the carbon-inequality network for one
year, rank regions with PageRank, measure clustering and save both graphs for
Gephi.
"""

import tempfile
from pathlib import Path

from mrio_equity import (
    build_inequality_graph,
    build_net_flow_graph,
    clustering_coefficients,
    compute_footprints,
    eeei_records,
    pagerank,
    read_gexf,
    write_gexf,
)
from mrio_equity.synthetic import fixture_snapshots

flows = compute_footprints(fixture_snapshots()[-1])
E, V = flows["emission"], flows["value"]

emission_net = build_net_flow_graph(E)
print("net emission edges (host -> consumer):")
for e in emission_net.edges:
    print(f"  {e.source} -> {e.target}: {e.weight:.3f}")

scores = [r.eeei for r in eeei_records(E, V)]
inequality = build_inequality_graph(E, V, scores)
print("inequality edges point at the region that benefits:")
for e in inequality.edges:
    print(f"  {e.source} -> {e.target}  delta_e {e.raw_delta_e:+.3f}  delta_v {e.raw_delta_v:+.3f}")

pr, info = pagerank(emission_net, full_output=True)
print("pagerank:", {k: round(v, 4) for k, v in pr.items()}, f"after {info['iterations']} iterations")
per_node, average = clustering_coefficients(emission_net)
print("clustering:", {k: round(v, 4) for k, v in per_node.items()}, "average", round(average, 4))

with tempfile.TemporaryDirectory() as tmp:
    path = write_gexf(emission_net, Path(tmp) / "emission_net.gexf")
    back = read_gexf(path)
    print(f"wrote {path.name}: {len(back.nodes)} nodes, {len(back.edges)} edges, "
          f"kind {back.kind}, timeframe {back.timeframe}")
