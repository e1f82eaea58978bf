"""Net-flow and carbon-inequality trade networks with centrality measures."""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

from .equity import minmax_scale
from .errors import DataError, LabelMismatchError
from .flows import RegionFlowMatrix, timeframe_label

GRAPH_KINDS = ("emission_net", "value_net", "inequality")
INEQUALITY_RULES = ("strict_mismatch", "score_threshold")

NET_FLOW_DIRECTION = (
    "source hosts the net footprint embodied in final demand of target "
    "(source is the net exporter of the footprint to target)"
)
INEQUALITY_DIRECTION = (
    "source carries the net emission burden of the bilateral trade; "
    "target is the beneficiary"
)


class PageRankConvergenceWarning(RuntimeWarning):
    pass


@dataclass(frozen=True)
class Node:
    id: str
    domestic: float | None = None
    eeei: float | None = None


@dataclass(frozen=True)
class Edge:
    source: str
    target: str
    weight: float
    raw_delta_e: float | None = None
    raw_delta_v: float | None = None


@dataclass(frozen=True)
class TradeGraph:
    """Directed weighted graph between regions for one timeframe."""

    kind: str
    timeframe: object
    nodes: tuple
    edges: tuple = ()
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.kind not in GRAPH_KINDS:
            raise DataError(f"graph kind must be one of {GRAPH_KINDS}, got {self.kind!r}")
        nodes = tuple(self.nodes)
        edges = tuple(self.edges)
        ids = [n.id for n in nodes]
        if len(set(ids)) != len(ids):
            raise DataError("duplicate node ids")
        known = set(ids)
        pairs = set()
        for e in edges:
            if e.source not in known or e.target not in known:
                raise DataError(f"edge {e.source}->{e.target} references an unknown node")
            if e.source == e.target:
                raise DataError(f"self-loop on {e.source}")
            if (e.source, e.target) in pairs:
                raise DataError(f"duplicate edge {e.source}->{e.target}")
            pairs.add((e.source, e.target))
            if self.kind == "inequality":
                if not -1.0 <= e.weight <= 1.0:
                    raise DataError(f"inequality edge weight {e.weight} outside [-1, 1]")
            else:
                if not e.weight > 0:
                    raise DataError(f"net-flow edge weight must be positive, got {e.weight}")
                if (e.target, e.source) in pairs:
                    raise DataError(f"reciprocal edges between {e.source} and {e.target}")
        object.__setattr__(self, "nodes", nodes)
        object.__setattr__(self, "edges", edges)
        object.__setattr__(self, "metadata", dict(self.metadata))

    @property
    def node_ids(self) -> list[str]:
        return [n.id for n in self.nodes]

    def weight_matrix(self, absolute: bool = True) -> np.ndarray:
        """Dense ``W[i, j]`` = weight of edge i->j in node order."""
        pos = {n.id: i for i, n in enumerate(self.nodes)}
        W = np.zeros((len(self.nodes), len(self.nodes)))
        for e in self.edges:
            W[pos[e.source], pos[e.target]] = abs(e.weight) if absolute else e.weight
        return W

    def adjacency(self) -> np.ndarray:
        pos = {n.id: i for i, n in enumerate(self.nodes)}
        M = np.zeros((len(self.nodes), len(self.nodes)), dtype=bool)
        for e in self.edges:
            M[pos[e.source], pos[e.target]] = True
        return M


# ---------------------------------------------------------------------------
# Construction
# ---------------------------------------------------------------------------


def build_net_flow_graph(F: RegionFlowMatrix, min_weight: float = 0.0) -> TradeGraph:
    """Net bilateral flows as a directed graph.

    For every pair the edge points from the region whose footprint exports
    exceed its imports from the other, weighted by the difference. Nodes
    carry domestic (diagonal) flows.
    """
    kind = "emission_net" if F.kind == "emission" else "value_net"
    vals = F.values
    labels = F.labels
    nodes = tuple(Node(r, float(vals[i, i])) for i, r in enumerate(labels))
    edges = []
    for i in range(len(labels)):
        for j in range(i + 1, len(labels)):
            delta = vals[i, j] - vals[j, i]
            if abs(delta) <= min_weight:
                continue
            src, dst = (i, j) if delta > 0 else (j, i)
            w = float(abs(delta))
            raw = {"raw_delta_e": w} if F.kind == "emission" else {"raw_delta_v": w}
            edges.append(Edge(labels[src], labels[dst], w, **raw))
    meta = {
        "kind": kind,
        "timeframe": timeframe_label(F.timeframe),
        "unit": F.unit,
        "min_weight": float(min_weight),
        "direction": NET_FLOW_DIRECTION,
    }
    return TradeGraph(kind, F.timeframe, nodes, tuple(edges), meta)


def _pair_scores(E: np.ndarray, V: np.ndarray):
    """Ordered-pair deltas and their combined inequality score."""
    dE = E - E.T
    dV = V - V.T
    m = E.shape[0]
    off = ~np.eye(m, dtype=bool)
    gE = np.zeros_like(dE)
    gV = np.zeros_like(dV)
    if off.any():
        gE[off] = minmax_scale(dE[off])
        gV[off] = minmax_scale(dV[off])
    return dE, dV, gE - gV, off


def build_inequality_graph(E_flow: RegionFlowMatrix, V_flow: RegionFlowMatrix, eeei_values,
                           rule: str = "strict_mismatch", tau: float = 0.0) -> TradeGraph:
    """Trades where emission burden and economic benefit move apart.

    ``strict_mismatch`` keeps pair r->s when r net-exports emissions to s
    while s gains value added from r. Each kept pair is scored by the
    min-max scaled emission delta minus the scaled value delta, and the
    scores of the kept set are rescaled to [-1, 1]. ``score_threshold``
    rescales the score over every ordered pair and keeps those above ``tau``.
    """
    if E_flow.labels != V_flow.labels:
        raise LabelMismatchError("emission and value flows have different region labels")
    if rule not in INEQUALITY_RULES:
        raise ValueError(f"rule must be one of {INEQUALITY_RULES}, got {rule!r}")
    if rule == "score_threshold" and not -1.0 <= tau <= 1.0:
        raise ValueError(f"tau must lie in [-1, 1], got {tau}")
    labels = E_flow.labels
    eeei_values = np.asarray(eeei_values, dtype=float)
    if eeei_values.shape != (len(labels),):
        raise LabelMismatchError(f"{eeei_values.size} EEEI values for {len(labels)} regions")

    dE, dV, score, off = _pair_scores(E_flow.values, V_flow.values)
    if rule == "strict_mismatch":
        keep = off & (dE > 0) & (dV < 0)
        weights = np.zeros_like(score)
        if keep.any():
            weights[keep] = minmax_scale(score[keep])
    else:
        weights = np.zeros_like(score)
        if off.any():
            weights[off] = minmax_scale(score[off])
        keep = off & (weights > tau)

    nodes = tuple(Node(r, None, float(eeei_values[i])) for i, r in enumerate(labels))
    edges = [
        Edge(labels[i], labels[j], float(weights[i, j]), float(dE[i, j]), float(dV[i, j]))
        for i, j in zip(*np.nonzero(keep))
    ]
    meta = {
        "kind": "inequality",
        "timeframe": timeframe_label(E_flow.timeframe),
        "rule": rule,
        "tau": float(tau) if rule == "score_threshold" else None,
        "direction": INEQUALITY_DIRECTION,
    }
    return TradeGraph("inequality", E_flow.timeframe, nodes, tuple(edges), meta)


# ---------------------------------------------------------------------------
# Measures
# ---------------------------------------------------------------------------


def pagerank(g: TradeGraph, damping: float = 0.85, tol: float = 1e-10, max_iter: int = 200,
             full_output: bool = False):
    """Weighted PageRank by power iteration.

    Transition probabilities follow out-weights (absolute values); mass of
    nodes without out-weight is spread uniformly. Iteration stops when the
    L1 change drops below ``tol``; hitting ``max_iter`` first emits a
    :class:`PageRankConvergenceWarning` and the last iterate is returned.
    With ``full_output`` a ``(scores, info)`` pair is returned.
    """
    if not g.nodes:
        raise DataError("pagerank needs at least one node")
    if not 0.0 < damping < 1.0:
        raise ValueError(f"damping must lie in (0, 1), got {damping}")
    W = g.weight_matrix(absolute=True)
    N = W.shape[0]
    out = W.sum(axis=1)
    dangling = out <= 0
    P = np.zeros_like(W)
    P[~dangling] = W[~dangling] / out[~dangling, None]
    p = np.full(N, 1.0 / N)
    residual = np.inf
    it = 0
    while it < max_iter:
        it += 1
        nxt = (1.0 - damping) / N + damping * (P.T @ p + p[dangling].sum() / N)
        nxt /= nxt.sum()
        residual = float(np.abs(nxt - p).sum())
        p = nxt
        if residual < tol:
            break
    converged = residual < tol
    if not converged:
        warnings.warn(
            f"pagerank did not converge in {max_iter} iterations (L1 residual {residual:.3g})",
            PageRankConvergenceWarning,
            stacklevel=2,
        )
    scores = {n.id: float(p[i]) for i, n in enumerate(g.nodes)}
    if full_output:
        return scores, {"iterations": it, "residual": residual, "converged": converged}
    return scores


def clustering_coefficients(g: TradeGraph):
    """Intensity-weighted clustering on the undirected projection.

    Reciprocal edges are merged by summing absolute weights, and weights are
    divided by the largest one. Each node gets the mean geometric-mean
    intensity of the triangles it closes; nodes with fewer than two
    neighbours get 0 and are left out of the network average.

    Returns ``(per_node, network_average)``.
    """
    if not g.nodes:
        raise DataError("clustering needs at least one node")
    W = g.weight_matrix(absolute=True)
    U = W + W.T
    adj = g.adjacency()
    adj = adj | adj.T
    k = adj.sum(axis=1)
    top = U.max() if U.size else 0.0
    C = np.zeros(len(g.nodes))
    if top > 0:
        R = np.cbrt(U / top)
        tri = np.einsum("ij,jh,hi->i", R, R, R)
        ok = k >= 2
        C[ok] = tri[ok] / (k[ok] * (k[ok] - 1))
        C = np.clip(C, 0.0, 1.0)
    eligible = k >= 2
    average = float(C[eligible].mean()) if eligible.any() else 0.0
    return {n.id: float(C[i]) for i, n in enumerate(g.nodes)}, average


def network_metrics(g: TradeGraph, damping: float = 0.85, tol: float = 1e-10,
                    max_iter: int = 200) -> list[dict]:
    """Metric rows (region, timeframe, kind, pagerank, clustering) plus a network row."""
    pr = pagerank(g, damping, tol, max_iter)
    cc, avg = clustering_coefficients(g)
    tf = timeframe_label(g.timeframe)
    rows = [
        {"region": n.id, "timeframe": tf, "kind": g.kind, "pagerank": pr[n.id], "clustering": cc[n.id]}
        for n in g.nodes
    ]
    rows.append({"region": "__network__", "timeframe": tf, "kind": g.kind,
                 "pagerank": None, "clustering": avg})
    return rows
