"""Net trade flows, the ecological economic equality index and trade roles."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import LabelMismatchError
from .flows import RegionFlowMatrix, timeframe_label

ORIENTATIONS = ("advantage_high", "literal_eq8")

# differences of scaled balances whose spread is below this are rounding noise
DEGENERATE_SPREAD = 64 * np.finfo(float).eps

QUADRANTS = {
    "Q1": "exporter-surplus",
    "Q2": "importer-surplus",
    "Q3": "importer-deficit",
    "Q4": "exporter-deficit",
}


@dataclass(frozen=True)
class NetFlowVector:
    labels: tuple
    e_net: np.ndarray
    v_net: np.ndarray
    timeframe: object = None


@dataclass(frozen=True)
class EeeiRecord:
    region: str
    timeframe: object
    e_net: float
    v_net: float
    scaled_e: float
    scaled_v: float
    eeei: float
    quadrant: str

    def as_row(self) -> dict:
        return {
            "region": self.region,
            "year_or_period": timeframe_label(self.timeframe),
            "e_net_Mt": self.e_net,
            "v_net_MEUR": self.v_net,
            "scaled_e": self.scaled_e,
            "scaled_v": self.scaled_v,
            "eeei": self.eeei,
            "quadrant": self.quadrant,
        }


EEEI_COLUMNS = ("region", "year_or_period", "e_net_Mt", "v_net_MEUR",
                "scaled_e", "scaled_v", "eeei", "quadrant")


def net_flows(F) -> np.ndarray:
    """Exports minus imports of every region, domestic flows excluded."""
    values = F.values if isinstance(F, RegionFlowMatrix) else np.asarray(F, dtype=float)
    off = values - np.diag(np.diag(values))
    return off.sum(axis=1) - off.sum(axis=0)


def minmax_scale(v) -> np.ndarray:
    """Map ``v`` linearly onto [-1, 1]; a constant vector maps to zeros."""
    v = np.asarray(v, dtype=float)
    lo, hi = v.min(), v.max()
    if hi == lo:
        return np.zeros_like(v)
    # centred form: negating v negates the result bit for bit
    out = (2.0 * v - (hi + lo)) / (hi - lo)
    # pin the extremes against rounding
    out[v == lo] = -1.0
    out[v == hi] = 1.0
    return np.clip(out, -1.0, 1.0)


def eeei(e_net, v_net, orientation: str = "advantage_high") -> np.ndarray:
    """Ecological economic equality index of each region.

    Under ``advantage_high`` the region combining the largest value-added
    surplus with the smallest net emission burden scores +1. ``literal_eq8``
    scores the scaled emission balance minus the scaled value balance, which
    is the exact negation. When the scaled balances differ by a constant
    (up to rounding) every region scores 0.
    """
    e_net = np.asarray(e_net, dtype=float)
    v_net = np.asarray(v_net, dtype=float)
    if e_net.shape != v_net.shape:
        raise ValueError(f"length mismatch: e_net {e_net.shape}, v_net {v_net.shape}")
    if orientation not in ORIENTATIONS:
        raise ValueError(f"orientation must be one of {ORIENTATIONS}, got {orientation!r}")
    se, sv = minmax_scale(e_net), minmax_scale(v_net)
    d = sv - se if orientation == "advantage_high" else se - sv
    if d.size and np.ptp(d) <= DEGENERATE_SPREAD:
        return np.zeros_like(d)
    return minmax_scale(d)


def eeei_distance(a: float, b: float) -> float:
    return abs(float(a) - float(b))


def distance_matrix(values) -> np.ndarray:
    values = np.asarray(values, dtype=float)
    return np.abs(values[:, None] - values[None, :])


def classify_quadrant(e_net: float, v_net: float) -> str:
    """Trade role from the signs of the net flows; zero counts as positive."""
    exporter = e_net >= 0
    surplus = v_net >= 0
    if exporter:
        return "Q1" if surplus else "Q4"
    return "Q2" if surplus else "Q3"


def eeei_records(E_flow: RegionFlowMatrix, V_flow: RegionFlowMatrix,
                 orientation: str = "advantage_high") -> list[EeeiRecord]:
    """One record per region for the shared timeframe of two flow matrices."""
    if E_flow.labels != V_flow.labels:
        raise LabelMismatchError("emission and value flows have different region labels")
    if E_flow.timeframe != V_flow.timeframe:
        raise LabelMismatchError(
            f"timeframes differ: {E_flow.timeframe_label} vs {V_flow.timeframe_label}"
        )
    e = net_flows(E_flow)
    v = net_flows(V_flow)
    se, sv = minmax_scale(e), minmax_scale(v)
    score = eeei(e, v, orientation)
    return [
        EeeiRecord(r, E_flow.timeframe, float(e[i]), float(v[i]), float(se[i]),
                   float(sv[i]), float(score[i]), classify_quadrant(e[i], v[i]))
        for i, r in enumerate(E_flow.labels)
    ]
