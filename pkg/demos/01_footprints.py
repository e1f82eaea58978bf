"""
Footprint flows from a small economy
====================================

Build a random balanced three-region economy, derive the Leontief inverse and
split emissions and value added by where they occur and whose final demand
drives them.
"""

import numpy as np

from mrio_equity import (
    compute_footprints,
    footprint_flows,
    intensity,
    leontief_inverse,
    technical_coefficients,
)
from mrio_equity.synthetic import random_economy

rng = np.random.default_rng(42)
snap = random_economy(rng, ("NORTH", "EAST", "SOUTH"), ("farming", "industry"), year=2020)
print("regions:", snap.schema.regions, "sectors:", snap.schema.sectors)
print("output x:", np.round(snap.x, 2))

# Input coefficients and the total requirements they imply
tech = technical_coefficients(snap.Z, snap.x)
L = leontief_inverse(tech.A)
print("largest Leontief multiplier:", round(float(L.max()), 3))

# Emissions per unit of output, then region-to-region footprints
q = intensity(snap.ext_emission, snap.x)
F = footprint_flows(q, L, snap.Y, snap.schema, "emission", timeframe=2020)
print("\nemission flows (row hosts the emissions, column consumes):")
for label, row in zip(F.labels, F.values):
    print(f"  {label:6s}", " ".join(f"{v:8.3f}" for v in row))

# Every unit of direct emissions ends up in exactly one region's demand
hosted = snap.ext_emission.reshape(3, 2).sum(axis=1)
print("\nproduction totals :", np.round(F.production_totals(), 6))
print("direct emissions  :", np.round(hosted, 6))
print("consumption totals:", np.round(F.consumption_totals(), 6))

# The convenience wrapper factorizes I - A once and reuses it for both kinds
both = compute_footprints(snap)
print("\nvalue added embodied in exports of NORTH:",
      round(float(both["value"].values[0, 1:].sum()), 3))
