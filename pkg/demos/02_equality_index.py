"""
Net trade balances and the equality index
=========================================

Turn emission and value-added flows into net balances per region, score each
region on the equality index and place it in a trade-role quadrant.
"""

import numpy as np

from mrio_equity import (
    QUADRANTS,
    compute_footprints,
    distance_matrix,
    eeei,
    eeei_records,
    net_flows,
)
from mrio_equity.synthetic import fixture_snapshots

snap = fixture_snapshots()[0]
flows = compute_footprints(snap)
E, V = flows["emission"], flows["value"]

e_net = net_flows(E)
v_net = net_flows(V)
print("net emission exports:", {k: round(float(v), 3) for k, v in zip(E.labels, e_net)})
print("net value exports   :", {k: round(float(v), 3) for k, v in zip(V.labels, v_net)})

# Higher scores mark regions that gain value while exporting little burden
for rec in eeei_records(E, V):
    print(f"{rec.region}: eeei {rec.eeei:+.3f}  {rec.quadrant} ({QUADRANTS[rec.quadrant]})")

# The literal orientation flips every sign
print("literal orientation:", np.round(eeei(e_net, v_net, "literal_eq8"), 3))

# Gaps between regions are absolute differences of their scores
scores = eeei(e_net, v_net)
print("distance matrix:\n", np.round(distance_matrix(scores), 3))

# A region pinned at the top of the scale sits 0.72 away from one scoring 0.28
print("gap between 1.0 and 0.28:", distance_matrix([1.0, 0.28])[0, 1])
