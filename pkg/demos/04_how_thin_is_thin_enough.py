"""
How thin is thin enough
=======================

Scans the wire thickness and prints the fringe visibility a wire of that
size allows, next to the worst-case visibility inferred from the power it
would stop.
"""

# %%
import dataclasses
import warnings

import numpy as np

import whichway as ww
from whichway.metrics import envelope_weighted_blocked_fraction

geom = ww.ExperimentGeometry()
centers = ww.wire_positions(geom, geom.fringe_period)

# %%
warnings.simplefilter("ignore", ww.ClampWarning)
print("%8s %10s %12s %10s" % ("t (um)", "V(wire)", "blocked", "V* >="))
for t in np.linspace(400e-6, 10e-6, 14):
    g = dataclasses.replace(geom, wire_thickness=t)
    frac = envelope_weighted_blocked_fraction(g.fringe_b, t, centers, g.airy_radius)
    _, vstar = ww.worst_case_visibility(g.airy_radius, t, g.wire_count, frac)
    print("%8.0f %10.4f %12.2e %10.4f" % (
        t * 1e6, ww.wire_limited_visibility(g.fringe_b, t), frac, vstar))
