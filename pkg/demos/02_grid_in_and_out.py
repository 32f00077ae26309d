"""
Grid in, grid out
=================

Runs the four measurement conditions plus the one-pinhole baselines and
prints how much each detector loses when the wire grid is inserted.

    python demos/02_grid_in_and_out.py          # collapsed-y, under a second
    python demos/02_grid_in_and_out.py 2d       # full 4096 x 4096, ~40 s
"""

# %%
import sys

import whichway as ww
from whichway.scenarios import SimulationOptions, full_pipeline

mode = sys.argv[1] if len(sys.argv) > 1 else "1d"
geom = ww.ExperimentGeometry()
summary = full_pipeline(geom, SimulationOptions(mode=mode))

# %%
print("%-7s %12s %12s %10s %8s" % ("case", "detector 1", "detector 2",
                                   "grid pass", "peak %"))
for name, r in summary.scenarios.items():
    print("%-7s %12.4e %12.4e %10.5f %8.1f" % (
        name, r.detector1_count, r.detector2_count,
        r.transmitted_fraction, r.peak_intensity_relative))

# %%
red = summary.reductions
print("\nboth pinholes: loss %.3f%% / %.3f%% (envelope oracle %.3f%%)"
      % (red.b_vs_a[1], red.b_vs_a[2], red.b_loss_oracle))
print("one pinhole:   loss %.2f%% / %.2f%%, peak %.1f%% / %.1f%%"
      % (red.c_vs_B_only, red.d_vs_A_only, red.peak_c_vs_B_only, red.peak_d_vs_A_only))
print("cross counts:  %.3f%% / %.3f%%" % (red.cross_c_detector1, red.cross_d_detector2))

# %%
# The grid costs almost nothing while the fringes are intact. Block one
# pinhole and the dark bands vanish, so the wires cast real shadows.
m = summary.metrics
print("\nV* >= %.4f, K >= %.4f, V^2 + K^2 = %.4f" % (
    m.V_star_lower_bound, min(m.K_A, m.K_B), m.gy_value))
