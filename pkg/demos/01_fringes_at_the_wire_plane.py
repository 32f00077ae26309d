"""
Fringes at the wire plane
=========================

Two 40 um pinholes 250 um apart, lit by a 638 nm plane wave, throw an
interference pattern onto a plane 0.55 m away. This script builds that
pattern on a collapsed-y grid (the pinholes become slits) and compares it
with the two-source estimates.
"""

# %%
import numpy as np

import whichway as ww

geom = ww.ExperimentGeometry()
print("fringe period lambda L / d = %.4f mm" % (geom.fringe_period * 1e3))
print("Airy radius 1.22 lambda L / D = %.2f mm" % (geom.airy_radius * 1e3))

# %%
# 4096 samples over 20 mm put about eight samples across each slit.
aperture = ww.make_field_1d(4096, 20e-3, geom.wavelength)
aperture = aperture.replace(np.ones(aperture.amplitudes.shape, complex))
aperture = ww.apply_dual_pinhole(aperture, geom, edge="area")
wire_plane = ww.propagate_fresnel(aperture, geom.grid_distance)
print("wire-plane pitch %.1f um" % (wire_plane.dx * 1e6))

# %%
profile = ww.extract_profile(wire_plane)
period = ww.measure_fringe_period(profile, (-3e-3, 3e-3))
vis = ww.measure_visibility_direct(profile, (-3e-3, 3e-3))
print("measured period %.4f mm, visibility %.5f" % (period * 1e3, vis))

# %%
# The wires go on the innermost dark fringes.
centers = ww.wire_positions(geom, geom.fringe_period)
print("wire centers (mm):", np.round(centers * 1e3, 4))
at = np.interp(centers, profile.coordinates, profile.values) / profile.values.max()
print("relative intensity under each wire center:", np.array2string(at, precision=2))

# %%
# Crude text plot of the central fringes.
sel = np.abs(profile.coordinates) < 4e-3
x, y = profile.coordinates[sel][::12], profile.values[sel][::12] / profile.values.max()
for xi, yi in zip(x, y):
    print("%+6.2f mm |%s" % (xi * 1e3, "#" * int(round(50 * yi))))
