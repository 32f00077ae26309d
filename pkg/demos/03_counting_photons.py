"""
Counting photons
================

At 3e4 photons/s the beam holds, on average, one photon per ten
kilometres. This script samples clicks from the case (a) image and looks
at how often the two detectors fire within 20 ns of each other.
"""

# %%
import whichway as ww
from whichway.scenarios import SimulationOptions, aperture_field

geom = ww.ExperimentGeometry()
opts = SimulationOptions(mode="1d")
print("mean spacing at 3e4/s: %.0f m" % ww.mean_photon_separation(3e4))
print("chance of two photons within 0.4 m: %.1e" %
      ww.coherence_overlap_probability(3e4, 0.4))

# %%
wire = ww.propagate_fresnel(aperture_field(geom, opts, ww.PinholeBlock.NONE),
                            geom.grid_distance)
image = ww.image_through_lens(wire, geom)
stream = ww.sample_photon_stream(image, geom.detector_regions(), flux=3e4,
                                 duration=20.0, dark_rate=100.0, seed=1)
print("clicks per detector over 20 s:", stream.counts())

# %%
report = ww.count_coincidences(stream, window=20e-9, duration=20.0)
print("coincidences %d, ratio %.2e, accidental estimate %.2e +- %.1e"
      % (report.n_coincidences, report.ratio, report.analytic_expectation,
         report.sigma))
