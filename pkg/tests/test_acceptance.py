"""Acceptance criteria on the default 2-D grid (4096 x 4096, 20 mm aperture window).

Each test appends one PASS/FAIL line to the report printed at the end of the
session and then asserts. The module takes about two minutes on one core.
"""
import math
import time

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.special import jn_zeros

from conftest import ACCEPTANCE_LINES
from whichway import (ExperimentGeometry, PinholeBlock, apply_dual_pinhole,
                      apply_thin_lens, apply_wire_grid, count_coincidences,
                      integrate_detector,
                      extract_profile, greenberger_yasin,
                      mean_photon_separation, sample_photon_stream,
                      total_power, visibility, which_way_lower_bound,
                      wire_limited_visibility, wire_positions,
                      worst_case_visibility)
from whichway.field import SampledField
from whichway.metrics import measure_fringe_period
from whichway.photons import detector_click_stream, position_chi_square
from whichway.propagation import (analytic_two_pinhole_intensity,
                                  propagate_angular_spectrum,
                                  propagate_curved, propagate_fresnel)
from whichway.scenarios import (SimulationOptions, aperture_field,
                                full_pipeline, run_scenario)

pytestmark = pytest.mark.slow

GEOM = ExperimentGeometry()
OPTS = SimulationOptions()


def report(ok, label, detail):
    line = f"[{'PASS' if ok else 'FAIL'}] {label}: {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)
    assert ok, line


# fixtures -------------------------------------------------------------------

@pytest.fixture(scope="module")
def pipeline():
    t0 = time.perf_counter()
    summary = full_pipeline(GEOM, OPTS)
    return summary, time.perf_counter() - t0


@pytest.fixture(scope="module")
def chain():
    """Case (a) carried leg by leg, keeping powers and the planes we test."""
    out = {}
    ap = aperture_field(GEOM, OPTS, PinholeBlock.NONE)
    wire = propagate_fresnel(ap, GEOM.grid_distance)
    out["legs"] = [("aperture -> wire plane", total_power(ap), total_power(wire))]
    del ap
    out["wire"] = wire
    at_lens = propagate_curved(wire, GEOM.lens_object_distance - GEOM.grid_distance,
                               GEOM.grid_distance)
    out["legs"].append(("wire plane -> lens", total_power(wire), total_power(at_lens)))
    after = apply_thin_lens(at_lens, GEOM.lens_focal_length, GEOM.lens_aperture_diameter)
    del at_lens
    image = propagate_fresnel(after, GEOM.lens_image_distance)
    out["legs"].append(("lens -> image", total_power(after), total_power(image)))
    del after
    out["image"] = image
    return out


# 1. formula fidelity ----------------------------------------------------------

def test_wire_limited_visibility():
    v = wire_limited_visibility(2.462, 0.127)
    report(abs(v - 0.951) <= 1e-3, "1a wire-limited visibility", f"V = {v:.5f} (target 0.951)")


def test_worst_case_bound():
    ratio, v = worst_case_visibility(10.7, 0.127, 6, 0.01)
    ok = abs(ratio - 4.70) <= 0.01 and abs(v - 0.649) <= 0.005
    report(ok, "1b worst-case bound", f"ratio = {ratio:.4f} (4.70), V = {v:.4f} (0.649)")


def test_which_way_bound():
    k = which_way_lower_bound(98.87, 0.46)
    report(abs(k - 0.9721) <= 1e-3, "1c which-way bound", f"K = {k:.5f} (0.9721)")


def test_gy_sum():
    value, violated = greenberger_yasin(0.64, 0.97)
    ok = abs(value - 1.3505) <= 1e-4 and violated
    report(ok, "1d V^2 + K^2", f"{value:.5f} (1.3505), violated = {violated}")


def test_photon_separation_and_speed():
    t0 = time.perf_counter()
    sep = mean_photon_separation(3e4)
    wire_limited_visibility(2.462, 0.127)
    worst_case_visibility(10.7, 0.127, 6, 0.01)
    which_way_lower_bound(98.87, 0.46)
    greenberger_yasin(0.64, 0.97)
    ms = 1e3 * (time.perf_counter() - t0)
    ok = abs(sep - 1.0e4) <= 1e-3 * 1.0e4 and ms < 50
    report(ok, "1e photon separation", f"{sep:.2f} m (1.0e4 +- 0.1%), formulas took {ms:.2f} ms")


# 2. diffraction fidelity -------------------------------------------------------

def test_airy_first_zero():
    # pinhole A alone, as masked by the pipeline
    ap = aperture_field(GEOM, OPTS, PinholeBlock.BLOCK_B)
    far = propagate_fresnel(ap, GEOM.grid_distance)
    del ap
    cx = GEOM.pinhole_centers["A"][0]
    # azimuthal mean in rings one pitch wide out to 15 mm
    rr = np.hypot(far.x[None, :] - cx, far.y[:, None])
    bins = (rr / far.dx).astype(np.int64)
    keep = bins < int(15e-3 / far.dx)
    sums = np.bincount(bins[keep], weights=far.intensity[keep])
    counts = np.bincount(bins[keep])
    prof = sums / np.maximum(counts, 1)
    radii = np.arange(len(prof)) * far.dx + far.dx / 2
    start = int(5e-3 / far.dx)
    k = start + int(np.argmin(prof[start:]))
    y0, y1, y2 = prof[k - 1:k + 2]
    zero = radii[k] + 0.5 * (y0 - y2) / (y0 - 2 * y1 + y2) * far.dx
    expect = jn_zeros(1, 1)[0] / np.pi * GEOM.wavelength * GEOM.grid_distance / GEOM.pinhole_diameter
    ok = abs(zero / 10.7e-3 - 1) <= 0.02
    report(ok, "2a Airy first zero", f"{zero * 1e3:.3f} mm (10.7 mm +- 2%; "
           f"1.2197 lambda L / D = {expect * 1e3:.3f} mm)")


def test_fringe_period(chain):
    p = measure_fringe_period(extract_profile(chain["wire"]), (-3e-3, 3e-3))
    expect = GEOM.wavelength * GEOM.grid_distance / GEOM.pinhole_separation
    report(abs(p / expect - 1) <= 0.01, "2b fringe period",
           f"{p * 1e3:.4f} mm (lambda L / d = {expect * 1e3:.4f} mm +- 1%)")


def test_pattern_matches_analytic(chain):
    wire = chain["wire"]
    R = GEOM.airy_radius
    cols = np.nonzero(np.abs(wire.x) < R)[0]
    rows = np.nonzero(np.abs(wire.y) < R)[0]
    x, y = wire.x[cols], wire.y[rows]
    X, Y = np.meshgrid(x, y)
    u = np.hypot(X, Y)
    inside = u < R
    num = wire.intensity[rows[0]:rows[-1] + 1, cols[0]:cols[-1] + 1][inside]
    a = np.pi * GEOM.pinhole_diameter / (GEOM.wavelength * GEOM.grid_distance)
    shape = analytic_two_pinhole_intensity(u[inside], X[inside], 1.0, a, GEOM.fringe_b)
    i0 = float(np.dot(num, shape) / np.dot(shape, shape))      # least squares
    rms = math.sqrt(np.mean((num - i0 * shape) ** 2)) / num.max()
    report(rms < 0.02, "2c pattern vs analytic", f"RMS error {100 * rms:.3f}% of peak (< 2%)")


def test_energy_conservation(chain):
    drifts = [(name, abs(b / a - 1)) for name, a, b in chain["legs"]]
    worst = max(d for _, d in drifts)
    detail = ", ".join(f"{n}: {d:.1e}" for n, d in drifts)
    report(worst <= 1e-6, "2d energy conservation", detail + " (<= 1e-6)")


def test_runtime_per_case(pipeline):
    t0 = time.perf_counter()
    run_scenario(GEOM, "b", OPTS)
    one = time.perf_counter() - t0
    _, total = pipeline
    per = total / 6
    report(max(one, per) <= 60, "2e runtime per case",
           f"case b alone {one:.1f} s, full pipeline {total:.1f} s for 6 runs (<= 60 s each)")


# 3. scenario reproduction --------------------------------------------------------

def test_case_b_loss(pipeline):
    red = pipeline[0].reductions
    losses = list(red.b_vs_a.values())
    oracle = red.b_loss_oracle
    ok = all(0.05 <= l <= 1.0 and oracle / 3 <= l <= 3 * oracle for l in losses)
    report(ok, "3a case b loss", f"detector 1 {losses[0]:.3f}%, detector 2 {losses[1]:.3f}% "
           f"(in [0.05, 1.0]%; oracle {oracle:.4f}%, factor {max(losses) / oracle:.2f} <= 3)")


def test_single_pinhole_loss_and_peak(pipeline):
    red = pipeline[0].reductions
    losses = (red.c_vs_B_only, red.d_vs_A_only)
    peaks = (red.peak_c_vs_B_only, red.peak_d_vs_A_only)
    ok = all(5 <= l <= 20 for l in losses) and all(80 <= p <= 90 for p in peaks)
    report(ok, "3b cases c/d", f"loss {losses[0]:.2f}% / {losses[1]:.2f}% (in [5, 20]%), "
           f"peak {peaks[0]:.1f}% / {peaks[1]:.1f}% (in [80, 90]%)")


def test_cross_fraction(pipeline):
    red = pipeline[0].reductions
    fr = (red.cross_c_detector1, red.cross_d_detector2)
    ok = all(0.05 <= f <= 2 for f in fr)
    report(ok, "3c cross-detector fraction", f"{fr[0]:.3f}% / {fr[1]:.3f}% (in [0.05, 2]%)")


def test_direct_visibility(pipeline):
    v = pipeline[0].metrics.V_direct
    report(v is not None and v >= 0.95, "3d measured visibility", f"V = {v:.4f} (>= 0.95)")


def test_simulated_metrics_violate_gy(pipeline):
    m = pipeline[0].metrics
    report(m.gy_violated, "3e simulated V*^2 + K^2",
           f"{m.gy_value:.4f} with V* = {m.V_star_lower_bound:.4f}, K = {min(m.K_A, m.K_B):.4f}")


def test_case_a_symmetry_and_grid_transmission(pipeline):
    s = pipeline[0].scenarios
    a, b = s["a"], s["b"]
    asym = abs(a.detector1_count / a.detector2_count - 1)
    ratio = b.power_at_image / a.power_at_image
    ok = asym <= 0.02 and ratio >= 0.99
    report(ok, "3f case a balance / case b power", f"detector asymmetry {asym:.1e} (<= 2%), "
           f"case b image power {100 * ratio:.3f}% of case a (>= 99%)")


def test_imaging_fidelity(pipeline):
    s = pipeline[0].scenarios
    leaks = []
    for case, wrong in (("A_only", "detector2_count"), ("B_only", "detector1_count")):
        r = s[case]
        leaks.append(getattr(r, wrong) / (r.detector1_count + r.detector2_count))
    report(max(leaks) < 1e-4, "3g imaging fidelity",
           f"wrong-detector share {leaks[0]:.2e} / {leaks[1]:.2e} (< 1e-4)")


def test_image_spots(chain):
    image = chain["image"]
    d1, d2 = GEOM.detector_regions()
    share = integrate_detector(image, d2) / total_power(image)
    # intensity centroid over each detector disk (the spots ring at their edges)
    X, Y = np.meshgrid(image.x, image.y, sparse=True)
    cents = []
    for reg in (d1, d2):
        inside = (X - reg.center[0]) ** 2 + (Y - reg.center[1]) ** 2 < reg.radius ** 2
        w = np.where(inside, image.intensity, 0.0)
        cents.append(float((w * X).sum() / w.sum()))
    sep = cents[0] - cents[1]
    expect = GEOM.magnification * GEOM.pinhole_separation
    ok = abs(share - 0.5) <= 0.01 and abs(sep - expect) <= 2 * image.dx
    report(ok, "3h image spots", f"separation {sep * 1e3:.4f} mm (M d = {expect * 1e3:.3f} mm, "
           f"pitch {image.dx * 1e6:.1f} um), detector 2 holds {100 * share:.2f}% of image power")


def test_sum_rule(pipeline):
    rows = pipeline[0].reductions.sum_rule
    rel = max(abs(r["discrepancy"] / r["complex_cross_term"] - 1) for r in rows.values())
    report(rel <= 0.05, "3i sum rule", f"b - (c + d) matches the cross term to {rel:.1e} (<= 5%)")


# 4. property suites ----------------------------------------------------------------

def run_property(label, check):
    try:
        check()
    except Exception as exc:
        report(False, label, f"{type(exc).__name__}: {exc}")
    report(True, label, "all generated examples hold")


def test_mask_properties():
    @settings(max_examples=25, deadline=None)
    @given(st.integers(0, 2 ** 31), st.sampled_from(list(PinholeBlock)))
    def check(seed, block):
        rng = np.random.default_rng(seed)
        n = 256
        a = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
        f = SampledField(a, 1e-3 / n, 1e-3 / n, GEOM.wavelength)
        once = apply_dual_pinhole(f, GEOM, block)
        assert np.array_equal(apply_dual_pinhole(once, GEOM, block).amplitudes, once.amplitudes)
        assert total_power(once) <= total_power(f)
        g = SampledField(a, 2e-5 / 2, 1e-5, GEOM.wavelength)
        c = wire_positions(GEOM, 0.4e-3)
        w = apply_wire_grid(g, GEOM, c)
        assert np.array_equal(apply_wire_grid(w, GEOM, c).amplitudes, w.amplitudes)
        assert total_power(w) <= total_power(g)

    run_property("4a mask idempotence and power monotonicity", check)


def test_linearity():
    @settings(max_examples=25, deadline=None)
    @given(st.integers(0, 2 ** 31), st.complex_numbers(max_magnitude=10),
           st.complex_numbers(max_magnitude=10))
    def check(seed, alpha, beta):
        rng = np.random.default_rng(seed)
        u, v = (SampledField(rng.normal(size=(64, 64)) + 1j * rng.normal(size=(64, 64)),
                             2e-5, 2e-5, GEOM.wavelength) for _ in range(2))
        combo = u.replace(alpha * u.amplitudes + beta * v.amplitudes)
        for prop in (lambda g: propagate_angular_spectrum(g, 1e-3),
                     lambda g: propagate_fresnel(g, 0.2),
                     lambda g: propagate_curved(g, 1e-3, 0.5)):
            lhs = prop(combo).amplitudes
            rhs = alpha * prop(u).amplitudes + beta * prop(v).amplitudes
            assert np.max(np.abs(lhs - rhs)) <= 1e-12 * (1 + np.abs(lhs).max())

    run_property("4b propagation linearity (1e-12)", check)


def test_reciprocity():
    @settings(max_examples=25, deadline=None)
    @given(st.integers(0, 2 ** 31), st.floats(1e-4, 5e-3))
    def check(seed, z):
        rng = np.random.default_rng(seed)
        f = SampledField(rng.normal(size=(64, 64)) + 1j * rng.normal(size=(64, 64)),
                         2e-5, 2e-5, GEOM.wavelength)
        back = propagate_angular_spectrum(propagate_angular_spectrum(f, z), -z)
        assert np.max(np.abs(back.amplitudes - f.amplitudes)) <= 1e-6 * np.abs(f.amplitudes).max()

    run_property("4c reciprocity (1e-6)", check)


def test_visibility_scale_invariance():
    @given(st.floats(1e-6, 1e6), st.floats(0, 1), st.floats(1e-6, 1e6))
    def check(imax, frac, c):
        assert abs(visibility(c * imax, c * frac * imax) - visibility(imax, frac * imax)) <= 1e-12

    run_property("4d visibility scale invariance", check)


def test_gy_boundary():
    @given(st.floats(0, 1))
    def check(v):
        assert abs(greenberger_yasin(v, math.sqrt(1 - v * v))[0] - 1) <= 1e-12

    run_property("4e V^2 + (1 - V^2) = 1", check)


def test_position_sampling_chi_square(chain):
    image = chain["image"]
    stream = sample_photon_stream(image, GEOM.detector_regions(), 1e6, 1.0,
                                  dark_rate=0.0, seed=2024)
    stat, p = position_chi_square(stream, image, bins=(8, 4))
    report(p > 1e-3 and len(stream) >= 0.99e6, "4f position sampling chi-square",
           f"{len(stream)} photons, 32 cells, chi2 = {stat:.1f}, p = {p:.3f} (> 0.001)")


def test_coincidence_vs_analytic():
    n_c = n_max = 0
    expect, within = [], 0
    for seed in range(20):
        s = detector_click_stream(1.5e4, 1.5e4, 100.0, seed=seed)
        r = count_coincidences(s, 20e-9, duration=100.0)
        n_c += r.n_coincidences
        n_max += max(r.n_events_1, r.n_events_2)
        expect.append(r.analytic_expectation)
        within += abs(r.ratio - r.analytic_expectation) <= 3 * r.sigma
    p = float(np.mean(expect))
    ratio = n_c / n_max
    sigma = math.sqrt(p * (1 - p) / n_max)
    report(abs(ratio - p) <= 3 * sigma, "4g coincidence ratio over 20 seeds",
           f"pooled {ratio:.4e} vs 1 - exp(-2 lambda tau) = {p:.4e}, "
           f"|diff| = {abs(ratio - p) / sigma:.2f} sigma (<= 3); {within}/20 seeds within 3 sigma")


def test_photon_determinism(chain, tmp_path):
    image = chain["image"]
    paths = []
    for k in range(2):
        s = sample_photon_stream(image, GEOM.detector_regions(), 3e4, 1.0, seed=99)
        paths.append(s.to_csv(tmp_path / f"events{k}.csv"))
    same = paths[0].read_bytes() == paths[1].read_bytes()
    report(same, "4h photon determinism", f"two seeded streams byte-identical = {same}")
