"""The four measurement conditions, their comparison and the metrics pipeline.

Conditions (image-plane detector 1 sees pinhole A, detector 2 sees B):

``a``  both pinholes open, no wire grid
``b``  both open, grid on the dark fringes
``c``  pinhole A blocked, grid
``d``  pinhole B blocked, grid

Two auxiliary runs, ``A_only`` and ``B_only`` (one pinhole, no grid), are the
baselines for the single-pinhole reductions.
"""
from __future__ import annotations

import dataclasses
import datetime as _dt
import json
import logging
import platform
import warnings
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np

from . import __version__
from .elements import (ExperimentGeometry, PinholeBlock, apply_dual_pinhole,
                       apply_wire_grid, detector_peak, integrate_detector,
                       wire_positions)
from .errors import ClampWarning
from .field import (IntensityProfile, SampledField, extract_profile,
                    make_field, make_field_1d, total_power)
from .metrics import (DualityMetrics, envelope_weighted_blocked_fraction,
                      greenberger_yasin, measure_visibility_direct,
                      pinhole_a_share, which_way_lower_bound,
                      wire_limited_visibility, worst_case_visibility)
from .photons import (CoincidenceReport, PhotonStream, count_coincidences,
                      sample_photon_stream)
from .propagation import image_through_lens, propagate_fresnel

log = logging.getLogger(__name__)

SUMMARY_KEYS = ("geometry", "scenarios", "reductions", "metrics",
                "coincidence", "provenance")


@dataclass(frozen=True)
class _Config:
    block: PinholeBlock
    grid: bool


SCENARIOS = {
    "a": _Config(PinholeBlock.NONE, False),
    "b": _Config(PinholeBlock.NONE, True),
    "c": _Config(PinholeBlock.BLOCK_A, True),
    "d": _Config(PinholeBlock.BLOCK_B, True),
    "A_only": _Config(PinholeBlock.BLOCK_B, False),
    "B_only": _Config(PinholeBlock.BLOCK_A, False),
}
MAIN_CASES = ("a", "b", "c", "d")


@dataclass(frozen=True)
class SimulationOptions:
    """Numerical settings; none of them change the physics being modeled."""

    grid_n: int = 4096
    window: float = 20e-3
    mode: str = "2d"
    seed: int = 0
    jitter: bool = False
    edge: str = "area"
    photons: bool = False
    flux: float = 3e4
    duration: float = 1.0
    dark_rate: float = 100.0
    dead_time: float = 0.0
    coincidence_window: float = 20e-9
    photon_case: str = "a"

    def __post_init__(self):
        if self.mode not in ("1d", "2d"):
            raise ValueError(f"mode must be '1d' or '2d', got {self.mode!r}")
        if self.photon_case not in SCENARIOS:
            raise ValueError(f"unknown photon_case {self.photon_case!r}")

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)


@dataclass
class ScenarioResult:
    scenario: str
    geometry: ExperimentGeometry
    power_at_wire_plane_in: float
    power_at_wire_plane_out: float
    power_at_image: float
    detector1_count: float
    detector2_count: float
    peak1: float
    peak2: float
    profile: IntensityProfile = field(repr=False)
    wire_plane_profile: IntensityProfile = field(repr=False)
    peak_intensity_relative: Optional[float] = None
    photon_counts: Optional[dict] = None

    @property
    def peak_intensity(self) -> float:
        return max(self.peak1, self.peak2)

    @property
    def transmitted_fraction(self) -> float:
        return self.power_at_wire_plane_out / self.power_at_wire_plane_in

    def to_dict(self) -> dict:
        return {
            "scenario": self.scenario,
            "block": SCENARIOS[self.scenario].block.value,
            "grid": SCENARIOS[self.scenario].grid,
            "power_at_wire_plane_in": self.power_at_wire_plane_in,
            "power_at_wire_plane_out": self.power_at_wire_plane_out,
            "power_at_image": self.power_at_image,
            "detector1_count": self.detector1_count,
            "detector2_count": self.detector2_count,
            "peak_intensity": self.peak_intensity,
            "peak_intensity_relative": self.peak_intensity_relative,
            "photon_counts": self.photon_counts,
            "profile_csv": f"profile_{self.scenario}.csv",
        }


def aperture_field(geom: ExperimentGeometry, options: SimulationOptions,
                   block: PinholeBlock) -> SampledField:
    """Unit plane wave through the dual-pinhole screen."""
    n = options.grid_n
    if options.mode == "1d":
        base = make_field_1d(n, options.window, geom.wavelength)
    else:
        base = make_field(n, n, options.window, options.window, geom.wavelength)
    lit = base.replace(np.ones(base.amplitudes.shape, complex))
    return apply_dual_pinhole(lit, geom, block, edge=options.edge)


def _simulate(geom, name, options, keep_image=False):
    cfg = SCENARIOS[name]
    wire = propagate_fresnel(aperture_field(geom, options, cfg.block),
                             geom.grid_distance)
    wire = wire.replace(plane_label="wire-plane")
    p_in = total_power(wire)
    wire_profile = extract_profile(wire, "x", 0.0)
    if cfg.grid:
        centers = wire_positions(geom, geom.fringe_period)
        jitter_seed = options.seed if options.jitter else None
        wire = apply_wire_grid(wire, geom, centers, jitter_seed=jitter_seed,
                               edge=options.edge)
    p_out = total_power(wire)
    image = image_through_lens(wire, geom)
    del wire
    d1, d2 = geom.detector_regions()
    result = ScenarioResult(
        scenario=name, geometry=geom,
        power_at_wire_plane_in=p_in, power_at_wire_plane_out=p_out,
        power_at_image=total_power(image),
        detector1_count=integrate_detector(image, d1),
        detector2_count=integrate_detector(image, d2),
        peak1=detector_peak(image, d1), peak2=detector_peak(image, d2),
        profile=extract_profile(image, "x", 0.0),
        wire_plane_profile=wire_profile,
    )
    log.info("scenario %s: wire-plane transmission %.5f, counts %.4g / %.4g",
             name, result.transmitted_fraction, result.detector1_count,
             result.detector2_count)
    return result, (image if keep_image else None)


def run_scenario(geom: ExperimentGeometry, scenario: str,
                 options: SimulationOptions = SimulationOptions()) -> ScenarioResult:
    """Illuminate, diffract to the wires, apply the grid if any, image, integrate.

    ``scenario`` is one of ``a``-``d`` or an auxiliary ``A_only``/``B_only``.
    In wave mode the detector counts are integrated intensities; with
    ``options.photons`` a click stream is also sampled and its per-detector
    counts attached.
    """
    if scenario not in SCENARIOS:
        raise ValueError(f"unknown scenario {scenario!r}")
    result, image = _simulate(geom, scenario, options, keep_image=options.photons)
    if options.photons:
        stream = sample_photon_stream(
            image, geom.detector_regions(), options.flux, options.duration,
            options.dark_rate, seed=options.seed, dead_time=options.dead_time)
        result.photon_counts = stream.counts()
    return result


@dataclass
class ReductionTable:
    """Percent reductions against the matching no-grid baselines."""

    b_vs_a: dict
    c_vs_B_only: float
    d_vs_A_only: float
    peak_b_vs_a: float
    peak_c_vs_B_only: float
    peak_d_vs_A_only: float
    cross_c_detector1: float
    cross_d_detector2: float
    b_loss_oracle: float
    wire_plane_loss: dict
    sum_rule: Optional[dict] = None

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)


def _pct_drop(new, ref):
    return 100.0 * (1.0 - new / ref)


def compare_scenarios(results: dict) -> ReductionTable:
    """Reduction percentages and cross-detector fractions.

    ``results`` maps ``a``-``d``, ``A_only`` and ``B_only`` to their
    :class:`ScenarioResult`. Cross fractions are the wrong-detector count
    over the case-``a`` count at that detector, in percent.
    """
    missing = set(SCENARIOS) - set(results)
    if missing:
        raise ValueError(f"missing scenario results: {sorted(missing)}")
    geoms = {r.geometry for r in results.values()}
    if len(geoms) != 1:
        raise ValueError("scenario results come from different geometries")
    geom = geoms.pop()
    a, b, c, d = (results[k] for k in MAIN_CASES)
    A, B = results["A_only"], results["B_only"]
    centers = wire_positions(geom, geom.fringe_period)
    oracle = envelope_weighted_blocked_fraction(
        geom.fringe_b, geom.wire_thickness, centers, geom.airy_radius)
    return ReductionTable(
        b_vs_a={1: _pct_drop(b.detector1_count, a.detector1_count),
                2: _pct_drop(b.detector2_count, a.detector2_count)},
        c_vs_B_only=_pct_drop(c.detector2_count, B.detector2_count),
        d_vs_A_only=_pct_drop(d.detector1_count, A.detector1_count),
        peak_b_vs_a=100.0 * b.peak_intensity / a.peak_intensity,
        peak_c_vs_B_only=100.0 * c.peak2 / B.peak2,
        peak_d_vs_A_only=100.0 * d.peak1 / A.peak1,
        cross_c_detector1=100.0 * c.detector1_count / a.detector1_count,
        cross_d_detector2=100.0 * d.detector2_count / a.detector2_count,
        b_loss_oracle=100.0 * oracle,
        wire_plane_loss={k: 100.0 * (1 - results[k].transmitted_fraction)
                         for k in ("b", "c", "d")},
    )


@dataclass
class RunSummary:
    geometry: ExperimentGeometry
    options: SimulationOptions
    scenarios: dict
    reductions: Optional[ReductionTable] = None
    metrics: Optional[DualityMetrics] = None
    coincidence: Optional[CoincidenceReport] = None
    events: Optional[PhotonStream] = None
    timestamp: str = ""

    def provenance(self) -> dict:
        import scipy
        return {
            "seed": self.options.seed,
            "grid_n": self.options.grid_n,
            "options": self.options.to_dict(),
            "versions": {"whichway": __version__, "numpy": np.__version__,
                         "scipy": scipy.__version__,
                         "python": platform.python_version()},
            "case_labels": {k: SCENARIOS[k].block.value + (
                "+grid" if SCENARIOS[k].grid else "") for k in SCENARIOS},
            "timestamp": self.timestamp,
        }

    def to_dict(self) -> dict:
        return _jsonable({
            "geometry": self.geometry.to_dict(),
            "scenarios": {k: r.to_dict() for k, r in self.scenarios.items()},
            "reductions": self.reductions.to_dict() if self.reductions else None,
            "metrics": self.metrics.to_dict() if self.metrics else None,
            "coincidence": self.coincidence.to_dict() if self.coincidence else None,
            "provenance": self.provenance(),
        })


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (np.floating, np.integer, np.bool_)):
        return obj.item()
    return obj


def _now() -> str:
    return _dt.datetime.now(_dt.timezone.utc).isoformat(timespec="seconds")


def derive_metrics(results: dict, reductions: ReductionTable) -> DualityMetrics:
    """Visibility first, then which-way bounds, then ``V^2 + K^2``.

    The blocked fraction fed to the worst-case construction is the larger of
    the two simulated case-b detector losses.
    """
    geom = results["a"].geometry
    a, b, c, d = (results[k] for k in MAIN_CASES)
    flags = []
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always", ClampWarning)
        v_wire = wire_limited_visibility(geom.fringe_b, geom.wire_thickness)
        blocked = max(reductions.b_vs_a.values()) / 100.0
        if blocked <= 0:
            flags.append(f"non-positive case-b loss {blocked:.3g}; floored at 1e-12")
            blocked = 1e-12
        ratio, v_star = worst_case_visibility(
            geom.airy_radius, geom.wire_thickness, geom.wire_count, blocked)
        w2 = 100.0 * b.detector2_count / a.detector2_count
        w1 = 100.0 * b.detector1_count / a.detector1_count
        k_b = which_way_lower_bound(w2, reductions.cross_d_detector2)
        k_a = which_way_lower_bound(w1, reductions.cross_c_detector1)
    flags += [str(w.message) for w in caught if issubclass(w.category, ClampWarning)]
    try:
        half = 3e-3
        v_direct = measure_visibility_direct(a.wire_plane_profile, (-half, half))
    except ValueError as exc:
        flags.append(f"V_direct unavailable: {exc}")
        v_direct = None
    gy, violated = greenberger_yasin(v_star, min(k_a, k_b))
    return DualityMetrics(
        V_wire_limited=v_wire, V_star_lower_bound=v_star, K_A=k_a, K_B=k_b,
        gy_value=gy, gy_violated=violated, V_direct=v_direct,
        intensity_ratio=ratio, flags=flags)


def _sum_rule(geom, c_image, d_image, results):
    """Case b minus (c + d) per detector against the interference cross terms."""
    out = {}
    b = results["b"]
    for reg in geom.detector_regions():
        lab = reg.label
        count = lambda r: getattr(r, f"detector{lab}_count")
        disc = count(b) - count(results["c"]) - count(results["d"])
        cx, cy = reg.center
        x, y = c_image.x, c_image.y
        inside = ((x[None, :] - cx) ** 2 + (y[:, None] - cy) ** 2) < reg.radius ** 2
        cross = 2.0 * np.real(np.sum(
            c_image.amplitudes[inside] * np.conj(d_image.amplitudes[inside]))) \
            * c_image.dx * c_image.dy
        in_phase = 2.0 * np.sqrt(count(results["c"]) * count(results["d"]))
        w = 100.0 * count(b) / count(results["a"])
        e = 100.0 * (count(results["d"]) if lab == 2 else count(results["c"])) \
            / count(results["a"])
        out[lab] = {
            "discrepancy": disc,
            "complex_cross_term": float(cross),
            "in_phase_cross_term": float(in_phase),
            "other_pinhole_share_pct": pinhole_a_share(w, e),
            "other_pinhole_bound_pct": 3 * e,
        }
    return out


def full_pipeline(geom: ExperimentGeometry = ExperimentGeometry(),
                  options: SimulationOptions = SimulationOptions()) -> RunSummary:
    """Run every condition, reduce, and derive the duality metrics."""
    results, images = {}, {}
    for name in ("a", "A_only", "B_only", "b", "c", "d"):
        keep = name in ("c", "d") or (options.photons and name == options.photon_case)
        results[name], img = _simulate(geom, name, options, keep_image=keep)
        if img is not None:
            images[name] = img
    reductions = compare_scenarios(results)
    reductions.sum_rule = _sum_rule(geom, images["c"], images["d"], results)
    metrics = derive_metrics(results, reductions)

    peak_a = results["a"].peak_intensity
    for r in results.values():
        r.peak_intensity_relative = 100.0 * r.peak_intensity / peak_a

    coincidence = events = None
    if options.photons:
        events = sample_photon_stream(
            images[options.photon_case], geom.detector_regions(), options.flux,
            options.duration, options.dark_rate, seed=options.seed,
            dead_time=options.dead_time)
        results[options.photon_case].photon_counts = events.counts()
        coincidence = count_coincidences(events, options.coincidence_window,
                                         duration=options.duration)
    return RunSummary(geom, options, results, reductions, metrics,
                      coincidence, events, timestamp=_now())


def emit_summary(summary: RunSummary, path) -> Path:
    """Write ``summary.json`` plus sibling ``profile_<case>.csv`` (and ``events.csv``)."""
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        with path.open("w") as fh:
            json.dump(summary.to_dict(), fh, indent=2)
            fh.write("\n")
        for name, r in summary.scenarios.items():
            r.profile.to_csv(path.parent / f"profile_{name}.csv")
        if summary.events is not None:
            summary.events.to_csv(path.parent / "events.csv")
    except OSError as exc:
        raise OSError(f"cannot write run summary to {path}: {exc}") from exc
    return path


def read_summary(path) -> dict:
    with Path(path).open() as fh:
        data = json.load(fh)
    missing = [k for k in SUMMARY_KEYS if k not in data]
    if missing:
        raise ValueError(f"{path}: summary lacks keys {missing}")
    return data
