"""Apparatus geometry and the transmission elements placed in the beam.

Axis convention: the pinholes sit on the x axis (A at ``-d/2``, B at
``+d/2``) and the wires run parallel to y, so the fringes vary along x only.
"""
from __future__ import annotations

import dataclasses
import enum
import math
from dataclasses import dataclass
from typing import Iterable, Optional

import numpy as np

from .errors import OutOfRangeError, ResolutionError
from .field import SampledField

_SUPERSAMPLE = 8


@dataclass(frozen=True)
class ExperimentGeometry:
    """Physical parameters of the dual-pinhole / wire-grid / lens setup.

    Distances in meters. ``lens_object_distance`` is measured from the
    pinhole plane. When ``lens_focal_length`` is omitted it is computed from
    the imaging condition.
    """

    wavelength: float = 638e-9
    pinhole_diameter: float = 40e-6
    pinhole_separation: float = 250e-6
    grid_distance: float = 0.55
    wire_thickness: float = 127e-6
    wire_count: int = 6
    wire_alignment_tolerance: float = 10e-6
    lens_object_distance: float = 0.70
    lens_image_distance: float = 2.80
    lens_focal_length: Optional[float] = None
    lens_aperture_diameter: float = 50e-3
    detector_radius: float = 0.5e-3

    def __post_init__(self):
        if self.lens_focal_length is None:
            so, si = self.lens_object_distance, self.lens_image_distance
            object.__setattr__(self, "lens_focal_length", so * si / (so + si))
        lengths = {k: v for k, v in dataclasses.asdict(self).items()
                   if k not in ("wire_count",)}
        # a zero-thickness grid or perfect alignment is allowed
        may_vanish = ("wire_thickness", "wire_alignment_tolerance")
        bad = [k for k, v in lengths.items()
               if not (v >= 0 if k in may_vanish else v > 0)]
        if bad:
            raise ValueError(f"lengths must be positive: {', '.join(bad)}")
        if int(self.wire_count) != self.wire_count or self.wire_count < 1:
            raise ValueError("wire_count must be a positive integer")
        err = (1 / self.lens_object_distance + 1 / self.lens_image_distance
               - 1 / self.lens_focal_length)
        if abs(err) >= 1e-9:
            raise ValueError(f"imaging condition violated by {err:.3g} 1/m")
        if self.lens_object_distance <= self.grid_distance:
            raise ValueError("lens must sit beyond the wire plane")

    @classmethod
    def from_mapping(cls, values: dict) -> "ExperimentGeometry":
        names = {f.name for f in dataclasses.fields(cls)}
        unknown = set(values) - names
        if unknown:
            raise ValueError(f"unknown geometry keys: {sorted(unknown)}")
        return cls(**values)

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)

    @property
    def magnification(self) -> float:
        return self.lens_image_distance / self.lens_object_distance

    @property
    def fringe_period(self) -> float:
        """Two-source fringe period at the wire plane, ``lambda L / d``."""
        return self.wavelength * self.grid_distance / self.pinhole_separation

    @property
    def fringe_b(self) -> float:
        """Spatial constant ``b`` of ``cos^2(b x)`` (1/m)."""
        return math.pi / self.fringe_period

    @property
    def airy_radius(self) -> float:
        """First-zero radius of one pinhole's diffraction pattern at the wires."""
        return 1.21966989 * self.wavelength * self.grid_distance / self.pinhole_diameter

    @property
    def pinhole_centers(self) -> dict:
        h = self.pinhole_separation / 2
        return {"A": (-h, 0.0), "B": (h, 0.0)}

    def detector_regions(self, radius: Optional[float] = None):
        """Detector 1 at the (inverted) image of A, detector 2 at that of B."""
        r = self.detector_radius if radius is None else radius
        m = self.magnification
        ax, _ = self.pinhole_centers["A"]
        bx, _ = self.pinhole_centers["B"]
        return (DetectorRegion((-m * ax, 0.0), r, 1),
                DetectorRegion((-m * bx, 0.0), r, 2))


class PinholeBlock(enum.Enum):
    NONE = "none"
    BLOCK_A = "block_A"
    BLOCK_B = "block_B"

    def open_pinholes(self) -> tuple:
        return {"none": ("A", "B"), "block_A": ("B",),
                "block_B": ("A",)}[self.value]


@dataclass(frozen=True)
class DetectorRegion:
    center: tuple
    radius: float
    label: int

    def __post_init__(self):
        if not self.radius > 0:
            raise ValueError("detector radius must be positive")
        if self.label not in (1, 2):
            raise ValueError("detector label must be 1 or 2")


def _interval_coverage(coords, pitch, lo, hi):
    """Fraction of each pixel ``[c - p/2, c + p/2]`` lying inside ``[lo, hi]``."""
    left = np.maximum(coords - pitch / 2, lo)
    right = np.minimum(coords + pitch / 2, hi)
    return np.clip(right - left, 0, None) / pitch


def _disk_mask(field: SampledField, cx, cy, radius, edge):
    """Return (row slice, col slice, weights) of a disk over its bounding box."""
    x, y = field.x, field.y
    ix = np.nonzero(np.abs(x - cx) <= radius + field.dx)[0]
    if field.is_1d:
        iy = np.array([0])
    else:
        iy = np.nonzero(np.abs(y - cy) <= radius + field.dy)[0]
    if ix.size == 0 or iy.size == 0:
        return slice(0, 0), slice(0, 0), np.zeros((0, 0))
    rows = slice(iy[0], iy[-1] + 1)
    cols = slice(ix[0], ix[-1] + 1)
    xs = x[cols]

    if field.is_1d:
        # collapsed-y: a disk becomes a slit of the same width
        if edge == "area":
            w = _interval_coverage(xs, field.dx, cx - radius, cx + radius)
        else:
            w = (np.abs(xs - cx) < radius).astype(float)
        return rows, cols, w[None, :]

    ys = y[rows]
    if edge == "area":
        s = _SUPERSAMPLE
        off_x = ((np.arange(s) + 0.5) / s - 0.5) * field.dx
        off_y = ((np.arange(s) + 0.5) / s - 0.5) * field.dy
        sx = (xs[:, None] + off_x[None, :]).ravel() - cx
        sy = (ys[:, None] + off_y[None, :]).ravel() - cy
        inside = (sx[None, :] ** 2 + sy[:, None] ** 2) < radius ** 2
        w = inside.reshape(len(ys), s, len(xs), s).mean(axis=(1, 3))
    elif edge == "binary":
        w = (((xs[None, :] - cx) ** 2 + (ys[:, None] - cy) ** 2)
             < radius ** 2).astype(float)
    else:
        raise ValueError(f"edge must be 'binary' or 'area', got {edge!r}")
    return rows, cols, w


def apply_dual_pinhole(field: SampledField, geom: ExperimentGeometry,
                       block: PinholeBlock = PinholeBlock.NONE,
                       edge: str = "binary") -> SampledField:
    """Opaque screen with the two pinholes; blocked pinholes transmit nothing.

    With ``edge='area'`` boundary pixels carry their covered-area fraction
    (that mode is not idempotent).
    """
    wx, _ = field.window
    if wx < 2 * geom.pinhole_separation:
        raise ResolutionError(
            f"window {wx:g} m narrower than twice the pinhole separation")
    if field.dx > geom.pinhole_diameter / 8 or (
            not field.is_1d and field.dy > geom.pinhole_diameter / 8):
        raise ResolutionError(
            f"pitch {field.dx:g} m exceeds pinhole_diameter/8 "
            f"= {geom.pinhole_diameter / 8:g} m")
    block = PinholeBlock(block)
    out = np.zeros_like(field.amplitudes)
    r = geom.pinhole_diameter / 2
    for name in block.open_pinholes():
        cx, cy = geom.pinhole_centers[name]
        rows, cols, w = _disk_mask(field, cx, cy, r, edge)
        out[rows, cols] = field.amplitudes[rows, cols] * w
    return field.replace(out, plane_label="aperture")


def wire_positions(geom: ExperimentGeometry, fringe_period: float) -> np.ndarray:
    """Wire centers at the innermost symmetric minima ``+-P/2, +-3P/2, ...``."""
    if not fringe_period > 0:
        raise ValueError("fringe_period must be positive")
    n = int(geom.wire_count)
    if n % 2:
        raise NotImplementedError(
            "odd wire counts have no symmetric minimum placement")
    half = (np.arange(n // 2) + 0.5) * fringe_period
    return np.concatenate([-half[::-1], half])


def apply_wire_grid(field: SampledField, geom: ExperimentGeometry,
                    centers: Iterable[float], jitter_seed=None,
                    edge: str = "binary") -> SampledField:
    """Opaque strips of width ``geom.wire_thickness`` parallel to y.

    A non-None ``jitter_seed`` displaces each wire independently by a
    uniform offset within the alignment tolerance.
    """
    t = geom.wire_thickness
    if t == 0:
        return field.replace(plane_label="wire-plane")
    if field.dx > t / 6:
        raise ResolutionError(
            f"pitch {field.dx:g} m gives fewer than 6 samples per wire")
    centers = np.asarray(list(centers), dtype=float)
    if jitter_seed is not None:
        rng = np.random.default_rng(jitter_seed)
        tol = geom.wire_alignment_tolerance
        centers = centers + rng.uniform(-tol, tol, size=centers.shape)

    x = field.x
    trans = np.ones(field.nx)
    for c in centers:
        if edge == "area":
            trans -= _interval_coverage(x, field.dx, c - t / 2, c + t / 2)
        elif edge == "binary":
            trans[np.abs(x - c) < t / 2] = 0.0
        else:
            raise ValueError(f"edge must be 'binary' or 'area', got {edge!r}")
    trans = np.clip(trans, 0.0, 1.0)
    return field.replace(field.amplitudes * trans[None, :],
                         plane_label="wire-plane")


def lens_phase(field: SampledField, f: float) -> np.ndarray:
    k = np.pi / (field.wavelength * f)
    px = np.exp(-1j * k * field.x ** 2)
    py = np.exp(-1j * k * field.y ** 2)
    return py[:, None] * px[None, :]


def apply_thin_lens(field: SampledField, f: float,
                    aperture_diameter: float) -> SampledField:
    """Ideal thin lens: quadratic phase inside a circular (slit in 1-D) stop."""
    if not f > 0:
        raise ValueError("focal length must be positive")
    if not aperture_diameter > 0:
        raise ValueError("aperture diameter must be positive")
    r = aperture_diameter / 2
    x, y = field.x, field.y
    out = field.amplitudes * lens_phase(field, f)
    if field.is_1d:
        out[:, np.abs(x) > r] = 0
    elif r ** 2 < np.max(x ** 2) + np.max(y ** 2):
        out[(x[None, :] ** 2 + y[:, None] ** 2) > r ** 2] = 0
    return field.replace(out, plane_label="lens")


def integrate_detector(field: SampledField, region: DetectorRegion) -> float:
    """Power over samples whose centers fall inside the detector disk."""
    cx, cy = region.center
    half_x = field.nx * field.dx / 2
    if abs(cx) + region.radius > half_x or (
            not field.is_1d and abs(cy) + region.radius > field.ny * field.dy / 2):
        raise OutOfRangeError(f"detector {region.label} extends past the window")
    rows, cols, w = _disk_mask(field, cx, cy, region.radius, "binary")
    sub = field.amplitudes[rows, cols]
    return float(np.sum(np.abs(sub) ** 2 * w) * field.dx * field.dy)


def detector_peak(field: SampledField, region: DetectorRegion) -> float:
    """Largest sample intensity inside the detector disk."""
    rows, cols, w = _disk_mask(field, *region.center, region.radius, "binary")
    vals = np.abs(field.amplitudes[rows, cols]) ** 2 * w
    return float(vals.max()) if vals.size else 0.0
