"""Complex scalar fields on uniform grids, power accounting and profile cuts."""
from __future__ import annotations

import csv
from dataclasses import dataclass, field as dc_field
from pathlib import Path

import numpy as np

from .errors import OutOfRangeError


def _is_pow2(n: int) -> bool:
    return n >= 1 and (n & (n - 1)) == 0


def centered_coords(n: int, pitch: float) -> np.ndarray:
    """Sample coordinates with index ``n // 2`` on the optical axis."""
    return (np.arange(n) - n // 2) * pitch


@dataclass(frozen=True, eq=False)
class SampledField:
    """Complex amplitude sampled on a uniform ``(ny, nx)`` grid.

    A field with ``ny == 1`` is the collapsed-y (1-D) representation; its
    ``dy`` is a nominal unit length so that power stays ``sum |a|^2 dx dy``.
    The stored amplitude array is a read-only view.
    """

    amplitudes: np.ndarray
    dx: float
    dy: float
    wavelength: float
    plane_label: str = ""

    def __post_init__(self):
        a = np.asarray(self.amplitudes, dtype=np.complex128)
        if a.ndim != 2:
            raise ValueError(f"amplitudes must be 2-D, got shape {a.shape}")
        ny, nx = a.shape
        if nx < 2 or ny < 1:
            raise ValueError(f"grid too small: nx={nx}, ny={ny}")
        if not (_is_pow2(nx) and _is_pow2(ny)):
            raise ValueError(f"grid sizes must be powers of two, got {nx}x{ny}")
        if not (self.dx > 0 and self.dy > 0 and self.wavelength > 0):
            raise ValueError("dx, dy and wavelength must be positive")
        # read-only view, no copy: grids reach 4096^2
        a = a.view()
        a.flags.writeable = False
        object.__setattr__(self, "amplitudes", a)

    @property
    def nx(self) -> int:
        return self.amplitudes.shape[1]

    @property
    def ny(self) -> int:
        return self.amplitudes.shape[0]

    @property
    def is_1d(self) -> bool:
        return self.ny == 1

    @property
    def x(self) -> np.ndarray:
        return centered_coords(self.nx, self.dx)

    @property
    def y(self) -> np.ndarray:
        if self.is_1d:
            return np.zeros(1)
        return centered_coords(self.ny, self.dy)

    @property
    def window(self) -> tuple[float, float]:
        return self.nx * self.dx, self.ny * self.dy

    @property
    def intensity(self) -> np.ndarray:
        return np.abs(self.amplitudes) ** 2

    def replace(self, amplitudes=None, **kw) -> "SampledField":
        """Copy with new amplitudes and/or metadata."""
        return SampledField(
            amplitudes=self.amplitudes if amplitudes is None else amplitudes,
            dx=kw.pop("dx", self.dx),
            dy=kw.pop("dy", self.dy),
            wavelength=kw.pop("wavelength", self.wavelength),
            plane_label=kw.pop("plane_label", self.plane_label),
            **kw,
        )

    def __add__(self, other: "SampledField") -> "SampledField":
        if not isinstance(other, SampledField):
            return NotImplemented
        if (self.amplitudes.shape != other.amplitudes.shape
                or not np.isclose(self.dx, other.dx)
                or not np.isclose(self.dy, other.dy)):
            raise ValueError("fields must share grid shape and pitch")
        return self.replace(self.amplitudes + other.amplitudes)


@dataclass(frozen=True)
class IntensityProfile:
    axis: str
    coordinates: np.ndarray
    values: np.ndarray = dc_field(repr=False)

    def to_csv(self, path) -> Path:
        path = Path(path)
        with path.open("w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow([f"{self.axis}_m", "intensity"])
            for c, v in zip(self.coordinates, self.values):
                w.writerow([repr(float(c)), repr(float(v))])
        return path

    @classmethod
    def from_csv(cls, path) -> "IntensityProfile":
        with Path(path).open(newline="") as fh:
            rows = list(csv.reader(fh))
        head = rows[0][0]
        if head not in ("x_m", "y_m"):
            raise ValueError(f"unexpected profile header {rows[0]!r}")
        data = np.array(rows[1:], dtype=float).reshape(-1, 2)
        return cls(axis=head[0], coordinates=data[:, 0], values=data[:, 1])


def make_field(nx: int, ny: int, window_x: float, window_y: float,
               wavelength: float, plane_label: str = "") -> SampledField:
    """Zero-amplitude field covering ``window_x`` x ``window_y`` meters."""
    if nx < 2 or ny < 2:
        raise ValueError(f"nx and ny must be >= 2, got {nx}, {ny}")
    if window_x <= 0 or window_y <= 0:
        raise ValueError("windows must be positive")
    return SampledField(np.zeros((ny, nx), complex), window_x / nx,
                        window_y / ny, wavelength, plane_label)


def make_field_1d(nx: int, window_x: float, wavelength: float,
                  plane_label: str = "") -> SampledField:
    """Zero field in the collapsed-y representation (``ny == 1``, ``dy = 1``)."""
    if nx < 2 or window_x <= 0:
        raise ValueError("need nx >= 2 and a positive window")
    return SampledField(np.zeros((1, nx), complex), window_x / nx, 1.0,
                        wavelength, plane_label)


def total_power(field: SampledField) -> float:
    return float(np.sum(field.intensity) * field.dx * field.dy)


def extract_profile(field: SampledField, axis: str = "x",
                    offset: float = 0.0) -> IntensityProfile:
    """Cut of ``|a|^2`` through the sample row/column nearest ``offset``.

    ``axis='x'`` returns intensity versus x at ``y = offset``.
    """
    if axis == "x":
        n_other, pitch_other, coords = field.ny, field.dy, field.x
    elif axis == "y":
        if field.is_1d:
            raise ValueError("a collapsed-y field has no y profile")
        n_other, pitch_other, coords = field.nx, field.dx, field.y
    else:
        raise ValueError(f"axis must be 'x' or 'y', got {axis!r}")

    if n_other == 1:
        if offset != 0.0:
            raise OutOfRangeError("collapsed-y field only supports offset 0")
        idx = 0
    else:
        half = n_other * pitch_other / 2
        if not -half <= offset < half:
            raise OutOfRangeError(
                f"offset {offset:g} m outside window [-{half:g}, {half:g})")
        idx = int(np.rint(offset / pitch_other)) + n_other // 2
        idx = min(max(idx, 0), n_other - 1)

    a = field.amplitudes[idx, :] if axis == "x" else field.amplitudes[:, idx]
    return IntensityProfile(axis, coords.copy(), np.abs(a) ** 2)
