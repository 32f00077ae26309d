"""Fringe visibility, which-way information and the V^2 + K^2 bound.

Percent-valued quantities (``W2``, leakage) are kept in percent throughout;
the formulas only use their ratios.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field, asdict
from typing import Optional

import numpy as np
from scipy.signal import find_peaks
from scipy.special import struve

from .errors import (ClampWarning, InsufficientFringesError,
                     UndefinedMetricError)
from .field import IntensityProfile


@dataclass(frozen=True)
class DetectorCounts:
    """Counts at detector 2 normalized to the unobstructed count (percent)."""

    W_A2: float
    W_B2: float
    E2B_blocked_sq: float = 0.0

    def __post_init__(self):
        if min(self.W_A2, self.W_B2, self.E2B_blocked_sq) < 0:
            raise ValueError("counts must be non-negative")

    @property
    def W2(self) -> float:
        return self.W_A2 + self.W_B2


@dataclass
class DualityMetrics:
    V_wire_limited: float
    V_star_lower_bound: float
    K_A: float
    K_B: float
    gy_value: float
    gy_violated: bool
    V_direct: Optional[float] = None
    intensity_ratio: Optional[float] = None
    flags: list = field(default_factory=list)

    def to_dict(self) -> dict:
        return asdict(self)


def visibility(i_max: float, i_min: float) -> float:
    """Fringe contrast ``(I_max - I_min) / (I_max + I_min)``."""
    if i_max == 0:
        raise UndefinedMetricError("visibility undefined for I_max = 0")
    if i_min < 0 or i_max < 0:
        raise ValueError("intensities must be non-negative")
    if i_min > i_max:
        raise ValueError(f"I_min ({i_min}) exceeds I_max ({i_max})")
    return (i_max - i_min) / (i_max + i_min)


def _clamp_unit(value: float, what: str) -> float:
    if value < 0:
        warnings.warn(f"{what} = {value:.4g} < 0, clamped to 0", ClampWarning,
                      stacklevel=3)
        return 0.0
    return value


def wire_limited_visibility(b: float, t: float) -> float:
    """``1 - b^2 t^2 / 2`` for a wire of width ``t`` centered on a dark fringe.

    Uses the quadratic dark-fringe expansion ``I = I0 b^2 s^2``; ``b`` and
    ``t`` in reciprocal units (1/mm with mm, or 1/m with m). For
    ``b t >= sqrt(2)`` the expansion is meaningless and 0 is returned with a
    :class:`ClampWarning`.
    """
    if b < 0 or t < 0:
        raise ValueError("b and t must be non-negative")
    return _clamp_unit(1.0 - 0.5 * (b * t) ** 2, "wire-limited visibility")


def worst_case_visibility(R: float, t: float, n_wires: int,
                          blocked_fraction: float):
    """Lowest visibility compatible with a measured wire-grid loss.

    The pattern is replaced by a square wave, flat over the Airy disk of
    radius ``R``, whose dark bars coincide with the wires and together cover
    ``A_w = n_wires * 2 R t``. The blocked photons fall on ``A_w`` and the
    rest on ``pi R^2 - A_w``.

    Returns
    -------
    ratio : float
        ``I_max / I_min`` of the square wave.
    v_lower : float
        the corresponding visibility, clamped to 0 when ``ratio < 1``.
    """
    if not 0 < blocked_fraction < 1:
        raise ValueError("blocked_fraction must lie in (0, 1)")
    a_wires = n_wires * 2 * R * t
    a_disk = math.pi * R ** 2
    if a_wires >= a_disk:
        raise ValueError(
            f"wire cross section {a_wires:.4g} covers the Airy disk {a_disk:.4g}")
    i_max = (1 - blocked_fraction) / (a_disk - a_wires)
    i_min = blocked_fraction / a_wires
    ratio = i_max / i_min
    return ratio, _clamp_unit((ratio - 1) / (ratio + 1), "worst-case visibility")


def which_way_from_components(counts: DetectorCounts) -> float:
    """``K_B = (W_B2 - W_A2) / (W_A2 + W_B2) = 1 - 2 W_A2 / W2``."""
    w2 = counts.W2
    if w2 == 0:
        raise UndefinedMetricError("which-way information undefined for W2 = 0")
    return 1.0 - 2.0 * counts.W_A2 / w2


def which_way_lower_bound(W2: float, E2B_blocked_sq: float) -> float:
    """``K >= 1 - 6 e / W2`` from the bound ``W_A2 <= 3 e``.

    ``e`` is the count at the detector when its own pinhole is blocked.
    """
    if W2 == 0:
        raise UndefinedMetricError("which-way bound undefined for W2 = 0")
    if W2 < 0 or E2B_blocked_sq < 0:
        raise ValueError("counts must be non-negative")
    k = 1.0 - 6.0 * E2B_blocked_sq / W2
    return _clamp_unit(k, "which-way lower bound")


def superposition_decompose(E_A: float, E_B: float):
    """Detector count of two in-phase real amplitudes.

    Returns ``(total, cross)`` with ``total = (E_A + E_B)^2`` and
    ``cross = 2 E_A E_B``.
    """
    if E_A < 0 or E_B < 0:
        raise ValueError("constructive superposition needs non-negative amplitudes")
    return (E_A + E_B) ** 2, 2 * E_A * E_B


def pinhole_a_share(W2: float, E2B_blocked_sq: float) -> float:
    """Photons at detector 2 attributable to pinhole A.

    The leaked count itself plus the part of the cross term weighted by
    ``E_B / E_total``, with the amplitudes backed out of ``W2`` under the
    constructive assumption. Never exceeds ``3 * E2B_blocked_sq``.
    """
    e_total = math.sqrt(W2)
    e_b = math.sqrt(E2B_blocked_sq)
    e_a = e_total - e_b
    if e_a < 0:
        raise ValueError("leaked count exceeds the total")
    _, cross = superposition_decompose(e_a, e_b)
    return E2B_blocked_sq + (e_b / e_total) * cross


def greenberger_yasin(V: float, K: float):
    """Return ``(V^2 + K^2, V^2 + K^2 > 1)``."""
    for name, v in (("V", V), ("K", K)):
        if not 0 <= v <= 1:
            raise ValueError(f"{name} must lie in [0, 1], got {v}")
    value = V * V + K * K
    return value, value > 1


def _extrema(values: np.ndarray):
    floor = 1e-6 * float(np.max(values))
    maxima, _ = find_peaks(values, prominence=floor)
    minima, _ = find_peaks(-values, prominence=floor)
    return maxima, minima


def measure_visibility_direct(profile: IntensityProfile, region) -> float:
    """Visibility from the mean local maximum and mean local minimum in ``region``."""
    lo, hi = region
    sel = (profile.coordinates >= lo) & (profile.coordinates <= hi)
    vals = np.asarray(profile.values)[sel]
    if vals.size < 3 or np.max(vals) <= 0:
        raise InsufficientFringesError("region holds no fringe structure")
    maxima, minima = _extrema(vals)
    if len(maxima) < 2 or len(minima) < 1:
        raise InsufficientFringesError(
            f"found {len(maxima)} maxima and {len(minima)} minima; need 2 and 1")
    return visibility(float(vals[maxima].mean()), float(vals[minima].mean()))


def measure_fringe_period(profile: IntensityProfile, region=None) -> float:
    """Mean spacing of interpolated intensity minima."""
    coords = profile.coordinates
    vals = np.asarray(profile.values)
    if region is not None:
        sel = (coords >= region[0]) & (coords <= region[1])
        coords, vals = coords[sel], vals[sel]
    _, minima = _extrema(vals)
    minima = minima[(minima > 0) & (minima < len(vals) - 1)]
    if len(minima) < 2:
        raise InsufficientFringesError("need at least two minima")
    y0, y1, y2 = vals[minima - 1], vals[minima], vals[minima + 1]
    denom = y0 - 2 * y1 + y2
    shift = np.where(denom != 0, 0.5 * (y0 - y2) / np.where(denom != 0, denom, 1), 0)
    pitch = coords[1] - coords[0]
    pos = coords[minima] + shift * pitch
    slope = np.polyfit(np.arange(len(pos)), pos, 1)[0]
    return float(slope)


def envelope_marginal(x, airy_radius: float):
    """Line-integrated Airy envelope at ``x`` as a density (1/m) of unit integral.

    The line integral of ``(2 J1(r)/r)^2`` at offset ``u`` is
    ``4 H1(2u) / u^2`` (Struve function); the plane integral is ``4 pi``.
    """
    a = 3.8317059702075125 / airy_radius
    u = np.abs(a * np.atleast_1d(np.asarray(x, dtype=float)))
    safe = np.where(u < 1e-4, 1.0, u)
    line = np.where(u < 1e-4, 32 / (3 * math.pi), 4 * struve(1, 2 * safe) / safe ** 2)
    return line * a / (4 * math.pi)


def dark_fringe_blocked_fraction(b: float, t: float) -> float:
    """Blocked power per period for a wire on each minimum of ``cos^2(b x)``."""
    return (b * t) ** 3 / (6 * math.pi)


def envelope_weighted_blocked_fraction(b: float, t: float, centers,
                                       airy_radius: float) -> float:
    """Power fraction stopped by wires on the dark fringes of the full pattern.

    Each wire sees the dark-fringe expansion ``2 m(x_k) b^2 s^2`` of the
    normalized pattern, where ``m`` is the line-integrated envelope; summing
    ``2 m(x_k) b^2 t^3 / 12`` over wires reduces to ``(b t)^3 / (6 pi)``
    for a flat envelope.
    """
    m = envelope_marginal(np.asarray(centers), airy_radius)
    return float(np.sum(2 * m * b ** 2 * t ** 3 / 12))
