"""Semiclassical photon counting: Poisson arrivals, detector clicks, coincidences.

Photons are independent draws from the classical image-plane intensity, which
is the low-flux picture; nothing here models two-photon interference.
Streams are held column-wise in numpy arrays (:class:`PhotonStream`) because
a 100 s run at the nominal flux produces millions of events.
"""
from __future__ import annotations

import csv
import math
from collections import deque
from dataclasses import dataclass, asdict
from pathlib import Path
from typing import Iterable, Optional, Sequence

import numpy as np
from scipy import stats
from scipy.constants import c as SPEED_OF_LIGHT

from .elements import DetectorRegion
from .errors import NormalizationError
from .field import SampledField

NO_DETECTOR = 0


@dataclass(frozen=True)
class PhotonEvent:
    t: float
    detector: Optional[int]
    position: tuple


@dataclass(frozen=True, eq=False)
class PhotonStream:
    """Time-ordered clicks; ``detector`` is 1, 2 or 0 for a miss."""

    t: np.ndarray
    detector: np.ndarray
    x: np.ndarray
    y: np.ndarray

    def __post_init__(self):
        n = len(self.t)
        if not (len(self.detector) == len(self.x) == len(self.y) == n):
            raise ValueError("stream columns differ in length")

    def __len__(self):
        return len(self.t)

    def __iter__(self):
        for t, d, x, y in zip(self.t, self.detector, self.x, self.y):
            yield PhotonEvent(float(t), int(d) or None, (float(x), float(y)))

    @classmethod
    def empty(cls) -> "PhotonStream":
        z = np.zeros(0)
        return cls(z, np.zeros(0, dtype=np.int8), z, z)

    @classmethod
    def from_events(cls, events: Iterable[PhotonEvent]) -> "PhotonStream":
        events = list(events)
        if not events:
            return cls.empty()
        return cls(np.array([e.t for e in events], dtype=float),
                   np.array([e.detector or NO_DETECTOR for e in events], dtype=np.int8),
                   np.array([e.position[0] for e in events], dtype=float),
                   np.array([e.position[1] for e in events], dtype=float))

    def counts(self) -> dict:
        return {d: int(np.count_nonzero(self.detector == d)) for d in (1, 2)}

    def to_csv(self, path) -> Path:
        path = Path(path)
        with path.open("w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["t_s", "detector", "x_m", "y_m"])
            for t, d, x, y in zip(self.t, self.detector, self.x, self.y):
                w.writerow([repr(float(t)), int(d) if d else "none",
                            repr(float(x)), repr(float(y))])
        return path

    @classmethod
    def from_csv(cls, path) -> "PhotonStream":
        with Path(path).open(newline="") as fh:
            rows = list(csv.DictReader(fh))
        return cls(np.array([float(r["t_s"]) for r in rows]),
                   np.array([0 if r["detector"] == "none" else int(r["detector"])
                             for r in rows], dtype=np.int8),
                   np.array([float(r["x_m"]) for r in rows]),
                   np.array([float(r["y_m"]) for r in rows]))


@dataclass(frozen=True)
class CoincidenceReport:
    window: float
    n_events_1: int
    n_events_2: int
    n_coincidences: int
    ratio: float
    analytic_expectation: float
    duration: float

    @property
    def sigma(self) -> float:
        """Binomial standard error of ``ratio`` around the analytic value."""
        n = max(self.n_events_1, self.n_events_2)
        p = self.analytic_expectation
        return math.sqrt(p * (1 - p) / n) if n else float("nan")

    def to_dict(self) -> dict:
        return asdict(self)


def _assign(x, y, regions: Sequence[DetectorRegion]) -> np.ndarray:
    det = np.zeros(len(x), dtype=np.int8)
    for reg in regions:
        cx, cy = reg.center
        det[(x - cx) ** 2 + (y - cy) ** 2 < reg.radius ** 2] = reg.label
    return det


def _poisson_times(rng, rate, duration):
    n = rng.poisson(rate * duration)
    return np.sort(rng.uniform(0.0, duration, n))


def apply_dead_time(stream: PhotonStream, dead_time: float) -> PhotonStream:
    """Drop clicks arriving within ``dead_time`` of the last kept click (per detector)."""
    if dead_time <= 0 or len(stream) == 0:
        return stream
    keep = np.ones(len(stream), dtype=bool)
    for d in (1, 2):
        idx = np.nonzero(stream.detector == d)[0]
        last = -np.inf
        for i in idx:
            if stream.t[i] - last < dead_time:
                keep[i] = False
            else:
                last = stream.t[i]
    return PhotonStream(stream.t[keep], stream.detector[keep],
                        stream.x[keep], stream.y[keep])


def sample_positions(intensity_field: SampledField, n: int, rng) -> tuple:
    """Draw ``n`` positions from ``|a|^2`` as a piecewise-constant density."""
    w = intensity_field.intensity.ravel()
    cdf = np.cumsum(w)
    if not cdf[-1] > 0:
        raise NormalizationError("intensity field has zero total power")
    idx = np.searchsorted(cdf, rng.uniform(0, cdf[-1], n), side="right")
    idx = np.minimum(idx, w.size - 1)
    iy, ix = np.divmod(idx, intensity_field.nx)
    x = intensity_field.x[ix] + (rng.random(n) - 0.5) * intensity_field.dx
    if intensity_field.is_1d:
        y = np.zeros(n)
    else:
        y = intensity_field.y[iy] + (rng.random(n) - 0.5) * intensity_field.dy
    return x, y


def sample_photon_stream(intensity_field: SampledField,
                         regions: Sequence[DetectorRegion], flux: float,
                         duration: float, dark_rate: float = 100.0, seed=None,
                         dead_time: float = 0.0) -> PhotonStream:
    """Simulate clicks for ``duration`` seconds of illumination.

    Arrival times form a homogeneous Poisson process of rate ``flux``;
    positions follow the normalized intensity; each detector adds independent
    dark counts at ``dark_rate`` placed uniformly over its area.
    """
    if not flux > 0:
        raise ValueError("flux must be positive")
    if duration < 0 or dark_rate < 0:
        raise ValueError("duration and dark_rate must be non-negative")
    if not np.any(intensity_field.amplitudes):
        raise NormalizationError("intensity field has zero total power")
    if duration == 0:
        return PhotonStream.empty()
    rng = np.random.default_rng(seed)

    t = _poisson_times(rng, flux, duration)
    x, y = sample_positions(intensity_field, len(t), rng)
    det = _assign(x, y, regions)
    cols = [(t, det, x, y)]
    for reg in regions:
        td = _poisson_times(rng, dark_rate, duration)
        r = reg.radius * np.sqrt(rng.random(len(td)))
        phi = rng.uniform(0, 2 * np.pi, len(td))
        yd = np.zeros(len(td)) if intensity_field.is_1d else reg.center[1] + r * np.sin(phi)
        cols.append((td, np.full(len(td), reg.label, dtype=np.int8),
                     reg.center[0] + r * np.cos(phi), yd))
    t, det, x, y = (np.concatenate(c) for c in zip(*cols))
    order = np.argsort(t, kind="stable")
    stream = PhotonStream(t[order], det[order], x[order], y[order])
    return apply_dead_time(stream, dead_time)


def detector_click_stream(rate_1: float, rate_2: float, duration: float,
                          seed=None) -> PhotonStream:
    """Two independent Poisson click trains without positions."""
    rng = np.random.default_rng(seed)
    t1 = _poisson_times(rng, rate_1, duration)
    t2 = _poisson_times(rng, rate_2, duration)
    t = np.concatenate([t1, t2])
    det = np.concatenate([np.full(len(t1), 1, np.int8), np.full(len(t2), 2, np.int8)])
    order = np.argsort(t, kind="stable")
    z = np.zeros(len(t))
    return PhotonStream(t[order], det[order], z, z)


def _has_partner(t_self, t_other, window):
    if len(t_other) == 0:
        return np.zeros(len(t_self), dtype=bool)
    lo = np.searchsorted(t_other, t_self - window, side="left")
    hi = np.searchsorted(t_other, t_self + window, side="right")
    return hi > lo


def count_coincidences(events, window: float = 20e-9,
                       duration: Optional[float] = None) -> CoincidenceReport:
    """Greedy earliest pairing of clicks on different detectors within ``window``.

    Each click joins at most one pair; a click pairs with the oldest unpaired
    click on the other detector that is still inside the window. ``duration``
    (for the rates in the analytic expectation) defaults to the last
    timestamp.
    """
    if not isinstance(events, PhotonStream):
        events = PhotonStream.from_events(events)
    t = np.asarray(events.t, dtype=float)
    if np.any(np.diff(t) < 0):
        raise ValueError("events must be time-ordered")
    det = np.asarray(events.detector)
    t1, t2 = t[det == 1], t[det == 2]
    n1, n2 = len(t1), len(t2)

    # clicks with no opposite click in reach can never pair; skip them
    cand = np.zeros(len(t), dtype=bool)
    cand[det == 1] = _has_partner(t1, t2, window)
    cand[det == 2] = _has_partner(t2, t1, window)
    pending = {1: deque(), 2: deque()}
    n_coinc = 0
    for ti, di in zip(t[cand].tolist(), det[cand].tolist()):
        other = pending[3 - di]
        while other and ti - other[0] > window:
            other.popleft()
        if other:
            other.popleft()
            n_coinc += 1
        else:
            pending[di].append(ti)

    if duration is None:
        duration = float(t[-1]) if len(t) else 0.0
    n_max = max(n1, n2)
    ratio = n_coinc / n_max if n_max else 0.0
    if duration > 0 and n_max:
        rate_other = min(n1, n2) / duration
        expect = -math.expm1(-rate_other * 2 * window)
    else:
        expect = 0.0
    return CoincidenceReport(window, n1, n2, n_coinc, ratio, expect, duration)


def mean_photon_separation(flux: float) -> float:
    """Mean spacing (m) between successive photons in the beam."""
    if not flux > 0:
        raise ValueError("flux must be positive")
    return SPEED_OF_LIGHT / flux


def coherence_overlap_probability(flux: float, coherence_length: float) -> float:
    """Probability that the next photon follows within one coherence time."""
    if flux < 0 or not coherence_length > 0:
        raise ValueError("need flux >= 0 and coherence_length > 0")
    return -math.expm1(-flux * coherence_length / SPEED_OF_LIGHT)


def position_chi_square(stream: PhotonStream, intensity_field: SampledField,
                        bins=(8, 4)):
    """Chi-square test of sampled positions against the intensity map.

    Cells are the product of ``bins[0]`` x-bands and ``bins[1]`` y-bands at
    marginal quantiles, snapped to pixel edges so each cell's expected mass
    is an exact sum of pixel weights. Only photon (non-dark) positions
    should be passed. Returns ``(statistic, p_value)``.
    """
    w = intensity_field.intensity
    w = w / w.sum()

    def edges(marginal, n):
        cdf = np.cumsum(marginal)
        cuts = np.searchsorted(cdf, np.arange(1, n) / n)
        return np.unique(np.concatenate([[0], cuts + 1, [len(marginal)]]))

    ex = edges(w.sum(axis=0), bins[0])
    ey = edges(w.sum(axis=1), bins[1]) if not intensity_field.is_1d else np.array([0, 1])
    expected = np.add.reduceat(np.add.reduceat(w, ey[:-1], axis=0), ex[:-1], axis=1)

    ix = np.clip(np.floor(stream.x / intensity_field.dx + 0.5).astype(int)
                 + intensity_field.nx // 2, 0, intensity_field.nx - 1)
    if intensity_field.is_1d:
        iy = np.zeros(len(stream), dtype=int)
    else:
        iy = np.clip(np.floor(stream.y / intensity_field.dy + 0.5).astype(int)
                     + intensity_field.ny // 2, 0, intensity_field.ny - 1)
    cx = np.searchsorted(ex, ix, side="right") - 1
    cy = np.searchsorted(ey, iy, side="right") - 1
    observed = np.zeros_like(expected)
    np.add.at(observed, (cy, cx), 1)
    keep = expected.ravel() > 0
    obs = observed.ravel()[keep]
    exp = expected.ravel()[keep] * len(stream)
    return stats.chisquare(obs, exp)
