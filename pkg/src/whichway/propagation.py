"""Scalar free-space propagation and composed lens imaging.

Two propagators cover the two legs of the apparatus: a single-FFT Fresnel
transform whose output pitch scales as ``lambda z / (n dx)`` (aperture to
wire plane), and an angular-spectrum transfer function that keeps the pitch
fixed (wire plane to lens). Sign convention: fields evolve as
``exp(i (k z - omega t))`` and the forward FFT carries ``exp(-2 pi i f x)``.
"""
from __future__ import annotations

import enum
import logging

import numpy as np
import scipy.fft as sfft
from scipy.special import j1

from .elements import ExperimentGeometry, apply_thin_lens
from .errors import SamplingError
from .field import SampledField, centered_coords

log = logging.getLogger(__name__)


class PropagationMethod(enum.Enum):
    ANGULAR_SPECTRUM = "angular_spectrum"
    FRESNEL_SINGLE_FFT = "fresnel_single_fft"


def _global_phase(z, wavelength):
    return np.exp(2j * np.pi * np.fmod(z / wavelength, 1.0))


def _fft2(a):
    return sfft.fft2(a, workers=-1)


def _ifft2(a):
    return sfft.ifft2(a, workers=-1)


def angular_spectrum_limit(n: int, pitch: float, z: float, wavelength: float) -> float:
    """Largest frequency (1/m) whose transfer-function phase is sampled well.

    Band limit of the sampled transfer function for a periodic window of
    width ``n * pitch``.
    """
    width = n * pitch
    return 1.0 / (wavelength * np.sqrt((2 * abs(z) / width) ** 2 + 1))


def propagate_angular_spectrum(field: SampledField, z: float) -> SampledField:
    """Propagate ``z`` meters at fixed pitch (negative ``z`` back-propagates).

    Raises
    ------
    SamplingError
        if the transfer function would alias inside the Nyquist band.
    """
    if z == 0:
        return field
    lam = field.wavelength
    axes = [(field.nx, field.dx, "x")]
    if not field.is_1d:
        axes.append((field.ny, field.dy, "y"))
    for n, pitch, name in axes:
        limit = angular_spectrum_limit(n, pitch, z, lam)
        nyquist = 0.5 / pitch
        if limit < nyquist:
            zmax = n * pitch / 2 * np.sqrt((2 * pitch / lam) ** 2 - 1)
            raise SamplingError(
                f"angular spectrum aliases along {name}: band limit "
                f"{limit:.4g}/m < Nyquist {nyquist:.4g}/m; |z| must be "
                f"<= {zmax:.4g} m for this grid (got {z:.4g} m)")
    log.debug("angular spectrum z=%.4g m, pitch=%.3g m", z, field.dx)

    fx = sfft.fftfreq(field.nx, field.dx)
    fy = sfft.fftfreq(field.ny, field.dy) if not field.is_1d else np.zeros(1)
    f2 = fy[:, None] ** 2 + fx[None, :] ** 2
    inv2 = 1.0 / lam ** 2
    prop = f2 <= inv2
    # kz - k written to avoid cancellation at large k z
    root = np.sqrt(np.abs(inv2 - f2))
    with np.errstate(divide="ignore", invalid="ignore"):
        dphase = np.where(prop, -f2 / (1.0 / lam + root), 0.0)
    h = np.where(prop, np.exp(2j * np.pi * z * dphase),
                 np.exp(-2 * np.pi * abs(z) * root))
    del f2, root, dphase, prop
    out = _ifft2(_fft2(field.amplitudes) * h) * _global_phase(z, lam)
    return field.replace(out)


def propagate_fresnel(field: SampledField, z: float) -> SampledField:
    """Single-FFT Fresnel transform over ``z > 0``.

    The output pitch along each sampled axis is ``lambda z / (n * pitch)``.
    """
    if not z > 0:
        raise ValueError(f"Fresnel propagation needs z > 0, got {z}")
    lam = field.wavelength
    x1, y1 = field.x, field.y
    dx2 = lam * z / (field.nx * field.dx)
    dy2 = field.dy if field.is_1d else lam * z / (field.ny * field.dy)
    extent = max(np.max(np.abs(x1[np.any(field.amplitudes != 0, axis=0)]),
                        initial=0.0), 1e-300)
    log.debug("Fresnel z=%.4g m, Fresnel number of support %.3g, "
              "output pitch %.4g m", z, extent ** 2 / (lam * z), dx2)

    c = np.pi / (lam * z)
    chirp_in = np.exp(1j * c * y1 ** 2)[:, None] * np.exp(1j * c * x1 ** 2)[None, :]
    u = sfft.ifftshift(field.amplitudes * chirp_in)
    del chirp_in
    u = sfft.fftshift(_fft2(u))

    pref = field.dx * np.exp(-1j * np.pi / 4) / np.sqrt(lam * z)
    if not field.is_1d:
        pref *= field.dy * np.exp(-1j * np.pi / 4) / np.sqrt(lam * z)
    pref *= _global_phase(z, lam)
    x2 = centered_coords(field.nx, dx2)
    y2 = np.zeros(1) if field.is_1d else centered_coords(field.ny, dy2)
    chirp_out = (np.exp(1j * c * y2 ** 2)[:, None]
                 * (pref * np.exp(1j * c * x2 ** 2))[None, :])
    u *= chirp_out
    return field.replace(u, dx=dx2, dy=dy2)


def propagate_curved(field: SampledField, z: float, radius: float) -> SampledField:
    """Propagate a field carrying a diverging spherical phase of radius ``radius``.

    The field is assumed to be ``exp(i pi r^2 / (lambda R)) g(x, y)`` with a
    well-sampled ``g``. By the Fresnel scaling theorem this equals ``g``
    propagated over ``z R / (R + z)`` at fixed pitch, magnified by
    ``(R + z) / R`` and re-multiplied by the curvature of radius ``R + z``.
    Only ``g`` is ever transformed, so the curvature itself may be far below
    Nyquist at the window edge.
    """
    lam = field.wavelength
    r_out = radius + z
    if radius <= 0 or r_out <= 0:
        raise ValueError("need a diverging wave: radius > 0 and radius + z > 0")
    mag = r_out / radius
    z_eff = z / mag
    x, y = field.x, field.y
    c_in = np.pi / (lam * radius)
    g = field.amplitudes * (np.exp(-1j * c_in * y ** 2)[:, None]
                            * np.exp(-1j * c_in * x ** 2)[None, :])
    g = propagate_angular_spectrum(field.replace(g), z_eff).amplitudes

    dx2 = field.dx * mag
    dy2 = field.dy if field.is_1d else field.dy * mag
    naxes = 1 if field.is_1d else 2
    x2 = centered_coords(field.nx, dx2)
    y2 = np.zeros(1) if field.is_1d else centered_coords(field.ny, dy2)
    c_out = np.pi / (lam * r_out)
    scale = mag ** (-naxes / 2) * _global_phase(z - z_eff, lam)
    g = g * (np.exp(1j * c_out * y2 ** 2)[:, None]
             * (scale * np.exp(1j * c_out * x2 ** 2))[None, :])
    return field.replace(g, dx=dx2, dy=dy2)


def bessel_envelope(v):
    """``2 J1(v) / v`` with the series limit near ``v = 0``."""
    v = np.asarray(v, dtype=float)
    small = np.abs(v) < 1e-2
    safe = np.where(small, 1.0, v)
    series = 1 - v ** 2 / 8 + v ** 4 / 192
    return np.where(small, series, 2 * j1(safe) / safe)


def analytic_two_pinhole_intensity(u, x, I0, a, b):
    """Ideal far-field pattern ``I0 (2 J1(a u) / (a u))^2 cos^2(b x)``."""
    if np.any(np.asarray(I0) < 0):
        raise ValueError("I0 must be non-negative")
    return I0 * bessel_envelope(np.multiply(a, u)) ** 2 * np.cos(np.multiply(b, x)) ** 2


def image_through_lens(field_at_wire_plane: SampledField,
                       geom: ExperimentGeometry) -> SampledField:
    """Carry the wire-plane field through the lens to the image plane.

    The wire-plane field is taken to diverge from the pinhole plane, i.e. to
    carry a spherical phase of radius ``geom.grid_distance``; this holds for
    any field produced by :func:`propagate_fresnel` from the aperture.
    """
    f = field_at_wire_plane
    leg1 = geom.lens_object_distance - geom.grid_distance
    at_lens = propagate_curved(f, leg1, geom.grid_distance)
    after = apply_thin_lens(at_lens, geom.lens_focal_length,
                            geom.lens_aperture_diameter)
    image = propagate_fresnel(after, geom.lens_image_distance)

    need = geom.magnification * geom.pinhole_separation / 2 + geom.detector_radius
    half = image.nx * image.dx / 2
    if half < need:
        raise SamplingError(
            f"image window half-width {half:.4g} m cannot hold the detectors "
            f"(need {need:.4g} m)")
    log.debug("image plane pitch %.4g m, window %.4g m", image.dx, 2 * half)
    return image.replace(plane_label="image")
