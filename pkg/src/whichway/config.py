"""Flat key-value run configuration (YAML or JSON).

Every key is optional; unknown keys are rejected. Geometry keys are the
field names of :class:`~whichway.elements.ExperimentGeometry` (meters);
the remaining keys are those of
:class:`~whichway.scenarios.SimulationOptions`. Example::

    wire_thickness: 127.0e-6
    lens_object_distance: 0.70
    lens_image_distance: 2.80
    grid_n: 2048
    mode: 2d
    seed: 7
"""
from __future__ import annotations

import dataclasses
from pathlib import Path

import yaml

from .elements import ExperimentGeometry
from .scenarios import SimulationOptions

GEOMETRY_KEYS = {f.name for f in dataclasses.fields(ExperimentGeometry)}
OPTION_KEYS = {f.name for f in dataclasses.fields(SimulationOptions)}


def split_config(values: dict) -> tuple:
    """Split a flat mapping into (geometry kwargs, option kwargs)."""
    unknown = set(values) - GEOMETRY_KEYS - OPTION_KEYS
    if unknown:
        raise ValueError(f"unknown config keys: {sorted(unknown)}")
    geom = {k: _coerce(ExperimentGeometry, k, v) for k, v in values.items()
            if k in GEOMETRY_KEYS}
    opts = {k: _coerce(SimulationOptions, k, v) for k, v in values.items()
            if k in OPTION_KEYS}
    return geom, opts


def _coerce(cls, key, value):
    # PyYAML reads "1e-6" (no decimal point) as a string
    default = next(f.default for f in dataclasses.fields(cls) if f.name == key)
    if value is None:
        return None
    if default is None:
        return float(value)
    if isinstance(default, bool):
        if isinstance(value, str):
            word = value.strip().lower()
            if word not in ("1", "true", "yes", "on", "0", "false", "no", "off"):
                raise ValueError(f"{key}: cannot read {value!r} as a boolean")
            return word in ("1", "true", "yes", "on")
        return bool(value)
    if isinstance(default, int):
        return int(value)
    if isinstance(default, float):
        return float(value)
    return value


def load_config(path) -> tuple:
    """Read a config file; returns (geometry kwargs, option kwargs)."""
    path = Path(path)
    with path.open() as fh:
        values = yaml.safe_load(fh) or {}
    if not isinstance(values, dict):
        raise ValueError(f"{path}: expected a flat key-value mapping")
    for k, v in values.items():
        if isinstance(v, (dict, list)):
            raise ValueError(f"{path}: key {k!r} must hold a scalar")
    return split_config(values)


def build(path=None, geometry_overrides=None, option_overrides=None):
    """Defaults, then config file, then explicit overrides."""
    geom_kw, opt_kw = load_config(path) if path else ({}, {})
    geom_kw.update(geometry_overrides or {})
    opt_kw.update({k: v for k, v in (option_overrides or {}).items()
                   if v is not None})
    if "lens_focal_length" not in geom_kw and (
            "lens_object_distance" in geom_kw or "lens_image_distance" in geom_kw):
        geom_kw["lens_focal_length"] = None
    return ExperimentGeometry(**geom_kw), SimulationOptions(**opt_kw)
