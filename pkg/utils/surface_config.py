"""
Surface configuration files.

A surface configuration is a JSON object describing one Kummer surface:

    {
      "lattice_scale": 8.0,
      "a": 0.05,                 # one value for every neck, or a list of 16
      "delta": 0.1,
      "lattice": "square",       # or "hexagonal"
      "cutoff_scale": 1.0
    }

Every key is optional and falls back to configs.defaults; unknown keys and
values of the wrong type are rejected with ConfigError.
"""

import json
import logging
import os

from configs.defaults import DELTA, LATTICE_SCALE
from geometry.kummer import N_FIXED_POINTS, KummerSurface
from utils.error_handler import ConfigError

ALLOWED_KEYS = {"lattice_scale", "a", "delta", "lattice", "cutoff_scale"}


def load_json(path: str) -> dict:
    if not os.path.exists(path):
        raise ConfigError(f"{path}: no such file")
    with open(path, "r", encoding="utf-8") as f:
        try:
            payload = json.load(f)
        except json.JSONDecodeError as e:
            raise ConfigError(f"{path}: invalid JSON ({e})") from e
    if not isinstance(payload, dict):
        raise ConfigError(f"{path}: root must be an object")
    return payload


def _number(payload: dict, key: str, default: float) -> float:
    value = payload.get(key, default)
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"'{key}' must be a number, got {value!r}")
    return float(value)


def _a_values(payload: dict) -> tuple:
    value = payload.get("a", 0.0)
    if isinstance(value, list):
        if len(value) != N_FIXED_POINTS:
            raise ConfigError(f"'a' must list {N_FIXED_POINTS} values, got {len(value)}")
        items = value
    else:
        items = [value] * N_FIXED_POINTS
    for item in items:
        if isinstance(item, bool) or not isinstance(item, (int, float)):
            raise ConfigError(f"'a' entries must be numbers, got {item!r}")
    return tuple(float(x) for x in items)


def surface_from_dict(payload: dict) -> KummerSurface:
    unknown = set(payload) - ALLOWED_KEYS
    if unknown:
        raise ConfigError(f"unknown surface keys: {', '.join(sorted(unknown))}")
    lattice = payload.get("lattice", "square")
    if not isinstance(lattice, str):
        raise ConfigError(f"'lattice' must be a string, got {lattice!r}")
    return KummerSurface(
        lattice_scale=_number(payload, "lattice_scale", LATTICE_SCALE),
        a=_a_values(payload),
        delta=_number(payload, "delta", DELTA),
        lattice=lattice,
        cutoff_scale=_number(payload, "cutoff_scale", 1.0),
    )


def load_surface_config(path: str) -> KummerSurface:
    surface = surface_from_dict(load_json(path))
    logging.info(
        f"Loaded surface from {path}: R={surface.lattice_scale}, lattice={surface.lattice}, "
        f"delta={surface.delta}, |a|^2={surface.a_norm_squared:.6g}"
    )
    return surface
