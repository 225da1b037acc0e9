"""
JSON scene configuration.

Example::

    {
      "length_unit": "cm",
      "environment": {"omega": 1e10, "temperature": 0},
      "objects": [
        {"type": "sphere", "center": [0, 0, 0], "radius": "1e-5",
         "conductivity": {"si_S_per_m": 1.6e7}}
      ],
      "analysis": {"L": 8, "resolution": 40}
    }

``environment`` takes exactly one of ``omega`` (rad/s) or ``frequency_hz``.
Each conductivity is an object with exactly one unit tag, ``si_S_per_m`` or
``cgs_per_s``. Lengths use ``length_unit`` (``cm``, ``um`` or ``nm``), given
per object or once at the top level. Boxes take ``size`` (three full edge
lengths) instead of ``radius``. Numbers may be JSON numbers or numeric
strings. Unknown keys are rejected.
"""

import json
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import ConfigError, DomainError
from .scene import BoxPrimitive, Environment, Material, Scene, SpherePrimitive

__all__ = ["AnalysisDefaults", "LENGTH_UNITS", "load_config", "parse_config"]

LENGTH_UNITS = {"cm": 1.0, "um": 1e-4, "nm": 1e-7}
CONDUCTIVITY_UNITS = ("si_S_per_m", "cgs_per_s")


@dataclass(frozen=True)
class AnalysisDefaults:
    L: int = 8
    resolution: int = 40


def _number(value, path):
    if isinstance(value, bool):
        raise ConfigError(path, f"expected a number, got {value!r}")
    if isinstance(value, (int, float)):
        out = float(value)
    elif isinstance(value, str):
        try:
            out = float(value.strip())
        except ValueError:
            raise ConfigError(path, f"malformed number {value!r}") from None
    else:
        raise ConfigError(path, f"expected a number, got {type(value).__name__}")
    if not math.isfinite(out):
        raise ConfigError(path, f"number must be finite, got {value!r}")
    return out


def _vector(value, path):
    if not isinstance(value, list) or len(value) != 3:
        raise ConfigError(path, "expected a list of three numbers")
    return np.array([_number(v, f"{path}[{i}]") for i, v in enumerate(value)])


def _mapping(value, path, allowed, required=()):
    if not isinstance(value, dict):
        raise ConfigError(path, "expected an object")
    for key in value:
        if key not in allowed:
            raise ConfigError(f"{path}.{key}", "unknown key")
    for key in required:
        if key not in value:
            raise ConfigError(f"{path}.{key}", "missing required key")
    return value


def _length_scale(unit, path):
    if unit not in LENGTH_UNITS:
        raise ConfigError(path, f"length unit must be one of {sorted(LENGTH_UNITS)}, got {unit!r}")
    return LENGTH_UNITS[unit]


def _environment(doc, path):
    doc = _mapping(doc, path, {"omega", "frequency_hz", "temperature"})
    given = [k for k in ("omega", "frequency_hz") if k in doc]
    if len(given) != 1:
        raise ConfigError(path, "give exactly one of 'omega' or 'frequency_hz'")
    key = given[0]
    omega = _number(doc[key], f"{path}.{key}")
    if key == "frequency_hz":
        omega *= 2.0 * math.pi
    temperature = _number(doc.get("temperature", 0.0), f"{path}.temperature")
    try:
        return Environment(omega, temperature)
    except DomainError as exc:
        raise ConfigError(path, str(exc)) from None


def _material(doc, path):
    if not isinstance(doc, dict):
        raise ConfigError(path, f"conductivity needs a unit tag: one of {list(CONDUCTIVITY_UNITS)}")
    _mapping(doc, path, set(CONDUCTIVITY_UNITS))
    if len(doc) != 1:
        raise ConfigError(path, f"conductivity needs exactly one unit tag from {list(CONDUCTIVITY_UNITS)}")
    (tag, raw), = doc.items()
    value = _number(raw, f"{path}.{tag}")
    try:
        return Material.from_si(value) if tag == "si_S_per_m" else Material(value)
    except DomainError as exc:
        raise ConfigError(f"{path}.{tag}", str(exc)) from None


def _object(doc, path, default_unit):
    common = {"type", "center", "conductivity", "length_unit"}
    if not isinstance(doc, dict) or "type" not in doc:
        raise ConfigError(f"{path}.type", "missing object type")
    kind = doc["type"]
    if kind == "sphere":
        _mapping(doc, path, common | {"radius"}, ("center", "radius", "conductivity"))
    elif kind == "box":
        _mapping(doc, path, common | {"size"}, ("center", "size", "conductivity"))
    else:
        raise ConfigError(f"{path}.type", f"object type must be 'sphere' or 'box', got {kind!r}")

    unit = doc.get("length_unit", default_unit)
    if unit is None:
        raise ConfigError(f"{path}.length_unit", "lengths need a unit tag (cm, um or nm)")
    scale = _length_scale(unit, f"{path}.length_unit")
    center = _vector(doc["center"], f"{path}.center") * scale
    material = _material(doc["conductivity"], f"{path}.conductivity")
    try:
        if kind == "sphere":
            return SpherePrimitive(center, _number(doc["radius"], f"{path}.radius") * scale, material)
        return BoxPrimitive(center, _vector(doc["size"], f"{path}.size") * scale, material)
    except DomainError as exc:
        raise ConfigError(path, str(exc)) from None


def _overlap(a, b):
    """Exact intersection test for sphere and box primitives."""
    if isinstance(a, BoxPrimitive) and isinstance(b, SpherePrimitive):
        a, b = b, a
    if isinstance(a, SpherePrimitive) and isinstance(b, SpherePrimitive):
        return np.linalg.norm(a.center - b.center) < a.radius + b.radius
    if isinstance(a, SpherePrimitive):
        return b.local_sdf(a.center - b.center) > -a.radius
    gap = np.abs(a.center - b.center) - 0.5 * (a.size + b.size)
    return bool(np.all(gap < 0))


def parse_config(doc):
    """Validate a decoded JSON document; returns ``(Scene, AnalysisDefaults)``."""
    doc = _mapping(doc, "$", {"length_unit", "environment", "objects", "analysis"}, ("environment", "objects"))
    default_unit = doc.get("length_unit")
    if default_unit is not None:
        _length_scale(default_unit, "$.length_unit")
    env = _environment(doc["environment"], "$.environment")
    if not isinstance(doc["objects"], list) or not doc["objects"]:
        raise ConfigError("$.objects", "expected a non-empty list of objects")
    objects = [_object(o, f"$.objects[{i}]", default_unit) for i, o in enumerate(doc["objects"])]
    for i in range(len(objects)):
        for j in range(i + 1, len(objects)):
            if _overlap(objects[i], objects[j]):
                raise ConfigError(f"$.objects[{j}]", f"overlaps object {i}")

    analysis = _mapping(doc.get("analysis", {}), "$.analysis", {"L", "resolution"})
    defaults = AnalysisDefaults()
    values = {}
    for key in ("L", "resolution"):
        if key in analysis:
            v = _number(analysis[key], f"$.analysis.{key}")
            if v != int(v) or v < 1:
                raise ConfigError(f"$.analysis.{key}", f"expected a positive integer, got {analysis[key]!r}")
            values[key] = int(v)
    defaults = AnalysisDefaults(**{**defaults.__dict__, **values})
    return Scene(env, objects), defaults


def load_config(path):
    """Read and parse a JSON config file."""
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(str(path), f"cannot read config: {exc.strerror}") from None
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(str(path), f"invalid JSON at line {exc.lineno}: {exc.msg}") from None
    return parse_config(doc)
