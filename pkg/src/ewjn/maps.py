"""
Planar maps of tensor entries, written as CSV plus an 8-bit PGM heatmap.

Grid coordinates are measured from the center of the first scene object in
units of its bounding radius ``a``. Samples closer than ``mask * a`` to any
object center (scaled by that object's radius) are masked and never
evaluated.
"""

import math
import os
import re
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np

from . import multipole
from .errors import DomainError
from .integral import QuadratureConfig, f_tensor_numeric, f_tensor_numeric_many
from .scene import SpherePrimitive, object_center, skin_depth, validate_regime

__all__ = ["GridSpec", "MapJob", "MapResult", "run_map", "thread_count"]

AXES = "xyz"
_QUANTITY = re.compile(r"^(F|NCF)_([xyz])([xyz])(_r6)?$")


def thread_count():
    """Worker count from ``EWJN_THREADS``, defaulting to the CPU count."""
    raw = os.environ.get("EWJN_THREADS", "").strip()
    if raw:
        try:
            n = int(raw)
        except ValueError:
            raise DomainError(f"EWJN_THREADS must be a positive integer, got {raw!r}") from None
        if n < 1:
            raise DomainError(f"EWJN_THREADS must be a positive integer, got {raw!r}")
        return n
    return os.cpu_count() or 1


@dataclass(frozen=True)
class GridSpec:
    """Square sample grid in the plane ``normal = offset`` (offset in units of a)."""

    normal: str = "y"
    offset: float = 0.0
    extent: float = 5.5
    samples: int = 220
    mask: float = 1.05

    def __post_init__(self):
        if self.normal not in AXES:
            raise DomainError(f"plane normal must be x, y or z, got {self.normal!r}")
        if int(self.samples) != self.samples or self.samples < 2:
            raise DomainError(f"samples must be an integer >= 2, got {self.samples}")
        if not self.extent > 0:
            raise DomainError(f"extent must be positive, got {self.extent}")
        if not self.mask >= 1.0:
            raise DomainError(f"mask radius must be >= 1.0, got {self.mask}")

    @property
    def in_plane(self):
        """The two in-plane axis indices, e.g. ``(0, 2)`` for the x-z plane."""
        return tuple(i for i in range(3) if AXES[i] != self.normal)


@dataclass(frozen=True)
class MapJob:
    """What to map.

    ``quantity`` is ``F_ij``, ``F_ij_r6`` (times ``(r r' / a^2)^3``, which is
    ``(r/a)^6`` for local maps) or ``NCF_ij`` in erg s / cm^3. ``src`` is the
    fixed source point in cm for nonlocal maps.
    """

    quantity: str = "F_zz"
    mode: str = "local"
    src: Optional[tuple] = None
    engine: str = "multipole"
    L: int = 5
    resolution: int = 40

    def __post_init__(self):
        if not _QUANTITY.match(self.quantity) or self.quantity.startswith("NCF") and self.quantity.endswith("_r6"):
            raise DomainError(f"unknown quantity {self.quantity!r}; use F_ij, F_ij_r6 or NCF_ij")
        if self.mode not in ("local", "nonlocal"):
            raise DomainError(f"mode must be 'local' or 'nonlocal', got {self.mode!r}")
        if self.mode == "nonlocal" and self.src is None:
            raise DomainError("nonlocal maps need a source point")
        if self.engine not in ("multipole", "integral"):
            raise DomainError(f"engine must be 'multipole' or 'integral', got {self.engine!r}")

    @property
    def component(self):
        m = _QUANTITY.match(self.quantity)
        return AXES.index(m.group(2)), AXES.index(m.group(3))

    @property
    def physical(self):
        return self.quantity.startswith("NCF")

    @property
    def r6(self):
        return self.quantity.endswith("_r6")


@dataclass
class MapResult:
    u: np.ndarray  # first in-plane coordinate, units of a
    v: np.ndarray  # second in-plane coordinate, units of a
    values: np.ndarray  # (len(v), len(u)), NaN where masked; row 0 is the largest v
    header: list = field(default_factory=list)
    axis_names: tuple = ("x", "z")
    symmetric: bool = False

    @property
    def mask(self):
        return np.isnan(self.values)

    def scaling(self):
        """``(lo, hi)`` mapped to intensities 0 and 255."""
        vals = self.values[~self.mask]
        if vals.size == 0:
            return 0.0, 1.0
        if self.symmetric:
            m = float(np.abs(vals).max())
            return -m, m
        return float(vals.min()), float(vals.max())

    def intensities(self):
        lo, hi = self.scaling()
        span = hi - lo
        out = np.zeros(self.values.shape, dtype=np.uint8)
        if span > 0:
            scaled = np.rint((self.values[~self.mask] - lo) / span * 255.0)
            out[~self.mask] = np.clip(scaled, 0, 255).astype(np.uint8)
        return out

    def write_csv(self, path):
        a, b = self.axis_names
        lines = [f"# {h}" for h in self.header]
        lo, hi = self.scaling()
        lines.append(f"# heatmap: intensity = 255 * (value - {lo:.9e}) / ({hi:.9e} - {lo:.9e})")
        lines.append(f"{a},{b},value")
        for row, vv in enumerate(self.v):
            for col, uu in enumerate(self.u):
                val = self.values[row, col]
                lines.append(f"{uu:.6f},{vv:.6f}," + ("" if math.isnan(val) else f"{val:.9e}"))
        Path(path).write_text("\n".join(lines) + "\n")

    def write_pgm(self, path):
        img = self.intensities()
        head = f"P5\n{img.shape[1]} {img.shape[0]}\n255\n".encode("ascii")
        Path(path).write_bytes(head + img.tobytes())


def _reference(scene):
    obj = scene.objects[0]
    return np.asarray(object_center(obj), dtype=float), float(obj.bounding_radius)


def _masked(scene, points, mask_factor):
    hit = np.zeros(points.shape[:-1], dtype=bool)
    for obj in scene.objects:
        r = np.linalg.norm(points - object_center(obj), axis=-1)
        hit |= r <= mask_factor * obj.bounding_radius
    return hit


def _object_scale(obj, scene, physical):
    """Factor turning an object's dimensionless tensor into the requested units."""
    if not physical:
        return 1.0
    env = scene.environment
    delta = skin_depth(obj.material, env)
    pref = 8.0 * math.pi * multipole.HBAR / (delta * delta * obj.bounding_radius)
    return pref * multipole.coth_factor(env.omega, env.temperature)


def _multipole_block(scene, pts, src, L, physical):
    total = np.zeros(pts.shape[:-1] + (3, 3))
    for obj in scene.objects:
        c = obj.center
        xs = pts - c
        ss = xs if src is None else np.broadcast_to(np.asarray(src) - c, xs.shape)
        total += _object_scale(obj, scene, physical) * multipole.f_tensor_batch(xs, ss, obj.radius, L)
    return total


def _integral_tensors(scene, pts, src, resolution, physical):
    cfg = QuadratureConfig(resolution=resolution)
    total = np.zeros((len(pts), 3, 3))
    for obj in scene.objects:
        scale = _object_scale(obj, scene, physical)
        if src is None:
            F = np.array([f_tensor_numeric(p, p, obj, config=cfg).values for p in pts])
        else:
            F = f_tensor_numeric_many(pts, src, obj, config=cfg)
        total += scale * F
    return total


def _inside(obj, point):
    shape = getattr(obj, "primitive", obj)
    if shape is None:
        return bool(obj.contains(point)[0])
    return bool(shape.local_sdf(np.asarray(point) - shape.center) >= 0)


def _fmt(p):
    return "(" + ", ".join(f"{float(c):.6g}" for c in p) + ")"


def _check_source(scene, src):
    for k, obj in enumerate(scene.objects):
        if _inside(obj, src):
            raise DomainError(f"source point {_fmt(src)} lies inside object {k}")


def run_map(scene, job, grid=GridSpec(), out_prefix=None):
    """Evaluate a map; writes ``<prefix>.csv`` and ``<prefix>.pgm`` when a prefix is given."""
    center, a = _reference(scene)
    iu, iv = grid.in_plane
    coords = np.linspace(-grid.extent, grid.extent, grid.samples)
    u, v = coords, coords[::-1]
    pts = np.zeros((len(v), len(u), 3))
    pts[..., iu] = u[None, :]
    pts[..., iv] = v[:, None]
    pts[..., AXES.index(grid.normal)] = grid.offset
    pts = center + pts * a
    mask = _masked(scene, pts, grid.mask)

    src = None
    if job.mode == "nonlocal":
        src = np.asarray(job.src, dtype=float)
        _check_source(scene, src)
    if job.engine == "multipole" and not all(isinstance(o, SpherePrimitive) for o in scene.objects):
        raise DomainError("the multipole engine handles spheres only; use the integral engine")

    flat = pts[~mask]
    i, j = job.component
    if job.engine == "multipole":
        blocks = np.array_split(np.arange(len(flat)), max(1, min(len(flat), 4 * thread_count())))
        with ThreadPoolExecutor(max_workers=thread_count()) as pool:
            parts = list(pool.map(lambda b: _multipole_block(scene, flat[b], src, job.L, job.physical), blocks))
        tensors = np.concatenate(parts) if parts else np.zeros((0, 3, 3))
    else:
        tensors = _integral_tensors(scene, flat, src, job.resolution, job.physical)

    vals = tensors[:, i, j]
    if job.r6:
        r = np.linalg.norm(flat - center, axis=1) / a
        rs = r if src is None else np.linalg.norm(src - center) / a
        vals = vals * (r * rs) ** 3

    values = np.full(mask.shape, np.nan)
    values[~mask] = vals

    header = [
        f"quantity: {job.quantity}",
        f"mode: {job.mode}",
        f"engine: {job.engine}",
        f"L: {job.L}" if job.engine == "multipole" else f"resolution: {job.resolution}",
        f"source_cm: {'none' if src is None else ','.join(f'{c:.9e}' for c in src)}",
        f"reference_center_cm: {','.join(f'{c:.9e}' for c in center)}",
        f"a_cm: {a:.9e}",
        f"plane: {grid.normal}={grid.offset}a, extent +-{grid.extent}a, samples {grid.samples}, mask {grid.mask}a",
        "units: " + ("erg s / cm^3" if job.physical else "dimensionless"),
    ]
    if job.physical:
        report = validate_regime(scene, np.concatenate([flat, [src]]) if src is not None else flat)
        header += [f"regime {line}" for line in report.lines()]

    signed = job.mode == "nonlocal" or (vals.size and vals.min() < 0)
    result = MapResult(u, v, values, header, (AXES[iu], AXES[iv]), bool(signed))
    if out_prefix is not None:
        Path(out_prefix).parent.mkdir(parents=True, exist_ok=True)
        result.write_csv(f"{out_prefix}.csv")
        result.write_pgm(f"{out_prefix}.pgm")
    return result
