"""
Physical environment and geometry.

Everything inside the package is Gaussian CGS: lengths in cm, conductivity in
s^-1, fields in gauss, energies in erg. SI input is accepted only through
:func:`si_to_cgs_conductivity` and the config parser.
"""

import math
import warnings
from dataclasses import dataclass, field
from functools import cached_property
from typing import Optional, Sequence, Union

import numpy as np
from scipy import constants as _si
from scipy import ndimage

from .errors import DomainError, OverlapWarning

__all__ = [
    "BOLTZMANN",
    "BOHR_MAGNETON",
    "HBAR",
    "LIGHT_SPEED",
    "SI_TO_CGS_CONDUCTIVITY",
    "BoxPrimitive",
    "Environment",
    "Material",
    "ObjectCheck",
    "RegimeReport",
    "Scene",
    "SpherePrimitive",
    "VoxelObject",
    "si_to_cgs_conductivity",
    "skin_depth",
    "vacuum_wavelength",
    "validate_regime",
    "voxelize",
]

HBAR = _si.hbar * 1e7  # erg s
LIGHT_SPEED = _si.c * 1e2  # cm / s
BOLTZMANN = _si.k * 1e7  # erg / K
BOHR_MAGNETON = _si.physical_constants["Bohr magneton"][0] * 1e3  # erg / G
#: sigma[s^-1] = sigma[S/m] / (4 pi eps0), i.e. 8.98755e9 per S/m
SI_TO_CGS_CONDUCTIVITY = 1.0 / (4.0 * math.pi * _si.epsilon_0)

#: Query points farther than this fraction of the vacuum wavelength get a warning.
QUASISTATIC_RATIO = 0.05
#: Shell integration is recommended when the skin depth is below a_min / SHELL_FACTOR.
SHELL_FACTOR = 3.0


def si_to_cgs_conductivity(sigma_si):
    """Convert a conductivity from S/m to Gaussian s^-1."""
    if not sigma_si > 0:
        raise DomainError(f"conductivity must be positive, got {sigma_si} S/m")
    return sigma_si * SI_TO_CGS_CONDUCTIVITY


@dataclass(frozen=True)
class Environment:
    """Angular frequency ``omega`` (s^-1) and temperature (K)."""

    omega: float
    temperature: float = 0.0

    def __post_init__(self):
        if not (math.isfinite(self.omega) and self.omega > 0):
            raise DomainError(f"omega must be positive, got {self.omega}")
        if not (math.isfinite(self.temperature) and self.temperature >= 0):
            raise DomainError(f"temperature must be >= 0 K, got {self.temperature}")


@dataclass(frozen=True)
class Material:
    sigma_cgs: float

    def __post_init__(self):
        if not (math.isfinite(self.sigma_cgs) and self.sigma_cgs > 0):
            raise DomainError(f"conductivity must be positive, got {self.sigma_cgs} s^-1")

    @classmethod
    def from_si(cls, sigma_si):
        return cls(si_to_cgs_conductivity(sigma_si))


def skin_depth(material, environment):
    """Skin depth ``c / sqrt(2 pi sigma omega)`` in cm."""
    return LIGHT_SPEED / math.sqrt(2.0 * math.pi * material.sigma_cgs * environment.omega)


def vacuum_wavelength(environment):
    """Vacuum wavelength ``2 pi c / omega`` in cm."""
    return 2.0 * math.pi * LIGHT_SPEED / environment.omega


def _vec3(v, name):
    v = np.asarray(v, dtype=float)
    if v.shape != (3,) or not np.all(np.isfinite(v)):
        raise DomainError(f"{name} must be a finite 3-vector, got {v!r}")
    return v


@dataclass(frozen=True, eq=False)
class SpherePrimitive:
    center: np.ndarray
    radius: float
    material: Material

    def __post_init__(self):
        object.__setattr__(self, "center", _vec3(self.center, "center"))
        if not (math.isfinite(self.radius) and self.radius > 0):
            raise DomainError(f"sphere radius must be positive, got {self.radius}")

    @property
    def bounding_radius(self):
        return self.radius

    @property
    def min_radius(self):
        return self.radius

    @property
    def volume(self):
        return 4.0 / 3.0 * math.pi * self.radius**3

    @property
    def half_extent(self):
        return np.full(3, self.radius)

    def local_sdf(self, local):
        """Signed distance to the surface, positive inside; ``local`` is center-relative."""
        return self.radius - np.linalg.norm(local, axis=-1)


@dataclass(frozen=True, eq=False)
class BoxPrimitive:
    """Axis-aligned rectangular box with full edge lengths ``size``."""

    center: np.ndarray
    size: np.ndarray
    material: Material

    def __post_init__(self):
        object.__setattr__(self, "center", _vec3(self.center, "center"))
        size = _vec3(self.size, "size")
        if np.any(size <= 0):
            raise DomainError(f"box edge lengths must be positive, got {size}")
        object.__setattr__(self, "size", size)

    @property
    def bounding_radius(self):
        return 0.5 * float(np.linalg.norm(self.size))

    @property
    def min_radius(self):
        return 0.5 * float(self.size.min())

    @property
    def volume(self):
        return float(np.prod(self.size))

    @property
    def half_extent(self):
        return 0.5 * self.size

    def local_sdf(self, local):
        d = np.abs(local) - 0.5 * self.size
        outside = np.linalg.norm(np.maximum(d, 0.0), axis=-1)
        inside = np.minimum(d.max(axis=-1), 0.0)
        return -(outside + inside)


Primitive = Union[SpherePrimitive, BoxPrimitive]


@dataclass(frozen=True, eq=False)
class VoxelObject:
    """Axis-aligned voxel decomposition of a metal body.

    Voxels live on a regular grid with cubic cells of edge ``edge``; cell
    ``(i, j, k)`` has center ``origin + (index + 0.5) * edge``. ``primitive``
    is kept when the object came from :func:`voxelize`, so the integration
    engine can resolve the true boundary inside cut cells; ``local_origin`` is
    then the grid origin relative to the primitive center. ``shell_thickness``
    is set by :func:`ewjn.integral.shell_voxels`.
    """

    indices: np.ndarray
    edge: float
    origin: np.ndarray
    material: Material
    primitive: Optional[Primitive] = None
    shell_thickness: Optional[float] = None
    local_origin: Optional[np.ndarray] = None

    def __post_init__(self):
        idx = np.asarray(self.indices, dtype=np.int64).reshape(-1, 3)
        if len(idx) == 0:
            raise DomainError("voxel object has no voxels")
        if not self.edge > 0:
            raise DomainError(f"voxel edge must be positive, got {self.edge}")
        object.__setattr__(self, "indices", idx)
        object.__setattr__(self, "origin", _vec3(self.origin, "origin"))

    @property
    def centers(self):
        return self.origin + (self.indices + 0.5) * self.edge

    @property
    def volumes(self):
        return np.full(len(self.indices), self.edge**3)

    @property
    def total_volume(self):
        return len(self.indices) * self.edge**3

    @cached_property
    def reference_point(self):
        """Primitive center when known, otherwise the voxel centroid."""
        if self.primitive is not None:
            return self.primitive.center
        return self.centers.mean(axis=0)

    @cached_property
    def bounding_radius(self):
        if self.primitive is not None:
            return self.primitive.bounding_radius
        corner = 0.5 * math.sqrt(3.0) * self.edge
        return float(np.linalg.norm(self.centers - self.reference_point, axis=1).max() + corner)

    @cached_property
    def min_radius(self):
        if self.primitive is not None:
            return self.primitive.min_radius
        return float(self.boundary_distance().max())

    def occupancy(self):
        """Boolean grid (padded by one empty cell) and the index offset used."""
        lo = self.indices.min(axis=0) - 1
        shape = self.indices.max(axis=0) - lo + 2
        grid = np.zeros(shape, dtype=bool)
        rel = self.indices - lo
        grid[rel[:, 0], rel[:, 1], rel[:, 2]] = True
        return grid, lo

    def boundary_distance(self):
        """Distance from each voxel center to the voxel-set surface."""
        grid, lo = self.occupancy()
        dist = ndimage.distance_transform_edt(grid) * self.edge
        rel = self.indices - lo
        return dist[rel[:, 0], rel[:, 1], rel[:, 2]] - 0.5 * self.edge

    def contains(self, points):
        """True where ``points`` fall in an occupied cell."""
        points = np.asarray(points, dtype=float).reshape(-1, 3)
        cell = np.floor((points - self.origin) / self.edge).astype(np.int64)
        grid, lo = self.occupancy()
        rel = cell - lo
        ok = np.all((rel >= 0) & (rel < np.array(grid.shape)), axis=1)
        out = np.zeros(len(points), dtype=bool)
        out[ok] = grid[rel[ok, 0], rel[ok, 1], rel[ok, 2]]
        return out


SceneObject = Union[SpherePrimitive, BoxPrimitive, VoxelObject]


def object_center(obj):
    return obj.reference_point if isinstance(obj, VoxelObject) else obj.center


@dataclass(frozen=True)
class Scene:
    environment: Environment
    objects: Sequence[SceneObject] = field(default_factory=tuple)

    def __post_init__(self):
        object.__setattr__(self, "objects", tuple(self.objects))
        for a, b in _overlapping_bounds(self.objects):
            warnings.warn(
                f"bounding spheres of objects {a} and {b} intersect", OverlapWarning, stacklevel=3
            )


def _overlapping_bounds(objects):
    pairs = []
    for i in range(len(objects)):
        for j in range(i + 1, len(objects)):
            d = np.linalg.norm(object_center(objects[i]) - object_center(objects[j]))
            if d < objects[i].bounding_radius + objects[j].bounding_radius:
                pairs.append((i, j))
    return pairs


@dataclass(frozen=True)
class ObjectCheck:
    index: int
    bounding_radius: float
    min_radius: float
    skin_depth: float
    small_object: bool  # a_m < delta
    skin_below_wavelength: bool  # delta < lambda
    max_distance_ratio: float  # max |x - center| / lambda over the query points
    quasistatic_distance: bool
    shell_recommended: bool  # delta < a_min / SHELL_FACTOR

    @property
    def status(self):
        if not (self.small_object and self.skin_below_wavelength):
            return "fail"
        if not self.quasistatic_distance:
            return "warn"
        return "pass"


@dataclass(frozen=True)
class RegimeReport:
    wavelength: float
    objects: tuple
    not_checked: tuple = (
        "omega*tau << 1 (frequency-independent conductivity)",
        "electron mean free path << a_m (local conduction)",
    )

    @property
    def status(self):
        states = {o.status for o in self.objects}
        for level in ("fail", "warn"):
            if level in states:
                return level
        return "pass"

    def lines(self):
        """Human-readable summary, one item per line."""
        out = [f"overall: {self.status}", f"vacuum wavelength: {self.wavelength:.6g} cm"]
        for o in self.objects:
            out.append(
                f"object {o.index}: {o.status}; a_m={o.bounding_radius:.6g} cm, "
                f"a_min={o.min_radius:.6g} cm, delta={o.skin_depth:.6g} cm, "
                f"a_m<delta={o.small_object}, delta<lambda={o.skin_below_wavelength}, "
                f"max|x|/lambda={o.max_distance_ratio:.3g}"
                + ("; shell integration recommended" if o.shell_recommended else "")
            )
        out.extend(f"not checked: {item}" for item in self.not_checked)
        return out


def validate_regime(scene, query_points=()):
    """Check the small-object, quasistatic and distance conditions per object."""
    lam = vacuum_wavelength(scene.environment)
    pts = np.asarray(query_points, dtype=float).reshape(-1, 3)
    checks = []
    for i, obj in enumerate(scene.objects):
        delta = skin_depth(obj.material, scene.environment)
        if len(pts):
            ratio = float(np.linalg.norm(pts - object_center(obj), axis=1).max() / lam)
        else:
            ratio = 0.0
        checks.append(
            ObjectCheck(
                index=i,
                bounding_radius=obj.bounding_radius,
                min_radius=obj.min_radius,
                skin_depth=delta,
                small_object=obj.bounding_radius < delta,
                skin_below_wavelength=delta < lam,
                max_distance_ratio=ratio,
                quasistatic_distance=ratio <= QUASISTATIC_RATIO,
                shell_recommended=delta < obj.min_radius / SHELL_FACTOR,
            )
        )
    return RegimeReport(wavelength=lam, objects=tuple(checks))


def voxelize(primitive, resolution):
    """Midpoint voxelization of a sphere or box.

    ``resolution`` is the number of voxels across the largest dimension. The
    grid is centered on the primitive and a voxel is kept when its center is
    inside. All inclusion tests use center-relative coordinates so that the
    voxel set does not depend on where the primitive sits.
    """
    if int(resolution) != resolution or resolution < 1:
        raise DomainError(f"resolution must be a positive integer, got {resolution}")
    resolution = int(resolution)
    half = primitive.half_extent
    edge = 2.0 * float(half.max()) / resolution
    counts = np.maximum(np.ceil(2.0 * half / edge - 1e-9).astype(np.int64), 1)
    local_origin = -0.5 * counts * edge
    idx = np.indices(counts).reshape(3, -1).T
    local = local_origin + (idx + 0.5) * edge
    inside = primitive.local_sdf(local) > 0
    if not inside.any():
        raise DomainError("no voxel center falls inside the primitive; increase resolution")
    return VoxelObject(
        indices=idx[inside],
        edge=edge,
        origin=primitive.center + local_origin,
        material=primitive.material,
        primitive=primitive,
        local_origin=local_origin,
    )
