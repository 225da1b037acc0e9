"""
Induced field of an arbitrary metal body by volume quadrature.

The fictitious dipole ``mu`` at ``x'`` drives the current density (up to the
constant ``i omega sigma / c``)

    J = mu x (x'' - x') / |x'' - x'|^3 + grad f,

where ``grad f`` makes ``J`` divergence free with no flux through the body
surface. The induced field is then the Biot-Savart integral

    B_ind(x) = (i / (2 pi delta^2)) int_V d^3x'' J(x'') x (x - x'') / |x - x''|^3.

Two current models are offered:

``"projected"`` (default)
    ``grad f`` is obtained from a trilinear finite-element Neumann solve on the
    voxel grid. The projection is the weighted L2-orthogonal projection onto
    discrete divergence-free fields, so exchange symmetry holds exactly.
``"kernel"``
    ``grad f`` is dropped and the bare kernel is summed with the one-point
    midpoint rule. This is cheap but overestimates the field by a large factor
    for compact bodies, because the bare kernel drives charge onto the surface.

With ``boundary="resolved"`` (the default whenever the body came from an
analytic primitive) cells cut by the surface are subsampled against the exact
signed distance, which gives second-order convergence. ``"staircase"`` uses
the voxel set as the body.
"""

import math
import warnings
from dataclasses import dataclass
from functools import lru_cache
from typing import Optional

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .errors import AccuracyWarning, ConvergenceWarning, DomainError
from .multipole import NoiseTensor
from .scene import BoxPrimitive, SpherePrimitive, VoxelObject, voxelize

__all__ = [
    "DipoleSource",
    "QuadratureConfig",
    "b_ind_integral",
    "dipole_field",
    "f_tensor_numeric",
    "f_tensor_numeric_many",
    "shell_voxels",
]

#: Midpoint subcells per axis in cells cut by the surface.
SUBCELLS = 3
CG_RTOL = 1e-10
CG_MAXITER = 20000


@dataclass(frozen=True)
class DipoleSource:
    position: np.ndarray
    moment: np.ndarray

    def __post_init__(self):
        pos = np.asarray(self.position, dtype=float)
        mu = np.asarray(self.moment, dtype=float)
        if pos.shape != (3,) or mu.shape != (3,):
            raise DomainError("dipole position and moment must be 3-vectors")
        if not (np.all(np.isfinite(pos)) and np.all(np.isfinite(mu))):
            raise DomainError("dipole position and moment must be finite")
        if not np.linalg.norm(mu) > 0:
            raise DomainError("dipole moment must be nonzero")
        object.__setattr__(self, "position", pos)
        object.__setattr__(self, "moment", mu)


@dataclass(frozen=True)
class QuadratureConfig:
    """Quadrature settings.

    ``resolution`` is voxels per largest diameter and only matters when an
    analytic primitive has to be voxelized. ``shell_thickness`` defaults to the
    skin depth in shell mode.
    """

    resolution: int = 40
    mode: str = "volume"
    shell_thickness: Optional[float] = None
    current: str = "projected"
    boundary: str = "auto"

    def __post_init__(self):
        if self.mode not in ("volume", "shell"):
            raise DomainError(f"mode must be 'volume' or 'shell', got {self.mode!r}")
        if self.current not in ("projected", "kernel"):
            raise DomainError(f"current must be 'projected' or 'kernel', got {self.current!r}")
        if self.boundary not in ("auto", "resolved", "staircase"):
            raise DomainError(f"unknown boundary treatment {self.boundary!r}")
        if int(self.resolution) != self.resolution or self.resolution < 1:
            raise DomainError(f"resolution must be a positive integer, got {self.resolution}")
        if self.mode == "volume" and self.resolution < 4:
            raise DomainError(f"volume mode needs resolution >= 4, got {self.resolution}")
        if self.shell_thickness is not None and not self.shell_thickness > 0:
            raise DomainError(f"shell thickness must be positive, got {self.shell_thickness}")


def dipole_field(x, source):
    """Static dipole field ``[3 d (d . mu) - mu |d|^2] / |d|^5`` with ``d = x - x'``."""
    d = np.asarray(x, dtype=float) - source.position
    r2 = float(d @ d)
    if r2 == 0.0:
        raise DomainError("field point coincides with the dipole")
    mu = source.moment
    return (3.0 * d * (d @ mu) - mu * r2) / r2**2.5


def _kernel(points, src, mu):
    """``mu x (q - src) / |q - src|^3`` for an array of points ``q``."""
    d = points - src
    return np.cross(mu, d) / np.linalg.norm(d, axis=-1)[..., None] ** 3


# ---------------------------------------------------------------- geometry


def _as_voxels(obj, resolution):
    if isinstance(obj, VoxelObject):
        return obj
    if isinstance(obj, (SpherePrimitive, BoxPrimitive)):
        return _voxelize_cached(obj, int(resolution))
    raise DomainError(f"cannot integrate over object of type {type(obj).__name__}")


@lru_cache(maxsize=32)
def _voxelize_cached(primitive, resolution):
    return voxelize(primitive, resolution)


def _frame(obj):
    """Origin of the local frame used for all geometry of ``obj``."""
    return obj.primitive.center if obj.primitive is not None else obj.origin


def _grid_offset(obj):
    """Position of grid corner (0, 0, 0) in the local frame."""
    return obj.local_origin if obj.primitive is not None else np.zeros(3)


def shell_voxels(obj, delta):
    """Voxels whose centers lie within ``delta`` of the body surface.

    Distances are measured against the analytic primitive when it is known
    and against the voxel-set surface otherwise.
    """
    if not delta > 0:
        raise DomainError(f"shell thickness must be positive, got {delta}")
    if delta < obj.edge:
        raise DomainError(
            f"shell thickness {delta:.4g} is below the voxel edge {obj.edge:.4g}; increase the resolution"
        )
    if obj.primitive is not None:
        local = _grid_offset(obj) + (obj.indices + 0.5) * obj.edge
        depth = obj.primitive.local_sdf(local)
    else:
        depth = obj.boundary_distance()
    keep = depth <= delta
    if not keep.any():
        raise DomainError("no voxel lies within the shell; increase the resolution")
    return VoxelObject(
        indices=obj.indices[keep],
        edge=obj.edge,
        origin=obj.origin,
        material=obj.material,
        primitive=obj.primitive,
        shell_thickness=float(delta),
        local_origin=obj.local_origin,
    )


# ------------------------------------------------------- trilinear elements

_CORNERS = np.array([[i, j, k] for i in (0, 1) for j in (0, 1) for k in (0, 1)])
_G = 0.5 / math.sqrt(3.0)
_GAUSS = 0.5 + np.array([[sx, sy, sz] for sx in (-_G, _G) for sy in (-_G, _G) for sz in (-_G, _G)])
_SUB = (np.indices((SUBCELLS,) * 3).reshape(3, -1).T + 0.5) / SUBCELLS


def _basis_gradients(local):
    """Gradients of the 8 trilinear shape functions at unit-cube points, ``(P, 8, 3)``."""
    local = np.asarray(local)[:, None, :]
    c = _CORNERS[None]
    f = np.where(c == 1, local, 1.0 - local)
    df = np.where(c == 1, 1.0, -1.0)
    return np.stack(
        [
            df[..., 0] * f[..., 1] * f[..., 2],
            f[..., 0] * df[..., 1] * f[..., 2],
            f[..., 0] * f[..., 1] * df[..., 2],
        ],
        axis=-1,
    )


_GRAD_GAUSS = _basis_gradients(_GAUSS)
_GRAD_SUB = _basis_gradients(_SUB)


@dataclass(frozen=True, eq=False)
class _Domain:
    points: np.ndarray  # local frame
    weights: np.ndarray
    grad: tuple = ()  # three sparse (P, N) matrices, empty for the kernel model
    stiffness: Optional[sp.csr_matrix] = None
    precond: Optional[sp.dia_matrix] = None
    edge: float = 0.0

    def project(self, field):
        """Add the discrete ``grad f`` that removes divergence and normal flux."""
        if self.stiffness is None:
            return field
        w = self.weights
        rhs = -sum(g.T @ (w * field[:, d]) for d, g in enumerate(self.grad))
        rhs -= rhs.mean()  # the Neumann operator annihilates constants
        f, info = spla.cg(self.stiffness, rhs, rtol=CG_RTOL, maxiter=CG_MAXITER, M=self.precond)
        if info != 0:
            warnings.warn("current projection did not converge", ConvergenceWarning, stacklevel=3)
        return field + np.stack([g @ f for g in self.grad], axis=1)


def _cells_and_points(obj, mode, thickness, boundary):
    """Quadrature cells (grid indices), points in unit-cell coordinates and weights."""
    h = obj.edge
    if boundary == "staircase":
        cells = obj.indices
        if mode == "shell":
            cells = shell_voxels(obj, thickness).indices
        n = len(cells)
        cell_of = np.repeat(np.arange(n), len(_GAUSS))
        unit = np.tile(_GAUSS, (n, 1))
        grads = np.tile(_GRAD_GAUSS, (n, 1, 1))
        weights = np.full(len(unit), h**3 / len(_GAUSS))
        return cells, cell_of, unit, grads, weights

    prim = obj.primitive
    offset = obj.local_origin
    counts = np.round(-2.0 * offset / h).astype(np.int64)
    cells = np.indices(counts).reshape(3, -1).T
    lo = offset + cells * h
    sdf_c = prim.local_sdf(lo + 0.5 * h)
    half_diag = 0.5 * math.sqrt(3.0) * h * (1 + 1e-9)
    corner_sdf = prim.local_sdf(lo[:, None, :] + _CORNERS[None] * h)
    if mode == "volume":
        full = np.all(corner_sdf >= 0, axis=1)
        touch = sdf_c > -half_diag
    else:
        full = np.all((corner_sdf >= 0) & (corner_sdf <= thickness), axis=1)
        touch = (sdf_c > -half_diag) & (sdf_c < thickness + half_diag)

    fi = np.nonzero(full)[0]
    ci = np.nonzero(touch & ~full)[0]
    sub_local = lo[ci][:, None, :] + _SUB[None] * h
    d = prim.local_sdf(sub_local)
    keep = d > 0 if mode == "volume" else (d > 0) & (d < thickness)
    kc, ks = np.nonzero(keep)

    cells = np.concatenate([cells[fi], cells[ci]])
    cell_of = np.concatenate([np.repeat(np.arange(len(fi)), len(_GAUSS)), len(fi) + kc])
    unit = np.concatenate([np.tile(_GAUSS, (len(fi), 1)), _SUB[ks]])
    grads = np.concatenate([np.tile(_GRAD_GAUSS, (len(fi), 1, 1)), _GRAD_SUB[ks]])
    weights = np.concatenate(
        [np.full(len(fi) * len(_GAUSS), h**3 / len(_GAUSS)), np.full(len(ks), h**3 / len(_SUB))]
    )
    if len(weights) == 0:
        raise DomainError("no quadrature point falls inside the body; increase the resolution")
    return cells, cell_of, unit, grads, weights


@lru_cache(maxsize=16)
def _build_domain(obj, mode, thickness, current, boundary):
    h = obj.edge
    if current == "kernel":
        vox = shell_voxels(obj, thickness) if mode == "shell" else obj
        pts = _grid_offset(obj) + (vox.indices + 0.5) * h
        return _Domain(points=pts, weights=vox.volumes, edge=h)

    cells, cell_of, unit, grads, weights = _cells_and_points(obj, mode, thickness, boundary)
    pts = _grid_offset(obj) + (cells[cell_of] + unit) * h

    node_idx = (cells[:, None, :] + _CORNERS[None]).reshape(-1, 3)
    span = node_idx.max(axis=0) + 1
    keys = np.ravel_multi_index(node_idx.T, span).reshape(-1, 8)
    used = np.unique(keys[np.unique(cell_of)])
    lookup = np.full(keys.max() + 1, -1, dtype=np.int64)
    lookup[used] = np.arange(len(used))
    conn = lookup[keys]

    rows = np.repeat(np.arange(len(pts)), 8)
    cols = conn[cell_of].ravel()
    grad = tuple(
        sp.csr_matrix((grads[:, :, d].ravel() / h, (rows, cols)), shape=(len(pts), len(used)))
        for d in range(3)
    )
    W = sp.diags(weights)
    K = sum(g.T @ W @ g for g in grad).tocsr()
    M = sp.diags(1.0 / K.diagonal())
    return _Domain(points=pts, weights=weights, grad=grad, stiffness=K, precond=M, edge=h)


def _domain_for(obj, delta, config):
    vox = _as_voxels(obj, config.resolution)
    thickness = None
    if config.mode == "shell":
        thickness = float(config.shell_thickness or delta)
    boundary = config.boundary
    if boundary == "auto":
        boundary = "resolved" if vox.primitive is not None else "staircase"
    if boundary == "resolved" and vox.primitive is None:
        raise DomainError("resolved boundary needs an analytic primitive")
    return vox, _build_domain(vox, config.mode, thickness, config.current, boundary)


def _check_exterior(vox, dom, local, name):
    if vox.primitive is not None:
        inside = vox.primitive.local_sdf(local) >= 0
    else:
        inside = vox.contains(local + _frame(vox))[0]
    if inside:
        raise DomainError(f"{name} lies inside the object")
    clearance = float(np.linalg.norm(dom.points - local, axis=1).min())
    if clearance < dom.edge:
        warnings.warn(
            f"{name} is {clearance:.3g} cm from the nearest quadrature point, less than one voxel edge",
            AccuracyWarning,
            stacklevel=4,
        )


def _objects(objects):
    if isinstance(objects, (VoxelObject, SpherePrimitive, BoxPrimitive)):
        return [objects]
    objs = list(getattr(objects, "objects", objects))
    if not objs:
        raise DomainError("no objects to integrate over")
    return objs


def _induced_columns(x, src, moments, obj, delta, config):
    """Induced field (without the ``i`` and ``1/(2 pi delta^2)``) for each moment row."""
    vox, dom = _domain_for(obj, delta, config)
    c = _frame(vox)
    xl = np.asarray(x, dtype=float) - c
    sl = np.asarray(src, dtype=float) - c
    _check_exterior(vox, dom, xl, "observation point x")
    _check_exterior(vox, dom, sl, "source point x'")
    d = xl - dom.points
    g = d / np.linalg.norm(d, axis=1)[:, None] ** 3
    out = []
    for mu in moments:
        J = dom.project(_kernel(dom.points, sl, mu))
        out.append(np.cross(J, g).T @ dom.weights)
    return np.array(out)


def b_ind_integral(x, source, objects, delta, config=QuadratureConfig()):
    """Induced field (gauss per unit fictitious moment), summed over objects.

    The result is purely imaginary by construction.
    """
    if not delta > 0:
        raise DomainError(f"skin depth must be positive, got {delta}")
    total = np.zeros(3)
    for obj in _objects(objects):
        total = total + _induced_columns(x, source.position, [source.moment], obj, delta, config)[0]
    return 1j * total / (2.0 * math.pi * delta * delta)


def f_tensor_numeric(x, x_src, objects, delta=1.0, config=QuadratureConfig(), a=None):
    """Dimensionless tensor from the volume integral.

    Column ``j`` is the induced field of a unit moment along ``e_j``, divided
    by ``i 8 pi / (delta^2 a)``. ``a`` defaults to the bounding radius of the
    first object, which is the sphere radius for a sphere.
    """
    objs = _objects(objects)
    if a is None:
        a = objs[0].bounding_radius
    total = np.zeros((3, 3))
    for obj in objs:
        total = total + _induced_columns(x, x_src, np.eye(3), obj, delta, config).T
    return NoiseTensor(total * a / (16.0 * math.pi**2))


def f_tensor_numeric_many(points, x_src, objects, delta=1.0, config=QuadratureConfig(), a=None, chunk=16):
    """``F(x, x_src)`` for many observation points and one source, shape ``(P, 3, 3)``.

    The three projected currents are computed once and reused for every
    observation point.
    """
    objs = _objects(objects)
    if a is None:
        a = objs[0].bounding_radius
    points = np.asarray(points, dtype=float).reshape(-1, 3)
    total = np.zeros((len(points), 3, 3))
    for obj in objs:
        vox, dom = _domain_for(obj, delta, config)
        c = _frame(vox)
        sl = np.asarray(x_src, dtype=float) - c
        _check_exterior(vox, dom, sl, "source point x'")
        local = points - c
        if vox.primitive is not None:
            bad = vox.primitive.local_sdf(local) >= 0
        else:
            bad = vox.contains(points)
        if bad.any():
            raise DomainError(f"observation point {points[np.argmax(bad)].tolist()} lies inside the object")
        J = np.stack([dom.project(_kernel(dom.points, sl, mu)) for mu in np.eye(3)])  # (3, Q, 3)
        for start in range(0, len(points), chunk):
            d = local[start : start + chunk, None, :] - dom.points[None]
            g = d / np.linalg.norm(d, axis=-1)[..., None] ** 3  # (p, Q, 3)
            # (J_j x g)_i summed with weights -> F[p, i, j]
            cross = np.cross(J[None], g[:, None])  # (p, 3, Q, 3)
            total[start : start + chunk] += np.einsum("pjqi,q->pij", cross, dom.weights)
    return total * a / (16.0 * math.pi**2)
