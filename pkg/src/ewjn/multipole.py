"""
Closed-form noise correlation tensor of a small metal sphere.

With the sphere at the origin and radius ``a``, the induced field of a unit
fictitious dipole ``mu`` at ``x'`` observed at ``x`` is

    B_ind(x, x') = (8 i pi / delta^2) sum_{l>=1} sum_m A_l a^(2l+3) / (r r')^(l+2)
                   S_lm(theta, phi) [mu . conj(S_lm(theta', phi'))]

and the dimensionless tensor is

    F_ij(x, x') = sum_l sum_m A_l (a/r)^(l+2) (a/r')^(l+2) S_lm,i(x) conj(S_lm,j(x')),

so that ``B_ind,i(mu = e_j) = i (8 pi / (delta^2 a)) F_ij``. The physical
correlation function is ``(8 pi hbar / (delta^2 a)) coth(hbar omega / 2 k T) F``.

The m-sum runs over ``m >= 0`` only: the ``+m`` and ``-m`` terms are complex
conjugates, so the sum is ``term(0) + 2 Re sum_{m>0} term(m)`` and is real by
construction.
"""

import math
import warnings
from dataclasses import dataclass

import numpy as np

from . import harmonics
from .errors import ConvergenceWarning, DomainError
from .scene import BOLTZMANN, HBAR, skin_depth

__all__ = [
    "DEFAULT_L",
    "NoiseTensor",
    "TruncationReport",
    "b_ind_multipole",
    "coth_factor",
    "f_tensor",
    "f_tensor_batch",
    "ncf",
    "ncf_prefactor",
    "thin_shell_factor",
    "truncation_report",
]

DEFAULT_L = 8
#: Points with r / a inside (1, SLOW_ZONE] trigger a ConvergenceWarning.
SLOW_ZONE = 1.05


@dataclass(frozen=True, eq=False)
class NoiseTensor:
    """A 3x3 correlation tensor.

    ``kind`` is ``"dimensionless"`` for ``F_ij`` or ``"physical"`` for the
    correlation function in erg s / cm^3.
    """

    values: np.ndarray
    kind: str = "dimensionless"

    def __post_init__(self):
        v = np.array(self.values, dtype=float)
        if v.shape != (3, 3):
            raise DomainError(f"noise tensor must be 3x3, got shape {v.shape}")
        if not np.all(np.isfinite(v)):
            raise DomainError("noise tensor has non-finite entries")
        if self.kind not in ("dimensionless", "physical"):
            raise DomainError(f"unknown tensor kind {self.kind!r}")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    def __array__(self, dtype=None, copy=None):
        return self.values if dtype is None else self.values.astype(dtype)

    def __getitem__(self, key):
        return self.values[key]

    def __add__(self, other):
        if not isinstance(other, NoiseTensor) or other.kind != self.kind:
            return NotImplemented
        return NoiseTensor(self.values + other.values, self.kind)

    def __mul__(self, c):
        return NoiseTensor(self.values * float(c), self.kind)

    __rmul__ = __mul__

    @property
    def T(self):
        return NoiseTensor(self.values.T, self.kind)

    def symmetrized(self):
        return 0.5 * (self.values + self.values.T)


def _check_L(L, lmax):
    if int(L) != L or L < 1:
        raise DomainError(f"truncation order must be an integer >= 1, got {L}")
    if L > lmax:
        raise DomainError(f"truncation order L={L} exceeds lmax={lmax}")
    return int(L)


def _radial_weights(a, L, shell_delta):
    """``A_l * (a^(2l+3) or its shell version) / a^(2l+3)`` for l = 0..L."""
    w = np.array([harmonics.a_coeff(ell) for ell in range(L + 1)])
    if shell_delta is not None:
        w = w * np.array([thin_shell_factor(ell, a, shell_delta) / a ** (2 * ell + 3) for ell in range(L + 1)])
    return w


def _exterior(points, a, name):
    r, theta, phi = harmonics.spherical_angles(points)
    if np.any(r <= a):
        k = int(np.argmax(r <= a)) if np.ndim(r) else 0
        rk = np.ravel(r)[k]
        raise DomainError(f"{name} lies inside the sphere (r = {rk:.6g} <= a = {a:.6g})")
    if np.any(r <= SLOW_ZONE * a):
        warnings.warn(
            f"{name} is within {SLOW_ZONE}a of the sphere center; the multipole series converges slowly",
            ConvergenceWarning,
            stacklevel=3,
        )
    return r, theta, phi


def _sphere_frame(sphere, x, x_src):
    c = sphere.center
    return np.asarray(x, dtype=float) - c, np.asarray(x_src, dtype=float) - c


def f_tensor_batch(x, x_src, a, L=DEFAULT_L, shell_delta=None, lmax=harmonics.L_MAX):
    """Vectorized ``F_ij`` for a sphere of radius ``a`` centered at the origin.

    Parameters
    ----------
    x : array_like, shape (..., 3)
        Observation points.
    x_src : array_like, shape (..., 3)
        Source points, broadcast against ``x``.
    a : float
        Sphere radius.
    L : int
        Largest multipole degree kept.
    shell_delta : float, optional
        If given, restrict the current to a surface shell of this thickness.

    Returns
    -------
    ndarray, shape (..., 3, 3)
    """
    L = _check_L(L, lmax)
    x = np.asarray(x, dtype=float)
    x_src = np.asarray(x_src, dtype=float)
    r, th, ph = _exterior(x, a, "observation point x")
    rs, ths, phs = _exterior(x_src, a, "source point x'")
    s_obs = harmonics.s_table(L, th, ph)
    s_src = harmonics.s_table(L, ths, phs)

    ells = np.arange(L + 1)
    rho = (a * a / (r * rs))[..., None] ** (ells + 2)
    weight = _radial_weights(a, L, shell_delta) * rho  # (..., L+1)
    mult = np.full(L + 1, 2.0)
    mult[0] = 1.0  # m = 0 counted once
    pair = np.einsum("...lmi,...lmj->...lmij", s_obs, np.conj(s_src)).real
    return np.einsum("...l,m,...lmij->...ij", weight, mult, pair)


def f_tensor(x, x_src, sphere, L=DEFAULT_L, shell_delta=None):
    """Dimensionless tensor ``F_ij(x, x')`` for one sphere."""
    xl, sl = _sphere_frame(sphere, x, x_src)
    return NoiseTensor(f_tensor_batch(xl, sl, sphere.radius, L, shell_delta))


def b_ind_multipole(x, x_src, mu, sphere, delta, L=DEFAULT_L, shell=False):
    """Induced field (gauss per unit fictitious moment) from the multipole series.

    The result is purely imaginary. With ``shell=True`` the current is
    confined to a surface layer of thickness ``delta``.
    """
    if not delta > 0:
        raise DomainError(f"skin depth must be positive, got {delta}")
    F = f_tensor(x, x_src, sphere, L, delta if shell else None).values
    scale = 8.0 * math.pi / (delta * delta * sphere.radius)
    return 1j * scale * (F @ np.asarray(mu, dtype=float))


def coth_factor(omega, temperature):
    """``coth(hbar omega / 2 k_B T)``, exactly 1 at T = 0 or for large arguments."""
    if temperature < 0:
        raise DomainError(f"temperature must be >= 0 K, got {temperature}")
    if temperature == 0:
        return 1.0
    arg = HBAR * omega / (2.0 * BOLTZMANN * temperature)
    if arg > 30.0:
        return 1.0
    return 1.0 / math.tanh(arg)


def ncf_prefactor(sphere, environment):
    """``8 pi hbar / (delta^2 a)`` in erg s / cm^3 (T = 0 value)."""
    delta = skin_depth(sphere.material, environment)
    return 8.0 * math.pi * HBAR / (delta * delta * sphere.radius)


def ncf(x, x_src, scene, L=DEFAULT_L, shell=False):
    """Physical correlation tensor for a scene holding a single sphere."""
    spheres = [o for o in scene.objects if hasattr(o, "radius")]
    if len(scene.objects) != 1 or len(spheres) != 1:
        raise DomainError("ncf needs a scene with exactly one sphere")
    sphere = spheres[0]
    env = scene.environment
    delta = skin_depth(sphere.material, env)
    F = f_tensor(x, x_src, sphere, L, delta if shell else None)
    scale = ncf_prefactor(sphere, env) * coth_factor(env.omega, env.temperature)
    return NoiseTensor(scale * F.values, "physical")


def thin_shell_factor(ell, a, delta):
    """``a^(2l+3) - (a - delta)^(2l+3)``, clamped to ``a^(2l+3)`` once ``delta >= a``."""
    n = 2 * ell + 3
    if delta >= a:
        return a**n
    return a**n - (a - delta) ** n


@dataclass(frozen=True)
class TruncationReport:
    orders: tuple
    tensors: tuple
    deltas: tuple  # deltas[k] compares orders[k] with orders[k + 1]

    @property
    def max_delta(self):
        return max(self.deltas) if self.deltas else 0.0


def relative_change(F_a, F_b):
    """``max |F_b - F_a| / max |F_b|`` (zero when both vanish)."""
    F_a, F_b = np.asarray(F_a), np.asarray(F_b)
    scale = np.abs(F_b).max()
    if scale == 0:
        return 0.0 if np.abs(F_a).max() == 0 else math.inf
    return float(np.abs(F_b - F_a).max() / scale)


def truncation_report(x, x_src, sphere, L_list):
    """Tensors at each truncation order and the relative change between neighbours."""
    L_list = [int(L) for L in L_list]
    if any(b < a for a, b in zip(L_list, L_list[1:])):
        raise DomainError(f"truncation orders must be ascending, got {L_list}")
    tensors = tuple(f_tensor(x, x_src, sphere, L) for L in L_list)
    deltas = tuple(relative_change(a.values, b.values) for a, b in zip(tensors, tensors[1:]))
    return TruncationReport(tuple(L_list), tensors, deltas)
