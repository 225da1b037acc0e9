"""
Complex spherical harmonics and the vector harmonics used by the sphere kernel.

Conventions
-----------
Orthonormal complex harmonics with the Condon-Shortley phase,

    Y_lm(theta, phi) = P_lm(cos theta) exp(i m phi),
    Y_l,-m = (-1)^m conj(Y_lm),

where ``P_lm`` is the fully normalized associated Legendre function. This is
the normalization in which the addition theorem reads

    1/|x - x'| = sum_lm 4 pi/(2l+1) r'^l / r^(l+1) conj(Y_lm(x')) Y_lm(x).

Vector harmonics are returned in Cartesian components:

    Yvec_lm   = rhat Y_lm
    Psivec_lm = r grad Y_lm = thetahat dY/dtheta + phihat (1/sin theta) dY/dphi
    S_lm      = (l + 1) Yvec_lm - Psivec_lm

All tables are computed for ``m >= 0`` only; negative orders follow from the
conjugation symmetry. The ``1/sin(theta)`` factor is never divided out
numerically: the recurrence is run on ``P_lm / sin(theta)`` directly, which is
a polynomial in ``(cos theta, sin theta)`` for ``m >= 1`` and therefore finite
at the poles.
"""

from typing import NamedTuple

import numpy as np

from .errors import DomainError

__all__ = [
    "L_MAX",
    "MultipoleIndex",
    "a_coeff",
    "dylm_dtheta",
    "indices",
    "legendre_tables",
    "s_lm",
    "s_table",
    "spherical_angles",
    "vector_harmonics",
    "ylm",
]

#: Default largest multipole degree accepted by the public functions.
L_MAX = 12


class MultipoleIndex(NamedTuple):
    ell: int
    m: int


def indices(lmax, m_nonnegative=False):
    """Yield every ``MultipoleIndex`` with ``ell <= lmax``."""
    for ell in range(lmax + 1):
        for m in range(0 if m_nonnegative else -ell, ell + 1):
            yield MultipoleIndex(ell, m)


def _check_index(ell, m, lmax):
    if int(ell) != ell or int(m) != m:
        raise DomainError(f"multipole index must be integer, got ({ell}, {m})")
    if ell < 0:
        raise DomainError(f"degree must be non-negative, got ell={ell}")
    if abs(m) > ell:
        raise DomainError(f"order out of range: |m|={abs(m)} > ell={ell}")
    if ell > lmax:
        raise DomainError(f"degree ell={ell} exceeds lmax={lmax}")


def _clamp_theta(theta):
    theta = np.asarray(theta, dtype=float)
    if not np.all(np.isfinite(theta)):
        raise DomainError("theta must be finite")
    return np.clip(theta, 0.0, np.pi)


def _run_recurrence(seed, cos_t, lmax):
    """Fill ``out[..., l, m]`` from the sectoral seeds ``seed[..., m] = T_mm``.

    Uses the fixed-m upward recurrence of the fully normalized Legendre
    functions. The recurrence is linear in the seeds, so any common factor
    (such as ``1/sin(theta)``) carried by the seeds is carried through.
    """
    out = np.zeros(cos_t.shape + (lmax + 1, lmax + 2))
    for m in range(lmax + 1):
        out[..., m, m] = seed[..., m]
        if m + 1 <= lmax:
            out[..., m + 1, m] = np.sqrt(2 * m + 3) * cos_t * seed[..., m]
        for ell in range(m + 2, lmax + 1):
            a = np.sqrt((4 * ell * ell - 1) / (ell * ell - m * m))
            b = np.sqrt(((ell - 1) ** 2 - m * m) / (4 * (ell - 1) ** 2 - 1))
            out[..., ell, m] = a * (cos_t * out[..., ell - 1, m] - b * out[..., ell - 2, m])
    return out


def legendre_tables(lmax, theta):
    """Normalized Legendre values, theta-derivatives and ``P/sin`` quotients.

    Parameters
    ----------
    lmax : int
        Largest degree.
    theta : array_like
        Polar angles in radians; clamped to ``[0, pi]``.

    Returns
    -------
    p, dp, q : ndarray
        Arrays of shape ``theta.shape + (lmax + 1, lmax + 2)`` indexed
        ``[..., l, m]`` for ``m >= 0``. ``p`` holds ``P_lm(cos theta)``,
        ``dp`` holds ``dP_lm/dtheta`` and ``q`` holds ``P_lm / sin(theta)``
        (zero for ``m = 0``, where it is never needed). The extra ``m``
        column is identically zero and simplifies the derivative stencil.
    """
    theta = _clamp_theta(theta)
    cos_t = np.cos(theta)
    sin_t = np.sin(theta)

    # sectoral seeds: P_mm = c_m sin^m, and P_mm / sin = c_m sin^(m-1)
    c = np.empty(lmax + 1)
    c[0] = 1.0 / np.sqrt(4.0 * np.pi)
    for m in range(1, lmax + 1):
        c[m] = -np.sqrt((2 * m + 1) / (2 * m)) * c[m - 1]
    powers = np.arange(lmax + 1)
    seed_p = c * sin_t[..., None] ** powers
    seed_q = np.zeros_like(seed_p)
    seed_q[..., 1:] = c[1:] * sin_t[..., None] ** (powers[1:] - 1)

    p = _run_recurrence(seed_p, cos_t, lmax)
    q = _run_recurrence(seed_q, cos_t, lmax)
    q[..., :, 0] = 0.0

    dp = np.zeros_like(p)
    for ell in range(1, lmax + 1):
        k = np.sqrt(ell * (ell + 1.0))
        dp[..., ell, 0] = k * p[..., ell, 1]
        for m in range(1, ell + 1):
            up = np.sqrt((ell - m) * (ell + m + 1.0))
            down = np.sqrt((ell + m) * (ell - m + 1.0))
            dp[..., ell, m] = 0.5 * (up * p[..., ell, m + 1] - down * p[..., ell, m - 1])
    return p, dp, q


def _signed(table, ell, m):
    """Value of ``table[..., l, m]`` continued to negative ``m``."""
    if m >= 0:
        return table[..., ell, m]
    return (-1) ** (-m) * table[..., ell, -m]


def ylm(ell, m, theta, phi, lmax=L_MAX):
    """Complex orthonormal spherical harmonic ``Y_lm(theta, phi)``."""
    _check_index(ell, m, lmax)
    p, _, _ = legendre_tables(ell, theta)
    return _signed(p, ell, m) * np.exp(1j * m * np.asarray(phi, dtype=float))


def dylm_dtheta(ell, m, theta, phi, lmax=L_MAX):
    """Analytic ``dY_lm/dtheta`` from the (l, m +- 1) shift identity."""
    _check_index(ell, m, lmax)
    _, dp, _ = legendre_tables(ell, theta)
    return _signed(dp, ell, m) * np.exp(1j * m * np.asarray(phi, dtype=float))


def _frame(theta, phi):
    """Cartesian components of (rhat, thetahat, phihat), each ``(..., 3)``."""
    st, ct = np.sin(theta), np.cos(theta)
    sp, cp = np.sin(phi), np.cos(phi)
    rhat = np.stack([st * cp, st * sp, ct], axis=-1)
    that = np.stack([ct * cp, ct * sp, -st], axis=-1)
    phat = np.stack([-sp, cp, np.zeros_like(sp)], axis=-1)
    return rhat, that, phat


def vector_harmonics(ell, m, theta, phi, lmax=L_MAX):
    """Cartesian ``(Yvec_lm, Psivec_lm)`` at the given direction(s).

    Returns two complex arrays of shape ``theta.shape + (3,)``.
    """
    _check_index(ell, m, lmax)
    theta = _clamp_theta(theta)
    phi = np.asarray(phi, dtype=float)
    p, dp, q = legendre_tables(ell, theta)
    phase = np.exp(1j * m * phi)[..., None]
    rhat, that, phat = _frame(theta, phi)
    y = _signed(p, ell, m)[..., None] * phase
    dth = _signed(dp, ell, m)[..., None] * phase
    dphi_over_sin = 1j * m * _signed(q, ell, m)[..., None] * phase
    return rhat * y, that * dth + phat * dphi_over_sin


def s_lm(ell, m, theta, phi, lmax=L_MAX):
    """Cartesian components of ``S_lm = (l + 1) Yvec_lm - Psivec_lm``."""
    yvec, psivec = vector_harmonics(ell, m, theta, phi, lmax)
    return (ell + 1) * yvec - psivec


def s_table(lmax, theta, phi):
    """``S_lm`` for all ``l <= lmax`` and ``0 <= m <= l``.

    Returns a complex array of shape ``theta.shape + (lmax + 1, lmax + 1, 3)``
    indexed ``[..., l, m, i]``; entries with ``m > l`` are zero.
    """
    theta = _clamp_theta(theta)
    phi = np.asarray(phi, dtype=float)
    theta, phi = np.broadcast_arrays(theta, phi)
    p, dp, q = legendre_tables(lmax, theta)
    p, dp, q = p[..., :-1], dp[..., :-1], q[..., :-1]
    ms = np.arange(lmax + 1)
    ells = np.arange(lmax + 1)[:, None]
    phase = np.exp(1j * phi[..., None, None] * ms)
    rhat, that, phat = _frame(theta, phi)
    radial = ((ells + 1) * p * phase)[..., None] * rhat[..., None, None, :]
    polar = (dp * phase)[..., None] * that[..., None, None, :]
    azimuthal = (1j * ms * q * phase)[..., None] * phat[..., None, None, :]
    return radial - polar - azimuthal


def a_coeff(ell):
    """Multipole weight ``l / ((l + 1)(2l + 1)^2 (2l + 3))``."""
    if int(ell) != ell or ell < 0:
        raise DomainError(f"degree must be a non-negative integer, got {ell}")
    ell = int(ell)
    return ell / ((ell + 1) * (2 * ell + 1) ** 2 * (2 * ell + 3))


def spherical_angles(points):
    """Radius, polar and azimuthal angle of Cartesian point(s) ``(..., 3)``."""
    points = np.asarray(points, dtype=float)
    x, y, z = points[..., 0], points[..., 1], points[..., 2]
    rho = np.hypot(x, y)
    r = np.hypot(rho, z)
    theta = np.arctan2(rho, z)
    phi = np.mod(np.arctan2(y, x), 2.0 * np.pi)
    return r, theta, phi
