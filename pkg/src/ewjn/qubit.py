"""
Qubit-facing quadratic forms of the noise tensor.

For a spin quantized along ``n``, pure dephasing is driven by field noise
along ``n`` and relaxation by the two transverse components. Both are
quadratic forms of the local tensor ``F(x, x)``.
"""

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .errors import DomainError
from .multipole import NoiseTensor
from .scene import BOHR_MAGNETON, HBAR

__all__ = [
    "DecoherenceWeights",
    "FieldDirection",
    "decoherence_weights",
    "dephasing_weight",
    "optimal_field_direction",
    "rate_estimate",
    "relaxation_weight",
    "rotate_tensor",
    "two_qubit_dephasing",
]

UNIT_TOL = 1e-12
ROTATION_TOL = 1e-10


def _values(F):
    v = F.values if isinstance(F, NoiseTensor) else np.asarray(F, dtype=float)
    if v.shape != (3, 3):
        raise DomainError(f"tensor must be 3x3, got shape {v.shape}")
    return v


def _symmetric(F):
    v = _values(F)
    return 0.5 * (v + v.T)


@dataclass(frozen=True)
class FieldDirection:
    """Applied-field axis ``n_hat`` with a completing orthonormal pair."""

    n_hat: np.ndarray
    m1_hat: np.ndarray
    m2_hat: np.ndarray

    def __post_init__(self):
        vecs = [np.asarray(v, dtype=float) for v in (self.n_hat, self.m1_hat, self.m2_hat)]
        frame = np.array(vecs)
        if frame.shape != (3, 3):
            raise DomainError("field direction vectors must be 3-vectors")
        if np.abs(frame @ frame.T - np.eye(3)).max() > UNIT_TOL:
            raise DomainError("field direction triad is not orthonormal")
        for name, v in zip(("n_hat", "m1_hat", "m2_hat"), vecs):
            object.__setattr__(self, name, v)

    @classmethod
    def from_axis(cls, n, angle=0.0):
        """Triad around ``n``; ``angle`` rotates the transverse pair about ``n``."""
        n = np.asarray(n, dtype=float)
        norm = np.linalg.norm(n)
        if norm == 0 or not np.isfinite(norm):
            raise DomainError("field direction must be a nonzero finite vector")
        n = n / norm
        helper = np.eye(3)[int(np.argmin(np.abs(n)))]
        m1 = np.cross(n, helper)
        m1 /= np.linalg.norm(m1)
        m2 = np.cross(n, m1)
        c, s = math.cos(angle), math.sin(angle)
        return cls(n, c * m1 + s * m2, -s * m1 + c * m2)


def _unit(n):
    if isinstance(n, FieldDirection):
        return n.n_hat
    n = np.asarray(n, dtype=float)
    if n.shape != (3,) or abs(np.linalg.norm(n) - 1.0) > UNIT_TOL:
        raise DomainError(f"field direction must be a unit 3-vector, got {n}")
    return n


def dephasing_weight(F, direction):
    """``n^T F n``."""
    n = _unit(direction)
    return float(n @ _symmetric(F) @ n)


def relaxation_weight(F, direction):
    """``m1^T F m1 + m2^T F m2``, computed as ``trace(F) - n^T F n``."""
    S = _symmetric(F)
    if isinstance(direction, FieldDirection):
        m1, m2 = direction.m1_hat, direction.m2_hat
        return float(m1 @ S @ m1 + m2 @ S @ m2)
    n = _unit(direction)
    return float(np.trace(S) - n @ S @ n)


@dataclass(frozen=True)
class DecoherenceWeights:
    dephasing: float
    relaxation: float


def decoherence_weights(F, direction):
    return DecoherenceWeights(dephasing_weight(F, direction), relaxation_weight(F, direction))


def rate_estimate(ncf_value):
    """Rate in s^-1 from an NCF entry: ``(mu_B / hbar)^2 * ncf_value``."""
    if ncf_value < 0:
        raise DomainError(f"NCF value must be non-negative, got {ncf_value}")
    return (BOHR_MAGNETON / HBAR) ** 2 * ncf_value


def _check_rotation(R):
    R = np.asarray(R, dtype=float)
    if R.shape != (3, 3):
        raise DomainError(f"rotation must be 3x3, got shape {R.shape}")
    if np.abs(R @ R.T - np.eye(3)).max() > ROTATION_TOL or abs(np.linalg.det(R) - 1.0) > ROTATION_TOL:
        raise DomainError("matrix is not a proper rotation")
    return R


def rotate_tensor(F, R):
    """``R F R^T``."""
    R = _check_rotation(R)
    kind = F.kind if isinstance(F, NoiseTensor) else "dimensionless"
    return NoiseTensor(R @ _values(F) @ R.T, kind)


def _tie_break(vectors):
    """Deterministic choice among degenerate minimizing eigenvectors."""
    if vectors.shape[1] == 1:
        v = vectors[:, 0]
    elif vectors.shape[1] == 3:
        v = np.array([0.0, 0.0, 1.0])
    else:
        # plane spanned by two vectors: maximize |z|, then |x|
        P = vectors @ vectors.T
        candidates = [P[:, 2], P[:, 0], P[:, 1]]
        v = next(c for c in candidates if np.linalg.norm(c) > 1e-12)
        v = v / np.linalg.norm(v)
    v = v / np.linalg.norm(v)
    k = int(np.argmax(np.abs(v) - 1e-12 * np.arange(3)))
    return v if v[k] > 0 else -v


def optimal_field_direction(F, rtol=1e-9):
    """Axis minimizing the dephasing weight, and that weight.

    Eigenvalues within ``rtol`` (relative to the spectral radius) of the
    smallest are treated as degenerate.
    """
    S = _symmetric(F)
    w, V = np.linalg.eigh(S)
    scale = max(np.abs(w).max(), np.finfo(float).tiny)
    degenerate = w - w[0] <= rtol * scale
    n = _tie_break(V[:, degenerate])
    return FieldDirection.from_axis(n), float(n @ S @ n)


def two_qubit_dephasing(F_aa, F_bb, F_ab, direction, bell_branch="plus"):
    """Collective dephasing functional of a two-qubit Bell branch.

    ``plus`` (``|00> + |11>``) gives ``w_aa + w_bb + 2 w_ab`` and ``minus``
    (``|01> + |10>``) gives ``w_aa + w_bb - 2 w_ab``, with ``w = n^T F n``.
    The value is a relative weight, proportional to the dephasing rate of the
    relative phase of that branch.
    """
    n = _unit(direction)
    w_aa = float(n @ _values(F_aa) @ n)
    w_bb = float(n @ _values(F_bb) @ n)
    w_ab = float(n @ _values(F_ab) @ n)
    if w_ab * w_ab > w_aa * w_bb * (1 + 1e-6) + 1e-300:
        warnings.warn(
            "cross correlation exceeds the Cauchy-Schwarz bound; tensors may not describe one qubit pair",
            UserWarning,
            stacklevel=2,
        )
    if bell_branch == "plus":
        return w_aa + w_bb + 2.0 * w_ab
    if bell_branch == "minus":
        return w_aa + w_bb - 2.0 * w_ab
    raise DomainError(f"bell_branch must be 'plus' or 'minus', got {bell_branch!r}")
