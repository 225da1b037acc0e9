"""
Cross-engine comparison and qubit decoherence reports.
"""

import csv
import io
import itertools
import math
from dataclasses import dataclass

import numpy as np

from . import multipole, qubit
from .errors import DomainError
from .integral import QuadratureConfig, f_tensor_numeric
from .maps import _fmt, _inside, _object_scale
from .multipole import NoiseTensor
from .scene import SpherePrimitive, object_center, validate_regime

__all__ = ["CompareRow", "QubitRow", "PairRow", "Report", "run_compare", "run_report", "scene_tensor"]

#: Entries below this fraction of the tensor maximum are excluded from relative errors.
NOISE_FLOOR = 1e-3
ENTRIES = [a + b for a in "xyz" for b in "xyz"]


def scene_tensor(scene, x, x_src, L=multipole.DEFAULT_L, resolution=40, physical=True, engine="auto"):
    """Tensor summed over all scene objects.

    Spheres use the multipole series unless ``engine="integral"``; other
    bodies always use the volume integral. With ``physical=True`` each
    object's contribution carries its own prefactor and the result is in
    erg s / cm^3.
    """
    for k, obj in enumerate(scene.objects):
        for name, p in (("x", x), ("x'", x_src)):
            if _inside(obj, p):
                raise DomainError(f"{name} = {_fmt(p)} lies inside object {k}")
    total = np.zeros((3, 3))
    cfg = QuadratureConfig(resolution=resolution)
    for obj in scene.objects:
        if isinstance(obj, SpherePrimitive) and engine != "integral":
            F = multipole.f_tensor(x, x_src, obj, L).values
        else:
            F = f_tensor_numeric(x, x_src, obj, config=cfg).values
        total += _object_scale(obj, scene, physical) * F
    return NoiseTensor(total, "physical" if physical else "dimensionless")


def relative_errors(F_ref, F_test, floor=NOISE_FLOOR):
    """Per-entry relative differences; NaN for entries under the noise floor."""
    F_ref, F_test = np.asarray(F_ref), np.asarray(F_test)
    scale = np.abs(F_ref).max()
    out = np.full((3, 3), np.nan)
    keep = np.abs(F_ref) > floor * scale
    out[keep] = np.abs(F_test - F_ref)[keep] / np.abs(F_ref)[keep]
    return out


@dataclass
class CompareRow:
    x: np.ndarray
    x_src: np.ndarray
    analytic: np.ndarray
    numeric: np.ndarray

    @property
    def rel(self):
        return relative_errors(self.analytic, self.numeric)

    @property
    def max_rel(self):
        return float(np.nanmax(self.rel))

    @property
    def normalized(self):
        """``max |F_num - F_ana| / max |F_ana|``."""
        return float(np.abs(self.numeric - self.analytic).max() / np.abs(self.analytic).max())


@dataclass
class Comparison:
    rows: list
    L: int
    resolution: int

    @property
    def max_rel(self):
        return max(r.max_rel for r in self.rows)

    @property
    def median_rel(self):
        return float(np.median([r.max_rel for r in self.rows]))

    def to_csv(self):
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        buf.write(f"# L: {self.L}\n# resolution: {self.resolution}\n")
        buf.write(f"# summary: max_rel={self.max_rel:.6e} median_rel={self.median_rel:.6e}\n")
        w.writerow(["x", "y", "z", "xs", "ys", "zs", "max_rel", "normalized"] + [f"rel_{e}" for e in ENTRIES])
        for r in self.rows:
            rel = ["" if math.isnan(v) else f"{v:.6e}" for v in r.rel.ravel()]
            w.writerow(
                [f"{c:.9e}" for c in (*r.x, *r.x_src)] + [f"{r.max_rel:.6e}", f"{r.normalized:.6e}"] + rel
            )
        return buf.getvalue()


def run_compare(scene, pairs, L=10, resolution=40):
    """Compare the multipole and integral engines for a one-sphere scene."""
    if len(scene.objects) != 1 or not isinstance(scene.objects[0], SpherePrimitive):
        raise DomainError("compare needs a scene holding exactly one sphere")
    sphere = scene.objects[0]
    cfg = QuadratureConfig(resolution=resolution)
    rows = []
    for x, xs in pairs:
        x, xs = np.asarray(x, dtype=float), np.asarray(xs, dtype=float)
        ana = multipole.f_tensor(x, xs, sphere, L).values
        num = f_tensor_numeric(x, xs, sphere, config=cfg).values
        rows.append(CompareRow(x, xs, ana, num))
    return Comparison(rows, L, resolution)


@dataclass
class QubitRow:
    index: int
    position: np.ndarray
    tensor: NoiseTensor
    field: np.ndarray
    recommended: np.ndarray
    dephasing: float
    relaxation: float

    @property
    def dephasing_rate(self):
        return qubit.rate_estimate(max(self.dephasing, 0.0))

    @property
    def relaxation_rate(self):
        return qubit.rate_estimate(max(self.relaxation, 0.0))


@dataclass
class PairRow:
    a: int
    b: int
    field: np.ndarray
    plus: float
    minus: float

    @property
    def quieter(self):
        if math.isclose(self.plus, self.minus, rel_tol=1e-12, abs_tol=0.0):
            return "equal"
        return "plus" if self.plus < self.minus else "minus"


@dataclass
class Report:
    qubits: list
    pairs: list
    regime: object

    def qubits_csv(self):
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(
            ["qubit", "x", "y", "z", "nx", "ny", "nz", "dephasing_ncf", "relaxation_ncf",
             "dephasing_rate_per_s", "relaxation_rate_per_s", "recommended_nx", "recommended_ny", "recommended_nz"]
        )
        for q in self.qubits:
            w.writerow(
                [q.index, *(f"{c:.9e}" for c in q.position), *_dir(q.field),
                 f"{q.dephasing:.9e}", f"{q.relaxation:.9e}", f"{q.dephasing_rate:.9e}",
                 f"{q.relaxation_rate:.9e}", *_dir(q.recommended)]
            )
        return buf.getvalue()

    def pairs_csv(self):
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["qubit_a", "qubit_b", "nx", "ny", "nz", "plus_weight", "minus_weight", "quieter"])
        for p in self.pairs:
            w.writerow([p.a, p.b, *_dir(p.field), f"{p.plus:.9e}", f"{p.minus:.9e}", p.quieter])
        return buf.getvalue()

    def to_text(self):
        head = "".join(f"# regime {line}\n" for line in self.regime.lines())
        head += "# pair weights are relative (units of the NCF), plus = |00>+|11>, minus = |01>+|10>\n"
        return head + self.qubits_csv() + "\n" + self.pairs_csv()


def _dir(v):
    return [f"{c:.6f}" for c in np.round(v, 6) + 0.0]


def _field_axis(policy, tensor):
    """Unit field axis for a tensor under ``policy`` (optimal, x, y, z or a 3-vector)."""
    if isinstance(policy, str):
        if policy == "optimal":
            return qubit.optimal_field_direction(tensor)[0].n_hat
        if policy in ("x", "y", "z"):
            return np.eye(3)["xyz".index(policy)]
        raise DomainError(f"unknown field policy {policy!r}")
    n = np.asarray(policy, dtype=float)
    if n.shape != (3,) or not np.linalg.norm(n) > 0:
        raise DomainError(f"field direction must be a nonzero 3-vector, got {policy!r}")
    return n / np.linalg.norm(n)


def run_report(scene, positions, policy="optimal", L=multipole.DEFAULT_L, resolution=40):
    """Per-qubit weights and rates plus Bell-branch weights for every pair.

    ``policy`` picks the field axis: ``"optimal"`` minimizes each qubit's
    dephasing; a pair shares the axis that minimizes the summed dephasing of
    both qubits, which keeps the report independent of qubit order.
    """
    positions = [np.asarray(p, dtype=float) for p in positions]
    if not positions:
        raise DomainError("no qubit positions given")
    local = [scene_tensor(scene, p, p, L, resolution) for p in positions]
    qubits = []
    for k, (p, F) in enumerate(zip(positions, local)):
        rec = qubit.optimal_field_direction(F)[0].n_hat
        n = _field_axis(policy, F)
        qubits.append(
            QubitRow(k, p, F, n, rec, qubit.dephasing_weight(F, n), qubit.relaxation_weight(F, n))
        )
    pairs = []
    for i, j in itertools.combinations(range(len(positions)), 2):
        F_ab = scene_tensor(scene, positions[i], positions[j], L, resolution)
        n = _field_axis(policy, NoiseTensor(local[i].values + local[j].values, "physical"))
        plus = qubit.two_qubit_dephasing(local[i], local[j], F_ab, n, "plus")
        minus = qubit.two_qubit_dephasing(local[i], local[j], F_ab, n, "minus")
        pairs.append(PairRow(i, j, n, plus, minus))
    regime = validate_regime(scene, positions)
    return Report(qubits, pairs, regime)


def reference_frame(scene):
    """Center and bounding radius of the first object."""
    obj = scene.objects[0]
    return np.asarray(object_center(obj), dtype=float), float(obj.bounding_radius)
