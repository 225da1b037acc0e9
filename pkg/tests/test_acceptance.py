"""Acceptance criteria, one check per criterion at the pinned tolerances.

Each check prints a single ``[criterion N] PASS|FAIL ...`` line. Run under
pytest, or directly with ``python3 tests/test_acceptance.py``.
"""

import sys
import time
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

import oracles  # noqa: E402
from ewjn.analysis import run_compare  # noqa: E402
from ewjn.cli import FIGURE_FAMILIES  # noqa: E402
from ewjn.cli import main as cli_main  # noqa: E402
from ewjn.integral import QuadratureConfig, f_tensor_numeric  # noqa: E402
from ewjn.maps import GridSpec, MapJob, run_map  # noqa: E402
from ewjn.multipole import f_tensor, f_tensor_batch, ncf, ncf_prefactor  # noqa: E402
from ewjn.qubit import rate_estimate  # noqa: E402
from ewjn.scene import Environment, Material, Scene, SpherePrimitive, skin_depth, vacuum_wavelength  # noqa: E402

SIGMA, OMEGA = 1.44e17, 1e10
UNIT = SpherePrimitive(np.zeros(3), 1.0, Material(SIGMA))
UNIT_SCENE = Scene(Environment(OMEGA), [UNIT])

# axis and diagonal pairs with r, r' in [2.5a, 6a]
ORACLE_PAIRS = [
    ((0, 0, 3), (0, 0, 3)),
    ((0, 0, -3), (0, 0, 3)),
    ((3, 0, 0), (0, 0, 3)),
    ((0, 2.5, 0), (0, 2.5, 0)),
    ((2.5, 0, 0), (-2.5, 0, 0)),
    ((0, 0, 6), (0, 0, 2.5)),
    ((2, 0, 2), (2, 0, 2)),
    ((2, 0, 2), (-2, 0, 2)),
    ((2, 2, 0), (2, 2, 0)),
    ((0, 3, 0), (3, 0, 0)),
    ((2, 0, 2), (0, 0, -3)),
    ((0, 2, 2), (0, -2, 2)),
]


def _rel(value, target):
    return abs(value - target) / abs(target)


def criterion_1():
    env = Environment(OMEGA)
    delta = skin_depth(Material(SIGMA), env)
    lam = vacuum_wavelength(env)
    pref = ncf_prefactor(SpherePrimitive(np.zeros(3), 1e-5, Material(SIGMA)), env)
    rate = rate_estimate(2.65e-14)
    checks = [
        _rel(delta, 3.14e-4) <= 0.01,
        _rel(lam, 18.85) <= 0.01,
        _rel(pref, 2.65e-14) <= 0.02,
        _rel(rate, 2.0) <= 0.10,
    ]
    detail = f"delta={delta:.4e} cm, lambda={lam:.4f} cm, prefactor={pref:.4e} erg s/cm^3, rate={rate:.3f} 1/s"
    return all(checks), detail


def criterion_2():
    start = time.perf_counter()
    table = run_compare(UNIT_SCENE, ORACLE_PAIRS, L=10, resolution=40)
    elapsed = time.perf_counter() - start
    worst = max(table.rows, key=lambda r: r.max_rel)
    ok = table.max_rel <= 0.02 and elapsed < 60.0
    detail = (f"{len(ORACLE_PAIRS)} pairs, max per-entry rel diff {table.max_rel:.4f} "
              f"at {worst.x.tolist()}/{worst.x_src.tolist()}, normalized {worst.normalized:.4f}, median {table.median_rel:.4f}, {elapsed:.1f} s")
    return ok, detail


def _random_pair(rng, rmin, rmax):
    out = []
    for _ in range(2):
        v = rng.normal(size=3)
        out.append(v / np.linalg.norm(v) * rng.uniform(rmin, rmax))
    return out


def criterion_3():
    rng = np.random.default_rng(2024)
    worst_ana = 0.0
    for _ in range(20):
        R = oracles.random_rotation(rng)
        x, xs = _random_pair(rng, 1.2, 6.0)
        F = f_tensor_batch(x, xs, 1.0, 8)
        G = f_tensor_batch(R @ x, R @ xs, 1.0, 8)
        worst_ana = max(worst_ana, np.abs(R @ F @ R.T - G).max() / np.abs(G).max())

    cfg = QuadratureConfig(40)
    worst_num = 0.0
    for _ in range(20):
        R = oracles.random_rotation(rng)
        x, xs = _random_pair(rng, 2.5, 4.0)
        F = f_tensor_numeric(x, xs, UNIT, config=cfg).values
        G = f_tensor_numeric(R @ x, R @ xs, UNIT, config=cfg).values
        worst_num = max(worst_num, np.abs(R @ F @ R.T - G).max() / np.abs(G).max())
    ok = worst_ana <= 1e-9 and worst_num <= 0.01
    detail = (f"analytic L=8 max |RFR^T - F(Rx,Rx')|/max|F| = {worst_ana:.2e}; "
              f"integral res 40 = {worst_num:.4f} (20 rotations each)")
    return ok, detail


def criterion_4():
    def at(result, u, v):
        return result.values[np.argmin(np.abs(result.v - v)), np.argmin(np.abs(result.u - u))]

    grid = GridSpec(samples=45)
    local = run_map(UNIT_SCENE, MapJob("F_zz_r6", "local", L=1), GridSpec(samples=23))
    aniso = at(local, 0, 2) > at(local, 2, 0)

    F = f_tensor([0, 0, 2], [0, 0, 2], UNIT).values
    R = oracles.rotation_y(np.pi / 2)
    G = f_tensor(R @ [0, 0, 2], R @ [0, 0, 2], UNIT).values
    ident = abs(G[0, 0] - F[2, 2]) <= 1e-10 * abs(F[2, 2])

    Fzz = f_tensor([0, 0, -2], [0, 0, 2], UNIT, 5)[2, 2]
    Fzz_x = f_tensor([2, 0, 0], [0, 0, 2], UNIT, 5)[2, 2]
    signs = Fzz > 0 and Fzz_x < 0

    xz = run_map(UNIT_SCENE, MapJob("F_xz", "nonlocal", (0, 0, 2), L=5), grid)
    quad = at(xz, 2, 2) > 0 and at(xz, -2, -2) > 0 and at(xz, -2, 2) < 0 and at(xz, 2, -2) < 0

    detail = (f"anisotropy {aniso}, 90-degree identity {ident}, "
              f"F_zz(-2a)={Fzz:.3e} F_zz(2a x)={Fzz_x:.3e}, F_xz quadrants {quad}")
    return bool(aniso and ident and signs and quad), detail


def criterion_5():
    grid = GridSpec()
    out = []
    for d, lo, hi in ((2.0, 5, 10), (5.0, 2, 10)):
        A = run_map(UNIT_SCENE, MapJob("F_zz", "nonlocal", (0, 0, d), L=lo), grid).values
        B = run_map(UNIT_SCENE, MapJob("F_zz", "nonlocal", (0, 0, d), L=hi), grid).values
        ok = ~np.isnan(B)
        out.append(np.abs(A - B)[ok].max() / np.abs(B[ok]).max())
    detail = f"d=2a L5 vs L10: {out[0]:.4f}; d=5a L2 vs L10: {out[1]:.4f} (max |dF| / max |F| over the grid)"
    return all(v < 0.05 for v in out), detail


def criterion_6():
    a = 1e-5
    x, xs = np.array([1.0, 0.5, 2.0]) * a, np.array([-0.3, 1.2, 1.8]) * a

    def N(sigma=SIGMA, omega=OMEGA, s=1.0):
        sc = Scene(Environment(omega), [SpherePrimitive(np.zeros(3), s * a, Material(sigma))])
        return ncf(s * x, s * xs, sc).values

    base = N()
    scale = np.abs(base).max()
    lin_s = np.abs(N(sigma=2 * SIGMA) - 2 * base).max() / (2 * scale)
    lin_w = np.abs(N(omega=2 * OMEGA) - 2 * base).max() / (2 * scale)
    size = np.abs(N(s=3.0) - base / 3).max() / (scale / 3)

    rng = np.random.default_rng(6)
    rays = list(np.eye(3)) + [v / np.linalg.norm(v) for v in rng.normal(size=(20, 3))]
    worst_norm = worst_entry = 0.0
    for r in (10.0, 15.0, 20.0):
        for n in rays:
            F1 = f_tensor_batch(r * n, r * n, 1.0, 8)
            F2 = f_tensor_batch(2 * r * n, 2 * r * n, 1.0, 8)
            worst_norm = max(worst_norm, abs(64 * np.linalg.norm(F2, 2) / np.linalg.norm(F1, 2) - 1))
            keep = np.abs(F1) > 1e-3 * np.abs(F1).max()
            worst_entry = max(worst_entry, (np.abs(64 * F2 - F1)[keep] / np.abs(F1)[keep]).max())
    ok = max(lin_s, lin_w, size) <= 1e-10 and worst_norm <= 0.01
    detail = (f"sigma {lin_s:.1e}, omega {lin_w:.1e}, 1/s {size:.1e}; "
              f"r^-6 on rays r>=10a: spectral norm {worst_norm:.4f}, largest single entry {worst_entry:.4f}")
    return ok, detail


def criterion_7():
    import test_properties as tp

    names = ["test_exchange_symmetry", "test_m_sum_reality", "test_local_psd",
             "test_two_object_additivity", "test_thin_shell_continuity"]
    failed = []
    for name in names:
        try:
            getattr(tp, name)()
        except Exception as exc:  # noqa: BLE001
            failed.append(f"{name}: {type(exc).__name__}")
    detail = f"{len(names) - len(failed)}/{len(names)} property suites passed (100 cases each)"
    if failed:
        detail += "; " + "; ".join(failed)
    return not failed, detail


def criterion_8(out_dir):
    config = Path(__file__).resolve().parents[1] / "configs" / "baseline.json"
    start = time.perf_counter()
    code = cli_main(["figures", str(config), "--out", str(out_dir)])
    elapsed = time.perf_counter() - start
    csvs = sorted(out_dir.glob("*.csv"))
    pgms = sorted(out_dir.glob("*.pgm"))
    expected = len(FIGURE_FAMILIES) * 5
    ok = code == 0 and len(csvs) == expected and len(pgms) == expected and elapsed < 300

    # sign checks on the regenerated L=5 nonlocal d=2a maps
    def read(name):
        rows = [l.split(",") for l in (out_dir / f"{name}.csv").read_text().splitlines()
                if l and not l.startswith("#")][1:]
        return {(round(float(u), 2), round(float(v), 2)): float(val) for u, v, val in rows if val}

    zz, xz = read("nonlocal_Fzz_d2_L5"), read("nonlocal_Fxz_d2_L5")

    def near(table, u, v):
        key = min(table, key=lambda k: (k[0] - u) ** 2 + (k[1] - v) ** 2)
        return table[key]

    signs = near(zz, 0, -2) > 0 and near(zz, 2, 0) < 0 and near(xz, 2, 2) > 0 and near(xz, 2, -2) < 0
    detail = (f"{len(FIGURE_FAMILIES)} families x L=1..5: {len(csvs)} CSV + {len(pgms)} PGM "
              f"in {elapsed:.1f} s; sign checks {signs}")
    return ok and signs, detail


def _report(n, result):
    ok, detail = result
    line = f"[criterion {n}] {'PASS' if ok else 'FAIL'} {detail}"
    print(f"\n{line}", flush=True)
    return ok


@pytest.mark.parametrize("n", [1, 2, 3, 4, 5, 6, 7])
def test_criterion(n, capsys):
    result = globals()[f"criterion_{n}"]()
    with capsys.disabled():
        assert _report(n, result)


def test_criterion_8(tmp_path, capsys):
    result = criterion_8(tmp_path)
    with capsys.disabled():
        assert _report(8, result)


if __name__ == "__main__":
    import tempfile

    results = [_report(n, globals()[f"criterion_{n}"]()) for n in range(1, 8)]
    with tempfile.TemporaryDirectory() as d:
        results.append(_report(8, criterion_8(Path(d))))
    sys.exit(0 if all(results) else 1)
