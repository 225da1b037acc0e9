import numpy as np
import pytest

from ewjn.analysis import run_compare, run_report, scene_tensor
from ewjn.errors import DomainError
from ewjn.scene import Environment, Material, Scene, SpherePrimitive

A = 1e-5


@pytest.fixture
def unit_scene():
    return Scene(Environment(1e10), [SpherePrimitive([0, 0, 0], 1.0, Material(1.44e17))])


class TestCompare:
    def test_on_axis_local(self, unit_scene):
        table = run_compare(unit_scene, [([0, 0, 3], [0, 0, 3])], L=10, resolution=40)
        assert table.max_rel <= 0.02

    def test_resolution_doubling(self, unit_scene):
        pairs = [([0, 0, 3], [0, 0, 3]), ([0, 0, -3], [0, 0, 3])]
        coarse = run_compare(unit_scene, pairs, L=10, resolution=20)
        fine = run_compare(unit_scene, pairs, L=10, resolution=40)
        for c, f in zip(coarse.rows, fine.rows):
            assert f.max_rel <= c.max_rel

    def test_csv_shape(self, unit_scene):
        text = run_compare(unit_scene, [([0, 0, 3], [0, 0, 3])], resolution=10).to_csv()
        rows = [l for l in text.splitlines() if not l.startswith("#")]
        assert rows[0].startswith("x,y,z,xs,ys,zs,max_rel")
        assert len(rows) == 2

    def test_needs_sphere(self):
        m = Material(1e17)
        two = Scene(Environment(1e10), [SpherePrimitive([0, 0, 0], 1, m), SpherePrimitive([4, 0, 0], 1, m)])
        with pytest.raises(DomainError):
            run_compare(two, [([0, 0, 3], [0, 0, 3])])


class TestReport:
    def test_recommends_z_on_x_axis(self, baseline_scene):
        rep = run_report(baseline_scene, [[2 * A, 0, 0]])
        assert np.allclose(np.abs(rep.qubits[0].recommended), [0, 0, 1])

    def test_swap_symmetric(self, baseline_scene):
        q = [[2 * A, 0, 0], [0, 0.5 * A, 2.5 * A]]
        r1, r2 = run_report(baseline_scene, q), run_report(baseline_scene, q[::-1])
        assert r1.qubits[0].dephasing == r2.qubits[1].dephasing
        assert r1.pairs[0].plus == pytest.approx(r2.pairs[0].plus, rel=1e-12)
        assert r1.pairs[0].minus == pytest.approx(r2.pairs[0].minus, rel=1e-12)
        assert r1.pairs[0].quieter == r2.pairs[0].quieter

    def test_inside_rejected(self, baseline_scene):
        with pytest.raises(DomainError):
            run_report(baseline_scene, [[0.5 * A, 0, 0]])

    @pytest.mark.xfail(strict=True, reason="higher multipoles dominate at r = 2a; see the decisions ledger")
    def test_far_qubit_scaling_full_series(self, baseline_scene):
        rep = run_report(baseline_scene, [[2 * A, 0, 0], [50 * A, 0, 0]], policy="z")
        ratio = rep.qubits[1].dephasing_rate / rep.qubits[0].dephasing_rate
        assert ratio == pytest.approx(25.0**-6, rel=0.05)

    def test_far_qubit_scaling_dipole_term(self, baseline_scene):
        rep = run_report(baseline_scene, [[2 * A, 0, 0], [50 * A, 0, 0]], policy="z", L=1)
        ratio = rep.qubits[1].dephasing_rate / rep.qubits[0].dephasing_rate
        assert ratio == pytest.approx(25.0**-6, rel=1e-10)

    def test_scene_tensor_integral_engine(self, unit_scene):
        x = [0, 0, 3]
        ana = scene_tensor(unit_scene, x, x, L=10, physical=False).values
        num = scene_tensor(unit_scene, x, x, resolution=20, physical=False, engine="integral").values
        assert np.abs(num - ana).max() < 0.01 * np.abs(ana).max()
