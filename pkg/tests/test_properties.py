"""Randomized invariants of the tensor engines and the qubit functionals."""

import numpy as np
from hypothesis import assume, given
from hypothesis import strategies as st

import oracles
from ewjn import harmonics
from ewjn.integral import QuadratureConfig, f_tensor_numeric
from ewjn.multipole import f_tensor, f_tensor_batch, ncf
from ewjn.qubit import dephasing_weight, optimal_field_direction, rotate_tensor, two_qubit_dephasing
from ewjn.scene import Environment, Material, Scene, SpherePrimitive

UNIT = SpherePrimitive(np.zeros(3), 1.0, Material(1.44e17))
PAIR = (SpherePrimitive([0, 0, 0], 1.0, Material(1e17)), SpherePrimitive([4, 0, 0], 1.0, Material(2e17)))
COARSE = QuadratureConfig(8)


@st.composite
def directions(draw):
    v = np.array(draw(st.lists(st.floats(-1, 1), min_size=3, max_size=3)))
    assume(np.linalg.norm(v) > 1e-3)
    return v / np.linalg.norm(v)


@st.composite
def exterior(draw, rmin=1.1, rmax=6.0):
    return draw(directions()) * draw(st.floats(rmin, rmax))


@st.composite
def rotations(draw):
    seed = draw(st.integers(0, 2**32 - 1))
    return oracles.random_rotation(np.random.default_rng(seed))


@given(exterior(), exterior(), st.integers(1, 10))
def test_exchange_symmetry(x, xs, L):
    F = f_tensor_batch(x, xs, 1.0, L)
    G = f_tensor_batch(xs, x, 1.0, L)
    assert np.abs(F - G.T).max() <= 1e-12 * np.abs(F).max()


@given(st.integers(1, 10), exterior(), exterior())
def test_m_sum_reality(ell, x, xs):
    _, t1, p1 = harmonics.spherical_angles(x)
    _, t2, p2 = harmonics.spherical_angles(xs)
    terms = [np.outer(harmonics.s_lm(ell, m, t1, p1), np.conj(harmonics.s_lm(ell, m, t2, p2)))
             for m in range(-ell, ell + 1)]
    total = np.sum(terms, axis=0)
    assert np.abs(total.imag).max() <= 1e-12 * np.abs(total).max() + 1e-300


@given(exterior(), st.integers(1, 10))
def test_local_psd(x, L):
    F = f_tensor_batch(x, x, 1.0, L)
    assert np.linalg.eigvalsh(0.5 * (F + F.T)).min() >= -1e-12


slab = st.tuples(st.floats(-2.0, 6.0), st.floats(-3.0, 3.0), st.floats(1.4, 4.0)).map(np.array)


@given(slab, slab)
def test_two_object_additivity(x, xs):
    xs = xs * [1, 1, -1]  # source below both bodies, observer above
    both = f_tensor_numeric(x, xs, list(PAIR), config=COARSE, a=1.0).values
    parts = sum(f_tensor_numeric(x, xs, o, config=COARSE, a=1.0).values for o in PAIR)
    assert np.abs(both - parts).max() <= 1e-13 * np.abs(parts).max()


@given(st.floats(0.1, 10.0), exterior(), exterior(), st.integers(1, 10))
def test_thin_shell_continuity(a, x, xs, L):
    sphere = SpherePrimitive(np.zeros(3), a, Material(1e17))
    full = f_tensor(a * x, a * xs, sphere, L).values
    shell = f_tensor(a * x, a * xs, sphere, L, shell_delta=a).values
    assert np.array_equal(full, shell)


@given(rotations(), exterior(), exterior())
def test_rotation_equivariance(R, x, xs):
    F = f_tensor_batch(x, xs, 1.0, 8)
    G = f_tensor_batch(R @ x, R @ xs, 1.0, 8)
    assert np.abs(R @ F @ R.T - G).max() <= 1e-9 * np.abs(G).max()


@given(st.floats(1e-3, 1e3), exterior(), exterior())
def test_length_scaling(s, x, xs):
    a = 1e-5
    m = Material(1.44e17)
    env = Environment(1e10)
    N1 = ncf(a * x, a * xs, Scene(env, [SpherePrimitive(np.zeros(3), a, m)])).values
    N2 = ncf(s * a * x, s * a * xs, Scene(env, [SpherePrimitive(np.zeros(3), s * a, m)])).values
    assert np.abs(N2 - N1 / s).max() <= 1e-10 * np.abs(N1 / s).max()


@given(exterior(), exterior(), st.floats(1.5, 4.0))
def test_linear_in_sigma_and_omega(x, xs, k):
    a = 1e-5
    base = Scene(Environment(1e10), [SpherePrimitive(np.zeros(3), a, Material(1e17))])
    sig = Scene(Environment(1e10), [SpherePrimitive(np.zeros(3), a, Material(k * 1e17))])
    omg = Scene(Environment(k * 1e10), [SpherePrimitive(np.zeros(3), a, Material(1e17))])
    N = ncf(a * x, a * xs, base).values
    for other in (sig, omg):
        assert np.abs(ncf(a * x, a * xs, other).values - k * N).max() <= 1e-10 * k * np.abs(N).max()


@given(exterior(), rotations(), directions())
def test_dephasing_basis_independent(x, R, n):
    F = f_tensor_batch(x, x, 1.0, 6)
    lhs = dephasing_weight(rotate_tensor(F, R), R @ n)
    assert abs(lhs - dephasing_weight(F, n)) <= 1e-10 * np.abs(F).max()


@given(exterior(), st.floats(1e-6, 1e6))
def test_optimal_direction_scale_invariant(x, c):
    F = f_tensor_batch(x, x, 1.0, 6)
    d1, _ = optimal_field_direction(F)
    d2, _ = optimal_field_direction(c * F)
    assert np.allclose(d1.n_hat, d2.n_hat, atol=1e-8)


@given(exterior(), exterior(), directions())
def test_two_qubit_branches(xa, xb, n):
    Fa, Fb = f_tensor_batch(xa, xa, 1.0, 8), f_tensor_batch(xb, xb, 1.0, 8)
    Fab = f_tensor_batch(xa, xb, 1.0, 8)
    Fba = f_tensor_batch(xb, xa, 1.0, 8)
    scale = np.abs(Fa).max() + np.abs(Fb).max()
    for branch in ("plus", "minus"):
        v = two_qubit_dephasing(Fa, Fb, Fab, n, branch)
        assert v >= -1e-10 * scale
        assert abs(v - two_qubit_dephasing(Fb, Fa, Fab, n, branch)) <= 1e-14 * scale
        assert abs(v - two_qubit_dephasing(Fb, Fa, Fba, n, branch)) <= 1e-12 * scale
