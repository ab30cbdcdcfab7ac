"""Both kernel backends agree with each other and with loop oracles."""

import numpy as np
import pytest

import oracles
from stpca.geometry import sample_uniform_sphere, sample_uniform_torus, torus_distance
from stpca.kernels import _numba as nb
from stpca.kernels import _numpy as npk
from stpca.kernels import signed_wrap


def _instance(seed, n=25, d=2):
    rng = np.random.default_rng(seed)
    X = sample_uniform_torus(n, d, rng)
    D = np.array([[torus_distance(a, b) for b in X] for a in X])
    Z = rng.standard_normal((n, d + 1)) * rng.uniform(0.5, 2.0, (n, 1))
    return X, D, Z, float(rng.uniform(0.8, 2.0))


@pytest.mark.parametrize("seed", range(5))
def test_torus_pairwise_parity(seed):
    X = sample_uniform_torus(40, 3, np.random.default_rng(seed))
    A = npk.torus_pairwise(X)
    B = nb.torus_pairwise(X)
    np.testing.assert_allclose(A, B, rtol=0, atol=1e-14)
    for i in range(0, 40, 7):
        for j in range(0, 40, 5):
            assert A[i, j] == pytest.approx(oracles.torus_dist(X[i], X[j]), abs=1e-13)


@pytest.mark.parametrize("seed", range(5))
def test_stress_parity(seed):
    _, D, Z, r = _instance(seed)
    f_np = npk.stress(Z, r, D)
    f_nb = nb.stress(Z, r, D)
    assert f_np == pytest.approx(f_nb, rel=1e-13)
    assert f_np == pytest.approx(oracles.stress(Z.tolist(), r, D.tolist()), rel=1e-12)


@pytest.mark.parametrize("seed", range(5))
def test_stress_grad_parity(seed):
    _, D, Z, r = _instance(seed)
    f1, G1, dr1 = npk.stress_grad(Z, r, D)
    f2, G2, dr2 = nb.stress_grad(Z, r, D)
    assert f1 == pytest.approx(f2, rel=1e-13)
    np.testing.assert_allclose(G1, G2, rtol=1e-10, atol=1e-15)
    assert dr1 == pytest.approx(dr2, rel=1e-10)


@pytest.mark.parametrize("seed", range(5))
def test_predict_objective_parity(seed):
    rng = np.random.default_rng(seed)
    X = sample_uniform_torus(30, 3, rng)
    s = rng.uniform(0, 3, 30)
    x = rng.uniform(-np.pi, np.pi, 3)
    f1, g1 = npk.predict_objective(x, X, s)
    f2, g2 = nb.predict_objective(x, X, s)
    assert f1 == pytest.approx(f2, rel=1e-13)
    np.testing.assert_allclose(g1, g2, rtol=1e-12, atol=1e-15)
    assert f1 == pytest.approx(oracles.predict_objective(x, X, s), rel=1e-12)


@pytest.mark.parametrize("seed", range(5))
def test_interp_objective_parity(seed):
    rng = np.random.default_rng(seed)
    U = sample_uniform_sphere(30, 2, 1.0, rng)
    t = rng.uniform(0, 3, 30)
    z = rng.standard_normal(3)
    f1, g1 = npk.interp_objective(z, U, t, 1.3)
    f2, g2 = nb.interp_objective(z, U, t, 1.3)
    assert f1 == pytest.approx(f2, rel=1e-13)
    np.testing.assert_allclose(g1, g2, rtol=1e-12, atol=1e-15)
    direct = np.mean((t - 1.3 * np.arccos(np.clip(U @ (z / np.linalg.norm(z)), -1, 1))) ** 2)
    assert f1 == pytest.approx(direct, rel=1e-12)


@pytest.mark.parametrize("backend", [npk, nb], ids=["numpy", "numba"])
def test_interp_gradient_fd(backend):
    rng = np.random.default_rng(7)
    U = sample_uniform_sphere(20, 3, 1.0, rng)
    t = rng.uniform(0, 2, 20)
    z = rng.standard_normal(4)
    _, g = backend.interp_objective(z, U, t, 1.1)
    fd = oracles.central_diff(lambda v: backend.interp_objective(np.array(v), U, t, 1.1)[0], list(z))
    np.testing.assert_allclose(g, fd, rtol=1e-5, atol=1e-9)


def test_signed_wrap_cut_locus():
    assert signed_wrap(np.pi) == np.pi
    assert signed_wrap(-np.pi) == np.pi
    assert signed_wrap(0.5) == pytest.approx(0.5)
    assert signed_wrap(2 * np.pi - 0.5) == pytest.approx(-0.5)


def test_coincident_points_zero_gradient_contribution():
    # two identical rows: the pair sits at the clamp and contributes no gradient
    Z = np.array([[0.0, 0.0, 1.0], [0.0, 0.0, 1.0], [1.0, 0.0, 0.0]])
    D = np.array([[0, 0, 1.0], [0, 0, 1.0], [1.0, 1.0, 0]])
    for k in (npk, nb):
        f, G, _ = k.stress_grad(Z, 1.0, D)
        assert np.all(np.isfinite(G))
        assert np.isfinite(f)
