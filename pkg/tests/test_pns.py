import numpy as np
import pytest

from stpca.errors import DegenerateSubsphereError, InvalidArgumentError
from stpca.geometry import rotation_to_north_pole, sample_uniform_sphere, unit_angle
from stpca.pns import (
    Subsphere,
    descend,
    fit_pns,
    fit_subsphere,
    nested_projections,
    pns_forward,
    pns_inverse,
    project_to_subsphere,
    sphere_variance_decomposition,
    subsphere_objective,
)


def _small_circle(v, rho, phis):
    """Points at angle rho from unit v in R^3."""
    v = np.asarray(v, float) / np.linalg.norm(v)
    M = rotation_to_north_pole(v)
    Q = np.column_stack([np.sin(rho) * np.cos(phis), np.sin(rho) * np.sin(phis), np.full_like(phis, np.cos(rho))])
    return Q @ M


def _noisy_data(seed, n=60, d=3, spread=0.3):
    rng = np.random.default_rng(seed)
    base = np.zeros(d + 1)
    base[-1] = 1
    Y = base + spread * rng.standard_normal((n, d + 1)) * np.linspace(2.0, 0.3, d + 1)
    return Y / np.linalg.norm(Y, axis=1, keepdims=True)


class TestFitSubsphere:
    def test_exact_small_circle(self, rng):
        v = np.array([0.3, -0.5, 0.8])
        v /= np.linalg.norm(v)
        Y = _small_circle(v, 0.7, rng.uniform(0, 2 * np.pi, 30))
        s = fit_subsphere(Y)
        assert unit_angle(s.center, v) <= 1e-4
        assert s.geodesic_radius == pytest.approx(0.7, abs=1e-4)

    def test_great_circle(self, rng):
        Y = _small_circle([0, 0, 1.0], np.pi / 2, rng.uniform(0, 2 * np.pi, 25))
        s = fit_subsphere(Y)
        assert s.geodesic_radius == pytest.approx(np.pi / 2, abs=1e-4)

    def test_beats_random_probes(self):
        rng = np.random.default_rng(5)
        Y = _small_circle([0.2, 0.1, 1.0], 0.9, rng.uniform(0, 2 * np.pi, 40))
        Y = Y + 0.05 * rng.standard_normal(Y.shape)
        Y /= np.linalg.norm(Y, axis=1, keepdims=True)
        s = fit_subsphere(Y)
        best = subsphere_objective(s.center, s.geodesic_radius, Y)
        V = sample_uniform_sphere(1000, 2, 1.0, rng)
        R = rng.uniform(0, np.pi, 1000)
        probes = [subsphere_objective(v, r, Y) for v, r in zip(V, R)]
        assert best <= min(probes)

    def test_radius_normalised(self):
        Y = _noisy_data(1, d=2)
        assert fit_subsphere(Y).geodesic_radius <= np.pi / 2

    def test_too_few_points(self):
        with pytest.raises(InvalidArgumentError):
            fit_subsphere(np.eye(3)[:3])

    def test_coincident(self):
        with pytest.raises(InvalidArgumentError):
            fit_subsphere(np.tile([0, 0, 1.0], (6, 1)))


class TestProjection:
    def test_point_on_subsphere(self):
        s = Subsphere.from_center([0, 0, 1.0], 0.6)
        y = _small_circle([0, 0, 1.0], 0.6, np.array([1.1]))[0]
        p, res = project_to_subsphere(y, s)
        np.testing.assert_allclose(p, y, atol=1e-15)
        assert res == pytest.approx(0.0, abs=1e-15)

    def test_meridian_closed_form(self):
        s = Subsphere.from_center([0, 0, 1.0], np.pi / 2)
        y = np.array([np.sin(np.pi / 3), 0.0, np.cos(np.pi / 3)])
        p, res = project_to_subsphere(y, s)
        np.testing.assert_allclose(p, [1.0, 0.0, 0.0], atol=1e-15)
        assert res == pytest.approx(-np.pi / 6)

    def test_nearest_point_probe(self):
        rng = np.random.default_rng(9)
        s = Subsphere.from_center(rng.standard_normal(3), 0.8)
        ring = _small_circle(s.center, 0.8, rng.uniform(0, 2 * np.pi, 1000))
        for y in sample_uniform_sphere(10, 2, 1.0, rng):
            p, res = project_to_subsphere(y, s)
            assert unit_angle(p, y) == pytest.approx(abs(res), abs=1e-12)
            assert unit_angle(p, y) <= unit_angle(ring, y).min() + 1e-12

    def test_centre_tie_break(self):
        s = Subsphere.from_center([0, 0, 1.0], 0.5)
        p, res = project_to_subsphere(np.array([0, 0, 1.0]), s)
        assert res == pytest.approx(-0.5)
        assert np.linalg.norm(p) == pytest.approx(1.0)


class TestDescend:
    def test_scaled_isometry(self, rng):
        v = rng.standard_normal(3)
        s = Subsphere.from_center(v, 0.7)
        phis = rng.uniform(0, 2 * np.pi, 10)
        Y = _small_circle(s.center, 0.7, phis)
        U = descend(Y, s)
        np.testing.assert_allclose(np.linalg.norm(U, axis=1), 1.0, atol=1e-14)
        # chord lengths scale by sin(rho)
        cy = np.linalg.norm(Y[:, None] - Y[None], axis=-1)
        cu = np.linalg.norm(U[:, None] - U[None], axis=-1)
        np.testing.assert_allclose(cy, np.sin(0.7) * cu, atol=1e-9)

    def test_degenerate(self):
        s = Subsphere.from_center([0, 0, 1.0], 1e-8)
        with pytest.raises(DegenerateSubsphereError):
            descend(np.array([[0.0, 0.1, 1.0]]), s)


class TestFitPns:
    @pytest.mark.parametrize("d", [2, 3, 4])
    def test_round_trip(self, d):
        Y = _noisy_data(d, d=d)
        m = fit_pns(Y)
        back = pns_inverse(m.scores, m)
        assert unit_angle(back, Y).max() <= 1e-8
        np.testing.assert_allclose(pns_forward(Y, m), m.scores, atol=1e-9)

    def test_score_ranges(self):
        m = fit_pns(_noisy_data(4, d=4, spread=0.8))
        assert np.all((m.scores[:, 0] >= -np.pi) & (m.scores[:, 0] < np.pi))
        assert np.all(np.abs(m.scores[:, 1:]) <= np.pi / 2 + 1e-12)

    def test_zero_scores_give_mean(self):
        m = fit_pns(_noisy_data(2))
        np.testing.assert_allclose(pns_inverse(np.zeros(3), m), m.backwards_mean, atol=1e-15)
        assert np.linalg.norm(m.backwards_mean) == pytest.approx(1.0, abs=1e-12)

    def test_one_dimensional_data(self, rng):
        Y = _small_circle([0.1, 0.2, 1.0], 0.9, rng.uniform(-1.5, 1.5, 40))
        m = fit_pns(Y)
        _, props, _ = sphere_variance_decomposition(m)
        assert props[0] == pytest.approx(1.0, abs=1e-6)
        assert props[1] == pytest.approx(0.0, abs=1e-6)

    def test_first_component_sweep_on_circle(self):
        m = fit_pns(_noisy_data(3, d=3))
        grid = np.linspace(-np.pi, np.pi, 50, endpoint=False)
        xi = np.zeros((50, 3))
        xi[:, 0] = grid
        curve = pns_inverse(xi, m)
        # every curve point is its own projection onto the first nested circle
        proj = nested_projections(m, curve)[1]
        assert unit_angle(proj, curve).max() <= 1e-8

    def test_nesting(self):
        m = fit_pns(_noisy_data(6, d=3))
        xi = m.scores.copy()
        xi[:, 2] = 0.0
        on_level2 = pns_inverse(xi, m)
        proj = nested_projections(m, on_level2)[2]
        assert unit_angle(proj, on_level2).max() <= 1e-8

    def test_variances(self):
        Y = _noisy_data(7)
        m = fit_pns(Y)
        var, props, deg = sphere_variance_decomposition(m)
        assert not deg
        assert props.sum() == pytest.approx(1.0, abs=1e-12)
        np.testing.assert_allclose(var, m.sphere_variances)
        # recomputation from the stored projections by explicit geodesics
        P = m.projections
        manual = [sum(unit_angle(P[k][i], P[k + 1][i]) ** 2 for i in range(len(Y))) for k in range(3)]
        np.testing.assert_allclose(var, manual, rtol=1e-9)

    def test_degenerate_variance_flag(self):
        m = fit_pns(_noisy_data(8, d=2))
        same = np.tile(m.backwards_mean, (5, 1))
        var, props, deg = sphere_variance_decomposition(m, same)
        assert deg and np.all(np.isnan(props))
        np.testing.assert_allclose(var, 0.0, atol=1e-20)

    def test_rotation_equivariance(self, rng):
        Y = _noisy_data(10, d=3)
        Q, _ = np.linalg.qr(rng.standard_normal((4, 4)))
        a = fit_pns(Y)
        b = fit_pns(Y @ Q.T)
        np.testing.assert_allclose(a.sphere_variances, b.sphere_variances, rtol=1e-6)
        for j in range(1, 3):
            sa, sb = a.scores[:, j], b.scores[:, j]
            sign = np.sign(sa @ sb)
            np.testing.assert_allclose(sa, sign * sb, atol=1e-6)

    def test_inverse_rejects_out_of_range(self):
        m = fit_pns(_noisy_data(11))
        with pytest.raises(InvalidArgumentError):
            pns_inverse(np.array([4.0, 0.0, 0.0]), m)
        with pytest.raises(InvalidArgumentError):
            pns_inverse(np.array([0.0, 0.0, 3.5]), m)
        with pytest.raises(InvalidArgumentError):
            pns_inverse(np.zeros(2), m)

    def test_d1_is_frechet_mean(self, rng):
        from stpca.geometry import frechet_mean_circle

        a = rng.uniform(-2, 2, 20)
        m = fit_pns(np.column_stack([np.cos(a), np.sin(a)]))
        assert m.circle_mean == pytest.approx(frechet_mean_circle(a))
        assert m.subspheres == []
