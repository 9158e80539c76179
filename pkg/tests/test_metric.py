import numpy as np
import pytest

from firefront.errors import (
    NonNavigable,
    NonSpd,
    ZeroBaseVector,
    ZeroDirection,
    ZeroVector,
)
from firefront.metric import (
    RandersEval,
    ZermeloData,
    eval_randers,
    fundamental_tensor,
    is_f_orthogonal,
    polyline_length,
    unit_f_direction,
    validate_spd,
    zermelo_energy,
    zermelo_energy_hess_v,
)

ORIGIN = np.zeros(3)


def _unit(v):
    return v / np.linalg.norm(v)


class TestEvalRanders:
    def test_riemannian_limit(self, euclid_data):
        assert eval_randers(euclid_data, ORIGIN, np.array([3.0, 4.0, 0.0])) == pytest.approx(5.0)

    def test_pure_metric_norm(self):
        data = ZermeloData(metric=np.diag([4.0, 1.0, 1.0]), wind=np.zeros(3))
        assert eval_randers(data, ORIGIN, np.array([1.0, 0.0, 0.0])) == pytest.approx(2.0)

    def test_demo1_unit_vector(self, demo1_data):
        # V - W = (1/2, 0, 0) has metric norm 1, so F(V) = 1.
        v = np.array([0.5, 1.0 / 3.0, 1.0 / 6.0])
        assert eval_randers(demo1_data, ORIGIN, v) == pytest.approx(1.0, abs=1e-14)

    def test_demo1_direct_substitution(self, demo1_metric, demo1_wind):
        # Same value through the raw formula, bypassing the relation.
        h, w = demo1_metric, demo1_wind
        v = np.array([0.5, 1.0 / 3.0, 1.0 / 6.0])
        lam = 1.0 - w @ h @ w
        a = w @ h @ v
        b = v @ h @ v
        expected = (np.sqrt(a * a + lam * b) - a) / lam
        data = ZermeloData(metric=h, wind=w)
        assert eval_randers(data, ORIGIN, v) == pytest.approx(expected, abs=1e-15)
        assert expected == pytest.approx(1.0, abs=1e-14)

    def test_zero_velocity(self, demo1_data):
        assert eval_randers(demo1_data, ORIGIN, np.zeros(3)) == 0.0

    def test_positive_homogeneity(self, demo1_data, rng):
        for _ in range(50):
            v = rng.normal(size=3)
            c = rng.uniform(0.1, 10.0)
            f1 = eval_randers(demo1_data, ORIGIN, c * v)
            f2 = c * eval_randers(demo1_data, ORIGIN, v)
            assert f1 == pytest.approx(f2, rel=1e-10)

    def test_batched_evaluation(self, demo1_data, rng):
        vs = rng.normal(size=(64, 3))
        batch = eval_randers(demo1_data, np.zeros((64, 3)), vs)
        singles = [eval_randers(demo1_data, ORIGIN, v) for v in vs]
        np.testing.assert_allclose(batch, singles, rtol=1e-14)

    def test_non_navigable_wind(self):
        data = ZermeloData(metric=np.eye(3), wind=np.array([1.2, 0.0, 0.0]))
        with pytest.raises(NonNavigable):
            eval_randers(data, ORIGIN, np.array([1.0, 0.0, 0.0]))

    def test_lambda_floor(self):
        # Formally navigable but within the floor: still rejected.
        w = np.array([np.sqrt(1.0 - 1e-12), 0.0, 0.0])
        data = ZermeloData(metric=np.eye(3), wind=w)
        with pytest.raises(NonNavigable):
            eval_randers(data, ORIGIN, np.array([1.0, 0.0, 0.0]))

    def test_non_spd_metric(self):
        data = ZermeloData(metric=lambda p: np.broadcast_to(np.diag([1.0, -1.0, 1.0]), p.shape[:-1] + (3, 3)), wind=np.zeros(3))
        with pytest.raises(NonSpd):
            eval_randers(data, ORIGIN, np.array([1.0, 0.0, 0.0]))


class TestZermeloRoundTrip:
    def test_unit_offsets_have_unit_length(self, random_zermelo):
        for _ in range(200):
            data, h, w = random_zermelo()
            u = np.random.default_rng(1).normal(size=3)
            u = u / np.sqrt(u @ h @ u)
            assert eval_randers(data, ORIGIN, w + u) == pytest.approx(1.0, abs=1e-10)


class TestUnitFDirection:
    def test_euclidean(self, euclid_data):
        v = unit_f_direction(euclid_data, ORIGIN, np.array([0.0, 0.0, 7.0]))
        np.testing.assert_allclose(v, [0.0, 0.0, 1.0])

    def test_demo1_axis(self, demo1_data):
        v = unit_f_direction(demo1_data, ORIGIN, np.array([1.0, 0.0, 0.0]))
        np.testing.assert_allclose(v, [0.5, 1.0 / 3.0, 1.0 / 6.0], atol=1e-15)

    def test_defining_property(self, random_zermelo, rng):
        for _ in range(50):
            data, _, _ = random_zermelo()
            v = unit_f_direction(data, ORIGIN, rng.normal(size=3))
            assert eval_randers(data, ORIGIN, v) == pytest.approx(1.0, abs=1e-10)

    def test_zero_direction(self, demo1_data):
        with pytest.raises(ZeroDirection):
            unit_f_direction(demo1_data, ORIGIN, np.zeros(3))


class TestFundamentalTensor:
    def test_riemannian_reduces_to_metric(self, rng):
        h = np.diag([4.0, 1.0, 0.25])
        data = ZermeloData(metric=h, wind=np.zeros(3))
        for _ in range(20):
            v = _unit(rng.normal(size=3))
            u1 = _unit(rng.normal(size=3))
            u2 = _unit(rng.normal(size=3))
            g = fundamental_tensor(data, ORIGIN, v, u1, u2)
            assert g == pytest.approx(u1 @ h @ u2, abs=2e-6 * max(1, abs(u1 @ h @ u2)))

    def test_euler_homogeneity(self, demo1_data, rng):
        for _ in range(20):
            v = _unit(rng.normal(size=3))
            g = fundamental_tensor(demo1_data, ORIGIN, v, v, v)
            f2 = eval_randers(demo1_data, ORIGIN, v) ** 2
            assert g == pytest.approx(f2, abs=5e-6 * max(1.0, f2))

    def test_against_inline_difference_oracle(self, demo1_data, rng):
        # Re-derive the mixed second difference of F^2 with step 1e-5,
        # independently of the implementation.
        h = demo1_data.metric_at(ORIGIN)
        w = demo1_data.wind_at(ORIGIN)
        step = 1e-5
        for _ in range(20):
            v = _unit(rng.normal(size=3))
            u1 = _unit(rng.normal(size=3))
            u2 = _unit(rng.normal(size=3))

            def e(vec):
                return float(zermelo_energy(h, w, vec))

            oracle = (
                e(v + step * u1 + step * u2)
                - e(v + step * u1 - step * u2)
                - e(v - step * u1 + step * u2)
                + e(v - step * u1 - step * u2)
            ) / (8.0 * step * step)
            g = fundamental_tensor(demo1_data, ORIGIN, v, u1, u2)
            assert g == pytest.approx(oracle, abs=1e-6 * max(1.0, abs(oracle)))

    def test_symmetry(self, demo1_data, rng):
        v = rng.normal(size=3)
        u1 = rng.normal(size=3)
        u2 = rng.normal(size=3)
        g12 = fundamental_tensor(demo1_data, ORIGIN, v, u1, u2)
        g21 = fundamental_tensor(demo1_data, ORIGIN, v, u2, u1)
        assert g12 == pytest.approx(g21, abs=1e-9)

    def test_zero_base(self, demo1_data):
        with pytest.raises(ZeroBaseVector):
            fundamental_tensor(demo1_data, ORIGIN, np.zeros(3), np.ones(3), np.ones(3))


class TestFOrthogonality:
    def test_euclidean_reduces_to_orthogonality(self, euclid_data):
        assert is_f_orthogonal(euclid_data, ORIGIN, np.array([1.0, 0, 0]), np.array([0, 1.0, 0]))
        assert not is_f_orthogonal(
            euclid_data, ORIGIN, np.array([1.0, 0, 0]), np.array([1.0, 1.0, 0])
        )

    def test_constructed_orthogonal_pair(self, demo1_data, demo1_metric, demo1_wind):
        # u on the metric unit sphere, U orthogonal to u in the metric:
        # V = W + u then satisfies the test by construction.
        h, w = demo1_metric, demo1_wind
        u = np.array([0.5, 0.0, 0.0])
        big_u = np.array([0.0, 1.0, 0.3])
        big_u = big_u - (big_u @ h @ u) / (u @ h @ u) * u
        assert is_f_orthogonal(demo1_data, ORIGIN, big_u, w + u)

    def test_equivalence_of_both_forms(self, random_zermelo, rng):
        # g_V(V, U) = F^2/S * h(U, V/F - W) with S = sqrt(h(W,V)^2 + lam h(V,V)):
        # the inner-product form and the tensor form vanish together.
        worst = 0.0
        for _ in range(1000):
            data, h, w = random_zermelo()
            v = rng.normal(size=3)
            u = rng.normal(size=3)
            v /= np.linalg.norm(v)
            u /= np.linalg.norm(u)
            f = float(eval_randers(data, ORIGIN, v))
            lam = 1.0 - w @ h @ w
            s = np.sqrt((w @ h @ v) ** 2 + lam * (v @ h @ v))
            hess = zermelo_energy_hess_v(h, w, v)
            g_form = 0.5 * v @ hess @ u
            orto_form = (f**2 / s) * (u @ h @ (v / f - w))
            worst = max(worst, abs(g_form - orto_form))
        assert worst <= 1e-7

    def test_agrees_with_fd_tensor(self, demo1_data, rng):
        for _ in range(100):
            u = rng.normal(size=3)
            v = rng.normal(size=3)
            ortho = bool(is_f_orthogonal(demo1_data, ORIGIN, u, v, tol=1e-7))
            g = fundamental_tensor(demo1_data, ORIGIN, v, v, u)
            if abs(g) > 1e-3:
                assert not ortho

    def test_zero_vector(self, demo1_data):
        with pytest.raises(ZeroVector):
            is_f_orthogonal(demo1_data, ORIGIN, np.zeros(3), np.ones(3))


class TestRandersEval:
    def test_split_reassembles(self, demo1_data, rng):
        fe = RandersEval(demo1_data)
        for _ in range(20):
            v = rng.normal(size=3)
            total = fe.alpha(ORIGIN, v) + fe.beta(ORIGIN, v)
            assert total == pytest.approx(float(fe(ORIGIN, v)), rel=1e-12)

    def test_beta_is_linear(self, demo1_data, rng):
        fe = RandersEval(demo1_data)
        v = rng.normal(size=3)
        assert fe.beta(ORIGIN, 3.0 * v) == pytest.approx(3.0 * fe.beta(ORIGIN, v), rel=1e-12)


class TestPolylineLength:
    def test_concatenation_is_exact(self, demo1_data, rng):
        pts = rng.normal(size=(9, 3))
        total = polyline_length(demo1_data, pts)
        part = polyline_length(demo1_data, pts[:5]) + polyline_length(demo1_data, pts[4:])
        assert total == part  # exact by construction

    def test_degenerate(self, demo1_data):
        assert polyline_length(demo1_data, np.zeros((1, 3))) == 0.0


class TestValidateSpd:
    def test_accepts_spd(self):
        validate_spd(np.diag([1.0, 2.0, 3.0]))

    def test_rejects_asymmetric(self):
        m = np.eye(3)
        m[0, 1] = 0.5
        with pytest.raises(NonSpd):
            validate_spd(m)

    def test_rejects_indefinite(self):
        with pytest.raises(NonSpd):
            validate_spd(np.diag([1.0, -2.0, 3.0]))
