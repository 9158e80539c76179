import numpy as np
import pytest

from firefront import fixtures
from firefront.indicatrix import (
    EllipsoidSpec,
    metric_from_spec,
    quadratic_eval,
    rotation_matrix,
    rotation_x,
    rotation_y,
    sample_randers_indicatrix,
    unit_sphere_sample,
)

SQRT3 = np.sqrt(3.0)


class TestRotationMatrix:
    def test_identity(self):
        np.testing.assert_allclose(rotation_matrix(0.0, 0.0, 0.0), np.eye(3), atol=1e-15)

    def test_x_rotation_entries(self):
        p = rotation_matrix(np.pi / 6.0, 0.0, 0.0)
        expected = np.array(
            [
                [1.0, 0.0, 0.0],
                [0.0, SQRT3 / 2.0, -0.5],
                [0.0, 0.5, SQRT3 / 2.0],
            ]
        )
        np.testing.assert_allclose(p, expected, atol=1e-15)

    def test_composition_order(self):
        # With theta = 0 the composition is Ry(beta) @ Rx(alpha); check the
        # image of the z-axis against the hand product.
        p = rotation_matrix(np.pi / 2.0, np.pi / 2.0, 0.0)
        by_hand = rotation_y(np.pi / 2.0) @ rotation_x(np.pi / 2.0)
        np.testing.assert_allclose(p, by_hand, atol=1e-15)
        np.testing.assert_allclose(p @ np.array([0.0, 0.0, 1.0]), [0.0, -1.0, 0.0], atol=1e-15)

    def test_orthogonal_and_proper(self, rng):
        for _ in range(50):
            angles = rng.uniform(-np.pi, np.pi, size=3)
            p = rotation_matrix(*angles)
            np.testing.assert_allclose(p @ p.T, np.eye(3), atol=1e-12)
            assert np.linalg.det(p) == pytest.approx(1.0, abs=1e-12)

    def test_batched_angles(self, rng):
        angles = rng.uniform(-np.pi, np.pi, size=(5, 3))
        batch = rotation_matrix(angles[:, 0], angles[:, 1], angles[:, 2])
        for k in range(5):
            np.testing.assert_allclose(batch[k], rotation_matrix(*angles[k]), atol=1e-15)


class TestMetricFromSpec:
    def test_unit_sphere(self):
        spec = EllipsoidSpec()
        np.testing.assert_allclose(metric_from_spec(spec, np.zeros(3)), np.eye(3), atol=1e-15)

    def test_demo1_matrix(self, demo1_metric):
        h = metric_from_spec(fixtures.example1_spec(), np.zeros(3))
        np.testing.assert_allclose(h, demo1_metric, atol=1e-12)

    def test_demo2_diagonal_at_zero(self):
        # At y = 0 the rotation is trivial and the metric is the diagonal
        # of inverse squared axes.  The legacy tabulated diagonal differs;
        # both variants stay available for comparison.
        h = metric_from_spec(fixtures.example2_spec(), np.zeros(3))
        np.testing.assert_allclose(h, np.diag(fixtures.example2_diag("derived")), atol=1e-14)
        legacy = np.diag(fixtures.example2_diag("legacy"))
        assert np.abs(h - legacy).max() > 1.0

    def test_eigenvalues_are_inverse_squared_axes(self, rng):
        for _ in range(20):
            a, b, c = rng.uniform(0.3, 3.0, size=3)
            angles = rng.uniform(-np.pi, np.pi, size=3)
            spec = EllipsoidSpec(a=a, b=b, c=c, alpha=angles[0], beta=angles[1], theta=angles[2])
            h = metric_from_spec(spec, np.zeros(3))
            eig = np.sort(np.linalg.eigvalsh(h))
            expected = np.sort([1.0 / a**2, 1.0 / b**2, 1.0 / c**2])
            np.testing.assert_allclose(eig, expected, rtol=1e-10)

    def test_axes_recoverable_up_to_permutation(self, rng):
        a, b, c = 0.5, 1.0, 2.0
        spec = EllipsoidSpec(a=a, b=b, c=c, alpha=0.7, beta=-0.2, theta=1.1)
        h = metric_from_spec(spec, np.zeros(3))
        recovered = np.sort(1.0 / np.sqrt(np.linalg.eigvalsh(h)))[::-1]
        np.testing.assert_allclose(np.sort(recovered), [0.5, 1.0, 2.0], rtol=1e-12)

    def test_point_dependent_spec(self):
        spec = fixtures.example2_spec()
        pts = np.array([[0.0, 0.3, 0.0], [0.0, 1.2, 0.0]])
        hs = metric_from_spec(spec, pts)
        for k, y in enumerate((0.3, 1.2)):
            c, s = np.cos(y), np.sin(y)
            expected = np.array(
                [
                    [c * c + s * s / 4.0, 0.0, 0.75 * c * s],
                    [0.0, 4.0, 0.0],
                    [0.75 * c * s, 0.0, s * s + c * c / 4.0],
                ]
            )
            np.testing.assert_allclose(hs[k], expected, atol=1e-14)

    def test_rejects_bad_axes(self):
        with pytest.raises(ValueError):
            EllipsoidSpec(a=-1.0)


class TestQuadraticEval:
    def test_demo1_x_axis_point(self):
        q = quadratic_eval(fixtures.example1_spec(), np.zeros(3), np.array([0.5, 0.0, 0.0]))
        assert q == pytest.approx(1.0, abs=1e-14)

    def test_zero_vector(self):
        assert quadratic_eval(fixtures.example1_spec(), np.zeros(3), np.zeros(3)) == 0.0

    def test_rotated_b_axis_point(self):
        # The b semi-axis rotated by -alpha about x lands at (0, sqrt3/2, -1/2).
        v = np.array([0.0, SQRT3 / 2.0, -0.5])
        q = quadratic_eval(fixtures.example1_spec(), np.zeros(3), v)
        assert q == pytest.approx(1.0, abs=1e-14)


class TestIndicatrixSampling:
    def test_euclidean_sphere(self):
        samp = sample_randers_indicatrix(EllipsoidSpec(), np.zeros(3), np.zeros(3), 2.0, 128)
        radii = np.linalg.norm(samp.points, axis=1)
        np.testing.assert_allclose(radii, 2.0, rtol=1e-12)

    def test_demo1_contains_axis_point(self, demo1_wind):
        samp = sample_randers_indicatrix(
            fixtures.example1_spec(), demo1_wind, np.zeros(3), 1.0, 512
        )
        target = np.array([0.5, 1.0 / 3.0, 1.0 / 6.0])
        gap = np.linalg.norm(samp.points - target, axis=1).min()
        assert gap < 1e-12

    @pytest.mark.parametrize("tau", [1.0, 2.5])
    def test_defining_equation(self, demo1_wind, tau):
        spec = fixtures.example1_spec()
        samp = sample_randers_indicatrix(spec, demo1_wind, np.zeros(3), tau, 512)
        assert len(samp.points) == 512
        q = quadratic_eval(spec, np.zeros((512, 3)), (samp.points - tau * demo1_wind) / tau)
        assert np.abs(q - 1.0).max() < 1e-12

    def test_scaling_property(self, demo1_wind):
        spec = fixtures.example1_spec()
        s1 = sample_randers_indicatrix(spec, np.zeros(3), np.zeros(3), 1.0, 64)
        s3 = sample_randers_indicatrix(spec, np.zeros(3), np.zeros(3), 3.0, 64)
        np.testing.assert_allclose(3.0 * s1.points, s3.points, atol=1e-12)

    def test_origin_stays_inside(self, random_zermelo):
        # Q(-W) < 1 whenever the wind is admissible.
        for _ in range(50):
            data, h, w = random_zermelo()
            assert (-w) @ h @ (-w) < 1.0

    def test_sampler_count_and_uniqueness(self):
        pts = unit_sphere_sample(257)
        assert pts.shape == (257, 3)
        np.testing.assert_allclose(np.linalg.norm(pts, axis=1), 1.0, rtol=1e-12)


class TestFrontExpansion:
    def test_derived_coefficients_match_symbolic_expansion(self):
        sympy = pytest.importorskip("sympy")
        u, v, w = sympy.symbols("u v w")
        alpha = sympy.pi / 6
        wy, wz = sympy.Rational(1, 3), sympy.Rational(1, 6)
        a, b, c = sympy.Rational(1, 2), 1, 2
        vv, ww = v - wy, w - wz
        q = (
            (u / a) ** 2
            + ((vv * sympy.cos(alpha) - ww * sympy.sin(alpha)) / b) ** 2
            + ((vv * sympy.sin(alpha) + ww * sympy.cos(alpha)) / c) ** 2
        )
        expanded = sympy.expand(16 * q - 16)
        coeffs = fixtures.front_expansion_coefficients("derived")
        poly = sympy.Poly(expanded, u, v, w)
        assert float(poly.coeff_monomial(u**2)) == pytest.approx(coeffs["cuu"], abs=1e-12)
        assert float(poly.coeff_monomial(v**2)) == pytest.approx(coeffs["cvv"], abs=1e-12)
        assert float(poly.coeff_monomial(w**2)) == pytest.approx(coeffs["cww"], abs=1e-12)
        assert float(poly.coeff_monomial(v * w)) == pytest.approx(coeffs["cvw"], abs=1e-12)
        assert float(poly.coeff_monomial(v)) == pytest.approx(coeffs["cv"], abs=1e-12)
        assert float(poly.coeff_monomial(w)) == pytest.approx(coeffs["cw"], abs=1e-12)
        assert float(-poly.coeff_monomial(1)) == pytest.approx(coeffs["const"], abs=1e-12)

    def test_derived_zero_on_sampled_front(self, demo1_wind):
        samp = sample_randers_indicatrix(
            fixtures.example1_spec(), demo1_wind, np.zeros(3), 1.0, 256
        )
        res = fixtures.front_expansion_residual(samp.points, "derived")
        assert np.abs(res).max() < 1e-12

    def test_legacy_coefficients_differ(self, demo1_wind):
        # The tabulated variant flips the sign of the sqrt(3) linear term
        # and carries a different constant; it is not identically zero on
        # the front (the two quadrics only meet along a curve).
        derived = fixtures.front_expansion_coefficients("derived")
        legacy = fixtures.front_expansion_coefficients("legacy")
        assert legacy["cv"] - derived["cv"] == pytest.approx(-2.0 * SQRT3, abs=1e-12)
        assert legacy["const"] - derived["const"] == pytest.approx(118.0 / 36.0, abs=1e-12)
        samp = sample_randers_indicatrix(
            fixtures.example1_spec(), demo1_wind, np.zeros(3), 1.0, 256
        )
        res = fixtures.front_expansion_residual(samp.points, "legacy")
        assert np.abs(res).max() > 1.0
