import numpy as np
import pytest

from firefront import fixtures
from firefront.errors import DegenerateTangent, GridTooCoarse
from firefront.indicatrix import quadratic_eval, sample_randers_indicatrix
from firefront.metric import ZermeloData, eval_randers, is_f_orthogonal
from firefront.propagation import (
    FrontSampling,
    PlaneGrid,
    PointFront,
    SampledFront,
    VolumeGrid,
    arrival_time_field,
    directed_distance_to_mesh,
    huygens_step,
    launch_directions,
    polyline_hausdorff,
    propagate_front,
    propagate_front_slice,
    select_mode,
    spherical_wavefront,
)
from firefront.wind import ConstantWind, rotation_wind

ORIGIN = np.zeros(3)
SQRT3 = np.sqrt(3.0)


@pytest.fixture
def loop():
    return fixtures.oval_loop()


@pytest.fixture
def cylinder():
    return fixtures.oval_cylinder()


class TestLaunchDirections:
    def test_plane_front_euclidean(self, euclid_data):
        # A flat front z = 0 propagating upward launches straight up.
        front = SampledFront(
            points=[[0.0, 0.0, 0.0]],
            tangents=[[[1.0, 0.0, 0.0], [0.0, 1.0, 0.0]]],
            outward_hint=[[0.0, 0.0, 1.0]],
        )
        v = launch_directions(euclid_data, front, at=0)
        np.testing.assert_allclose(v, [[0.0, 0.0, 1.0]], atol=1e-14)

    def test_point_front_contains_axis_direction(self, demo1_data):
        fan = launch_directions(demo1_data, PointFront(ORIGIN))
        target = np.array([0.5, 1.0 / 3.0, 1.0 / 6.0])
        assert np.linalg.norm(fan - target, axis=1).min() < 1e-12

    def test_point_fan_is_unit_speed(self, demo1_data):
        fan = launch_directions(demo1_data, PointFront(ORIGIN))
        f = eval_randers(demo1_data, np.zeros_like(fan), fan)
        assert np.abs(f - 1.0).max() < 1e-12

    def test_curve_launch_satisfies_both_equations(self, demo1_data, demo1_metric, demo1_wind, loop):
        # At s = 0 the tangent is (0, 12/13, 0) and the tabulated expanded
        # first equation reduces to 13/16 (v2 - 1/3) = 3*sqrt(3)/16 (v3 - 1/6).
        vs = launch_directions(demo1_data, loop, at=0.0, centroid=np.zeros(3))
        h, w = demo1_metric, demo1_wind
        t0 = loop.tangents(0.0)
        for v in vs:
            u = v - w
            assert abs(u @ h @ t0) < 1e-9
            assert abs(u @ h @ u - 1.0) < 1e-9
            reduced = (13.0 / 16.0) * (v[1] - 1.0 / 3.0) - (3.0 * SQRT3 / 16.0) * (v[2] - 1.0 / 6.0)
            assert abs(reduced) < 1e-9

    def test_curve_outward_half_circle(self, demo1_data, loop):
        sampling = FrontSampling(circle=9)
        centroid = loop.points(loop.sample_params(64)).mean(axis=0)
        vs = launch_directions(demo1_data, loop, at=0.0, sampling=sampling, centroid=centroid)
        assert vs.shape == (9, 3)
        # Outward side: positive x-component of the offset at s = 0 (the
        # rightmost point of the loop).
        h = demo1_data.metric_at(ORIGIN)
        w = demo1_data.wind_at(ORIGIN)
        out = np.array([1.0, 0.0, 0.0])
        mid = vs[4] - w
        assert mid @ h @ out > 0

    def test_surface_launch_both_equations(self, demo1_data, demo1_metric, demo1_wind, cylinder):
        s1, s2 = 0.7, 0.5
        v = launch_directions(
            demo1_data, cylinder, at=(s1, s2), centroid=np.array([0.0, 0.0, 1.0])
        )[0]
        h, w = demo1_metric, demo1_wind
        t1, t2 = cylinder.tangents(s1, s2)
        u = v - w
        assert abs(u @ h @ t1) < 1e-12
        assert abs(u @ h @ t2) < 1e-12
        assert abs(u @ h @ u - 1.0) < 1e-12
        # Second tabulated surface equation: (3 sqrt3 / 7)(v2 - 1/3) = v3 - 1/6.
        assert (3.0 * SQRT3 / 7.0) * (v[1] - 1.0 / 3.0) == pytest.approx(
            v[2] - 1.0 / 6.0, abs=1e-12
        )

    def test_launches_are_f_orthogonal(self, demo1_data, loop):
        centroid = loop.points(loop.sample_params(64)).mean(axis=0)
        for s in (0.0, 1.1, 3.9):
            t = loop.tangents(s)
            p = loop.points(s)
            vs = launch_directions(demo1_data, loop, at=s, centroid=centroid)
            for v in vs[::7]:
                assert bool(is_f_orthogonal(demo1_data, p, t, v, tol=1e-8))

    def test_degenerate_tangent(self, demo1_data):
        bad = SampledFront(
            points=[[0.0, 0.0, 0.0]],
            tangents=[[[1.0, 0.0, 0.0], [2.0, 0.0, 0.0]]],
        )
        with pytest.raises(DegenerateTangent):
            launch_directions(demo1_data, bad, at=0)


class TestSphericalWavefront:
    def test_euclidean_sphere(self, euclid_data):
        wf = spherical_wavefront(euclid_data, ORIGIN, 2.0, 128)
        np.testing.assert_allclose(np.linalg.norm(wf.points, axis=1), 2.0, rtol=1e-12)

    def test_demo1_contains_axis_point(self, demo1_data):
        wf = spherical_wavefront(demo1_data, ORIGIN, 1.0, 512)
        target = np.array([0.5, 1.0 / 3.0, 1.0 / 6.0])
        assert np.linalg.norm(wf.points - target, axis=1).min() < 1e-12

    def test_defining_equation_at_tau_three(self, demo1_data, demo1_wind):
        tau = 3.0
        wf = spherical_wavefront(demo1_data, ORIGIN, tau, 256)
        spec = fixtures.example1_spec()
        q = quadratic_eval(spec, wf.points, (wf.points - tau * demo1_wind) / tau)
        assert np.abs(q - 1.0).max() < 1e-10

    def test_matches_indicatrix_sampler_exactly(self, demo1_data, demo1_wind):
        wf = spherical_wavefront(demo1_data, np.array([1.0, 2.0, 3.0]), 2.5, 256)
        samp = sample_randers_indicatrix(
            fixtures.example1_spec(), demo1_wind, np.array([1.0, 2.0, 3.0]), 2.5, 256
        )
        np.testing.assert_array_equal(wf.points, np.array([1.0, 2.0, 3.0]) + samp.points)

    def test_traced_mode_matches_constant(self, euclid_data):
        wf_c = spherical_wavefront(euclid_data, ORIGIN, 1.0, 64)
        wf_g = spherical_wavefront(
            euclid_data, ORIGIN, 1.0, 64, mode="general", dt=0.02, skip_mode_check=True
        )
        assert np.abs(wf_c.points - wf_g.points).max() < 1e-9


class TestPropagateFront:
    def test_zero_tau_returns_sources(self, demo1_data, loop):
        wf = propagate_front(demo1_data, loop, 0.0)
        assert wf.tau == 0.0
        assert wf.n_points == 256 * 64
        # Each block of 64 fan samples shares its source point on the curve.
        s_vals = loop.sample_params(256)
        np.testing.assert_allclose(wf.points[::64], loop.points(s_vals), atol=1e-15)

    def test_point_front_on_implicit_equation(self, demo1_data):
        wf = propagate_front(demo1_data, PointFront(ORIGIN), 1.0)
        res = fixtures.front_expansion_residual(wf.points, "derived")
        assert np.abs(res).max() < 1e-10

    def test_curve_front_points_unit_time_from_curve(self, demo1_data, loop):
        # Every sample of the time-1 front is at travel time exactly 1 from
        # its own source point.
        sampling = FrontSampling(curve=32, circle=8)
        wf = propagate_front(demo1_data, loop, 1.0, sampling=sampling)
        s_vals = np.repeat(loop.sample_params(32), 8)
        sources = loop.points(s_vals)
        f = eval_randers(demo1_data, sources, wf.points - sources)
        assert np.abs(f - 1.0).max() < 1e-9

    def test_slice_matches_full_front(self, demo1_data):
        # The in-plane sampler lands on the same surface: check the front
        # equation on the slice.
        poly = propagate_front_slice(demo1_data, PointFront(ORIGIN), 1.0, ("z", 0.0), n=256)
        res = fixtures.front_expansion_residual(poly, "derived")
        assert np.abs(res).max() < 1e-10
        assert np.abs(poly[:, 2]).max() == 0.0

    def test_semigroup_on_slice(self, demo1_data, loop):
        # tau = 2 directly vs tau = 1 twice via the chained slice front.
        from firefront.scenario import _advance_slice, _slice_chain_from_front

        direct = propagate_front_slice(demo1_data, loop, 2.0, ("z", 0.0), n=512)
        chain0 = _slice_chain_from_front(loop, 512)
        chain1 = _advance_slice(demo1_data, chain0, loop, 1.0, 2, 512)
        chain2 = _advance_slice(demo1_data, chain1, loop, 1.0, 2, 512)
        d = polyline_hausdorff(chain2.closed_polyline(), direct)
        assert d <= 1e-3

    def test_wavefront_as_sampled_front_roundtrip(self, demo1_data):
        wf = propagate_front(
            demo1_data, PointFront(ORIGIN), 1.0, sampling=FrontSampling(point_polar=17, point_azimuth=32)
        )
        front = wf.as_sampled_front(wind=demo1_data.wind)
        assert front.points_arr.shape == wf.points.shape
        assert front.tangents_arr.shape == (wf.n_points, 2, 3)
        assert front.outward_hint is not None


class TestHuygensStep:
    def test_two_small_steps_match_one_big(self, euclid_data):
        grid = PlaneGrid("z", 0.0, (-2.5, -2.5), (2.5, 2.5), (201, 201))
        one = huygens_step(euclid_data, PointFront(ORIGIN), 2.0, grid)
        half = huygens_step(euclid_data, PointFront(ORIGIN), 1.0, grid)
        two = huygens_step(euclid_data, half, 1.0, grid)
        d = polyline_hausdorff(one.points, two.points)
        assert d <= 2.0 * grid.max_spacing
        assert one.tau == 2.0 and two.tau == 2.0

    def test_envelope_matches_rays_demo1_point(self, demo1_data):
        grid = PlaneGrid("z", 0.0, (-1.2, -1.2), (1.2, 2.0), (201, 201))
        env = huygens_step(demo1_data, PointFront(ORIGIN), 1.0, grid)
        rays = propagate_front_slice(demo1_data, PointFront(ORIGIN), 1.0, grid, n=1024)
        assert polyline_hausdorff(env.points, rays) <= 2.0 * grid.max_spacing

    def test_envelope_matches_rays_demo1_curve(self, demo1_data, loop):
        grid = PlaneGrid("z", 0.0, (-3.2, -3.2), (3.4, 3.4), (201, 201))
        env = huygens_step(demo1_data, loop, 1.0, grid, sampling=FrontSampling(curve=128))
        rays = propagate_front_slice(demo1_data, loop, 1.0, grid, n=1024)
        assert polyline_hausdorff(env.points, rays) <= 2.0 * grid.max_spacing

    def test_small_radius_limit_stays_near_front(self, euclid_data):
        # As r shrinks toward the cell size the stepped front approaches
        # the input front: distance bounded by r plus one cell.  (Below
        # cell size the indicator cannot resolve the balls at all.)
        grid = PlaneGrid("z", 0.0, (-1.6, -1.6), (1.6, 1.6), (161, 161))
        cell = grid.max_spacing
        s = np.linspace(0.0, 2 * np.pi, 512, endpoint=False)
        circle = np.stack([np.cos(s), np.sin(s), np.zeros_like(s)], axis=1)
        front = SampledFront(circle)
        closed = np.vstack([circle, circle[:1]])
        for r in (3.0 * cell, 2.0 * cell, 1.5 * cell):
            env = huygens_step(euclid_data, front, r, grid)
            d = polyline_hausdorff(env.points, closed)
            assert d <= r + cell

    def test_grid_too_coarse_when_front_escapes(self, demo1_data):
        grid = PlaneGrid("z", 0.0, (-0.3, -0.3), (0.3, 0.3), (64, 64))
        with pytest.raises(GridTooCoarse):
            huygens_step(demo1_data, PointFront(ORIGIN), 1.0, grid)

    def test_traced_mode_envelope(self):
        # Isometry-flow wind: traced per-seed balls vs the constant-mode
        # answer for the same effective data at the origin.
        data = ZermeloData(metric=np.eye(3), wind=rotation_wind(0.2))
        grid = PlaneGrid("z", 0.0, (-1.6, -1.6), (1.6, 1.6), (161, 161))
        env = huygens_step(
            data, PointFront(ORIGIN), 1.0, grid, mode="killing", dt=0.05, seed_fan=(17, 32)
        )
        # From the origin the rotation flow fixes the center; the time-1
        # ball is the unit ball swept by the flow, still the unit circle.
        radii = np.linalg.norm(env.points[:, :2], axis=1)
        assert np.abs(radii - 1.0).max() <= 2.0 * grid.max_spacing

    def test_volume_grid_envelope(self, euclid_data):
        grid = VolumeGrid((-1.5, -1.5, -1.5), (1.5, 1.5, 1.5), (49, 49, 49))
        env = huygens_step(euclid_data, PointFront(ORIGIN), 1.0, grid)
        radii = np.linalg.norm(env.points, axis=1)
        assert np.abs(radii - 1.0).max() <= 2.0 * grid.max_spacing


class TestArrivalField:
    def test_euclidean_point_source(self, euclid_data):
        grid = PlaneGrid("z", 0.0, (-2.0, -2.0), (2.0, 2.0), (101, 101))
        field = arrival_time_field(euclid_data, PointFront(ORIGIN), grid, horizon=5.0)
        cells = grid.cell_centers()
        np.testing.assert_allclose(field.values, np.linalg.norm(cells, axis=1), atol=1e-12)
        assert field.values.min() == 0.0  # zero on the cell holding the source
        assert np.all(field.values >= 0.0)

    def test_constant_wind_quadratic_oracle(self):
        w = 0.4
        data = ZermeloData(metric=np.eye(3), wind=ConstantWind([0.0, w, 0.0]))
        grid = PlaneGrid("z", 0.0, (-2.0, -2.0), (2.0, 2.0), (81, 81))
        field = arrival_time_field(data, PointFront(ORIGIN), grid, horizon=10.0)
        q = grid.cell_centers()
        # rho solves |q - rho W| = rho.
        lam = 1.0 - w * w
        qw = q[:, 1] * w
        oracle = (np.sqrt(qw**2 + lam * np.einsum("ni,ni->n", q, q)) - qw) / lam
        np.testing.assert_allclose(field.values, oracle, atol=1e-12)

    def test_level_set_matches_wavefront(self, demo1_data):
        grid = PlaneGrid("z", 0.0, (-1.5, -1.5), (1.5, 2.2), (201, 201))
        field = arrival_time_field(demo1_data, PointFront(ORIGIN), grid, horizon=3.0)
        level = field.level_set(1.0)[0]
        rays = propagate_front_slice(demo1_data, PointFront(ORIGIN), 1.0, grid, n=1024)
        assert polyline_hausdorff(level, rays) <= 2.0 * grid.max_spacing

    def test_monotone_nesting(self, demo1_data, loop):
        grid = PlaneGrid("z", 0.0, (-4.0, -4.0), (4.5, 5.5), (101, 101))
        field = arrival_time_field(demo1_data, loop, grid, horizon=3.0)
        assert field.check_nesting([0.5, 1.0, 1.5, 2.0, 2.5])

    def test_lipschitz_bound_holds(self, demo1_data):
        grid = PlaneGrid("z", 0.0, (-1.5, -1.5), (1.5, 2.0), (101, 101))
        field = arrival_time_field(demo1_data, PointFront(ORIGIN), grid, horizon=5.0)
        assert field.lipschitz_violation(demo1_data) <= 1e-9

    def test_volume_grid_arrival(self, euclid_data):
        grid = VolumeGrid((-1.0, -1.0, -1.0), (1.0, 1.0, 1.0), (17, 17, 17))
        field = arrival_time_field(euclid_data, PointFront(ORIGIN), grid, horizon=5.0)
        cells = grid.cell_centers()
        np.testing.assert_allclose(field.values, np.linalg.norm(cells, axis=1), atol=1e-12)

    def test_traced_mode_close_to_exact(self, euclid_data):
        grid = PlaneGrid("z", 0.0, (-1.2, -1.2), (1.2, 1.2), (61, 61))
        field = arrival_time_field(
            euclid_data,
            PointFront(ORIGIN),
            grid,
            horizon=2.0,
            sampling=FrontSampling(point_polar=33, point_azimuth=64),
            mode="general",
            dt=0.05,
        )
        cells = grid.cell_centers()
        exact = np.linalg.norm(cells, axis=1)
        ok = np.isfinite(field.values)
        assert ok.mean() > 0.9
        assert np.abs(field.values[ok] - exact[ok]).max() <= 2.0 * grid.max_spacing


class TestSelectMode:
    def test_constant(self, demo1_data):
        rep = select_mode(demo1_data, ((-1, -1, -1), (1, 1, 1)))
        assert rep.mode == "constant"

    def test_killing(self):
        data = ZermeloData(metric=np.eye(3), wind=rotation_wind(0.2))
        rep = select_mode(data, ((-1, -1, -1), (1, 1, 1)))
        assert rep.mode == "killing"
        assert rep.killing_ok

    def test_general_with_residual(self, demo2_data):
        rep = select_mode(demo2_data, ((-1, -1, -1), (1, 1, 1)))
        assert rep.mode == "general"
        assert not rep.killing_ok
        assert rep.killing_residual > 0.01


class TestGeometryHelpers:
    def test_polyline_hausdorff_translated_squares(self):
        sq = np.array([[0, 0, 0], [1, 0, 0], [1, 1, 0], [0, 1, 0], [0, 0, 0]], dtype=float)
        shifted = sq + np.array([0.05, 0.0, 0.0])
        assert polyline_hausdorff(sq, shifted) == pytest.approx(0.05, abs=1e-12)

    def test_directed_distance_to_mesh(self):
        # Distance from points to a unit-sphere mesh is ~ |r - 1|.
        from firefront.indicatrix import unit_sphere_grid

        mesh = unit_sphere_grid(33, 64).reshape(33, 64, 3)
        pts = np.array([[1.3, 0.0, 0.0], [0.0, 0.5, 0.0]])
        d = directed_distance_to_mesh(pts, mesh)
        assert d == pytest.approx(0.5, abs=5e-3)
