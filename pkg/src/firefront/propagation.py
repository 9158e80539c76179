"""Front propagation: orthogonal ray shooting and Huygens envelope stepping.

A front is propagated either by launching unit-speed rays orthogonally
(in the drifted-norm sense) from sampled source points, or by covering a
grid with speed-r spherical wavefronts seeded on the front and extracting
the outer boundary of the union.  Both views agree up to grid resolution,
which is the computational content of the envelope principle.

All sampling is deterministic; results are keyed by sample index so
data-parallel evaluation cannot reorder output.
"""

from __future__ import annotations

from dataclasses import dataclass, field as dc_field
from typing import Sequence

import numpy as np
from scipy.spatial import cKDTree
from skimage import measure

from .errors import DegenerateTangent, GridTooCoarse
from .geodesics import TraceMode, trace_wave_rays
from .indicatrix import unit_sphere_grid, unit_sphere_sample
from .metric import ZermeloData, eval_randers
from .wind import WindField, is_killing

_PLANE_AXES = {"x": 0, "y": 1, "z": 2}


# ---------------------------------------------------------------------------
# Front geometries


class FrontGeometry:
    """Base class for initial fronts."""

    kind = "abstract"


class PointFront(FrontGeometry):
    """Ignition point; every unit-speed direction is a wave ray."""

    kind = "point"

    def __init__(self, point):
        self.point = np.asarray(point, dtype=float).reshape(3)


class CurveFront(FrontGeometry):
    """Parametric fire line s -> R^3 with tangent, over `s_range`."""

    kind = "curve"

    def __init__(self, fn, s_range, tangent_fn=None, closed=True):
        self.fn = fn
        self.s_range = (float(s_range[0]), float(s_range[1]))
        self.closed = bool(closed)
        if tangent_fn is None:
            span = self.s_range[1] - self.s_range[0]
            delta = 1e-7 * max(span, 1.0)

            def tangent_fn(s, _d=delta):
                return (self.fn(np.asarray(s) + _d) - self.fn(np.asarray(s) - _d)) / (2 * _d)

        self.tangent_fn = tangent_fn

    def points(self, s):
        return np.asarray(self.fn(np.asarray(s, dtype=float)), dtype=float)

    def tangents(self, s):
        return np.asarray(self.tangent_fn(np.asarray(s, dtype=float)), dtype=float)

    def sample_params(self, n):
        lo, hi = self.s_range
        if self.closed:
            return lo + (hi - lo) * np.arange(n) / n
        return np.linspace(lo, hi, n)


class SurfaceFront(FrontGeometry):
    """Parametric surface (s1, s2) -> R^3 with two tangents."""

    kind = "surface"

    def __init__(self, fn, s1_range, s2_range, tangent_fns=None, closed_s1=True):
        self.fn = fn
        self.s1_range = (float(s1_range[0]), float(s1_range[1]))
        self.s2_range = (float(s2_range[0]), float(s2_range[1]))
        self.closed_s1 = bool(closed_s1)
        if tangent_fns is None:
            d1 = 1e-7 * max(self.s1_range[1] - self.s1_range[0], 1.0)
            d2 = 1e-7 * max(self.s2_range[1] - self.s2_range[0], 1.0)

            def t1(s1, s2, _d=d1):
                return (self.fn(s1 + _d, s2) - self.fn(s1 - _d, s2)) / (2 * _d)

            def t2(s1, s2, _d=d2):
                return (self.fn(s1, s2 + _d) - self.fn(s1, s2 - _d)) / (2 * _d)

            tangent_fns = (t1, t2)
        self.tangent_fns = tangent_fns

    def points(self, s1, s2):
        return np.asarray(
            self.fn(np.asarray(s1, dtype=float), np.asarray(s2, dtype=float)), dtype=float
        )

    def tangents(self, s1, s2):
        return (
            np.asarray(self.tangent_fns[0](s1, s2), dtype=float),
            np.asarray(self.tangent_fns[1](s1, s2), dtype=float),
        )

    def sample_params(self, n1, n2):
        lo1, hi1 = self.s1_range
        if self.closed_s1:
            s1 = lo1 + (hi1 - lo1) * np.arange(n1) / n1
        else:
            s1 = np.linspace(lo1, hi1, n1)
        s2 = np.linspace(self.s2_range[0], self.s2_range[1], n2)
        return s1, s2


class SampledFront(FrontGeometry):
    """Discrete front: points plus tangent frames (0, 1 or 2 tangents each).

    `outward_hint`, when given, selects the propagation side per sample;
    without it the side defaults to "away from the centroid".
    """

    kind = "sampled"

    def __init__(self, points, tangents=None, outward_hint=None):
        self.points_arr = np.asarray(points, dtype=float).reshape(-1, 3)
        if tangents is None:
            self.tangents_arr = None
        else:
            t = np.asarray(tangents, dtype=float)
            if t.ndim == 2:
                t = t[:, None, :]
            self.tangents_arr = t
        self.outward_hint = (
            None if outward_hint is None else np.asarray(outward_hint, dtype=float)
        )


# ---------------------------------------------------------------------------
# Sampling configuration and wavefronts


@dataclass(frozen=True)
class FrontSampling:
    """Deterministic sample densities for fronts and direction fans."""

    curve: int = 256
    surface: tuple = (64, 32)
    point_polar: int = 33
    point_azimuth: int = 64
    circle: int = 64
    side: str = "outward"


@dataclass(frozen=True)
class Wavefront:
    """Front at time `tau`: sampled points with launch provenance.

    `source_params` holds the source parameter per sample (padded to two
    columns), `velocities0` the launch velocity, `velocities1` the arrival
    velocity (equal to `velocities0` for straight rays), `source_index`
    the index of the originating source sample or envelope seed.
    `grid_shape` keeps the structured sampling layout when one exists, so
    tangent frames can be rebuilt for chaining.
    """

    tau: float
    points: np.ndarray
    velocities0: np.ndarray | None = None
    velocities1: np.ndarray | None = None
    source_params: np.ndarray | None = None
    source_index: np.ndarray | None = None
    grid_shape: tuple | None = None
    grid_wrap: tuple = (False, True)
    faces: np.ndarray | None = None  # triangle indices for extracted iso-surfaces
    mode: str = ""

    def __post_init__(self):
        object.__setattr__(self, "points", np.asarray(self.points, dtype=float).reshape(-1, 3))
        if self.tau < 0.0:
            raise ValueError("tau must be non-negative")

    @property
    def n_points(self) -> int:
        return self.points.shape[0]

    def as_sampled_front(self, wind=None) -> SampledFront:
        """Rebuild a SampledFront with tangent frames for chained propagation.

        With a structured `grid_shape` the tangents come from central
        differences across the sample grid.  The outward hint is the
        arrival offset V(tau) - W, which is exactly the continuation
        direction of each ray and so both selects the correct side and
        stands in for the frame where the sample grid degenerates.
        """
        hint = None
        vel = self.velocities1 if self.velocities1 is not None else self.velocities0
        if vel is not None:
            if wind is not None:
                w = (
                    wind(self.points)
                    if callable(wind)
                    else np.broadcast_to(np.asarray(wind, dtype=float), self.points.shape)
                )
                hint = vel - w
            else:
                hint = vel
        if self.grid_shape is None or len(self.grid_shape) != 2:
            return SampledFront(self.points, tangents=None, outward_hint=hint)
        n0, n1 = self.grid_shape
        pts = self.points.reshape(n0, n1, 3)
        t0 = _grid_tangent(pts, axis=0, wrap=self.grid_wrap[0])
        t1 = _grid_tangent(pts, axis=1, wrap=self.grid_wrap[1])
        tangents = np.stack([t0, t1], axis=2).reshape(-1, 2, 3)
        return SampledFront(self.points, tangents=tangents, outward_hint=hint)


def _grid_tangent(grid_pts, axis, wrap=False):
    """Central differences along one axis of an (n0, n1, 3) sample grid.

    Open axes fall back to one-sided estimates at their ends; for closed
    (wrapping) axes the rolled central difference is already exact.
    """
    fwd = np.roll(grid_pts, -1, axis=axis)
    bwd = np.roll(grid_pts, 1, axis=axis)
    tang = 0.5 * (fwd - bwd)
    if not wrap:
        if axis == 0:
            tang[0] = grid_pts[1] - grid_pts[0]
            tang[-1] = grid_pts[-1] - grid_pts[-2]
        else:
            tang[:, 0] = grid_pts[:, 1] - grid_pts[:, 0]
            tang[:, -1] = grid_pts[:, -1] - grid_pts[:, -2]
    return tang


# ---------------------------------------------------------------------------
# Launch directions


def _h_complement_basis(h, tangent):
    """Metric-orthonormal basis (e1, e2) of the h-complement of `tangent`.

    e1 is seeded from a fixed reference axis and e2 oriented with the
    Euclidean cross product, so the basis varies continuously along a
    curve whose tangent stays away from the reference axis.
    """
    t = np.asarray(tangent, dtype=float)
    tn = np.linalg.norm(t)
    if tn == 0.0 or not np.all(np.isfinite(t)):
        raise DegenerateTangent("curve tangent is zero or non-finite")
    unit_t = t / tn
    ref = None
    for cand in (np.array([0.0, 0.0, 1.0]), np.array([1.0, 0.0, 0.0]), np.array([0.0, 1.0, 0.0])):
        if abs(cand @ unit_t) < 0.99:
            ref = cand
            break
    htt = t @ h @ t
    e1 = ref - (ref @ h @ t) / htt * t
    n1 = np.sqrt(e1 @ h @ e1)
    if n1 < 1e-12:
        raise DegenerateTangent("could not build a complement basis")
    e1 = e1 / n1
    normal = np.cross(t, e1)
    e2 = normal - (normal @ h @ t) / htt * t - (normal @ h @ e1) * e1
    n2 = np.sqrt(e2 @ h @ e2)
    if n2 < 1e-12:
        raise DegenerateTangent("could not build a complement basis")
    e2 = e2 / n2
    if e2 @ normal < 0.0:
        e2 = -e2
    return e1, e2


def _surface_normal_direction(h, t1, t2):
    """Metric-unit u with h(u, t1) = h(u, t2) = 0 (sign unresolved)."""
    n1 = np.linalg.norm(t1)
    n2 = np.linalg.norm(t2)
    if min(n1, n2) <= 1e-9 * max(n1, n2) or max(n1, n2) == 0.0:
        # A vanishing tangent (e.g. the azimuth direction at a resampled
        # fan pole) leaves the frame meaningless, same as parallel ones.
        raise DegenerateTangent("surface tangent frame is degenerate")
    cross = np.cross(t1, t2)
    if np.linalg.norm(cross) < 1e-12 * n1 * n2:
        raise DegenerateTangent("surface tangents are linearly dependent")
    u = np.linalg.solve(h, cross)
    return u / np.sqrt(u @ h @ u)


def _resolve_hint(point, hint, centroid):
    if hint is not None:
        return np.asarray(hint, dtype=float)
    out = np.asarray(point, dtype=float) - centroid
    n = np.linalg.norm(out)
    if n < 1e-14:
        return np.array([1.0, 0.0, 0.0])
    return out / n


def _metric_sphere_from_h(h, sphere_points):
    """Map Euclidean unit sphere samples onto {u : u^T h u = 1}."""
    vals, vecs = np.linalg.eigh(h)
    # u = vecs @ diag(1/sqrt(vals)) @ s  has  u^T h u = |s|^2.
    return sphere_points @ (vecs / np.sqrt(vals)).T


def _metric_sphere_at(data: ZermeloData, point, sphere_points):
    """Unit-speed offsets at a point.

    Metrics built from an EllipsoidSpec use the spec object's own axis
    parametrization (bit-exact agreement with the indicatrix sampler);
    anything else goes through the spectral map."""
    from .indicatrix import EllipsoidSpec, metric_unit_sphere

    src = getattr(data, "metric_source", None)
    if isinstance(src, EllipsoidSpec):
        return metric_unit_sphere(src, np.asarray(point, dtype=float), sphere_points)
    return _metric_sphere_from_h(data.metric_at(point), sphere_points)


def launch_directions(
    data: ZermeloData,
    front: FrontGeometry,
    at=None,
    sampling: FrontSampling = FrontSampling(),
    side: str | None = None,
    outward_hint=None,
    centroid=None,
) -> np.ndarray:
    """Unit-speed launch velocities at one front parameter.

    Point fronts return a full fan W + u over the metric unit sphere;
    curve fronts the (half-)circle of unit u orthogonal to the tangent;
    surface fronts the single unit normal on the propagation side.
    `side` is "outward" (default), "inward" or "both".
    """
    side = sampling.side if side is None else side
    if isinstance(front, PointFront):
        p = front.point
        w = data.wind_at(p)
        sphere = unit_sphere_grid(sampling.point_polar, sampling.point_azimuth)
        return w + _metric_sphere_at(data, p, sphere)

    if isinstance(front, CurveFront):
        if at is None:
            raise ValueError("curve front needs a parameter value")
        p = front.points(at)
        t = front.tangents(at)
        return _curve_launch(data, p, t, sampling.circle, side, outward_hint, centroid)

    if isinstance(front, SurfaceFront):
        if at is None:
            raise ValueError("surface front needs (s1, s2)")
        s1, s2 = at
        p = front.points(s1, s2)
        t1, t2 = front.tangents(s1, s2)
        return _surface_launch(data, p, t1, t2, side, outward_hint, centroid)

    if isinstance(front, SampledFront):
        if at is None:
            raise ValueError("sampled front needs a sample index")
        i = int(at)
        p = front.points_arr[i]
        hint = front.outward_hint[i] if front.outward_hint is not None else outward_hint
        if front.tangents_arr is None:
            w = data.wind_at(p)
            sphere = unit_sphere_grid(sampling.point_polar, sampling.point_azimuth)
            return w + _metric_sphere_at(data, p, sphere)
        tangents = front.tangents_arr[i]
        try:
            if tangents.shape[0] == 1:
                return _curve_launch(data, p, tangents[0], sampling.circle, side, hint, centroid)
            return _surface_launch(data, p, tangents[0], tangents[1], side, hint, centroid)
        except DegenerateTangent:
            # Degenerate frames happen at the poles of resampled fan
            # grids; continue along the stored propagation side instead.
            if hint is None or np.linalg.norm(hint) == 0.0:
                raise
            h = data.metric_at(p)
            w = data.wind_at(p)
            u = np.asarray(hint, dtype=float)
            u = u / np.sqrt(u @ h @ u)
            if side == "both":
                return np.stack([w + u, w - u])
            if side == "inward":
                u = -u
            return (w + u)[None, :]

    raise TypeError(f"unsupported front geometry {type(front).__name__}")


def _curve_launch(data, p, tangent, n_circle, side, hint, centroid):
    h = data.metric_at(p)
    w = data.wind_at(p)
    e1, e2 = _h_complement_basis(h, tangent)
    if side == "both":
        psi = 2.0 * np.pi * np.arange(n_circle) / n_circle
        u = np.outer(np.cos(psi), e1) + np.outer(np.sin(psi), e2)
        return w + u
    out = _resolve_hint(p, hint, centroid if centroid is not None else np.zeros(3))
    if side == "inward":
        out = -out
    a1, a2 = out @ h @ e1, out @ h @ e2
    if abs(a1) < 1e-14 and abs(a2) < 1e-14:
        raise DegenerateTangent("propagation-side hint lies along the curve tangent")
    # Half circle centered on the hint's angle in the (e1, e2) frame.
    psi0 = np.arctan2(a2, a1)
    psi = psi0 + np.linspace(-0.5 * np.pi, 0.5 * np.pi, n_circle)
    u = np.outer(np.cos(psi), e1) + np.outer(np.sin(psi), e2)
    return w + u


def _surface_launch(data, p, t1, t2, side, hint, centroid):
    h = data.metric_at(p)
    w = data.wind_at(p)
    u = _surface_normal_direction(h, t1, t2)
    if side == "both":
        return np.stack([w + u, w - u])
    out = _resolve_hint(p, hint, centroid if centroid is not None else np.zeros(3))
    if side == "inward":
        out = -out
    if u @ h @ out < 0.0:
        u = -u
    return (w + u)[None, :]


def _front_fan(data, front, sampling, side=None):
    """All launch data for a front.

    Returns (sources (M, 3), velocities (M, 3), params (M, 2), grid_shape).
    """
    side = sampling.side if side is None else side
    if isinstance(front, PointFront):
        dirs = launch_directions(data, front, sampling=sampling, side=side)
        m = dirs.shape[0]
        sources = np.broadcast_to(front.point, (m, 3)).copy()
        params = np.stack(
            [
                np.repeat(np.arange(sampling.point_polar), sampling.point_azimuth),
                np.tile(np.arange(sampling.point_azimuth), sampling.point_polar),
            ],
            axis=1,
        ).astype(float)
        return sources, dirs, params, (sampling.point_polar, sampling.point_azimuth)

    if isinstance(front, CurveFront):
        s_vals = front.sample_params(sampling.curve)
        pts = front.points(s_vals)
        centroid = pts.mean(axis=0)
        sources, dirs, params = [], [], []
        for s, p in zip(s_vals, pts):
            v = launch_directions(
                data, front, at=s, sampling=sampling, side=side, centroid=centroid
            )
            sources.append(np.broadcast_to(p, v.shape).copy())
            dirs.append(v)
            params.append(
                np.stack([np.full(v.shape[0], s), np.arange(v.shape[0], dtype=float)], axis=1)
            )
        return (
            np.concatenate(sources),
            np.concatenate(dirs),
            np.concatenate(params),
            (len(s_vals), sampling.circle),
        )

    if isinstance(front, SurfaceFront):
        s1_vals, s2_vals = front.sample_params(*sampling.surface)
        grid_pts = front.points(s1_vals[:, None], s2_vals[None, :])
        centroid = grid_pts.reshape(-1, 3).mean(axis=0)
        sources, dirs, params = [], [], []
        for s1 in s1_vals:
            for s2 in s2_vals:
                v = launch_directions(
                    data, front, at=(s1, s2), sampling=sampling, side=side, centroid=centroid
                )
                p = front.points(s1, s2)
                sources.append(np.broadcast_to(p, v.shape).copy())
                dirs.append(v)
                params.append(
                    np.stack([np.full(v.shape[0], s1), np.full(v.shape[0], s2)], axis=1)
                )
        shape = (len(s1_vals), len(s2_vals)) if side != "both" else None
        return np.concatenate(sources), np.concatenate(dirs), np.concatenate(params), shape

    if isinstance(front, SampledFront):
        centroid = front.points_arr.mean(axis=0)
        sources, dirs, params = [], [], []
        for i in range(front.points_arr.shape[0]):
            v = launch_directions(
                data, front, at=i, sampling=sampling, side=side, centroid=centroid
            )
            sources.append(np.broadcast_to(front.points_arr[i], v.shape).copy())
            dirs.append(v)
            params.append(
                np.stack(
                    [np.full(v.shape[0], float(i)), np.arange(v.shape[0], dtype=float)], axis=1
                )
            )
        dirs = np.concatenate(dirs)
        per = dirs.shape[0] // front.points_arr.shape[0]
        shape = (front.points_arr.shape[0], per) if per > 1 else None
        return np.concatenate(sources), dirs, np.concatenate(params), shape

    raise TypeError(f"unsupported front geometry {type(front).__name__}")


def _front_seed_points(front, sampling):
    """Source points only (no fan): the envelope seeds of a front."""
    if isinstance(front, Wavefront):
        return front.points
    if isinstance(front, PointFront):
        return front.point[None, :]
    if isinstance(front, CurveFront):
        return front.points(front.sample_params(sampling.curve))
    if isinstance(front, SurfaceFront):
        s1, s2 = front.sample_params(*sampling.surface)
        return front.points(s1[:, None], s2[None, :]).reshape(-1, 3)
    if isinstance(front, SampledFront):
        return front.points_arr
    raise TypeError(f"unsupported front geometry {type(front).__name__}")


# ---------------------------------------------------------------------------
# Mode selection


@dataclass(frozen=True)
class ModeReport:
    """Outcome of automatic tracing-mode selection over a region."""

    mode: TraceMode
    killing_ok: bool | None = None
    killing_residual: float | None = None
    killing_tol: float | None = None


def select_mode(data: ZermeloData, bounds, samples_per_axis: int = 4) -> ModeReport:
    """Pick the cheapest valid tracing mode over a box region.

    Constant wind over a constant metric gives straight rays; a verified
    isometry flow gives flow-composed geodesics; anything else integrates
    the general system.  The isometry residual is reported either way.
    """
    lo, hi = (np.asarray(b, dtype=float) for b in bounds)
    axes = [np.linspace(lo[i], hi[i], samples_per_axis) for i in range(3)]
    grid = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, 3)
    h = data.metric_at(grid)
    w = data.wind_at(grid)
    h_const = float(np.max(np.abs(h - h[0]))) <= 1e-12 * max(1.0, float(np.abs(h).max()))
    w_const = float(np.max(np.abs(w - w[0]))) <= 1e-12 * max(1.0, float(np.abs(w).max()))
    if h_const and w_const:
        return ModeReport(mode="constant")
    if isinstance(data.wind, WindField):
        report = is_killing(data.wind, data.metric, (lo, hi))
        mode: TraceMode = "killing" if report.ok else "general"
        return ModeReport(
            mode=mode,
            killing_ok=report.ok,
            killing_residual=report.max_residual,
            killing_tol=report.tol,
        )
    return ModeReport(mode="general")


# ---------------------------------------------------------------------------
# Wavefront computation by ray shooting


def spherical_wavefront(
    data: ZermeloData,
    point,
    tau: float,
    n: int,
    mode: TraceMode = "constant",
    dt: float | None = None,
    skip_mode_check: bool = False,
) -> Wavefront:
    """Points at travel time `tau` from a single ignition point.

    In constant mode this is the exact wind-shifted ellipsoid
    p + tau*(W + u); otherwise a fan of n unit-speed rays is traced.
    """
    if tau <= 0.0:
        raise ValueError("tau must be positive")
    p = np.asarray(point, dtype=float).reshape(3)
    w = data.wind_at(p)
    units = _metric_sphere_at(data, p, unit_sphere_sample(n))
    vels = w + units
    vels_end = vels
    if mode == "constant":
        # Grouped exactly like the indicatrix sampler, so the two agree
        # bit for bit in constant mode.
        pts = tau * units + tau * w + p
    else:
        bundle = trace_wave_rays(
            data,
            mode,
            np.broadcast_to(p, vels.shape),
            vels,
            tau,
            dt=dt,
            skip_mode_check=skip_mode_check,
        )
        pts = bundle.endpoints
        vels_end = bundle.velocities[-1]
    return Wavefront(
        tau=tau,
        points=pts,
        velocities0=vels,
        velocities1=vels_end,
        source_index=np.zeros(vels.shape[0], dtype=int),
        mode=mode,
    )


def propagate_front(
    data: ZermeloData,
    front: FrontGeometry,
    tau: float,
    sampling: FrontSampling = FrontSampling(),
    mode: TraceMode = "constant",
    dt: float | None = None,
    side: str | None = None,
    skip_mode_check: bool = False,
) -> Wavefront:
    """Front at time `tau` by orthogonal launch and unit-speed ray tracing."""
    if tau < 0.0:
        raise ValueError("tau must be non-negative")
    sources, vels, params, grid_shape = _front_fan(data, front, sampling, side=side)
    grid_wrap = _front_grid_wrap(front, sampling.side if side is None else side)
    vels_end = vels
    if tau == 0.0:
        pts = sources
    elif mode == "constant":
        pts = sources + tau * vels
    else:
        bundle = trace_wave_rays(
            data, mode, sources, vels, tau, dt=dt, skip_mode_check=skip_mode_check
        )
        pts = bundle.endpoints
        vels_end = bundle.velocities[-1]
    return Wavefront(
        tau=tau,
        points=pts,
        velocities0=vels,
        velocities1=vels_end,
        source_params=params,
        source_index=np.arange(len(sources)),
        grid_shape=grid_shape,
        grid_wrap=grid_wrap,
        mode=mode,
    )


def _front_grid_wrap(front, side) -> tuple:
    """Which axes of the front's sample grid close on themselves."""
    if isinstance(front, PointFront):
        return (False, True)  # polar open, azimuth closed
    if isinstance(front, CurveFront):
        return (front.closed, side == "both")
    if isinstance(front, SurfaceFront):
        return (front.closed_s1, False)
    return (False, False)


# ---------------------------------------------------------------------------
# Exact in-plane propagation (constant data)


def _ellipse_section_samples(h, w, axis, n):
    """Ordered loop sampling {u : u^T h u = 1, u[axis] = -w[axis]}.

    In the two free coordinates the section is (x - x0)^T A (x - x0) = rho^2
    with A the 2x2 submatrix of h; empty sections raise DegenerateTangent.
    """
    others = [i for i in range(3) if i != axis]
    a_fix = -w[axis]
    A = h[np.ix_(others, others)]
    b = h[others, axis] * a_fix
    c = h[axis, axis] * a_fix**2 - 1.0
    x0 = -np.linalg.solve(A, b)
    rho_sq = float(x0 @ A @ x0) - c
    if rho_sq <= 0.0:
        raise DegenerateTangent("plane section of the velocity ellipsoid is empty")
    vals, vecs = np.linalg.eigh(A)
    psi = 2.0 * np.pi * np.arange(n) / n
    circ = np.stack([np.cos(psi), np.sin(psi)], axis=1)
    ys = circ @ (vecs * np.sqrt(rho_sq / vals)).T
    out = np.zeros((n, 3))
    out[:, others[0]] = x0[0] + ys[:, 0]
    out[:, others[1]] = x0[1] + ys[:, 1]
    out[:, axis] = a_fix
    return out


def _curve_plane_launch(h, w, tangent, axis, hint):
    """In-plane launch offset u at one curve point, on the side of `hint`.

    Solves u[axis] = -w[axis], h(u, T) = 0, u^T h u = 1.
    """
    others = [i for i in range(3) if i != axis]
    a_fix = -w[axis]
    ht = h @ tangent
    alpha = ht[others]
    rhs = -a_fix * ht[axis]
    if np.linalg.norm(alpha) < 1e-14:
        raise DegenerateTangent("curve tangent is metric-orthogonal to the slice plane")
    p0 = alpha * rhs / (alpha @ alpha)
    d = np.array([-alpha[1], alpha[0]])
    A = h[np.ix_(others, others)]
    b = h[others, axis] * a_fix
    c = h[axis, axis] * a_fix**2 - 1.0
    qa = float(d @ A @ d)
    qb = 2.0 * float(d @ A @ p0 + d @ b)
    qc = float(p0 @ A @ p0 + 2.0 * b @ p0 + c)
    disc = qb * qb - 4.0 * qa * qc
    if disc < 0.0:
        raise DegenerateTangent("no in-plane launch direction at this curve point")
    best = None
    for sign in (1.0, -1.0):
        t = (-qb + sign * np.sqrt(disc)) / (2.0 * qa)
        x = p0 + t * d
        u = np.zeros(3)
        u[others[0]], u[others[1]] = x
        u[axis] = a_fix
        score = float(u @ h @ hint)
        if best is None or score > best[0]:
            best = (score, u)
    return best[1]


def propagate_front_slice(
    data: ZermeloData,
    front: FrontGeometry,
    tau: float,
    plane,
    n: int = 1024,
    side: str = "outward",
) -> np.ndarray:
    """Exact in-plane front polyline for constant data (straight rays).

    The initial front must lie in the plane; the rays kept are exactly
    those whose straight trajectories stay in it.  Returns an ordered
    closed polyline (n + 1, 3).
    """
    axis, value = _plane_key(plane)
    if isinstance(front, PointFront):
        p = front.point
        if abs(p[axis] - value) > 1e-9:
            raise ValueError("point source does not lie in the slice plane")
        h = data.metric_at(p)
        w = data.wind_at(p)
        units = _ellipse_section_samples(h, w, axis, n)
        pts = p + tau * (w + units)
        return np.vstack([pts, pts[:1]])
    if isinstance(front, CurveFront):
        s_vals = front.sample_params(n)
        pts = front.points(s_vals)
        if np.max(np.abs(pts[:, axis] - value)) > 1e-9:
            raise ValueError("curve does not lie in the slice plane")
        centroid = pts.mean(axis=0)
        out = np.empty((n, 3))
        sign = -1.0 if side == "inward" else 1.0
        for i, s in enumerate(s_vals):
            p = pts[i]
            h = data.metric_at(p)
            w = data.wind_at(p)
            hint = sign * _resolve_hint(p, None, centroid)
            u = _curve_plane_launch(h, w, front.tangents(s), axis, hint)
            out[i] = p + tau * (w + u)
        return np.vstack([out, out[:1]])
    raise TypeError("slice propagation supports point and curve fronts")


# ---------------------------------------------------------------------------
# Grids


@dataclass(frozen=True)
class PlaneGrid:
    """Uniform 2-D node grid on an axis-aligned plane, embedded in 3-D."""

    axis: str
    value: float
    lo: tuple
    hi: tuple
    shape: tuple

    def __post_init__(self):
        if self.axis not in _PLANE_AXES:
            raise ValueError("plane axis must be 'x', 'y' or 'z'")

    @property
    def axis_index(self) -> int:
        return _PLANE_AXES[self.axis]

    @property
    def plane_axes(self) -> tuple:
        return tuple(i for i in range(3) if i != self.axis_index)

    @property
    def spacing(self) -> tuple:
        return (
            (self.hi[0] - self.lo[0]) / (self.shape[0] - 1),
            (self.hi[1] - self.lo[1]) / (self.shape[1] - 1),
        )

    @property
    def max_spacing(self) -> float:
        return max(self.spacing)

    def axes_1d(self):
        return (
            np.linspace(self.lo[0], self.hi[0], self.shape[0]),
            np.linspace(self.lo[1], self.hi[1], self.shape[1]),
        )

    def cell_centers(self) -> np.ndarray:
        """World coordinates of all grid nodes, shape (n0*n1, 3)."""
        a0, a1 = self.axes_1d()
        g0, g1 = np.meshgrid(a0, a1, indexing="ij")
        out = np.empty(g0.shape + (3,))
        i, j = self.plane_axes
        out[..., i] = g0
        out[..., j] = g1
        out[..., self.axis_index] = self.value
        return out.reshape(-1, 3)

    def to_world(self, index_points) -> np.ndarray:
        """Fractional (i, j) index coordinates -> 3-D world points."""
        idx = np.asarray(index_points, dtype=float)
        d0, d1 = self.spacing
        out = np.empty(idx.shape[:-1] + (3,))
        i, j = self.plane_axes
        out[..., i] = self.lo[0] + idx[..., 0] * d0
        out[..., j] = self.lo[1] + idx[..., 1] * d1
        out[..., self.axis_index] = self.value
        return out

    def in_plane(self, points3d) -> np.ndarray:
        pts = np.asarray(points3d, dtype=float)
        i, j = self.plane_axes
        return np.stack([pts[..., i], pts[..., j]], axis=-1)

    def contours(self, field, level) -> list:
        """Iso-contours of an (n0, n1) field as world polylines, largest area first."""
        lines = measure.find_contours(np.asarray(field, dtype=float), level)
        world = [self.to_world(c) for c in lines]
        world.sort(key=lambda c: -_polyline_area(self.in_plane(c)))
        return world


@dataclass(frozen=True)
class VolumeGrid:
    """Uniform 3-D node grid over a box."""

    lo: tuple
    hi: tuple
    shape: tuple

    @property
    def spacing(self) -> tuple:
        return tuple((self.hi[i] - self.lo[i]) / (self.shape[i] - 1) for i in range(3))

    @property
    def max_spacing(self) -> float:
        return max(self.spacing)

    def axes_1d(self):
        return tuple(np.linspace(self.lo[i], self.hi[i], self.shape[i]) for i in range(3))

    def cell_centers(self) -> np.ndarray:
        g = np.meshgrid(*self.axes_1d(), indexing="ij")
        return np.stack(g, axis=-1).reshape(-1, 3)

    def to_world(self, index_points) -> np.ndarray:
        idx = np.asarray(index_points, dtype=float)
        sp = self.spacing
        return np.stack([self.lo[i] + idx[..., i] * sp[i] for i in range(3)], axis=-1)


def _polyline_area(pts2d) -> float:
    """Absolute shoelace area of a closed 2-D polyline."""
    p = np.asarray(pts2d, dtype=float)
    x, y = p[:, 0], p[:, 1]
    return 0.5 * abs(float(np.dot(x, np.roll(y, -1)) - np.dot(y, np.roll(x, -1))))


def _plane_key(plane):
    if isinstance(plane, PlaneGrid):
        return plane.axis_index, plane.value
    axis, value = plane
    if isinstance(axis, str):
        axis = _PLANE_AXES[axis]
    return int(axis), float(value)


# ---------------------------------------------------------------------------
# Huygens envelope stepping


def huygens_step(
    data: ZermeloData,
    front,
    r: float,
    grid,
    sampling: FrontSampling = FrontSampling(),
    mode: TraceMode = "constant",
    dt: float | None = None,
    seed_fan: tuple = (17, 32),
) -> Wavefront:
    """Advance a front by `r` as the outer boundary of seeded wavefront balls.

    Every seed on the front emits its speed-r spherical wavefront; grid
    cells covered by any ball are marked and the outer boundary of the
    union is extracted as an iso-contour.  In constant mode the interior
    test is the exact ellipsoid inequality Q((q - p - rW)/r) <= 1 and the
    contour is taken on the continuous min-Q field; otherwise each seed's
    ball is a traced geodesic fan whose plane section is rasterized, and
    the contour is taken at 0.5 of the binary coverage indicator.
    """
    if r <= 0.0:
        raise ValueError("r must be positive")
    seeds = _front_seed_points(front, sampling)
    tau0 = front.tau if isinstance(front, Wavefront) else 0.0
    if mode == "constant":
        if isinstance(grid, VolumeGrid):
            return _huygens_volume(data, seeds, r, grid, tau0)
        field_flat, _ = _constant_cover_field(data, seeds, r, grid)
        level = 1.0
    else:
        if not isinstance(grid, PlaneGrid):
            raise ValueError(
                "envelope stepping with non-constant data supports plane grids only"
            )
        cells = grid.cell_centers()
        field_flat = _traced_cover_field(data, seeds, r, grid, cells, mode, dt, seed_fan)
        level = 0.5
    field = field_flat.reshape(grid.shape)
    contours = grid.contours(field, level)
    if not contours:
        raise GridTooCoarse("no front contour found; enlarge or refine the grid")
    outer = contours[0]
    if np.linalg.norm(outer[0] - outer[-1]) > 2.0 * grid.max_spacing:
        raise GridTooCoarse("outer front leaves the grid; enlarge the domain")
    tree = cKDTree(seeds)
    _, prov = tree.query(outer)
    return Wavefront(
        tau=tau0 + r,
        points=outer,
        source_index=np.asarray(prov, dtype=int),
        mode=f"envelope-{mode}",
    )


_COVER_FILL = 1e30  # finite "far outside" value; keeps contour interpolation clean


def _constant_cover_field(data, seeds, r, grid):
    """min over seeds of Q((q - p - rW)/r); values <= 1 mark covered cells.

    Each seed only touches the cells inside the bounding box of its
    shifted ellipsoid (plus one cell of margin), so cost scales with ball
    size rather than grid size.  Untouched cells get a large finite fill.
    """
    h = data.metric_at(seeds[0])
    w = data.wind_at(seeds[0])
    shift = r * w
    ext = r * np.sqrt(np.diag(np.linalg.inv(h)))  # per-axis ellipsoid halfwidths
    if isinstance(grid, PlaneGrid):
        axes = grid.axes_1d()
        world_axes = grid.plane_axes
        shape = grid.shape
    else:
        axes = grid.axes_1d()
        world_axes = (0, 1, 2)
        shape = grid.shape
    margins = [abs(a[1] - a[0]) for a in axes]
    best = np.full(shape, _COVER_FILL)
    idx = np.zeros(shape, dtype=int)
    for k in range(seeds.shape[0]):
        center = seeds[k] + shift
        windows = []
        for d, wa in enumerate(world_axes):
            lo = center[wa] - ext[wa] - margins[d]
            hi = center[wa] + ext[wa] + margins[d]
            i0 = int(np.searchsorted(axes[d], lo, side="left"))
            i1 = int(np.searchsorted(axes[d], hi, side="right"))
            windows.append((max(i0, 0), min(i1, shape[d])))
        if any(i1 <= i0 for i0, i1 in windows):
            continue
        local_axes = [axes[d][w0:w1] for d, (w0, w1) in enumerate(windows)]
        mesh = np.meshgrid(*local_axes, indexing="ij")
        pts = np.zeros(mesh[0].shape + (3,))
        for d, wa in enumerate(world_axes):
            pts[..., wa] = mesh[d]
        if isinstance(grid, PlaneGrid):
            pts[..., grid.axis_index] = grid.value
        dvec = (pts - center) / r
        q = np.einsum("...i,ij,...j->...", dvec, h, dvec)
        window_slices = tuple(slice(w0, w1) for w0, w1 in windows)
        best_view = best[window_slices]
        idx_view = idx[window_slices]
        better = q < best_view
        best_view[better] = q[better]
        idx_view[better] = k
    return best.reshape(-1), idx.reshape(-1)


def _huygens_volume(data, seeds, r, grid: VolumeGrid, tau0):
    """Constant-mode 3-D envelope: min-Q field + iso-surface extraction."""
    field_flat, _ = _constant_cover_field(data, seeds, r, grid)
    field = field_flat.reshape(grid.shape)
    if field.min() > 1.0 or field.max() < 1.0:
        raise GridTooCoarse("union surface does not cross the grid")
    verts, faces, _, _ = measure.marching_cubes(field, level=1.0)
    world = grid.to_world(verts)
    tree = cKDTree(seeds)
    _, prov = tree.query(world)
    return Wavefront(
        tau=tau0 + r,
        points=world,
        source_index=np.asarray(prov, dtype=int),
        faces=faces,
        mode="envelope-constant",
    )


def _mesh_plane_section(fan_points, grid: PlaneGrid, wrap: tuple = (False, True)):
    """Cross an (n0, n1, 3) sample mesh with the grid plane.

    `wrap` says which mesh axes close on themselves (fan meshes wrap in
    azimuth, tube meshes along the curve parameter).  Edge crossings are
    ordered by angle around their centroid, which is adequate for the
    convex-ish sections this is used on.  Returns an in-plane polygon
    (M, 2) or None when the mesh misses the plane.
    """
    axis = grid.axis_index
    signed = fan_points[..., axis] - grid.value
    crossings = []
    for mesh_axis in (0, 1):
        if wrap[mesh_axis]:
            b = np.roll(fan_points, -1, axis=mesh_axis)
            sb = np.roll(signed, -1, axis=mesh_axis)
            a, sa = fan_points, signed
        elif mesh_axis == 0:
            a, b = fan_points[:-1], fan_points[1:]
            sa, sb = signed[:-1], signed[1:]
        else:
            a, b = fan_points[:, :-1], fan_points[:, 1:]
            sa, sb = signed[:, :-1], signed[:, 1:]
        mask = (sa * sb) < 0.0
        if np.any(mask):
            t = (sa[mask] / (sa[mask] - sb[mask]))[:, None]
            crossings.append(a[mask] + t * (b[mask] - a[mask]))
    if not crossings:
        return None
    pts = np.concatenate(crossings)
    flat = grid.in_plane(pts)
    center = flat.mean(axis=0)
    order = np.argsort(np.arctan2(flat[:, 1] - center[1], flat[:, 0] - center[0]))
    return flat[order]


def _traced_cover_field(data, seeds, r, grid: PlaneGrid, cells, mode, dt, seed_fan):
    """Binary coverage field from per-seed geodesic-fan balls (arrival <= r)."""
    n_polar, n_azimuth = seed_fan
    sphere = unit_sphere_grid(n_polar, n_azimuth)
    n_seeds = seeds.shape[0]
    n_dirs = sphere.shape[0]
    w = data.wind_at(seeds)
    vels = np.empty((n_seeds, n_dirs, 3))
    for k in range(n_seeds):
        vels[k] = w[k] + _metric_sphere_at(data, seeds[k], sphere)
    sources = np.repeat(seeds, n_dirs, axis=0)
    bundle = trace_wave_rays(
        data, mode, sources, vels.reshape(-1, 3), r, dt=dt, skip_mode_check=True
    )
    balls = bundle.endpoints.reshape(n_seeds, n_polar, n_azimuth, 3)
    cells2d = grid.in_plane(cells)
    covered = np.zeros(cells.shape[0], dtype=bool)
    for k in range(n_seeds):
        poly = _mesh_plane_section(balls[k], grid)
        if poly is None or poly.shape[0] < 3:
            continue
        lo = poly.min(axis=0) - grid.max_spacing
        hi = poly.max(axis=0) + grid.max_spacing
        box = np.all((cells2d >= lo) & (cells2d <= hi), axis=1)
        todo = box & ~covered
        if not np.any(todo):
            continue
        inside = measure.points_in_poly(cells2d[todo], poly)
        covered[np.flatnonzero(todo)[inside]] = True
    return covered.astype(float)


def directed_hausdorff_to_polyline(points, polyline) -> float:
    """max over `points` of the distance to the segments of `polyline`."""
    p = np.asarray(points, dtype=float)
    q = np.asarray(polyline, dtype=float)
    if q.shape[0] < 2:
        d = np.linalg.norm(p[:, None, :] - q[None, :, :], axis=-1)
        return float(d.min(axis=1).max())
    a, b = q[:-1], q[1:]
    ab = b - a
    denom = np.einsum("ij,ij->i", ab, ab)
    denom = np.where(denom == 0.0, 1.0, denom)
    best = np.full(p.shape[0], np.inf)
    chunk = max(1, int(2e6 // max(a.shape[0], 1)))
    for i0 in range(0, p.shape[0], chunk):
        pp = p[i0 : i0 + chunk]
        ap = pp[:, None, :] - a[None, :, :]
        t = np.clip(np.einsum("nki,ki->nk", ap, ab) / denom, 0.0, 1.0)
        proj = a[None, :, :] + t[..., None] * ab[None, :, :]
        d = np.linalg.norm(pp[:, None, :] - proj, axis=-1).min(axis=1)
        best[i0 : i0 + chunk] = d
    return float(best.max())


def polyline_hausdorff(a, b) -> float:
    """Symmetric Hausdorff distance between two polylines (vertex-to-segment)."""
    return max(
        directed_hausdorff_to_polyline(np.asarray(a), np.asarray(b)),
        directed_hausdorff_to_polyline(np.asarray(b), np.asarray(a)),
    )


def _batched_point_triangle_distance(points, tris):
    """points (N, 3) vs per-point triangle sets tris (N, K, 3, 3) -> (N, K)."""
    v0 = tris[:, :, 0]
    e0 = tris[:, :, 1] - v0
    e1 = tris[:, :, 2] - v0
    a = np.einsum("nki,nki->nk", e0, e0)
    b = np.einsum("nki,nki->nk", e0, e1)
    c = np.einsum("nki,nki->nk", e1, e1)
    dvec = points[:, None, :] - v0
    d = np.einsum("nki,nki->nk", dvec, e0)
    e = np.einsum("nki,nki->nk", dvec, e1)
    det = np.maximum(a * c - b * b, 1e-300)
    s = (c * d - b * e) / det
    t = (a * e - b * d) / det
    inside = (s >= 0.0) & (t >= 0.0) & (s + t <= 1.0)
    # Clip before projecting: degenerate (zero-area) triangles produce huge
    # s, t that are excluded by `inside` but would overflow the norm.
    s_c = np.clip(s, -1.0, 2.0)
    t_c = np.clip(t, -1.0, 2.0)
    proj = v0 + s_c[..., None] * e0 + t_c[..., None] * e1
    d_in = np.linalg.norm(points[:, None, :] - proj, axis=-1)

    def seg(pa, pb):
        ab = pb - pa
        denom = np.maximum(np.einsum("nki,nki->nk", ab, ab), 1e-300)
        tt = np.clip(np.einsum("nki,nki->nk", points[:, None, :] - pa, ab) / denom, 0.0, 1.0)
        foot = pa + tt[..., None] * ab
        return np.linalg.norm(points[:, None, :] - foot, axis=-1)

    d_edge = np.minimum(
        seg(tris[:, :, 0], tris[:, :, 1]),
        np.minimum(seg(tris[:, :, 1], tris[:, :, 2]), seg(tris[:, :, 2], tris[:, :, 0])),
    )
    return np.where(inside, np.minimum(d_in, d_edge), d_edge)


def directed_distance_to_mesh(points, grid_points, wrap_axis1: bool = True, rings: int = 2) -> float:
    """max over `points` of the distance to a structured quad mesh surface.

    `grid_points` is (n0, n1, 3); each quad contributes two triangles and
    the azimuthal axis (axis 1) wraps by default.  Candidate triangles are
    limited to `rings` quad rings around each point's nearest mesh vertex,
    which is exact whenever the points lie much closer to the surface than
    a few mesh cells (the intended near-surface comparisons).
    """
    pts = np.asarray(points, dtype=float).reshape(-1, 3)
    g = np.asarray(grid_points, dtype=float)
    n0, n1 = g.shape[0], g.shape[1]
    tree = cKDTree(g.reshape(-1, 3))
    _, vid = tree.query(pts)
    i0 = vid // n1
    j0 = vid % n1
    offsets = [(di, dj) for di in range(-rings, rings) for dj in range(-rings, rings)]
    tris = np.empty((pts.shape[0], 2 * len(offsets), 3, 3))
    for k, (di, dj) in enumerate(offsets):
        ia = np.clip(i0 + di, 0, n0 - 2)
        ja = (j0 + dj) % n1 if wrap_axis1 else np.clip(j0 + dj, 0, n1 - 2)
        jb = (ja + 1) % n1 if wrap_axis1 else ja + 1
        q00 = g[ia, ja]
        q01 = g[ia, jb]
        q10 = g[ia + 1, ja]
        q11 = g[ia + 1, jb]
        tris[:, 2 * k, 0] = q00
        tris[:, 2 * k, 1] = q10
        tris[:, 2 * k, 2] = q01
        tris[:, 2 * k + 1, 0] = q01
        tris[:, 2 * k + 1, 1] = q10
        tris[:, 2 * k + 1, 2] = q11
    dists = _batched_point_triangle_distance(pts, tris)
    return float(dists.min(axis=1).max())


# ---------------------------------------------------------------------------
# Arrival-time fields


@dataclass(frozen=True)
class ArrivalField:
    """Per-cell earliest arrival time from the initial front."""

    grid: object
    values: np.ndarray
    seed_index: np.ndarray
    points: np.ndarray = dc_field(repr=False, default=None)

    def level_set(self, t: float) -> list:
        if not isinstance(self.grid, PlaneGrid):
            raise TypeError("level-set extraction is implemented for plane grids")
        return self.grid.contours(self.values.reshape(self.grid.shape), t)

    def burned_mask(self, t: float) -> np.ndarray:
        return self.values <= t

    def check_nesting(self, times: Sequence[float]) -> bool:
        """Sub-level sets of earlier times are contained in later ones."""
        masks = [self.burned_mask(t) for t in sorted(times)]
        return all(bool(np.all(m2[m1])) for m1, m2 in zip(masks, masks[1:]))

    def lipschitz_violation(self, data: ZermeloData) -> float:
        """Worst excess of rho(q2) - rho(q1) over F(q2 - q1) on grid edges.

        Non-positive values mean the discrete 1-Lipschitz bound holds.
        """
        if not isinstance(self.grid, PlaneGrid):
            raise TypeError("implemented for plane grids")
        vals = self.values.reshape(self.grid.shape)
        pts = self.points.reshape(self.grid.shape + (3,))
        worst = -np.inf
        for axis in (0, 1):
            v0 = np.moveaxis(vals, axis, 0)
            p0 = np.moveaxis(pts, axis, 0)
            step = p0[1:] - p0[:-1]
            cost_fwd = eval_randers(
                data, p0[:-1].reshape(-1, 3), step.reshape(-1, 3)
            ).reshape(step.shape[:-1])
            cost_bwd = eval_randers(
                data, p0[1:].reshape(-1, 3), -step.reshape(-1, 3)
            ).reshape(step.shape[:-1])
            dv = v0[1:] - v0[:-1]
            ok = np.isfinite(v0[1:]) & np.isfinite(v0[:-1])
            if np.any(ok):
                worst = max(worst, float(np.max(np.where(ok, dv - cost_fwd, -np.inf))))
                worst = max(worst, float(np.max(np.where(ok, -dv - cost_bwd, -np.inf))))
        return worst


def arrival_time_field(
    data: ZermeloData,
    front,
    grid,
    horizon: float,
    sampling: FrontSampling = FrontSampling(),
    mode: TraceMode = "constant",
    dt: float | None = None,
    side: str = "outward",
) -> ArrivalField:
    """Earliest arrival time on each grid cell.

    Constant mode is exact: the distance from a sampled front is the
    minimum over front samples of F(q - p).  Other modes trace a dense
    ray fan over [0, horizon] and assign each cell the time of its
    nearest ray sample; cells no ray approaches stay at +inf.
    """
    cells = grid.cell_centers()
    seeds = _front_seed_points(front, sampling)
    if mode == "constant":
        h = data.metric_at(seeds[0])
        w = data.wind_at(seeds[0])
        hw = h @ w
        lam = 1.0 - float(w @ hw)
        best = np.full(cells.shape[0], np.inf)
        idx = np.zeros(cells.shape[0], dtype=int)
        for k in range(seeds.shape[0]):
            d = cells - seeds[k]
            a = d @ hw
            b = np.einsum("ni,ij,nj->n", d, h, d)
            t = (np.sqrt(a * a + lam * b) - a) / lam
            better = t < best
            best[better] = t[better]
            idx[better] = k
        values = np.where(best <= horizon, best, np.inf)
        return ArrivalField(grid=grid, values=values, seed_index=idx, points=cells)
    if isinstance(front, Wavefront):
        front = front.as_sampled_front(wind=data.wind)
    sources, vels, _, _ = _front_fan(data, front, sampling, side=side)
    bundle = trace_wave_rays(data, mode, sources, vels, horizon, dt=dt, skip_mode_check=True)
    n_t, n_rays = bundle.points.shape[0], bundle.points.shape[1]
    samples = bundle.points.reshape(n_t * n_rays, 3)
    times = np.repeat(bundle.t, n_rays)
    ray_ids = np.tile(np.arange(n_rays), n_t)
    tree = cKDTree(samples)
    dist, nearest = tree.query(cells)
    max_reach = 2.0 * grid.max_spacing
    values = np.where(dist <= max_reach, times[nearest], np.inf)
    return ArrivalField(grid=grid, values=values, seed_index=ray_ids[nearest], points=cells)
