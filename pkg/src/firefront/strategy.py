"""Strategic path and point queries over a propagating front.

Three query types: the ray along which the fire covers the most ground
("all points equal priority"), the ray that reaches a given point, and
the ray that first touches a given region.  All searches are fan-based
(coarse deterministic scan over the launch fan, then local refinement of
the continuous fan parameters), because the objective can be multimodal
around a closed front; runner-up rays are reported alongside the winner.
"""

from __future__ import annotations

from dataclasses import dataclass, field as dc_field
from typing import Callable, Sequence

import numpy as np
from scipy.optimize import brentq
from scipy.spatial import cKDTree

from .errors import EmptyFan, OutOfHorizon, Unreachable
from .geodesics import TraceMode, Trajectory, trace_wave_rays
from .metric import ZermeloData, eval_randers
from .propagation import (
    CurveFront,
    FrontGeometry,
    FrontSampling,
    PointFront,
    SampledFront,
    SurfaceFront,
    _front_fan,
    _h_complement_basis,
    _metric_sphere_at,
    _resolve_hint,
    _surface_launch,
)

# ---------------------------------------------------------------------------
# Target regions


class Region:
    """A target set; `signed(points)` is negative inside, positive outside."""

    def signed(self, points) -> np.ndarray:
        raise NotImplementedError

    def boundary_samples(self, n: int) -> np.ndarray | None:
        return None


class BallRegion(Region):
    def __init__(self, center, radius: float):
        self.center = np.asarray(center, dtype=float).reshape(3)
        self.radius = float(radius)

    def signed(self, points):
        pts = np.asarray(points, dtype=float)
        return np.linalg.norm(pts - self.center, axis=-1) - self.radius

    def boundary_samples(self, n: int) -> np.ndarray:
        from .indicatrix import unit_sphere_sample

        return self.center + self.radius * unit_sphere_sample(n)


class HalfSpaceRegion(Region):
    """{q : normal . q >= offset}."""

    def __init__(self, normal, offset: float):
        self.normal = np.asarray(normal, dtype=float).reshape(3)
        self.offset = float(offset)

    def signed(self, points):
        pts = np.asarray(points, dtype=float)
        return self.offset - pts @ self.normal


class ImplicitRegion(Region):
    def __init__(self, fn: Callable[[np.ndarray], np.ndarray]):
        self.fn = fn

    def signed(self, points):
        return np.asarray(self.fn(np.asarray(points, dtype=float)), dtype=float)


class TriangleRegion(Region):
    """Closed triangle soup; signed value is the distance to the nearest
    vertex, negated for points inside (parity ray cast along +x)."""

    def __init__(self, vertices, faces):
        self.vertices = np.asarray(vertices, dtype=float).reshape(-1, 3)
        self.faces = np.asarray(faces, dtype=int).reshape(-1, 3)

    def signed(self, points):
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        tri = self.vertices[self.faces]
        dist = np.full(pts.shape[0], np.inf)
        for v in self.vertices:
            dist = np.minimum(dist, np.linalg.norm(pts - v, axis=-1))
        inside = _parity_inside(pts, tri)
        out = np.where(inside, -dist, dist)
        return out if np.asarray(points).ndim > 1 else out[0]


def _parity_inside(points, triangles):
    """Even-odd test counting ray crossings through the triangles.

    The ray direction is fixed but deliberately incommensurate with the
    axes, so rays from axis-aligned scenes do not graze triangle edges.
    """
    counts = np.zeros(points.shape[0], dtype=int)
    direction = np.array([0.9749278434268628, 0.1740776559556979, 0.1392621247645583])
    for tri in triangles:
        hit = _ray_triangle_hits(points, direction, tri)
        counts += hit.astype(int)
    return counts % 2 == 1


def _ray_triangle_hits(origins, direction, tri):
    v0, v1, v2 = tri
    e1, e2 = v1 - v0, v2 - v0
    pvec = np.cross(direction, e2)
    det = e1 @ pvec
    if abs(det) < 1e-14:
        return np.zeros(origins.shape[0], dtype=bool)
    inv = 1.0 / det
    tvec = origins - v0
    u = (tvec @ pvec) * inv
    qvec = np.cross(tvec, e1)
    v = (qvec @ direction) * inv
    t = (qvec @ e2) * inv
    return (u >= 0) & (v >= 0) & (u + v <= 1) & (t > 0)


# ---------------------------------------------------------------------------
# Results


@dataclass(frozen=True)
class RunnerUp:
    fan_index: int
    source_param: np.ndarray
    score: float
    endpoint: np.ndarray


@dataclass(frozen=True)
class StrategicResult:
    """Chosen ray plus enough provenance to audit or re-trace it."""

    ray: Trajectory
    tau_star: float
    q_star: np.ndarray
    fan_index: int
    source_param: np.ndarray
    score: float
    runner_ups: list = dc_field(default_factory=list)
    mode: str = ""

    def to_json_dict(self) -> dict:
        return {
            "schema": "firefront-strategic-v1",
            "tau_star": self.tau_star,
            "q_star": [float(x) for x in self.q_star],
            "fan_index": int(self.fan_index),
            "source_param": [float(x) for x in np.atleast_1d(self.source_param)],
            "score": float(self.score),
            "mode": self.mode,
            "ray": {
                "t": [float(x) for x in self.ray.t],
                "points": [[float(c) for c in p] for p in self.ray.points],
            },
            "runner_ups": [
                {
                    "fan_index": int(r.fan_index),
                    "source_param": [float(x) for x in np.atleast_1d(r.source_param)],
                    "score": float(r.score),
                    "endpoint": [float(c) for c in r.endpoint],
                }
                for r in self.runner_ups
            ],
        }


# ---------------------------------------------------------------------------
# Continuous fan parametrization (for local refinement)


class _FanParam:
    """Map continuous fan parameters to (source, velocity) pairs.

    Point fronts use sphere angles (polar, azimuth); curve fronts use
    (s, circle angle); surface fronts (s1, s2).  Sampled fronts are not
    refinable.
    """

    def __init__(self, data: ZermeloData, front: FrontGeometry, sampling, side):
        self.data = data
        self.front = front
        self.sampling = sampling
        self.side = side
        self.refinable = not isinstance(front, SampledFront)
        if isinstance(front, CurveFront):
            pts = front.points(front.sample_params(max(sampling.curve, 8)))
            self.centroid = pts.mean(axis=0)
        elif isinstance(front, SurfaceFront):
            s1, s2 = front.sample_params(*sampling.surface)
            self.centroid = front.points(s1[:, None], s2[None, :]).reshape(-1, 3).mean(axis=0)
        else:
            self.centroid = None

    def initial(self):
        """Coarse fan: (params (M, 2), sources, velocities)."""
        front, sampling = self.front, self.sampling
        if isinstance(front, PointFront):
            n_p, n_a = sampling.point_polar, sampling.point_azimuth
            phi = np.repeat(np.linspace(0.0, np.pi, n_p), n_a)
            theta = np.tile(np.arange(n_a) * (2 * np.pi / n_a), n_p)
            params = np.stack([phi, theta], axis=1)
            sources, vels = self.at(params)
            return params, sources, vels
        if isinstance(front, CurveFront):
            s_vals = front.sample_params(sampling.curve)
            psi = self._curve_psi_grid()
            params = np.stack(
                [np.repeat(s_vals, psi.size), np.tile(psi, s_vals.size)], axis=1
            )
            sources, vels = self.at(params)
            return params, sources, vels
        if isinstance(front, SurfaceFront):
            s1, s2 = front.sample_params(*sampling.surface)
            params = np.stack(
                [np.repeat(s1, s2.size), np.tile(s2, s1.size)], axis=1
            )
            sources, vels = self.at(params)
            return params, sources, vels
        sources, vels, params, _ = _front_fan(self.data, front, sampling, side=self.side)
        return params, sources, vels

    def _curve_psi_grid(self):
        n = self.sampling.circle
        if self.side == "both":
            return 2.0 * np.pi * np.arange(n) / n
        return np.linspace(-0.5 * np.pi, 0.5 * np.pi, n)

    def at(self, params):
        """(sources (K, 3), velocities (K, 3)) at continuous fan parameters."""
        params = np.atleast_2d(np.asarray(params, dtype=float))
        front = self.front
        if isinstance(front, PointFront):
            p = front.point
            w = self.data.wind_at(p)
            phi, theta = params[:, 0], params[:, 1]
            sphere = np.stack(
                [np.sin(phi) * np.cos(theta), np.sin(phi) * np.sin(theta), np.cos(phi)],
                axis=1,
            )
            vels = w + _metric_sphere_at(self.data, p, sphere)
            sources = np.broadcast_to(p, vels.shape).copy()
            return sources, vels
        if isinstance(front, CurveFront):
            sources = np.empty((params.shape[0], 3))
            vels = np.empty((params.shape[0], 3))
            for i, (s, psi) in enumerate(params):
                p = front.points(s)
                h = self.data.metric_at(p)
                w = self.data.wind_at(p)
                e1, e2 = _h_complement_basis(h, front.tangents(s))
                psi_abs = psi
                if self.side != "both":
                    out = _resolve_hint(p, None, self.centroid)
                    if self.side == "inward":
                        out = -out
                    psi_abs = np.arctan2(out @ h @ e2, out @ h @ e1) + psi
                u = np.cos(psi_abs) * e1 + np.sin(psi_abs) * e2
                sources[i] = p
                vels[i] = w + u
            return sources, vels
        if isinstance(front, SurfaceFront):
            sources = np.empty((params.shape[0], 3))
            vels = np.empty((params.shape[0], 3))
            for i, (s1, s2) in enumerate(params):
                p = front.points(s1, s2)
                t1, t2 = front.tangents(s1, s2)
                v = _surface_launch(
                    self.data, p, t1, t2, self.side, None, self.centroid
                )
                sources[i] = p
                vels[i] = v[0]
            return sources, vels
        raise TypeError("continuous fan parameters need a parametric front")


def _local_refine(param0, spans, evaluate, rounds: int = 36):
    """Shrinking 3^d grid descent around `param0`; deterministic ties keep center.

    `evaluate(params (K, d)) -> scores (K,)`, lower is better.
    """
    param = np.asarray(param0, dtype=float).copy()
    spans = np.asarray(spans, dtype=float).copy()
    best = float(evaluate(param[None, :])[0])
    d = param.size
    offsets = np.stack(
        np.meshgrid(*([np.array([-1.0, 0.0, 1.0])] * d), indexing="ij"), axis=-1
    ).reshape(-1, d)
    for _ in range(rounds):
        cand = param[None, :] + offsets * spans[None, :]
        scores = evaluate(cand)
        k = int(np.argmin(scores))
        if scores[k] < best - 0.0:
            best = float(scores[k])
            param = cand[k]
        spans *= 0.5
    return param, best


# ---------------------------------------------------------------------------
# Query implementations


def _fan_or_raise(data, front, sampling, side):
    fan = _FanParam(data, front, sampling, side)
    params, sources, vels = fan.initial()
    if params.shape[0] == 0:
        raise EmptyFan("front produced no launch directions")
    return fan, params, sources, vels


def _ray_trajectory(data, mode, source, velocity, horizon, dt):
    bundle = trace_wave_rays(
        data, mode, source[None, :], velocity[None, :], horizon,
        dt=dt, skip_mode_check=True,
    )
    return bundle.ray(0)


def _runner_ups(ranking, params, endpoints, best_idx, k=3, scores=None):
    """Next-best fan entries by `ranking` (lower first); `scores` holds the
    values to report, defaulting to the ranking itself."""
    if scores is None:
        scores = ranking
    order = np.argsort(ranking, kind="stable")
    out = []
    for idx in order:
        if idx == best_idx or len(out) >= k:
            continue
        out.append(
            RunnerUp(
                fan_index=int(idx),
                source_param=params[idx].copy(),
                score=float(scores[idx]),
                endpoint=endpoints[idx].copy(),
            )
        )
    return out


def strategic_path_all_equal(
    data: ZermeloData,
    front: FrontGeometry,
    tau: float,
    sampling: FrontSampling = FrontSampling(),
    mode: TraceMode = "constant",
    dt: float | None = None,
    side: str | None = None,
    n_runner_up: int = 3,
) -> StrategicResult:
    """The launched ray that covers the most ground by time `tau`.

    Constant mode maximizes the Euclidean speed |V| over the fan (the
    result is independent of tau for straight rays); other modes maximize
    the Euclidean endpoint displacement |ray(tau) - ray(0)|.  Ties go to
    the smallest fan index.
    """
    side = sampling.side if side is None else side
    fan, params, sources, vels = _fan_or_raise(data, front, sampling, side)
    if params.shape[0] < 8:
        raise EmptyFan(f"fan of {params.shape[0]} directions is too small; need >= 8")
    if mode == "constant":
        score = np.linalg.norm(vels, axis=1)
        endpoints = sources + tau * vels
    else:
        bundle = trace_wave_rays(data, mode, sources, vels, tau, dt=dt, skip_mode_check=True)
        endpoints = bundle.endpoints
        score = np.linalg.norm(endpoints - sources, axis=1)
    best = int(np.argmax(score))
    ray = _ray_trajectory(data, mode, sources[best], vels[best], tau, dt)
    return StrategicResult(
        ray=ray,
        tau_star=tau,
        q_star=ray.endpoint,
        fan_index=best,
        source_param=params[best].copy(),
        score=float(score[best]),
        runner_ups=_runner_ups(-score, params, endpoints, best, n_runner_up, scores=score),
        mode=mode,
    )


def _constant_arrival(data, sources, q):
    """Exact straight-ray arrival times F(q - p) from each source point."""
    d = np.asarray(q, dtype=float) - sources
    return eval_randers(data, sources, d)


def strategic_path_to_point(
    data: ZermeloData,
    front: FrontGeometry,
    q,
    sampling: FrontSampling = FrontSampling(),
    mode: TraceMode = "constant",
    horizon: float | None = None,
    dt: float | None = None,
    side: str | None = None,
    miss_tol: float = 1e-3,
    n_runner_up: int = 3,
) -> StrategicResult:
    """The ray that reaches `q`, and the front time tau* at which it does.

    Constant mode is solved exactly: tau* minimizes F(q - p) over the
    front (stationarity in the source parameter makes the straight ray
    orthogonal to the front).  Other modes shoot the fan to the horizon,
    minimize the miss distance jointly over (fan parameter, t), refine
    the fan parameter locally, and raise Unreachable when the best miss
    exceeds `miss_tol`.
    """
    q = np.asarray(q, dtype=float).reshape(3)
    side = sampling.side if side is None else side
    fan, params, sources, vels = _fan_or_raise(data, front, sampling, side)

    if mode == "constant":
        taus = _constant_arrival(data, sources, q)
        best = int(np.argmin(taus))
        best_param = params[best].copy()
        if fan.refinable and not isinstance(front, PointFront):
            spans = _initial_spans(front, sampling)

            def evaluate(ps):
                srcs, _ = fan.at(ps)
                return _constant_arrival(data, srcs, q)

            best_param, _ = _local_refine(best_param, spans, evaluate)
        src = fan.at(best_param[None, :])[0][0] if fan.refinable else sources[best]
        tau_star = float(_constant_arrival(data, src[None, :], q)[0])
        if horizon is not None and tau_star > horizon:
            raise Unreachable(f"point is reached at t = {tau_star:.6g} past the horizon {horizon}")
        vel = (q - src) / tau_star
        ray = _ray_trajectory(data, mode, src, vel, tau_star, dt)
        endpoints = sources + taus[:, None] * vels
        return StrategicResult(
            ray=ray,
            tau_star=tau_star,
            q_star=q.copy(),
            fan_index=best,
            source_param=best_param,
            score=0.0,
            runner_ups=_runner_ups(taus, params, endpoints, best, n_runner_up),
            mode=mode,
        )

    if horizon is None:
        raise ValueError("traced modes need an explicit horizon")
    bundle = trace_wave_rays(data, mode, sources, vels, horizon, dt=dt, skip_mode_check=True)
    miss, t_at = _miss_over_bundle(bundle, q)
    best = int(np.argmin(miss))
    best_param = params[best].copy()
    best_miss = float(miss[best])
    if fan.refinable:
        spans = _initial_spans(front, sampling)

        def evaluate(ps):
            srcs, vls = fan.at(ps)
            b = trace_wave_rays(data, mode, srcs, vls, horizon, dt=dt, skip_mode_check=True)
            m, _ = _miss_over_bundle(b, q)
            return m

        best_param, best_miss = _local_refine(best_param, spans, evaluate, rounds=24)
        src, vel = (a[0] for a in fan.at(best_param[None, :]))
    else:
        src, vel = sources[best], vels[best]
    ray_full = _ray_trajectory(data, mode, src, vel, horizon, dt)
    dists = np.linalg.norm(ray_full.points - q, axis=1)
    k = int(np.argmin(dists))
    tau_star = float(ray_full.t[k])
    if dists[k] > miss_tol:
        raise Unreachable(
            f"best ray misses the target by {dists[k]:.3g} (> {miss_tol:g}) within the horizon"
        )
    return StrategicResult(
        ray=ray_full,
        tau_star=tau_star,
        q_star=ray_full.points[k].copy(),
        fan_index=best,
        source_param=best_param,
        score=float(dists[k]),
        runner_ups=_runner_ups(miss, params, bundle.endpoints, best, n_runner_up),
        mode=mode,
    )


def _miss_over_bundle(bundle, q):
    """Per-ray minimum distance to q over the trajectory, and its time."""
    d = np.linalg.norm(bundle.points - q[None, None, :], axis=-1)  # (n_t, n_rays)
    idx = np.argmin(d, axis=0)
    miss = d[idx, np.arange(d.shape[1])]
    return miss, bundle.t[idx]


def _initial_spans(front, sampling):
    if isinstance(front, PointFront):
        return np.array([np.pi / max(sampling.point_polar - 1, 1), 2 * np.pi / sampling.point_azimuth])
    if isinstance(front, CurveFront):
        lo, hi = front.s_range
        return np.array([(hi - lo) / sampling.curve, np.pi / max(sampling.circle - 1, 1)])
    if isinstance(front, SurfaceFront):
        lo1, hi1 = front.s1_range
        lo2, hi2 = front.s2_range
        return np.array([(hi1 - lo1) / sampling.surface[0], (hi2 - lo2) / sampling.surface[1]])
    return np.array([1.0, 1.0])


def _arrival_bracket(arrival_field, region, n_boundary: int = 2048):
    """Upper bound for the first-contact time from a precomputed arrival field.

    Looks up the field at region-boundary samples (nearest grid cell) and
    pads by two cells' worth of travel; None when the region offers no
    boundary sampler or the field does not cover it.
    """
    boundary = region.boundary_samples(n_boundary)
    if boundary is None:
        return None
    tree = cKDTree(arrival_field.points)
    dist, idx = tree.query(boundary)
    vals = arrival_field.values[idx]
    near = dist <= 2.0 * arrival_field.grid.max_spacing
    usable = near & np.isfinite(vals)
    if not np.any(usable):
        return None
    return float(vals[usable].min() + 2.0 * arrival_field.grid.max_spacing)


def _first_crossing_straight(region, source, velocity, horizon, n_scan=512):
    """Earliest t in [0, horizon] with signed(p + tV) <= 0, or None."""
    ts = np.linspace(0.0, horizon, n_scan)
    vals = region.signed(source[None, :] + ts[:, None] * velocity[None, :])
    if vals[0] <= 0.0:
        return 0.0
    below = np.flatnonzero(vals <= 0.0)
    if below.size == 0:
        return None
    k = below[0]

    def g(t):
        return float(region.signed(source + t * velocity))

    return float(brentq(g, ts[k - 1], ts[k], xtol=1e-13, rtol=1e-15))


def _first_crossing_sampled(region, traj_points, traj_t):
    """Earliest crossing along a sampled trajectory (linear interpolation)."""
    vals = region.signed(traj_points)
    if vals[0] <= 0.0:
        return 0.0
    below = np.flatnonzero(vals <= 0.0)
    if below.size == 0:
        return None
    k = below[0]
    v0, v1 = vals[k - 1], vals[k]
    a = v0 / (v0 - v1)
    return float(traj_t[k - 1] + a * (traj_t[k] - traj_t[k - 1]))


def strategic_path_to_region(
    data: ZermeloData,
    front: FrontGeometry,
    region: Region,
    horizon: float,
    sampling: FrontSampling = FrontSampling(),
    mode: TraceMode = "constant",
    dt: float | None = None,
    side: str | None = None,
    n_runner_up: int = 3,
    arrival_field=None,
) -> StrategicResult:
    """The ray that first touches `region`, its contact time and point.

    Shoots the fan to the horizon, takes the earliest crossing of the
    region boundary per ray, refines the fan parameter around the winner
    and raises Unreachable when no ray crosses in time.  An optional
    precomputed `arrival_field` brackets the search: the scan horizon is
    clipped just above the field's minimum over the region boundary.
    """
    side = sampling.side if side is None else side
    if arrival_field is not None:
        bracket = _arrival_bracket(arrival_field, region)
        if bracket is not None:
            if bracket > horizon:
                raise Unreachable(
                    f"arrival field puts first contact at ~{bracket:.4g}, past the horizon {horizon}"
                )
            horizon = min(horizon, bracket)
    fan, params, sources, vels = _fan_or_raise(data, front, sampling, side)

    if mode == "constant":
        def crossing_times(srcs, vls):
            out = np.full(srcs.shape[0], np.inf)
            for i in range(srcs.shape[0]):
                t = _first_crossing_straight(region, srcs[i], vls[i], horizon)
                if t is not None:
                    out[i] = t
            return out

        times = crossing_times(sources, vels)
    else:
        bundle = trace_wave_rays(data, mode, sources, vels, horizon, dt=dt, skip_mode_check=True)

        def crossing_times(srcs, vls):
            b = trace_wave_rays(data, mode, srcs, vls, horizon, dt=dt, skip_mode_check=True)
            out = np.full(srcs.shape[0], np.inf)
            for i in range(srcs.shape[0]):
                t = _first_crossing_sampled(region, b.points[:, i], b.t)
                if t is not None:
                    out[i] = t
            return out

        times = np.full(sources.shape[0], np.inf)
        for i in range(sources.shape[0]):
            t = _first_crossing_sampled(region, bundle.points[:, i], bundle.t)
            if t is not None:
                times[i] = t

    best = int(np.argmin(times))
    if not np.isfinite(times[best]):
        raise Unreachable("no ray reaches the region within the horizon")
    best_param = params[best].copy()
    best_time = float(times[best])
    if fan.refinable:
        spans = _initial_spans(front, sampling)

        def evaluate(ps):
            srcs, vls = fan.at(ps)
            return crossing_times(srcs, vls)

        best_param, best_time = _local_refine(best_param, spans, evaluate, rounds=30)
        src, vel = (a[0] for a in fan.at(best_param[None, :]))
    else:
        src, vel = sources[best], vels[best]
    tau_star = best_time
    if tau_star == 0.0:
        contact = src.copy()
        ray = _ray_trajectory(data, mode, src, vel, max(horizon, 1e-9), dt)
    else:
        ray = _ray_trajectory(data, mode, src, vel, tau_star, dt)
        contact = ray.endpoint.copy()
    endpoints = sources + np.where(np.isfinite(times), times, 0.0)[:, None] * vels \
        if mode == "constant" else bundle.positions_at(min(best_time, horizon))
    return StrategicResult(
        ray=ray,
        tau_star=tau_star,
        q_star=contact,
        fan_index=best,
        source_param=best_param,
        score=tau_star,
        runner_ups=_runner_ups(times, params, np.atleast_2d(endpoints), best, n_runner_up),
        mode=mode,
    )


def strategic_points(result: StrategicResult, times: Sequence[float]) -> np.ndarray:
    """Deployment positions along the chosen ray at the requested times."""
    ts = np.asarray(times, dtype=float)
    if np.any(ts < 0.0) or np.any(ts > result.ray.horizon + 1e-12):
        raise OutOfHorizon(
            f"requested times must lie in [0, {result.ray.horizon:.6g}]"
        )
    return result.ray.at(ts)
