"""Wave-ray tracing.

Three tracing modes, matched to what the wind allows:

- "constant": uniform wind, rays are straight lines p + t*V.
- "killing": the wind flow is an isometry of the metric; rays are the
  flow applied to metric geodesics, phi(t, gamma_h(t)).
- "general": any smooth wind; rays integrate the Euler-Lagrange system of
  the squared travel-time norm, with the velocity derivative of the
  momentum inverted through the analytic Hessian (one 3x3 solve per
  stage).

Integration is fixed-step RK4, batched over a whole fan of rays at once;
results are keyed by ray index so concurrent tracing stays deterministic.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Literal

import numpy as np

from .errors import ModeMismatch, SingularMetric, StepFailure
from .metric import (
    ZermeloData,
    eval_randers,
    zermelo_energy,
    zermelo_energy_grad_v,
    zermelo_energy_hess_v,
)
from .wind import WindField, flow, flow_differential, is_killing

TraceMode = Literal["constant", "killing", "general"]


@dataclass(frozen=True)
class Trajectory:
    """Sampled ray: strictly increasing times, points and velocities."""

    t: np.ndarray
    points: np.ndarray
    velocities: np.ndarray

    def __post_init__(self):
        t = np.asarray(self.t, dtype=float)
        if np.any(np.diff(t) <= 0.0):
            raise ValueError("trajectory times must be strictly increasing")
        object.__setattr__(self, "t", t)
        object.__setattr__(self, "points", np.asarray(self.points, dtype=float))
        object.__setattr__(self, "velocities", np.asarray(self.velocities, dtype=float))

    @property
    def endpoint(self) -> np.ndarray:
        return self.points[-1]

    @property
    def horizon(self) -> float:
        return float(self.t[-1])

    def at(self, times) -> np.ndarray:
        """Positions at `times` by linear interpolation between samples."""
        ts = np.asarray(times, dtype=float)
        out = np.empty(ts.shape + (3,))
        for i in range(3):
            out[..., i] = np.interp(ts, self.t, self.points[:, i])
        return out

    def to_csv(self) -> str:
        """CSV rows (t, x, y, z, vx, vy, vz) with a schema header line."""
        lines = ["# firefront-trajectory-csv v1", "t,x,y,z,vx,vy,vz"]
        for t, p, v in zip(self.t, self.points, self.velocities):
            lines.append(
                f"{float(t)!r},{p[0]!r},{p[1]!r},{p[2]!r},{v[0]!r},{v[1]!r},{v[2]!r}"
            )
        return "\n".join(lines) + "\n"


@dataclass(frozen=True)
class RayBundle:
    """A fan of rays traced together; arrays are (n_times, n_rays, 3)."""

    t: np.ndarray
    points: np.ndarray
    velocities: np.ndarray

    @property
    def n_rays(self) -> int:
        return self.points.shape[1]

    @property
    def endpoints(self) -> np.ndarray:
        return self.points[-1]

    def ray(self, i: int) -> Trajectory:
        return Trajectory(self.t, self.points[:, i], self.velocities[:, i])

    def positions_at(self, time: float) -> np.ndarray:
        """All ray positions at `time`, linearly interpolated, shape (n_rays, 3)."""
        idx = np.searchsorted(self.t, time)
        if idx <= 0:
            return self.points[0]
        if idx >= len(self.t):
            return self.points[-1]
        t0, t1 = self.t[idx - 1], self.t[idx]
        a = (time - t0) / (t1 - t0)
        return (1.0 - a) * self.points[idx - 1] + a * self.points[idx]


@dataclass(frozen=True)
class GeodesicProblem:
    """Initial data for one wave ray; velocity must have unit norm F(V) = 1."""

    mode: TraceMode
    data: ZermeloData
    point: np.ndarray
    velocity: np.ndarray
    horizon: float
    dt: float | None = None
    unit_tol: float = 1e-9
    skip_mode_check: bool = False

    def __post_init__(self):
        object.__setattr__(self, "point", np.asarray(self.point, dtype=float).reshape(3))
        object.__setattr__(self, "velocity", np.asarray(self.velocity, dtype=float).reshape(3))
        if self.horizon <= 0.0:
            raise ValueError("horizon must be positive")
        f = float(eval_randers(self.data, self.point, self.velocity))
        if abs(f - 1.0) > self.unit_tol:
            raise ValueError(f"initial velocity is not unit speed: F(V) = {f!r}")

    @property
    def step(self) -> float:
        return self.dt if self.dt is not None else self.horizon / 1000.0


def christoffel(metric_field, points, fd_step: float = 1e-5) -> np.ndarray:
    """Connection coefficients of the metric field by central differences.

    Returns (..., 3, 3, 3) indexed [i, j, k] and symmetric in (j, k).
    Raises SingularMetric if the metric cannot be inverted.
    """
    pts = np.asarray(points, dtype=float)
    scale = fd_step * max(1.0, float(np.max(np.abs(pts))))
    dh = []
    for m in range(3):
        e = np.zeros(3)
        e[m] = scale
        dh.append(
            (np.asarray(metric_field(pts + e), dtype=float)
             - np.asarray(metric_field(pts - e), dtype=float)) / (2.0 * scale)
        )
    dh = np.stack(dh, axis=-3)  # (..., m, i, j) = d_m h_ij
    h = np.asarray(metric_field(pts), dtype=float)
    try:
        h_inv = np.linalg.inv(h)
    except np.linalg.LinAlgError as exc:
        raise SingularMetric("metric field is singular") from exc
    term = (
        np.einsum("...jlk->...ljk", dh)
        + np.einsum("...klj->...ljk", dh)
        - np.einsum("...ljk->...ljk", dh)
    )
    return 0.5 * np.einsum("...il,...ljk->...ijk", h_inv, term)


def _rk4(rhs, x0, v0, horizon, dt):
    """Fixed-step RK4 on (x, v) with x' = v, v' = rhs(x, v); lands exactly at horizon."""
    n_steps = max(1, int(round(horizon / dt)))
    step = horizon / n_steps
    n_rays = x0.shape[0]
    ts = np.linspace(0.0, horizon, n_steps + 1)
    xs = np.empty((n_steps + 1, n_rays, 3))
    vs = np.empty((n_steps + 1, n_rays, 3))
    x, v = x0.copy(), v0.copy()
    xs[0], vs[0] = x, v
    for i in range(n_steps):
        a1 = rhs(x, v)
        k1x, k1v = v, a1
        a2 = rhs(x + 0.5 * step * k1x, v + 0.5 * step * k1v)
        k2x, k2v = v + 0.5 * step * k1v, a2
        a3 = rhs(x + 0.5 * step * k2x, v + 0.5 * step * k2v)
        k3x, k3v = v + 0.5 * step * k2v, a3
        a4 = rhs(x + step * k3x, v + step * k3v)
        k4x, k4v = v + step * k3v, a4
        x = x + (step / 6.0) * (k1x + 2.0 * k2x + 2.0 * k3x + k4x)
        v = v + (step / 6.0) * (k1v + 2.0 * k2v + 2.0 * k3v + k4v)
        if not (np.all(np.isfinite(x)) and np.all(np.isfinite(v))):
            raise StepFailure(f"integration diverged at step {i + 1}/{n_steps}")
        xs[i + 1], vs[i + 1] = x, v
    return ts, xs, vs


def integrate_h_geodesics(metric_field, points, velocities, horizon, dt) -> RayBundle:
    """Batched metric geodesics: x'' + Gamma(x)(x', x') = 0 via RK4."""
    x0 = np.atleast_2d(np.asarray(points, dtype=float))
    v0 = np.atleast_2d(np.asarray(velocities, dtype=float))

    def rhs(x, v):
        gamma = christoffel(metric_field, x)
        return -np.einsum("...ijk,...j,...k->...i", gamma, v, v)

    ts, xs, vs = _rk4(rhs, x0, v0, horizon, dt)
    return RayBundle(ts, xs, vs)


def integrate_h_geodesic(metric_field, point, velocity, horizon, dt) -> Trajectory:
    """Single metric geodesic from `point` with metric-unit initial `velocity`."""
    bundle = integrate_h_geodesics(metric_field, point, velocity, horizon, dt)
    return bundle.ray(0)


def _general_rhs(data: ZermeloData, fd_step: float = 1e-5):
    """Acceleration of the squared-norm Euler-Lagrange system, batched."""

    def rhs(x, v):
        scale = fd_step * max(1.0, float(np.max(np.abs(x))))
        h0 = data.metric_at(x)
        w0 = data.wind_at(x)
        grad_x = np.empty(x.shape)
        mixed = np.empty(x.shape[:-1] + (3, 3))  # [i, j] = d2E / dv_i dx_j
        for j in range(3):
            e = np.zeros(3)
            e[j] = scale
            hp, wp = data.metric_at(x + e), data.wind_at(x + e)
            hm, wm = data.metric_at(x - e), data.wind_at(x - e)
            grad_x[..., j] = (zermelo_energy(hp, wp, v) - zermelo_energy(hm, wm, v)) / (
                2.0 * scale
            )
            mixed[..., :, j] = (
                zermelo_energy_grad_v(hp, wp, v) - zermelo_energy_grad_v(hm, wm, v)
            ) / (2.0 * scale)
        hess = zermelo_energy_hess_v(h0, w0, v)
        force = grad_x - np.einsum("...ij,...j->...i", mixed, v)
        try:
            return np.linalg.solve(hess, force[..., None])[..., 0]
        except np.linalg.LinAlgError as exc:
            raise SingularMetric("velocity Hessian of the norm is singular") from exc

    return rhs


def _assert_constant_data(data: ZermeloData, p0, v0, horizon, tol: float = 1e-9):
    """Straight rays need metric and wind constant near the ray span."""
    ends = np.vstack([p0, p0 + horizon * v0])
    lo = ends.min(axis=0)
    hi = ends.max(axis=0)
    pad = 0.1 * max(float(np.max(hi - lo)), 1.0)
    axes = [np.linspace(lo[i] - pad, hi[i] + pad, 3) for i in range(3)]
    grid = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, 3)
    w = data.wind_at(grid)
    h = data.metric_at(grid)
    if float(np.max(np.abs(w - w[0]))) > tol or float(np.max(np.abs(h - h[0]))) > tol:
        raise ModeMismatch(
            "constant mode requested but the wind or metric varies near the rays"
        )


def trace_wave_rays(
    data: ZermeloData,
    mode: TraceMode,
    points,
    velocities,
    horizon: float,
    dt: float | None = None,
    skip_mode_check: bool = False,
    n_samples_constant: int = 65,
) -> RayBundle:
    """Trace a batch of rays with common mode and horizon.

    `points` and `velocities` are (n, 3); velocities should be unit speed.
    Constant mode returns exact straight lines; killing mode composes the
    wind flow with metric geodesics started at V - W(p); general mode
    integrates the Euler-Lagrange system of the squared norm.
    """
    p0 = np.atleast_2d(np.asarray(points, dtype=float))
    v0 = np.atleast_2d(np.asarray(velocities, dtype=float))
    step = dt if dt is not None else horizon / 1000.0

    if mode == "constant":
        if not skip_mode_check:
            _assert_constant_data(data, p0, v0, horizon)
        ts = np.linspace(0.0, horizon, n_samples_constant)
        xs = p0[None, :, :] + ts[:, None, None] * v0[None, :, :]
        vs = np.broadcast_to(v0, (ts.size,) + v0.shape).copy()
        return RayBundle(ts, xs, vs)

    if mode == "killing":
        wind_field = data.wind
        if not isinstance(wind_field, WindField):
            raise ModeMismatch("killing mode needs a WindField wind (got a bare callable)")
        if not skip_mode_check:
            extent = float(np.max(np.abs(v0))) * horizon + 1.0
            center = p0.mean(axis=0)
            report = is_killing(
                wind_field, data.metric, (center - extent, center + extent)
            )
            if not report.ok:
                raise ModeMismatch(
                    f"killing mode requested but flow is not an isometry "
                    f"(max residual {report.max_residual:.3e} > tol {report.tol:.3e})"
                )
        u0 = v0 - data.wind_at(p0)
        base = integrate_h_geodesics(data.metric, p0, u0, horizon, step)
        xs = np.empty_like(base.points)
        vs = np.empty_like(base.velocities)
        for i, t in enumerate(base.t):
            xs[i] = flow(wind_field, float(t), base.points[i])
            vs[i] = wind_field(xs[i]) + flow_differential(
                wind_field, float(t), base.points[i], base.velocities[i]
            )
        return RayBundle(base.t, xs, vs)

    if mode == "general":
        ts, xs, vs = _rk4(_general_rhs(data), p0, v0, horizon, step)
        return RayBundle(ts, xs, vs)

    raise ValueError(f"unknown trace mode {mode!r}")


def trace_wave_ray(problem: GeodesicProblem) -> Trajectory:
    """Trace the single ray described by `problem`."""
    bundle = trace_wave_rays(
        problem.data,
        problem.mode,
        problem.point,
        problem.velocity,
        problem.horizon,
        dt=problem.step,
        skip_mode_check=problem.skip_mode_check,
    )
    return bundle.ray(0)


def f_speed_drift(data: ZermeloData, trajectory: Trajectory) -> float:
    """max_t |F(gamma'(t)) - 1| along a traced ray (unit-speed conservation)."""
    f = eval_randers(data, trajectory.points, trajectory.velocities)
    return float(np.max(np.abs(f - 1.0)))


def h_speed_drift(data: ZermeloData, trajectory: Trajectory) -> float:
    """max_t ||gamma'(t)|_h - 1| along a metric geodesic."""
    speed = data.h_norm(trajectory.points, trajectory.velocities)
    return float(np.max(np.abs(speed - 1.0)))
