"""Wind fields, their flows, and the isometry (Killing) test.

Three field kinds are supported: constant vectors, analytic fields given
by a vectorized callable (optionally with closed-form flow and flow
differential), and sampled lattices with trilinear interpolation that
clamp to the nearest edge value outside the grid.  Time dependence is
handled one level up, as a list of time-independent segments.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np
from scipy.interpolate import RegularGridInterpolator

from .errors import StepFailure, ValidationError


class WindField:
    """Base class; subclasses implement `__call__(points) -> vectors`."""

    kind = "abstract"

    def __call__(self, points: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    # Subclasses may provide closed forms for these.
    def closed_form_flow(self, t: float, points: np.ndarray) -> Optional[np.ndarray]:
        return None

    def closed_form_flow_differential(
        self, t: float, points: np.ndarray, u: np.ndarray
    ) -> Optional[np.ndarray]:
        return None


class ConstantWind(WindField):
    """Spatially uniform wind; flow is a translation."""

    kind = "constant"

    def __init__(self, vector):
        self.vector = np.asarray(vector, dtype=float).reshape(3)

    def __call__(self, points):
        pts = np.asarray(points, dtype=float)
        return np.broadcast_to(self.vector, pts.shape).copy()

    def closed_form_flow(self, t, points):
        return np.asarray(points, dtype=float) + t * self.vector

    def closed_form_flow_differential(self, t, points, u):
        return np.asarray(u, dtype=float).copy()


class AnalyticWind(WindField):
    """Wind from a vectorized callable, with optional closed-form flow."""

    kind = "analytic"

    def __init__(
        self,
        fn: Callable[[np.ndarray], np.ndarray],
        flow: Callable[[float, np.ndarray], np.ndarray] | None = None,
        flow_differential: Callable[[float, np.ndarray, np.ndarray], np.ndarray] | None = None,
        name: str = "analytic",
    ):
        self.fn = fn
        self._flow = flow
        self._flow_differential = flow_differential
        self.name = name

    def __call__(self, points):
        return np.asarray(self.fn(np.asarray(points, dtype=float)), dtype=float)

    def closed_form_flow(self, t, points):
        if self._flow is None:
            return None
        return np.asarray(self._flow(t, np.asarray(points, dtype=float)), dtype=float)

    def closed_form_flow_differential(self, t, points, u):
        if self._flow_differential is None:
            return None
        return np.asarray(
            self._flow_differential(t, np.asarray(points, dtype=float), np.asarray(u, dtype=float)),
            dtype=float,
        )


def shear_wind(k: float) -> AnalyticWind:
    """W(x, y, z) = k*(y, 0, 0): a horizontal shear whose flow is exactly linear."""

    def fn(pts):
        out = np.zeros_like(pts)
        out[..., 0] = k * pts[..., 1]
        return out

    def flow(t, pts):
        out = np.array(pts, dtype=float, copy=True)
        out[..., 0] += k * t * pts[..., 1]
        return out

    def flow_diff(t, pts, u):
        out = np.array(u, dtype=float, copy=True)
        out[..., 0] += k * t * u[..., 1]
        return out

    return AnalyticWind(fn, flow=flow, flow_differential=flow_diff, name=f"shear(k={k})")


def rotation_wind(k: float) -> AnalyticWind:
    """W(x, y, z) = k*(-y, x, 0): rigid rotation about the z-axis."""

    def fn(pts):
        out = np.zeros_like(pts)
        out[..., 0] = -k * pts[..., 1]
        out[..., 1] = k * pts[..., 0]
        return out

    def flow(t, pts):
        c, s = np.cos(k * t), np.sin(k * t)
        out = np.array(pts, dtype=float, copy=True)
        x, y = pts[..., 0], pts[..., 1]
        out[..., 0] = c * x - s * y
        out[..., 1] = s * x + c * y
        return out

    def flow_diff(t, pts, u):
        c, s = np.cos(k * t), np.sin(k * t)
        out = np.array(u, dtype=float, copy=True)
        ux, uy = u[..., 0], u[..., 1]
        out[..., 0] = c * ux - s * uy
        out[..., 1] = s * ux + c * uy
        return out

    return AnalyticWind(fn, flow=flow, flow_differential=flow_diff, name=f"rotation(k={k})")


class GridWind(WindField):
    """Wind sampled on a rectilinear lattice, trilinearly interpolated.

    Queries outside the lattice clamp to the edge, so fronts leaving the
    gridded region see the nearest boundary wind instead of an error.
    """

    kind = "grid"

    def __init__(self, xs, ys, zs, vectors):
        self.xs = np.asarray(xs, dtype=float)
        self.ys = np.asarray(ys, dtype=float)
        self.zs = np.asarray(zs, dtype=float)
        self.vectors = np.asarray(vectors, dtype=float)
        expected = (self.xs.size, self.ys.size, self.zs.size, 3)
        if self.vectors.shape != expected:
            raise ValidationError(
                f"wind lattice shape {self.vectors.shape} != expected {expected}"
            )
        self._interp = RegularGridInterpolator(
            (self.xs, self.ys, self.zs), self.vectors, method="linear"
        )
        self._lo = np.array([self.xs[0], self.ys[0], self.zs[0]])
        self._hi = np.array([self.xs[-1], self.ys[-1], self.zs[-1]])

    def __call__(self, points):
        pts = np.asarray(points, dtype=float)
        clamped = np.clip(pts, self._lo, self._hi)
        flat = clamped.reshape(-1, 3)
        return self._interp(flat).reshape(pts.shape)


def load_grid_wind(path) -> GridWind:
    """Read a lattice wind file: '# nx ny nz' header then x y z wx wy wz rows.

    Rows are ordered with x varying slowest and z fastest (C order over
    the (nx, ny, nz) lattice).
    """
    with open(path) as fh:
        header = None
        for line in fh:
            line = line.strip()
            if line.startswith("#") and header is None:
                parts = line.lstrip("#").split()
                if len(parts) == 3 and all(p.isdigit() for p in parts):
                    header = tuple(int(p) for p in parts)
            if line and not line.startswith("#"):
                break
    if header is None:
        raise ValidationError(f"{path}: missing '# nx ny nz' lattice header")
    nx, ny, nz = header
    rows = np.loadtxt(path, comments="#").reshape(-1, 6)
    if rows.shape[0] != nx * ny * nz:
        raise ValidationError(
            f"{path}: expected {nx * ny * nz} rows for lattice {header}, got {rows.shape[0]}"
        )
    coords = rows[:, :3].reshape(nx, ny, nz, 3)
    vectors = rows[:, 3:].reshape(nx, ny, nz, 3)
    xs = coords[:, 0, 0, 0]
    ys = coords[0, :, 0, 1]
    zs = coords[0, 0, :, 2]
    if not (np.all(np.diff(xs) > 0) and np.all(np.diff(ys) > 0) and np.all(np.diff(zs) > 0)):
        raise ValidationError(f"{path}: lattice axes must be strictly increasing")
    return GridWind(xs, ys, zs, vectors)


@dataclass(frozen=True)
class FlowMap:
    """Integrator wrapper for the flow of a wind field.

    Uses the field's closed form when available, otherwise fixed-step RK4
    with `step` as the maximum sub-step.  phi(0, p) == p exactly.
    """

    field: WindField
    step: float = 1e-2
    horizon: float = 1e6

    def __call__(self, t: float, points) -> np.ndarray:
        return flow(self.field, t, points, step=self.step, horizon=self.horizon)


def flow(field: WindField, t: float, points, step: float = 1e-2, horizon: float = 1e6):
    """Flow `points` along the wind for time `t` (negative t flows backward)."""
    pts = np.asarray(points, dtype=float)
    if abs(t) > horizon:
        raise StepFailure(f"|t| = {abs(t)} exceeds flow horizon {horizon}")
    if t == 0.0:
        return pts.copy()
    closed = field.closed_form_flow(t, pts)
    if closed is not None:
        return closed
    n_steps = max(1, int(np.ceil(abs(t) / step)))
    dt = t / n_steps
    x = pts.copy()
    # Divergence is detected on the result; overflow along the way is the
    # expected symptom, not a separate error.
    with np.errstate(over="ignore", invalid="ignore"):
        for _ in range(n_steps):
            k1 = field(x)
            k2 = field(x + 0.5 * dt * k1)
            k3 = field(x + 0.5 * dt * k2)
            k4 = field(x + dt * k3)
            x = x + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
    if not np.all(np.isfinite(x)):
        raise StepFailure("wind flow integration diverged")
    return x


def flow_differential(
    field: WindField, t: float, points, u, step: float = 1e-2, fd_step: float = 1e-6
):
    """Directional derivative of phi(t, .) at `points` in direction `u`.

    Closed form when the field provides one, otherwise central differences
    of the integrated flow.
    """
    pts = np.asarray(points, dtype=float)
    u = np.asarray(u, dtype=float)
    if t == 0.0:
        return u.copy()
    closed = field.closed_form_flow_differential(t, pts, u)
    if closed is not None:
        return closed
    scale = fd_step * max(1.0, float(np.max(np.abs(pts))))
    norm = np.linalg.norm(u, axis=-1, keepdims=True)
    norm = np.where(norm == 0.0, 1.0, norm)
    du = u / norm * scale
    fwd = flow(field, t, pts + du, step=step)
    bwd = flow(field, t, pts - du, step=step)
    return (fwd - bwd) / (2.0 * scale) * norm


def lie_derivative_h(
    field: WindField, metric_field, points, fd_step: float = 1e-5
) -> np.ndarray:
    """(L_W h)_ij = W^k d_k h_ij + h_kj d_i W^k + h_ik d_j W^k by central differences.

    `metric_field` maps points (..., 3) to matrices (..., 3, 3).  Returns a
    symmetric (..., 3, 3) array; the zero matrix iff the flow preserves h.
    """
    pts = np.asarray(points, dtype=float)
    scale = fd_step * max(1.0, float(np.max(np.abs(pts))))
    w = field(pts)
    dh = []  # d_k h_ij
    dw = []  # d_k W^m
    for k in range(3):
        e = np.zeros(3)
        e[k] = scale
        dh.append((metric_field(pts + e) - metric_field(pts - e)) / (2.0 * scale))
        dw.append((field(pts + e) - field(pts - e)) / (2.0 * scale))
    dh = np.stack(dh, axis=-3)  # (..., k, i, j)
    dw = np.stack(dw, axis=-2)  # (..., k, m) = d_k W^m
    h = metric_field(pts)
    advect = np.einsum("...k,...kij->...ij", w, dh)
    strain = np.einsum("...kj,...ik->...ij", h, dw) + np.einsum(
        "...ik,...jk->...ij", h, dw
    )
    return advect + strain


@dataclass(frozen=True)
class KillingReport:
    ok: bool
    max_residual: float
    tol: float

    def __bool__(self):
        return self.ok


def is_killing(
    field: WindField,
    metric_field,
    region,
    tol: float | None = None,
    samples_per_axis: int = 5,
) -> KillingReport:
    """Test whether the wind flow preserves the metric over a box region.

    `region` is ((xmin, ymin, zmin), (xmax, ymax, zmax)).  The residual is
    the max Frobenius norm of the Lie derivative over a sample grid; the
    default tolerance is 1e-6 times the local metric Frobenius norm.
    """
    lo, hi = (np.asarray(b, dtype=float) for b in region)
    axes = [np.linspace(lo[i], hi[i], samples_per_axis) for i in range(3)]
    grid = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, 3)
    lie = lie_derivative_h(field, metric_field, grid)
    residual = np.linalg.norm(lie, axis=(-2, -1))
    if tol is None:
        h = np.asarray(metric_field(grid), dtype=float)
        tol = 1e-6 * float(np.max(np.linalg.norm(h, axis=(-2, -1))))
    worst = float(np.max(residual))
    return KillingReport(ok=worst <= tol, max_residual=worst, tol=float(tol))


@dataclass(frozen=True)
class WindSegment:
    """A time-independent wind active on [t_start, t_end)."""

    t_start: float
    t_end: float
    field: WindField

    def __post_init__(self):
        if not self.t_end > self.t_start:
            raise ValidationError(
                f"wind segment needs t_end > t_start, got [{self.t_start}, {self.t_end}]"
            )

    @property
    def duration(self) -> float:
        return self.t_end - self.t_start


def validate_segments(segments: Sequence[WindSegment], horizon: float) -> None:
    """Check that segments partition [0, horizon] without gaps or overlap."""
    if not segments:
        raise ValidationError("at least one wind segment is required")
    segs = sorted(segments, key=lambda s: s.t_start)
    if abs(segs[0].t_start) > 1e-12:
        raise ValidationError(f"first wind segment must start at 0, got {segs[0].t_start}")
    for prev, cur in zip(segs, segs[1:]):
        if abs(cur.t_start - prev.t_end) > 1e-12:
            kind = "overlap" if cur.t_start < prev.t_end else "gap"
            raise ValidationError(
                f"wind segments must partition the horizon: {kind} between "
                f"t={prev.t_end} and t={cur.t_start}"
            )
    if segs[-1].t_end < horizon - 1e-12:
        raise ValidationError(
            f"wind segments end at {segs[-1].t_end} before the horizon {horizon}"
        )
