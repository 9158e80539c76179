"""Ellipsoid growth templates and the Riemannian metric they induce.

The local burn pattern is modelled as a rotated ellipsoid with semi-axes
(a, b, c) and extrinsic X-Y-Z rotation angles (alpha, beta, theta).  Each
parameter is either a constant or a smooth function of position, so the
same spec describes both homogeneous and space-dependent fuel responses.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Union

import numpy as np

ParamLike = Union[float, Callable[[np.ndarray], np.ndarray], str]

_COORD_AXES = {"x": 0, "y": 1, "z": 2}


def rotation_x(alpha):
    """Right-handed rotation about the x-axis; `alpha` may be an array."""
    a = np.asarray(alpha, dtype=float)
    c, s = np.cos(a), np.sin(a)
    out = np.zeros(a.shape + (3, 3))
    out[..., 0, 0] = 1.0
    out[..., 1, 1] = c
    out[..., 1, 2] = -s
    out[..., 2, 1] = s
    out[..., 2, 2] = c
    return out


def rotation_y(beta):
    """Right-handed rotation about the y-axis."""
    b = np.asarray(beta, dtype=float)
    c, s = np.cos(b), np.sin(b)
    out = np.zeros(b.shape + (3, 3))
    out[..., 1, 1] = 1.0
    out[..., 0, 0] = c
    out[..., 0, 2] = s
    out[..., 2, 0] = -s
    out[..., 2, 2] = c
    return out


def rotation_z(theta):
    """Right-handed rotation about the z-axis."""
    t = np.asarray(theta, dtype=float)
    c, s = np.cos(t), np.sin(t)
    out = np.zeros(t.shape + (3, 3))
    out[..., 2, 2] = 1.0
    out[..., 0, 0] = c
    out[..., 0, 1] = -s
    out[..., 1, 0] = s
    out[..., 1, 1] = c
    return out


def rotation_matrix(alpha, beta, theta):
    """Compose the extrinsic X-then-Y-then-Z rotation P = Rz(theta) Ry(beta) Rx(alpha).

    The arguments may be scalars or broadcastable arrays; the result has
    shape (..., 3, 3), is orthogonal to machine precision and has det +1.
    """
    return rotation_z(theta) @ rotation_y(beta) @ rotation_x(alpha)


def _as_param(value: ParamLike) -> Callable[[np.ndarray], np.ndarray]:
    """Normalize a spec parameter to a vectorized callable of points (N,3)."""
    if callable(value):
        return value
    if isinstance(value, str):
        axis = _COORD_AXES.get(value)
        if axis is None:
            raise ValueError(f"unknown coordinate parameter {value!r}; use 'x', 'y' or 'z'")
        return lambda pts, _axis=axis: np.asarray(pts, dtype=float)[..., _axis]
    v = float(value)
    return lambda pts, _v=v: np.full(np.asarray(pts).shape[:-1], _v)


@dataclass(frozen=True)
class EllipsoidSpec:
    """Semi-axes and rotation angles of the unit-time burn ellipsoid.

    `a`, `b`, `c` are the semi-axes (speed units, must stay positive) and
    `alpha`, `beta`, `theta` the rotation angles in radians.  Each field is
    a constant, the name of a coordinate ('x', 'y', 'z'), or a callable
    mapping points of shape (..., 3) to values of shape (...).
    """

    a: ParamLike = 1.0
    b: ParamLike = 1.0
    c: ParamLike = 1.0
    alpha: ParamLike = 0.0
    beta: ParamLike = 0.0
    theta: ParamLike = 0.0

    def __post_init__(self):
        for name in ("a", "b", "c"):
            v = getattr(self, name)
            if not callable(v) and not isinstance(v, str) and float(v) <= 0.0:
                raise ValueError(f"semi-axis {name} must be positive, got {v}")

    @property
    def is_constant(self) -> bool:
        return not any(
            callable(v) or isinstance(v, str)
            for v in (self.a, self.b, self.c, self.alpha, self.beta, self.theta)
        )

    def axes_at(self, points) -> np.ndarray:
        """Semi-axes (a, b, c) at each point, shape (..., 3)."""
        pts = np.asarray(points, dtype=float)
        axes = np.stack([_as_param(v)(pts) for v in (self.a, self.b, self.c)], axis=-1)
        if np.any(axes <= 0.0):
            raise ValueError("semi-axes must stay positive over the queried points")
        return axes

    def rotation_at(self, points) -> np.ndarray:
        """Rotation matrix P at each point, shape (..., 3, 3)."""
        pts = np.asarray(points, dtype=float)
        alpha, beta, theta = (
            _as_param(v)(pts) for v in (self.alpha, self.beta, self.theta)
        )
        return rotation_matrix(alpha, beta, theta)


def metric_from_spec(spec: EllipsoidSpec, points) -> np.ndarray:
    """Metric matrix P^T D P with D = diag(1/a^2, 1/b^2, 1/c^2) at each point.

    `points` has shape (..., 3); the result has shape (..., 3, 3) and is
    symmetric positive-definite by construction.
    """
    pts = np.asarray(points, dtype=float)
    axes = spec.axes_at(pts)
    rot = spec.rotation_at(pts)
    inv_sq = 1.0 / axes**2
    # P^T D P without materializing D.
    return np.einsum("...ki,...k,...kj->...ij", rot, inv_sq, rot)


def quadratic_eval(spec: EllipsoidSpec, points, vectors) -> np.ndarray:
    """Evaluate Q(V) = V^T h V for the spec's metric h at `points`.

    Q(V) = 1 exactly on the unit-speed ellipsoid.
    """
    h = metric_from_spec(spec, points)
    v = np.asarray(vectors, dtype=float)
    return np.einsum("...i,...ij,...j->...", v, h, v)


def unit_sphere_grid(n_polar: int, n_azimuth: int) -> np.ndarray:
    """Inclusive latitude/longitude sample of the Euclidean unit sphere.

    Polar angles run over linspace(0, pi, n_polar) including both poles,
    azimuths over n_azimuth equispaced values starting at 0.  With odd
    n_polar and n_azimuth divisible by 4 the six axis directions are hit
    exactly, which the strategy fans rely on.  Shape (n_polar*n_azimuth, 3).
    """
    if n_polar < 2 or n_azimuth < 1:
        raise ValueError("need n_polar >= 2 and n_azimuth >= 1")
    phi = np.linspace(0.0, np.pi, n_polar)
    theta = np.arange(n_azimuth) * (2.0 * np.pi / n_azimuth)
    sp, st = np.sin(phi)[:, None], np.sin(theta)[None, :]
    cp, ct = np.cos(phi)[:, None], np.cos(theta)[None, :]
    pts = np.stack(
        [sp * ct, sp * st, np.broadcast_to(cp, (n_polar, n_azimuth))], axis=-1
    )
    return pts.reshape(-1, 3)


def unit_sphere_sample(n: int) -> np.ndarray:
    """Exactly `n` quasi-uniform points on the unit sphere.

    Midpoint latitude rows (no pole duplication) with an odd row count, so
    the equator row and its axis-aligned samples are always present.
    """
    if n < 4:
        raise ValueError("need at least 4 sample points")
    n_azimuth = max(4, int(round(np.sqrt(2.0 * n))))
    n_polar = int(np.ceil(n / n_azimuth))
    if n_polar % 2 == 0:
        n_polar += 1
    phi = (np.arange(n_polar) + 0.5) * (np.pi / n_polar)
    theta = np.arange(n_azimuth) * (2.0 * np.pi / n_azimuth)
    sp, st = np.sin(phi)[:, None], np.sin(theta)[None, :]
    cp, ct = np.cos(phi)[:, None], np.cos(theta)[None, :]
    pts = np.stack(
        [sp * ct, sp * st, np.broadcast_to(cp, (n_polar, n_azimuth))], axis=-1
    ).reshape(-1, 3)
    return pts[:n]


def metric_unit_sphere(spec: EllipsoidSpec, point, sphere_points) -> np.ndarray:
    """Map Euclidean unit-sphere points onto the metric unit sphere {Q = 1}.

    u = P^T diag(a, b, c) s satisfies Q(u) = 1 for |s| = 1.
    """
    p = np.asarray(point, dtype=float)
    axes = spec.axes_at(p)
    rot = spec.rotation_at(p)
    s = np.asarray(sphere_points, dtype=float)
    return (s * axes) @ rot  # row-vector form of P^T (axes * s)


@dataclass(frozen=True)
class IndicatrixSample:
    """Points of reachable-velocity magnitude `tau` at `center`."""

    center: np.ndarray
    tau: float
    points: np.ndarray = field(repr=False)

    def __post_init__(self):
        object.__setattr__(self, "center", np.asarray(self.center, dtype=float))
        object.__setattr__(self, "points", np.asarray(self.points, dtype=float))
        if self.tau <= 0.0:
            raise ValueError("tau must be positive")


def sample_randers_indicatrix(
    spec: EllipsoidSpec, wind, point, tau: float, n: int
) -> IndicatrixSample:
    """Sample the wind-shifted speed-`tau` surface at `point`.

    The result is the metric sphere of radius tau translated by tau*W:
    every sample q satisfies Q((q - tau*W)/tau) = 1 up to roundoff.
    `wind` is a vector (3,) or a callable point -> vector.
    """
    if n < 4:
        raise ValueError("need n >= 4 sample points")
    if tau <= 0.0:
        raise ValueError("tau must be positive")
    p = np.asarray(point, dtype=float)
    w = np.asarray(wind(p) if callable(wind) else wind, dtype=float)
    units = metric_unit_sphere(spec, p, unit_sphere_sample(n))
    return IndicatrixSample(center=p, tau=tau, points=tau * units + tau * w)
