"""Anisotropic travel-time norm built from a metric field and a wind field.

All speeds live in a norm F obtained by drifting a Riemannian unit ball
with the wind: F(V) = (sqrt(h(W,V)^2 + lam*h(V,V)) - h(W,V)) / lam with
lam = 1 - h(W,W).  Equivalently F(V) = 1 exactly when |V - W|_h = 1, so
the reachable-velocity set is the metric unit ball translated by W.

Everything here is a pure function of its arguments; fields are evaluated
point-wise and may be called concurrently.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Union

import numpy as np

from .errors import (
    NonNavigable,
    NonSpd,
    ZeroBaseVector,
    ZeroDirection,
    ZeroVector,
)
from .indicatrix import EllipsoidSpec, metric_from_spec

FieldLike = Union[np.ndarray, Callable[[np.ndarray], np.ndarray], EllipsoidSpec]


def validate_spd(matrix, tol: float = 0.0) -> np.ndarray:
    """Check that `matrix` (trailing 3x3, possibly batched) is symmetric positive-definite.

    Returns the symmetrized array; raises NonSpd otherwise.
    """
    m = np.asarray(matrix, dtype=float)
    if m.shape[-2:] != (3, 3):
        raise NonSpd(f"expected trailing shape (3, 3), got {m.shape}")
    if not np.all(np.isfinite(m)):
        raise NonSpd("matrix has non-finite entries")
    asym = np.abs(m - np.swapaxes(m, -1, -2)).max()
    scale = max(np.abs(m).max(), 1.0)
    if asym > 1e-10 * scale:
        raise NonSpd(f"matrix is not symmetric (max asymmetry {asym:.3e})")
    sym = 0.5 * (m + np.swapaxes(m, -1, -2))
    try:
        np.linalg.cholesky(sym)
    except np.linalg.LinAlgError as exc:
        raise NonSpd("matrix is not positive-definite") from exc
    if tol > 0.0:
        eig = np.linalg.eigvalsh(sym)
        if eig.min() <= tol:
            raise NonSpd(f"smallest eigenvalue {eig.min():.3e} below tolerance {tol:.3e}")
    return sym


def as_metric_field(metric: FieldLike) -> Callable[[np.ndarray], np.ndarray]:
    """Normalize a metric argument to a callable points (..., 3) -> (..., 3, 3)."""
    if isinstance(metric, EllipsoidSpec):
        return lambda pts, _s=metric: metric_from_spec(_s, pts)
    if callable(metric):
        return metric
    mat = validate_spd(metric)

    def constant_metric(pts, _m=mat):
        pts = np.asarray(pts, dtype=float)
        return np.broadcast_to(_m, pts.shape[:-1] + (3, 3))

    return constant_metric


def as_wind_field(wind) -> Callable[[np.ndarray], np.ndarray]:
    """Normalize a wind argument to a callable points (..., 3) -> (..., 3).

    Plain vectors become ConstantWind fields, which carry their closed-form
    flow; arbitrary callables are used as-is.
    """
    if callable(wind):
        return wind
    from .wind import ConstantWind

    return ConstantWind(wind)


@dataclass(frozen=True)
class ZermeloData:
    """A metric field h plus a wind field W with h(W,W) < 1 everywhere queried.

    `metric` and `wind` are vectorized callables (or constants / an
    EllipsoidSpec, normalized at construction).  `lambda_floor` is the
    navigability margin: lam = 1 - h(W,W) at or below it raises
    NonNavigable, since the norm divides by lam.
    """

    metric: Callable[[np.ndarray], np.ndarray]
    wind: Callable[[np.ndarray], np.ndarray]
    lambda_floor: float = 1e-9

    def __post_init__(self):
        # Keep the pre-normalized metric around: samplers backed by an
        # EllipsoidSpec can then parametrize the unit ellipsoid exactly
        # the way the spec object itself does.
        object.__setattr__(self, "metric_source", self.metric)
        object.__setattr__(self, "metric", as_metric_field(self.metric))
        object.__setattr__(self, "wind", as_wind_field(self.wind))

    def metric_at(self, points, check: bool = False) -> np.ndarray:
        h = np.asarray(self.metric(np.asarray(points, dtype=float)), dtype=float)
        if check:
            h = validate_spd(h)
        return h

    def wind_at(self, points) -> np.ndarray:
        return np.asarray(self.wind(np.asarray(points, dtype=float)), dtype=float)

    def lam_at(self, points, h=None, w=None) -> np.ndarray:
        """lam = 1 - h(W,W); raises NonNavigable wherever it is at/below the floor."""
        pts = np.asarray(points, dtype=float)
        if h is None:
            h = self.metric_at(pts)
        if w is None:
            w = self.wind_at(pts)
        lam = 1.0 - np.einsum("...i,...ij,...j->...", w, h, w)
        if np.any(lam <= self.lambda_floor):
            worst = float(np.min(lam))
            raise NonNavigable(
                f"wind too strong: 1 - h(W,W) = {worst:.3e} <= floor {self.lambda_floor:.1e}"
            )
        return lam

    def h_inner(self, points, u, v) -> np.ndarray:
        h = self.metric_at(points)
        return np.einsum(
            "...i,...ij,...j->...",
            np.asarray(u, dtype=float),
            h,
            np.asarray(v, dtype=float),
        )

    def h_norm(self, points, v) -> np.ndarray:
        return np.sqrt(np.maximum(self.h_inner(points, v, v), 0.0))


def zermelo_energy(h, w, v):
    """F^2 from pre-evaluated field values; shapes broadcast, result (..., )."""
    hw = np.einsum("...ij,...j->...i", h, w)
    lam = 1.0 - np.einsum("...i,...i->...", w, hw)
    a = np.einsum("...i,...i->...", hw, np.asarray(v, dtype=float))
    b = np.einsum("...i,...ij,...j->...", v, h, v)
    root = np.sqrt(np.maximum(a * a + lam * b, 0.0))
    return ((root - a) / lam) ** 2


def zermelo_energy_grad_v(h, w, v):
    """Velocity gradient of F^2 at fixed point, analytic.  Shape (..., 3)."""
    v = np.asarray(v, dtype=float)
    hw = np.einsum("...ij,...j->...i", h, w)
    lam = 1.0 - np.einsum("...i,...i->...", w, hw)
    hv = np.einsum("...ij,...j->...i", h, v)
    a = np.einsum("...i,...i->...", hw, v)
    b = np.einsum("...i,...ij,...j->...", v, h, v)
    s = np.sqrt(np.maximum(a * a + lam * b, 1e-300))
    f = (s - a) / lam
    grad_f = (
        (a[..., None] * hw + lam[..., None] * hv) / s[..., None] - hw
    ) / lam[..., None]
    return 2.0 * f[..., None] * grad_f


def zermelo_energy_hess_v(h, w, v):
    """Velocity Hessian of F^2 at fixed point, analytic.  Shape (..., 3, 3).

    Equal to twice the fundamental tensor of the norm at base vector v.
    """
    v = np.asarray(v, dtype=float)
    hw = np.einsum("...ij,...j->...i", h, w)
    lam = 1.0 - np.einsum("...i,...i->...", w, hw)
    hv = np.einsum("...ij,...j->...i", h, v)
    a = np.einsum("...i,...i->...", hw, v)
    b = np.einsum("...i,...ij,...j->...", v, h, v)
    g = a * a + lam * b
    s = np.sqrt(np.maximum(g, 1e-300))
    f = (s - a) / lam
    # grad/hess of g = a^2 + lam*b in v
    grad_g = 2.0 * (a[..., None] * hw + lam[..., None] * hv)
    hess_g = 2.0 * (
        np.einsum("...i,...j->...ij", hw, hw) + lam[..., None, None] * h
    )
    hess_s = hess_g / (2.0 * s[..., None, None]) - np.einsum(
        "...i,...j->...ij", grad_g, grad_g
    ) / (4.0 * (s**3)[..., None, None])
    grad_f = (grad_g / (2.0 * s[..., None]) - hw) / lam[..., None]
    hess_f = hess_s / lam[..., None, None]
    return 2.0 * (
        np.einsum("...i,...j->...ij", grad_f, grad_f) + f[..., None, None] * hess_f
    )


def eval_randers(data: ZermeloData, point, velocity) -> np.ndarray:
    """Travel-time length F(V) at `point`; 0 for V = 0, positive otherwise.

    Raises NonNavigable where the wind is at or past the unit-speed limit
    and NonSpd if the metric field fails positive-definiteness there.
    """
    p = np.asarray(point, dtype=float)
    v = np.asarray(velocity, dtype=float)
    h = data.metric_at(p, check=True)
    w = data.wind_at(p)
    lam = data.lam_at(p, h=h, w=w)
    hw = np.einsum("...ij,...j->...i", h, w)
    a = np.einsum("...i,...i->...", hw, v)
    b = np.einsum("...i,...ij,...j->...", v, h, v)
    root = np.sqrt(np.maximum(a * a + lam * b, 0.0))
    return (root - a) / lam


class RandersEval:
    """Read-only view of the norm split F = alpha + beta over fixed Zermelo data.

    alpha is the Riemannian part sqrt(h(W,V)^2 + lam h(V,V))/lam and beta
    the drift 1-form -h(W,V)/lam; they are derived from the data and never
    constructed independently.
    """

    def __init__(self, data: ZermeloData):
        self._data = data

    @property
    def data(self) -> ZermeloData:
        return self._data

    def alpha(self, point, velocity) -> np.ndarray:
        p = np.asarray(point, dtype=float)
        v = np.asarray(velocity, dtype=float)
        h = self._data.metric_at(p)
        w = self._data.wind_at(p)
        lam = self._data.lam_at(p, h=h, w=w)
        a = np.einsum("...i,...ij,...j->...", w, h, v)
        b = np.einsum("...i,...ij,...j->...", v, h, v)
        return np.sqrt(np.maximum(a * a + lam * b, 0.0)) / lam

    def beta(self, point, velocity) -> np.ndarray:
        p = np.asarray(point, dtype=float)
        v = np.asarray(velocity, dtype=float)
        h = self._data.metric_at(p)
        w = self._data.wind_at(p)
        lam = self._data.lam_at(p, h=h, w=w)
        return -np.einsum("...i,...ij,...j->...", w, h, v) / lam

    def __call__(self, point, velocity) -> np.ndarray:
        return eval_randers(self._data, point, velocity)


def unit_f_direction(data: ZermeloData, point, direction) -> np.ndarray:
    """Scale `direction` to a velocity of unit travel-time length.

    Returns V = W + u/|u|_h, which satisfies F(V) = 1 by construction.
    """
    p = np.asarray(point, dtype=float)
    d = np.asarray(direction, dtype=float)
    norm = data.h_norm(p, d)
    if np.any(norm == 0.0) or not np.all(np.isfinite(norm)):
        raise ZeroDirection("direction must be nonzero and finite")
    return data.wind_at(p) + d / norm[..., None]


def fundamental_tensor(
    data: ZermeloData, point, base, u1, u2, fd_scale: float = 1e-5
) -> np.ndarray:
    """Second mixed derivative of F^2/2 in directions (u1, u2) at `base`.

    Central differences with step fd_scale * |base| per direction; the
    result is symmetric bilinear in (u1, u2) and satisfies
    g_V(V, V) = F(V)^2.
    """
    p = np.asarray(point, dtype=float)
    v = np.asarray(base, dtype=float)
    u1 = np.asarray(u1, dtype=float)
    u2 = np.asarray(u2, dtype=float)
    vnorm = np.linalg.norm(v, axis=-1)
    if np.any(vnorm == 0.0):
        raise ZeroBaseVector("fundamental tensor is undefined at V = 0")
    h = data.metric_at(p, check=True)
    w = data.wind_at(p)
    data.lam_at(p, h=h, w=w)
    n1 = np.linalg.norm(u1, axis=-1)
    n2 = np.linalg.norm(u2, axis=-1)
    if np.any(n1 == 0.0) or np.any(n2 == 0.0):
        raise ZeroVector("probe directions must be nonzero")
    t = (fd_scale * vnorm / n1)[..., None]
    s = (fd_scale * vnorm / n2)[..., None]
    e_pp = zermelo_energy(h, w, v + t * u1 + s * u2)
    e_pm = zermelo_energy(h, w, v + t * u1 - s * u2)
    e_mp = zermelo_energy(h, w, v - t * u1 + s * u2)
    e_mm = zermelo_energy(h, w, v - t * u1 - s * u2)
    return (e_pp - e_pm - e_mp + e_mm) / (8.0 * t[..., 0] * s[..., 0])


def is_f_orthogonal(data: ZermeloData, point, u, v, tol: float = 1e-8):
    """True where u is orthogonal to the base vector v in the drifted norm.

    The test is |h(u, v/F(v) - W)| <= tol * |u|_h, which is equivalent to
    the fundamental-tensor condition g_v(v, u) = 0.
    """
    p = np.asarray(point, dtype=float)
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    if np.any(np.linalg.norm(u, axis=-1) == 0.0) or np.any(
        np.linalg.norm(v, axis=-1) == 0.0
    ):
        raise ZeroVector("orthogonality test needs nonzero vectors")
    f = eval_randers(data, p, v)
    w = data.wind_at(p)
    residual = np.abs(data.h_inner(p, u, v / f[..., None] - w))
    return residual <= tol * data.h_norm(p, u)


def polyline_length(data: ZermeloData, points) -> float:
    """Travel-time length of a sampled polyline.

    Each segment contributes F evaluated at the segment start applied to
    the segment displacement, so concatenating polylines that share an
    endpoint adds lengths exactly.
    """
    pts = np.asarray(points, dtype=float)
    if pts.ndim != 2 or pts.shape[0] < 2:
        return 0.0
    segs = pts[1:] - pts[:-1]
    return float(np.sum(eval_randers(data, pts[:-1], segs)))
