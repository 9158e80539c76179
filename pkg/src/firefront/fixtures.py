"""Built-in demo data: burn specs, winds, fronts, and reference constants.

Two demo settings ship with the package.  The first uses a constant wind
over a homogeneous rotated-ellipsoid burn pattern; the second a linear
shear wind over a pattern whose rotation angle varies with position.

Several published constants for these demos disagree with what direct
recomputation from the quadratic form gives.  Both sets are kept: the
"derived" variant (default) is recomputed symbolically and is what the
library asserts against; the "legacy" variant preserves the tabulated
values so the discrepancy stays documented and testable.
"""

from __future__ import annotations

import numpy as np

from .indicatrix import EllipsoidSpec
from .metric import ZermeloData
from .propagation import CurveFront, PointFront, SurfaceFront
from .wind import AnalyticWind, ConstantWind, shear_wind

SQRT3 = np.sqrt(3.0)


def oval_loop_xy(s):
    """The closed demo fire line in the z = 0 plane."""
    s = np.asarray(s, dtype=float)
    x = 0.25 * np.cos(s) * (np.cos(s) + 6.0)
    y = (4.0 / 13.0) * np.sin(s) * (3.0 - np.sin(s))
    return np.stack([x, y, np.zeros_like(s)], axis=-1)


def oval_loop_tangent(s):
    s = np.asarray(s, dtype=float)
    dx = -0.25 * (np.sin(2.0 * s) + 6.0 * np.sin(s))
    dy = (4.0 / 13.0) * (3.0 * np.cos(s) - np.sin(2.0 * s))
    return np.stack([dx, dy, np.zeros_like(s)], axis=-1)


def oval_loop() -> CurveFront:
    return CurveFront(oval_loop_xy, (0.0, 2.0 * np.pi), tangent_fn=oval_loop_tangent, closed=True)


def oval_cylinder(z_range=(0.0, 2.0)) -> SurfaceFront:
    """The demo fire line extruded vertically: a cylinder wall."""

    def fn(s1, s2):
        s1 = np.asarray(s1, dtype=float)
        s2 = np.asarray(s2, dtype=float)
        base = oval_loop_xy(s1)
        out = np.broadcast_to(base, np.broadcast_shapes(base.shape, s2.shape + (3,))).copy()
        out[..., 2] = s2
        return out

    def t1(s1, s2):
        t = oval_loop_tangent(s1)
        return np.broadcast_to(t, np.broadcast_shapes(t.shape, np.shape(s2) + (3,))).copy()

    def t2(s1, s2):
        shape = np.broadcast_shapes(np.shape(s1), np.shape(s2))
        out = np.zeros(shape + (3,))
        out[..., 2] = 1.0
        return out

    return SurfaceFront(fn, (0.0, 2.0 * np.pi), z_range, tangent_fns=(t1, t2), closed_s1=True)


def example1_spec() -> EllipsoidSpec:
    return EllipsoidSpec(a=0.5, b=1.0, c=2.0, alpha=np.pi / 6.0)


def example1_wind() -> ConstantWind:
    return ConstantWind([0.0, 1.0 / 3.0, 1.0 / 6.0])


def example1_data() -> ZermeloData:
    return ZermeloData(metric=example1_spec(), wind=example1_wind())


def example1_metric_matrix() -> np.ndarray:
    """Closed-form metric matrix of the first demo's burn ellipsoid."""
    return np.array(
        [
            [4.0, 0.0, 0.0],
            [0.0, 13.0 / 16.0, -3.0 * SQRT3 / 16.0],
            [0.0, -3.0 * SQRT3 / 16.0, 7.0 / 16.0],
        ]
    )


def example2_spec() -> EllipsoidSpec:
    return EllipsoidSpec(a=1.0, b=0.5, c=2.0, alpha=0.0, beta="y", theta=0.0)


def example2_wind(k: float = 0.1) -> AnalyticWind:
    return shear_wind(k)


def example2_data(k: float = 0.1) -> ZermeloData:
    return ZermeloData(metric=example2_spec(), wind=example2_wind(k))


def example2_diag(variant: str = "derived") -> np.ndarray:
    """Eigenvalue diagonal of the second demo's metric.

    "derived" follows 1/axis^2 = (1, 4, 1/4), consistent with the demo's own
    quadratic form; "legacy" preserves the tabulated (1, 1/2, 2).
    """
    if variant == "derived":
        return np.array([1.0, 4.0, 0.25])
    if variant == "legacy":
        return np.array([1.0, 0.5, 2.0])
    raise ValueError("variant must be 'derived' or 'legacy'")


def front_expansion_coefficients(variant: str = "derived") -> dict:
    """Coefficients of the expanded time-1 front equation for the first demo.

    The front satisfies 16 * Q(u, v - 1/3, w - 1/6) = 16, expanded to
      cuu*u^2 + cvv*v^2 + cww*w^2 + cvw*v*w + cv*v + cw*w = const.
    The derived set comes from symbolic expansion; the legacy set flips
    the sign of the sqrt(3) term in cv and uses a larger constant.
    """
    base = {
        "cuu": 64.0,
        "cvv": 13.0,
        "cww": 7.0,
        "cvw": -6.0 * SQRT3,
        "cw": 2.0 * SQRT3 - 7.0 / 3.0,
    }
    if variant == "derived":
        base["cv"] = SQRT3 - 26.0 / 3.0
        base["const"] = 517.0 / 36.0 + SQRT3 / 3.0
    elif variant == "legacy":
        base["cv"] = -(26.0 / 3.0 + SQRT3)
        base["const"] = 635.0 / 36.0 + SQRT3 / 3.0
    else:
        raise ValueError("variant must be 'derived' or 'legacy'")
    return base


def front_expansion_residual(points, variant: str = "derived") -> np.ndarray:
    """Evaluate the expanded front equation: 0 on the time-1 front (derived)."""
    c = front_expansion_coefficients(variant)
    p = np.asarray(points, dtype=float)
    u, v, w = p[..., 0], p[..., 1], p[..., 2]
    return (
        c["cuu"] * u**2
        + c["cvv"] * v**2
        + c["cww"] * w**2
        + c["cvw"] * v * w
        + c["cv"] * v
        + c["cw"] * w
        - c["const"]
    )


def shear_reference_base_path(point, velocity, k, times, variant: str = "derived"):
    """Closed-form base path of the tabulated shear-demo ray construction.

    The base path starts at `point` with velocity V - W(p) and solves the
    reduced system in which the horizontal velocity pair rotates at the
    vertical rate.  The "derived" variant integrates that system exactly
    (trig arguments v2*t, base point recovered at t = 0); "legacy" keeps
    the tabulated form, whose trig arguments are constant and whose z
    offset has the opposite sign.

    The reduced system is not the geodesic system of the demo metric; the
    gap between this reference and the true geodesics is measured by the
    tests rather than hidden.
    """
    p = np.asarray(point, dtype=float).reshape(3)
    v = np.asarray(velocity, dtype=float).reshape(3)
    ts = np.asarray(times, dtype=float)
    x0, y0, z0 = p
    v1, v2, v3 = v
    u0 = v1 - k * y0
    w0 = v3
    if abs(v2) < 1e-14:
        return np.stack([x0 + u0 * ts, np.full_like(ts, y0), z0 + w0 * ts], axis=-1)
    if variant == "derived":
        cos_t, sin_t = np.cos(v2 * ts), np.sin(v2 * ts)
        return np.stack(
            [
                x0 - w0 / v2 + (w0 / v2) * cos_t + (u0 / v2) * sin_t,
                y0 + v2 * ts,
                z0 + u0 / v2 - (u0 / v2) * cos_t + (w0 / v2) * sin_t,
            ],
            axis=-1,
        )
    if variant == "legacy":
        cos_c, sin_c = np.cos(v2), np.sin(v2)
        return np.stack(
            [
                x0 - w0 / v2 + ts * (w0 / v2) * cos_c + ts * (u0 / v2) * sin_c,
                y0 + v2 * ts,
                z0 - u0 / v2 - ts * (u0 / v2) * cos_c + ts * (w0 / v2) * sin_c,
            ],
            axis=-1,
        )
    raise ValueError("variant must be 'derived' or 'legacy'")


def shear_flow_reference_ray(point, velocity, k, times, variant: str = "derived"):
    """Flow-composed reference ray: wind flow applied to the base path."""
    ts = np.asarray(times, dtype=float)
    base = shear_reference_base_path(point, velocity, k, ts, variant=variant)
    out = base.copy()
    out[..., 0] += k * ts * base[..., 1]
    return out


def demo_point_front(point=(0.0, 0.0, 0.0)) -> PointFront:
    return PointFront(point)


def list_fixtures() -> list:
    """Names of the scenario documents shipped with the package."""
    from importlib import resources

    pkg = resources.files(__package__) / "scenarios"
    return sorted(p.name[: -len(".toml")] for p in pkg.iterdir() if p.name.endswith(".toml"))


def fixture_text(name: str) -> str:
    from importlib import resources

    path = resources.files(__package__) / "scenarios" / f"{name}.toml"
    if not path.is_file():
        raise KeyError(f"no scenario fixture named {name!r}; have {list_fixtures()}")
    return path.read_text(encoding="utf-8")


def load_fixture(name: str):
    """Parse a shipped scenario fixture into a Scenario object."""
    from .scenario import parse_scenario

    return parse_scenario(fixture_text(name))
