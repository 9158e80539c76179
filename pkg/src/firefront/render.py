"""Slice rendering: front contours and strategic paths as an SVG document."""

from __future__ import annotations

import numpy as np

from .errors import EmptyIntersection, IoError

SVG_SCHEMA = "firefront-slice-svg v1"

_PLANE_AXES = {"x": 0, "y": 1, "z": 2}


def _ramp_color(frac: float) -> str:
    """Cold-to-hot ramp: early fronts dark blue, late fronts red."""
    r = int(40 + 200 * frac)
    g = int(40 + 60 * (1.0 - abs(2 * frac - 1)))
    b = int(220 - 190 * frac)
    return f"rgb({r},{g},{b})"


def _project(points, axis_index):
    pts = np.asarray(points, dtype=float)
    keep = [i for i in range(3) if i != axis_index]
    return pts[..., keep]


def render_slice(report, plane, out_path, width: int = 800) -> str:
    """Write the report's slice fronts and strategic paths to an SVG file.

    `plane` is (axis, value) or an 'axis=value' string and must match the
    plane the report's slices were computed on (or intersect the fronts,
    for reports without precomputed slices).  Returns the path written.
    """
    if isinstance(plane, str):
        axis, value = plane.split("=")
        plane = (axis.strip(), float(value))
    axis_name, value = plane
    axis_index = _PLANE_AXES[str(axis_name)]

    slices = getattr(report, "slices", None) or {}
    if isinstance(report, dict):  # serialized report document
        slices = {float(k): np.asarray(v, dtype=float) for k, v in report.get("slices", {}).items()}
        plane_doc = report.get("plane")
        strategy_docs = report.get("strategy", [])
        if plane_doc is not None and (
            plane_doc["axis"] != axis_name or abs(plane_doc["value"] - value) > 1e-9
        ):
            raise EmptyIntersection(
                f"report slices are on {plane_doc['axis']}={plane_doc['value']}, not {axis_name}={value}"
            )
        rays = [np.asarray(s["ray"]["points"], dtype=float) for s in strategy_docs]
    else:
        if report.grid is not None and (
            report.grid.axis != axis_name or abs(report.grid.value - value) > 1e-9
        ):
            raise EmptyIntersection(
                f"report slices are on {report.grid.axis}={report.grid.value}, "
                f"not {axis_name}={value}"
            )
        rays = [r.ray.points for r in report.strategy_results]
    if not slices:
        raise EmptyIntersection("report holds no front slices on the requested plane")

    taus = sorted(slices)
    polylines = [(tau, _project(slices[tau], axis_index)) for tau in taus]
    ray_lines = [_project(r, axis_index) for r in rays]

    all_pts = np.vstack([p for _, p in polylines] + (ray_lines or [np.zeros((0, 2))]))
    lo = all_pts.min(axis=0)
    hi = all_pts.max(axis=0)
    span = np.maximum(hi - lo, 1e-9)
    margin = 0.05 * span.max()
    lo, hi = lo - margin, hi + margin
    span = hi - lo
    height = int(round(width * span[1] / span[0]))

    def to_px(p):
        x = (p[:, 0] - lo[0]) / span[0] * width
        y = height - (p[:, 1] - lo[1]) / span[1] * height
        return np.stack([x, y], axis=1)

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}">',
        f"<!-- {SVG_SCHEMA} plane={axis_name}={value!r} -->",
        f'<rect width="{width}" height="{height}" fill="white"/>',
    ]
    n = max(len(polylines) - 1, 1)
    for k, (tau, poly) in enumerate(polylines):
        px = to_px(poly)
        points_attr = " ".join(f"{x:.2f},{y:.2f}" for x, y in px)
        parts.append(
            f'<polyline fill="none" stroke="{_ramp_color(k / n)}" stroke-width="1.5" '
            f'points="{points_attr}"><title>t={tau:g}</title></polyline>'
        )
    for ray in ray_lines:
        px = to_px(ray)
        points_attr = " ".join(f"{x:.2f},{y:.2f}" for x, y in px)
        parts.append(
            f'<polyline fill="none" stroke="#7b2d8b" stroke-width="2.5" '
            f'points="{points_attr}"><title>strategic path</title></polyline>'
        )
    parts.append("</svg>\n")
    try:
        with open(out_path, "w", encoding="utf-8") as fh:
            fh.write("\n".join(parts))
    except OSError as exc:
        raise IoError(f"could not write {out_path}: {exc}") from exc
    return str(out_path)
