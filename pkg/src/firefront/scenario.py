"""Scenario configuration, batch execution, and report output.

A scenario is a TOML document: one burn-ellipsoid table, a list of wind
segments partitioning [0, horizon], an initial front, output times, an
optional slice grid, strategy queries, and output file names.  Running a
scenario propagates the front segment by segment (the front at a segment
boundary seeds the next segment), answers the strategy queries, computes
an arrival-time field, and evaluates an invariant suite.

Outputs are deterministic: two runs of the same scenario write
bit-identical CSV/JSON.  Wall-clock timings are kept on the report object
but stay out of the serialized output for that reason.
"""

from __future__ import annotations

import io
import json
import time
from dataclasses import dataclass, field as dc_field, replace

import numpy as np

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

from . import fixtures
from .errors import EmptyIntersection, ParseError, ValidationError
from .indicatrix import EllipsoidSpec
from .metric import ZermeloData, eval_randers
from .propagation import (
    CurveFront,
    FrontSampling,
    PlaneGrid,
    PointFront,
    SampledFront,
    Wavefront,
    _curve_plane_launch,
    _mesh_plane_section,
    _resolve_hint,
    arrival_time_field,
    huygens_step,
    polyline_hausdorff,
    propagate_front,
    propagate_front_slice,
    select_mode,
)
from .strategy import (
    BallRegion,
    HalfSpaceRegion,
    strategic_path_all_equal,
    strategic_path_to_point,
    strategic_path_to_region,
)
from .wind import (
    ConstantWind,
    WindField,
    WindSegment,
    load_grid_wind,
    rotation_wind,
    shear_wind,
    validate_segments,
)

SCENARIO_SCHEMA = "firefront-scenario-v1"
REPORT_SCHEMA = "firefront-report-v1"
CSV_SCHEMA = "firefront-wavefront-csv v1"


# ---------------------------------------------------------------------------
# Scenario model


@dataclass(frozen=True, eq=True)
class Scenario:
    """Plain-data scenario description; builders turn it into live objects."""

    name: str
    ellipsoid: dict
    wind_segments: tuple
    front: dict
    times: tuple
    grid: dict | None = None
    strategies: tuple = ()
    output: dict = dc_field(default_factory=dict)
    sampling: dict = dc_field(default_factory=dict)
    numerics: dict = dc_field(default_factory=dict)
    base_dir: str | None = dc_field(default=None, compare=False)

    @property
    def horizon(self) -> float:
        return max(self.times)

    def build_spec(self) -> EllipsoidSpec:
        e = self.ellipsoid
        return EllipsoidSpec(
            a=e.get("a", 1.0),
            b=e.get("b", 1.0),
            c=e.get("c", 1.0),
            alpha=e.get("alpha", 0.0),
            beta=e.get("beta", 0.0),
            theta=e.get("theta", 0.0),
        )

    def build_wind(self, index: int) -> WindField:
        seg = self.wind_segments[index]
        kind = seg["kind"]
        if kind == "constant":
            return ConstantWind(seg["vector"])
        if kind == "shear":
            return shear_wind(float(seg["k"]))
        if kind == "rotation":
            return rotation_wind(float(seg["k"]))
        if kind == "grid":
            path = seg["path"]
            if self.base_dir is not None:
                import os

                path = os.path.join(self.base_dir, path)
            return load_grid_wind(path)
        raise ValidationError(f"unknown wind kind {kind!r}")

    def build_segments(self):
        return [
            WindSegment(float(s["t_start"]), float(s["t_end"]), self.build_wind(i))
            for i, s in enumerate(self.wind_segments)
        ]

    def build_front(self):
        f = self.front
        kind = f["kind"]
        if kind == "point":
            return PointFront(f["point"])
        if kind == "curve":
            preset = f.get("preset", "oval_loop")
            if preset != "oval_loop":
                raise ValidationError(f"unknown curve preset {preset!r}")
            return fixtures.oval_loop()
        if kind == "surface":
            preset = f.get("preset", "oval_cylinder")
            if preset != "oval_cylinder":
                raise ValidationError(f"unknown surface preset {preset!r}")
            return fixtures.oval_cylinder(tuple(f.get("height", (0.0, 2.0))))
        if kind == "sampled":
            return SampledFront(
                f["points"],
                tangents=f.get("tangents"),
                outward_hint=f.get("outward_hint"),
            )
        raise ValidationError(f"unknown front kind {kind!r}")

    def build_sampling(self) -> FrontSampling:
        s = self.sampling
        return FrontSampling(
            curve=int(s.get("curve", 256)),
            surface=tuple(s.get("surface", (64, 32))),
            point_polar=int(s.get("point_polar", 33)),
            point_azimuth=int(s.get("point_azimuth", 64)),
            circle=int(s.get("circle", 64)),
            side=s.get("side", "outward"),
        )

    def build_grid(self, resolution=None) -> PlaneGrid | None:
        if self.grid is None:
            return None
        g = self.grid
        axis, value = _parse_plane(g.get("plane", "z=0"))
        shape = tuple(int(x) for x in g.get("shape", (256, 256)))
        if resolution is not None:
            shape = (int(resolution), int(resolution))
        return PlaneGrid(
            axis=axis,
            value=value,
            lo=tuple(float(x) for x in g["lo"]),
            hi=tuple(float(x) for x in g["hi"]),
            shape=shape,
        )


def _parse_plane(text: str):
    try:
        axis, value = text.split("=")
        axis = axis.strip().lower()
        if axis not in ("x", "y", "z"):
            raise ValueError
        return axis, float(value)
    except ValueError as exc:
        raise ValidationError(f"bad plane spec {text!r}; expected e.g. 'z=0'") from exc


# ---------------------------------------------------------------------------
# Parsing and serialization


def parse_scenario(text: str, base_dir: str | None = None) -> Scenario:
    """Parse and validate a scenario document; see the README for the grammar."""
    try:
        doc = tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        raise ParseError(str(exc)) from exc
    schema = doc.get("schema")
    if schema != SCENARIO_SCHEMA:
        raise ValidationError(f"schema must be {SCENARIO_SCHEMA!r}, got {schema!r}")
    name = doc.get("name")
    if not name:
        raise ValidationError("scenario needs a name")

    ellipsoid = dict(doc.get("ellipsoid", {}))
    for key in ("a", "b", "c"):
        v = ellipsoid.get(key, 1.0)
        if not isinstance(v, str) and float(v) <= 0.0:
            raise ValidationError(f"ellipsoid.{key} must be positive, got {v}")

    times = tuple(float(t) for t in doc.get("times", {}).get("outputs", ()))
    if not times:
        raise ValidationError("times.outputs must list at least one output time")
    if any(t <= 0 for t in times) or any(b <= a for a, b in zip(times, times[1:])):
        raise ValidationError("times.outputs must be positive and strictly increasing")
    horizon = max(times)

    raw_segments = doc.get("wind", [])
    if isinstance(raw_segments, dict):
        raw_segments = [raw_segments]
    if not raw_segments:
        raise ValidationError("at least one [[wind]] segment is required")
    wind_segments = tuple(dict(s) for s in raw_segments)
    sc = Scenario(
        name=str(name),
        ellipsoid=ellipsoid,
        wind_segments=wind_segments,
        front=dict(doc.get("front", {"kind": "point", "point": [0.0, 0.0, 0.0]})),
        times=times,
        grid=dict(doc["grid"]) if "grid" in doc else None,
        strategies=tuple(dict(s) for s in doc.get("strategy", [])),
        output=dict(doc.get("output", {})),
        sampling=dict(doc.get("sampling", {})),
        numerics=dict(doc.get("numerics", {})),
        base_dir=base_dir,
    )
    # Eager invariant checks: segment partition, buildable fields, files.
    validate_segments(sc.build_segments(), horizon)
    sc.build_front()
    sc.build_spec()
    if sc.grid is not None:
        grid = sc.build_grid()
        if grid.shape[0] < 8 or grid.shape[1] < 8:
            raise ValidationError("grid.shape must be at least 8x8")
        if grid.lo[0] >= grid.hi[0] or grid.lo[1] >= grid.hi[1]:
            raise ValidationError("grid.lo must be strictly below grid.hi")
    for q in sc.strategies:
        kind = q.get("kind")
        if kind not in ("all_equal", "to_point", "to_region"):
            raise ValidationError(f"unknown strategy kind {kind!r}")
        if kind == "all_equal" and float(q.get("tau", horizon)) > horizon + 1e-12:
            raise ValidationError("strategy tau exceeds the scenario horizon")
    return sc


def load_scenario(path) -> Scenario:
    import os

    with open(path, encoding="utf-8") as fh:
        return parse_scenario(fh.read(), base_dir=os.path.dirname(os.path.abspath(path)))


def _toml_scalar(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    if isinstance(v, str):
        return json.dumps(v)
    if isinstance(v, (list, tuple, np.ndarray)):
        return "[" + ", ".join(_toml_scalar(x) for x in v) + "]"
    raise TypeError(f"cannot serialize {type(v).__name__} to TOML")


def _emit_table(out, name, table):
    out.write(f"[{name}]\n")
    for k in sorted(table):
        out.write(f"{k} = {_toml_scalar(table[k])}\n")
    out.write("\n")


def serialize_scenario(sc: Scenario) -> str:
    """Deterministic TOML text; parse(serialize(sc)) == sc."""
    out = io.StringIO()
    out.write(f'schema = "{SCENARIO_SCHEMA}"\n')
    out.write(f"name = {json.dumps(sc.name)}\n\n")
    _emit_table(out, "ellipsoid", sc.ellipsoid)
    for seg in sc.wind_segments:
        out.write("[[wind]]\n")
        for k in sorted(seg):
            out.write(f"{k} = {_toml_scalar(seg[k])}\n")
        out.write("\n")
    _emit_table(out, "front", sc.front)
    _emit_table(out, "times", {"outputs": list(sc.times)})
    if sc.grid is not None:
        _emit_table(out, "grid", sc.grid)
    for q in sc.strategies:
        out.write("[[strategy]]\n")
        for k in sorted(q):
            out.write(f"{k} = {_toml_scalar(q[k])}\n")
        out.write("\n")
    if sc.output:
        _emit_table(out, "output", sc.output)
    if sc.sampling:
        _emit_table(out, "sampling", sc.sampling)
    if sc.numerics:
        _emit_table(out, "numerics", sc.numerics)
    return out.getvalue()


# ---------------------------------------------------------------------------
# Slice-front chaining state


@dataclass
class _SliceChain:
    """Closed in-plane front polyline with tangents and side hints."""

    points: np.ndarray  # (N, 3), not closed
    hints: np.ndarray  # (N, 3) outward launch offsets

    def tangents(self):
        fwd = np.roll(self.points, -1, axis=0)
        bwd = np.roll(self.points, 1, axis=0)
        return 0.5 * (fwd - bwd)

    def closed_polyline(self):
        return np.vstack([self.points, self.points[:1]])


def _slice_chain_from_front(front, n):
    """Initial slice state for point/curve fronts lying in the plane."""
    if isinstance(front, PointFront):
        return None  # a point has no polyline; first step creates one
    if isinstance(front, CurveFront):
        s_vals = front.sample_params(n)
        pts = front.points(s_vals)
        centroid = pts.mean(axis=0)
        hints = np.array([_resolve_hint(p, None, centroid) for p in pts])
        return _SliceChain(points=pts, hints=hints)
    return None


def _advance_slice(data, chain, front, tau, plane_axis, n, side="outward"):
    """One constant-mode in-plane propagation step; returns a new chain."""
    if chain is None:
        if isinstance(front, PointFront):
            poly = propagate_front_slice(data, front, tau, ("xyz"[plane_axis], front.point[plane_axis]), n=n)
            pts = poly[:-1]
            w = data.wind_at(pts)
            hints = pts - front.point - tau * w
            hints = hints / np.linalg.norm(hints, axis=1, keepdims=True)
            return _SliceChain(points=pts, hints=hints)
        raise ValueError("slice chaining needs a point or curve front")
    pts = chain.points
    tans = chain.tangents()
    out = np.empty_like(pts)
    hints = np.empty_like(pts)
    for i in range(pts.shape[0]):
        p = pts[i]
        h = data.metric_at(p)
        w = data.wind_at(p)
        u = _curve_plane_launch(h, w, tans[i], plane_axis, chain.hints[i])
        out[i] = p + tau * (w + u)
        hints[i] = u
    return _SliceChain(points=out, hints=hints)


# ---------------------------------------------------------------------------
# Reports


@dataclass
class RunReport:
    """Everything a scenario run produced, plus invariant-check outcomes."""

    scenario: Scenario
    mode_reports: list
    fronts: list
    slices: dict
    strategy_results: list
    arrival_summary: dict
    invariants: list
    grid: PlaneGrid | None = None
    wall_clock: dict = dc_field(default_factory=dict)

    @property
    def all_checks_passed(self) -> bool:
        return all(c["passed"] for c in self.invariants)

    def to_json_dict(self, include_timing: bool = False) -> dict:
        doc = {
            "schema": REPORT_SCHEMA,
            "scenario": self.scenario.name,
            "modes": self.mode_reports,
            "plane": None
            if self.grid is None
            else {"axis": self.grid.axis, "value": self.grid.value},
            "fronts": [
                {
                    "tau": float(f.tau),
                    "n_points": int(f.n_points),
                    "mode": f.mode,
                }
                for f in self.fronts
            ],
            "slices": {
                repr(float(tau)): [[float(c) for c in p] for p in poly]
                for tau, poly in sorted(self.slices.items())
            },
            "strategy": [r.to_json_dict() for r in self.strategy_results],
            "arrival": self.arrival_summary,
            "invariants": self.invariants,
        }
        if include_timing:
            doc["wall_clock"] = self.wall_clock
        return doc


def wavefront_to_json_dict(front: Wavefront) -> dict:
    """Single wavefront as a JSON document with full launch provenance."""
    doc = {
        "schema": "firefront-wavefront-v1",
        "tau": float(front.tau),
        "mode": front.mode,
        "n_points": int(front.n_points),
        "grid_shape": None if front.grid_shape is None else list(front.grid_shape),
        "points": [[float(c) for c in p] for p in front.points],
    }
    if front.velocities0 is not None:
        doc["launch_velocities"] = [[float(c) for c in v] for v in front.velocities0]
    if front.source_params is not None:
        doc["source_params"] = [[float(c) for c in s] for s in front.source_params]
    if front.source_index is not None:
        doc["source_index"] = [int(i) for i in front.source_index]
    return doc


def wavefronts_to_csv(fronts) -> str:
    """CSV rows (tau, sample_id, x, y, z, vx0, vy0, vz0) for all fronts."""
    out = io.StringIO()
    out.write(f"# {CSV_SCHEMA}\n")
    out.write("tau,sample_id,x,y,z,vx0,vy0,vz0\n")
    for f in fronts:
        vels = f.velocities0
        for i, p in enumerate(f.points):
            if vels is None:
                v = (0.0, 0.0, 0.0)
            else:
                v = vels[i]
            out.write(
                f"{float(f.tau)!r},{i},{p[0]!r},{p[1]!r},{p[2]!r},"
                f"{float(v[0])!r},{float(v[1])!r},{float(v[2])!r}\n"
            )
    return out.getvalue()


# ---------------------------------------------------------------------------
# Execution


def run_scenario(
    sc: Scenario,
    grid_resolution: int | None = None,
    fan: int | None = None,
    dt: float | None = None,
    include_checks: bool = True,
) -> RunReport:
    """Execute a scenario: fronts per output time, strategies, invariants.

    The tracing mode is selected per wind segment (straight rays for
    constant data, flow-composed geodesics for verified isometry winds,
    the general integrator otherwise).  At each segment boundary the
    current front becomes the next segment's initial front.
    """
    t_begin = time.perf_counter()
    spec = sc.build_spec()
    segments = sc.build_segments()
    front0 = sc.build_front()
    sampling = sc.build_sampling()
    if fan is not None:
        polar, azimuth = _fan_grid_shape(fan)
        sampling = replace(sampling, point_polar=polar, point_azimuth=azimuth)
    grid = sc.build_grid(resolution=grid_resolution)
    dt = dt if dt is not None else sc.numerics.get("dt")
    slice_n = int(sc.sampling.get("slice_samples", 1024))

    bounds = _scenario_bounds(sc, grid, front0)
    data_per_seg = []
    mode_reports = []
    for i, seg in enumerate(segments):
        data = ZermeloData(metric=spec, wind=seg.field)
        report = select_mode(data, bounds)
        data_per_seg.append((seg, data, report))
        mode_reports.append(
            {
                "segment": [seg.t_start, seg.t_end],
                "mode": report.mode,
                "killing_ok": report.killing_ok,
                "killing_residual": report.killing_residual,
                "killing_tol": report.killing_tol,
            }
        )

    fronts: list[Wavefront] = []
    slices: dict[float, np.ndarray] = {}
    current_front = front0
    plane_axis = grid.axis_index if grid is not None else 2
    chain = _slice_chain_from_front(front0, slice_n) if grid is not None else None

    for seg, data, mreport in data_per_seg:
        mode = mreport.mode
        seg_times = [t for t in sc.times if seg.t_start < t <= seg.t_end]
        for t_abs in seg_times:
            wf = propagate_front(
                data,
                current_front,
                t_abs - seg.t_start,
                sampling=sampling,
                mode=mode,
                dt=dt,
                skip_mode_check=True,
            )
            wf = replace(wf, tau=t_abs)
            fronts.append(wf)
            if grid is not None:
                poly = _slice_of(
                    data, current_front, chain, t_abs - seg.t_start, wf, grid, mode, slice_n
                )
                if poly is not None:
                    slices[t_abs] = poly
        if seg.t_end < sc.horizon:
            # The end-of-segment front seeds the next segment; the slice
            # chain advances with it where straight rays make that exact.
            wf_end = propagate_front(
                data,
                current_front,
                seg.duration,
                sampling=sampling,
                mode=mode,
                dt=dt,
                skip_mode_check=True,
            )
            if grid is not None:
                if mode == "constant" and (
                    chain is not None or isinstance(current_front, PointFront)
                ):
                    chain = _advance_slice(
                        data, chain, current_front, seg.duration, plane_axis, slice_n
                    )
                else:
                    chain = None
            current_front = wf_end.as_sampled_front(wind=data.wind)

    seg0, data0, report0 = data_per_seg[0]
    arrival_summary = {}
    arrival = None
    if grid is not None:
        arrival = arrival_time_field(
            data0,
            front0,
            grid,
            horizon=min(sc.horizon, seg0.t_end),
            sampling=sampling,
            mode=report0.mode,
            dt=dt,
        )
        finite = arrival.values[np.isfinite(arrival.values)]
        arrival_summary = {
            "horizon": float(min(sc.horizon, seg0.t_end)),
            "covered_fraction": float(np.mean(np.isfinite(arrival.values))),
            "min": float(finite.min()) if finite.size else None,
            "max": float(finite.max()) if finite.size else None,
            "nested": bool(arrival.check_nesting(list(sc.times))),
        }

    # Strategy queries run against the first segment's data and the initial
    # front; region queries get the arrival field for bracketing.
    strategy_results = []
    for q in sc.strategies:
        strategy_results.append(
            _run_strategy(q, data0, front0, report0.mode, sc, sampling, dt, arrival)
        )

    invariants = []
    if include_checks:
        invariants = _run_checks(
            sc, data0, front0, report0, sampling, grid, slices, strategy_results, dt, slice_n
        )

    report = RunReport(
        scenario=sc,
        mode_reports=mode_reports,
        fronts=fronts,
        slices=slices,
        strategy_results=strategy_results,
        arrival_summary=arrival_summary,
        invariants=invariants,
        grid=grid,
        wall_clock={"total_s": time.perf_counter() - t_begin},
    )
    return report


def _next_odd(n: int) -> int:
    return n if n % 2 == 1 else n + 1


def _fan_grid_shape(n: int):
    """Polar x azimuth grid of roughly n directions, keeping the polar
    count odd and the azimuth count a multiple of 4 (exact cardinals)."""
    azimuth = max(4, 4 * int(np.ceil(np.sqrt(n / 2.0) / 4.0)))
    polar = _next_odd(max(3, int(np.ceil(n / azimuth))))
    return polar, azimuth


def _scenario_bounds(sc, grid, front0):
    if grid is not None:
        cells = grid.cell_centers()
        lo = cells.min(axis=0) - 1.0
        hi = cells.max(axis=0) + 1.0
        return lo, hi
    if isinstance(front0, PointFront):
        center = front0.point
        return center - 2 * sc.horizon, center + 2 * sc.horizon
    return np.full(3, -2.0 * sc.horizon), np.full(3, 2.0 * sc.horizon)


def _slice_of(data, front, chain, tau_rel, wf, grid, mode, slice_n):
    """Slice polyline of the current front at tau_rel, best method per mode."""
    if mode == "constant" and isinstance(front, (PointFront, CurveFront)):
        try:
            return propagate_front_slice(data, front, tau_rel, grid, n=slice_n)
        except ValueError:
            return None
    if mode == "constant" and chain is not None:
        advanced = _advance_slice(data, chain, front, tau_rel, grid.axis_index, slice_n)
        return advanced.closed_polyline()
    if wf.grid_shape is not None and len(wf.grid_shape) == 2:
        mesh = wf.points.reshape(wf.grid_shape + (3,))
        poly2d = _mesh_plane_section(mesh, grid, wrap=wf.grid_wrap)
        if poly2d is None or poly2d.shape[0] < 3:
            return None
        poly = np.empty((poly2d.shape[0] + 1, 3))
        i, j = grid.plane_axes
        poly[:-1, i] = poly2d[:, 0]
        poly[:-1, j] = poly2d[:, 1]
        poly[:-1, grid.axis_index] = grid.value
        poly[-1] = poly[0]
        return poly
    return None


def _run_strategy(q, data, front, mode, sc, sampling, dt, arrival=None):
    kind = q["kind"]
    if kind == "all_equal":
        tau = float(q.get("tau", sc.horizon))
        return strategic_path_all_equal(
            data, front, tau, sampling=sampling, mode=mode, dt=dt
        )
    if kind == "to_point":
        return strategic_path_to_point(
            data,
            front,
            q["point"],
            sampling=sampling,
            mode=mode,
            horizon=float(q.get("horizon", sc.horizon)) if mode != "constant" else q.get("horizon"),
            dt=dt,
        )
    if kind == "to_region":
        region = _build_region(q)
        return strategic_path_to_region(
            data,
            front,
            region,
            horizon=float(q.get("horizon", sc.horizon)),
            sampling=sampling,
            mode=mode,
            dt=dt,
            arrival_field=arrival,
        )
    raise ValidationError(f"unknown strategy kind {kind!r}")


def _build_region(q):
    if "ball_center" in q:
        return BallRegion(q["ball_center"], float(q["ball_radius"]))
    if "normal" in q:
        return HalfSpaceRegion(q["normal"], float(q["offset"]))
    raise ValidationError("to_region query needs ball_center/ball_radius or normal/offset")


# ---------------------------------------------------------------------------
# Invariant suite


def _check(name, passed, value, threshold, note=""):
    return {
        "name": name,
        "passed": bool(passed),
        "value": None if value is None else float(value),
        "threshold": None if threshold is None else float(threshold),
        "note": note,
    }


def _run_checks(sc, data, front, mode_report, sampling, grid, slices, strategies, dt, slice_n):
    from skimage import measure

    checks = []
    mode = mode_report.mode

    # Round trip: parse(serialize(.)) == original.
    try:
        rt = parse_scenario(serialize_scenario(sc)) == replace(sc, base_dir=None)
        checks.append(_check("scenario-roundtrip", rt, None, None))
    except (ParseError, ValidationError) as exc:
        checks.append(_check("scenario-roundtrip", False, None, None, note=str(exc)))

    # Orthogonal launch residuals on the initial front.
    try:
        from .propagation import _front_fan

        sources, vels, params, _ = _front_fan(data, front, _thin(sampling))
        w = data.wind_at(sources)
        resid = np.abs(
            np.einsum("ni,nij,nj->n", vels - w, data.metric_at(sources), vels - w) - 1.0
        ).max()
        f_unit = np.abs(eval_randers(data, sources, vels) - 1.0).max()
        checks.append(_check("unit-speed-launch", max(resid, f_unit) <= 1e-8, max(resid, f_unit), 1e-8))
    except Exception as exc:  # pragma: no cover - diagnostic path
        checks.append(_check("unit-speed-launch", False, None, 1e-8, note=repr(exc)))

    # Nested slice fronts, centroid drift toward the wind side.
    taus = sorted(slices)
    if len(taus) >= 2:
        nested = True
        for t1, t2 in zip(taus, taus[1:]):
            inner = grid.in_plane(slices[t1][:-1])
            outer = slices[t2][:-1]
            if not bool(np.all(measure.points_in_poly(inner, grid.in_plane(outer)))):
                nested = False
                break
        checks.append(_check("fronts-nested", nested, None, None))
        w0 = data.wind_at(np.zeros(3))
        w2d = grid.in_plane(w0[None, :])[0]
        if np.linalg.norm(w2d) > 1e-12:
            cents = [grid.in_plane(slices[t][:-1]).mean(axis=0) for t in taus]
            drifts = [float((c2 - c1) @ w2d) for c1, c2 in zip(cents, cents[1:])]
            checks.append(_check("centroid-wind-drift", all(d > 0 for d in drifts), min(drifts), 0.0))

    # Envelope vs ray front at the first output time.
    if grid is not None and taus:
        t1 = taus[0]
        try:
            env = huygens_step(data, front, t1, grid, sampling=sampling, mode=mode, dt=dt)
            d = polyline_hausdorff(env.points, slices[t1])
            checks.append(
                _check("envelope-vs-rays", d <= 2.0 * grid.max_spacing, d, 2.0 * grid.max_spacing)
            )
        except Exception as exc:
            checks.append(_check("envelope-vs-rays", False, None, None, note=repr(exc)))

    # Semigroup on the slice: direct tau2 vs tau1 then (tau2 - tau1).
    if mode == "constant" and len(taus) >= 2 and isinstance(front, (PointFront, CurveFront)):
        t1, t2 = taus[0], taus[1]
        plane_axis = grid.axis_index
        chain1 = _advance_slice(
            data, _slice_chain_from_front(front, slice_n), front, t1, plane_axis, slice_n
        )
        chain2 = _advance_slice(data, chain1, front, t2 - t1, plane_axis, slice_n)
        direct = slices[t2]
        d = polyline_hausdorff(chain2.closed_polyline(), direct)
        thr = max(2.0 * grid.max_spacing, 1e-3) if grid is not None else 1e-3
        checks.append(_check("semigroup", d <= thr, d, thr))

    # Strategic path straightness for straight-ray data.
    for res in strategies:
        if mode == "constant":
            pts = res.ray.points
            chord = pts[-1] - pts[0]
            t = np.linspace(0.0, 1.0, pts.shape[0])
            dev = np.linalg.norm(pts - (pts[0] + t[:, None] * chord), axis=1).max()
            checks.append(_check("strategic-path-straight", dev <= 1e-9, dev, 1e-9))

    # Unit-speed conservation along traced rays.
    if mode != "constant":
        from .geodesics import f_speed_drift, trace_wave_rays
        from .propagation import _front_fan

        sources, vels, _, _ = _front_fan(data, front, _thin(sampling))
        pick = np.unique(np.linspace(0, sources.shape[0] - 1, 8).astype(int))
        bundle = trace_wave_rays(
            data, mode, sources[pick], vels[pick], min(1.0, sc.horizon), dt=dt,
            skip_mode_check=True,
        )
        drift = max(f_speed_drift(data, bundle.ray(i)) for i in range(len(pick)))
        checks.append(_check("f-speed-drift", drift <= 1e-5, drift, 1e-5))

    return checks


def _thin(sampling: FrontSampling) -> FrontSampling:
    """A sparse copy of the sampling config for cheap diagnostic checks."""
    return replace(
        sampling,
        curve=min(sampling.curve, 64),
        surface=(min(sampling.surface[0], 16), min(sampling.surface[1], 8)),
        point_polar=min(sampling.point_polar, 17),
        point_azimuth=min(sampling.point_azimuth, 32),
        circle=min(sampling.circle, 16),
    )


# ---------------------------------------------------------------------------
# Output writing


def write_outputs(report: RunReport, out_dir) -> dict:
    """Write fronts CSV, report JSON and slice SVG into `out_dir`.

    Returns {kind: path}.  File names come from the scenario's [output]
    table, with defaults fronts.csv / report.json / fronts.svg.
    """
    import os

    from .errors import IoError
    from .render import render_slice

    os.makedirs(out_dir, exist_ok=True)
    cfg = report.scenario.output
    written = {}
    try:
        csv_path = os.path.join(out_dir, cfg.get("fronts_csv", "fronts.csv"))
        with open(csv_path, "w", encoding="utf-8") as fh:
            fh.write(wavefronts_to_csv(report.fronts))
        written["fronts_csv"] = csv_path

        json_path = os.path.join(out_dir, cfg.get("report_json", "report.json"))
        with open(json_path, "w", encoding="utf-8") as fh:
            json.dump(report.to_json_dict(), fh, sort_keys=True, indent=1)
            fh.write("\n")
        written["report_json"] = json_path
    except OSError as exc:
        raise IoError(f"could not write outputs under {out_dir}: {exc}") from exc

    if report.grid is not None and report.slices:
        svg_path = os.path.join(out_dir, cfg.get("slice_svg", "fronts.svg"))
        plane = (report.grid.axis, report.grid.value)
        try:
            render_slice(report, plane, svg_path)
            written["slice_svg"] = svg_path
        except EmptyIntersection:
            pass
    return written
