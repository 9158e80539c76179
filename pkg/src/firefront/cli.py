"""Command-line interface: run scenarios, check invariants, render slices."""

from __future__ import annotations

import argparse
import json
import sys

from .errors import FireFrontError


def _add_common(p):
    p.add_argument("scenario", help="path to a scenario TOML file")
    p.add_argument("--out", default=None, help="output directory (default: ./out/<name>)")
    p.add_argument("--grid-res", type=int, default=None, help="override slice grid resolution")
    p.add_argument("--fan", type=int, default=None, help="approximate point-fan size override")
    p.add_argument("--dt", type=float, default=None, help="integrator step override")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="firefront",
        description="Wind-driven fire front propagation: scenarios, invariant checks, slice plots.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    run_p = sub.add_parser("run", help="run a scenario and write CSV/JSON/SVG outputs")
    _add_common(run_p)
    run_p.add_argument("--no-checks", action="store_true", help="skip the invariant suite")

    check_p = sub.add_parser("check", help="run the invariant suite on a scenario")
    _add_common(check_p)

    render_p = sub.add_parser("render", help="render a report JSON to an SVG slice plot")
    render_p.add_argument("report", help="path to a report.json produced by `run`")
    render_p.add_argument("--plane", default=None, help="slice plane, e.g. z=0 (default: report plane)")
    render_p.add_argument("--out", default="slice.svg", help="output SVG path")
    return parser


def _cmd_run(args) -> int:
    import os

    from .scenario import load_scenario, run_scenario, write_outputs

    sc = load_scenario(args.scenario)
    report = run_scenario(
        sc,
        grid_resolution=args.grid_res,
        fan=args.fan,
        dt=args.dt,
        include_checks=not args.no_checks,
    )
    out_dir = args.out or os.path.join("out", sc.name)
    written = write_outputs(report, out_dir)
    for kind, path in written.items():
        print(f"{kind}: {path}")
    for c in report.invariants:
        _print_check(c)
    print(f"wall clock: {report.wall_clock['total_s']:.2f} s")
    return 0 if report.all_checks_passed else 1


def _print_check(c) -> None:
    status = "PASS" if c["passed"] else "FAIL"
    detail = ""
    if c["value"] is not None and c["threshold"] is not None:
        detail = f" (value {c['value']:.3e}, threshold {c['threshold']:.3e})"
    note = f" [{c['note']}]" if c.get("note") else ""
    print(f"{status} {c['name']}{detail}{note}")


def _cmd_check(args) -> int:
    from .scenario import load_scenario, run_scenario

    sc = load_scenario(args.scenario)
    report = run_scenario(
        sc, grid_resolution=args.grid_res, fan=args.fan, dt=args.dt, include_checks=True
    )
    for c in report.invariants:
        _print_check(c)
    ok = report.all_checks_passed
    print("all checks passed" if ok else "some checks FAILED")
    return 0 if ok else 1


def _cmd_render(args) -> int:
    from .render import render_slice

    with open(args.report, encoding="utf-8") as fh:
        doc = json.load(fh)
    plane = args.plane
    if plane is None:
        plane_doc = doc.get("plane")
        if plane_doc is None:
            print("report has no plane; pass --plane", file=sys.stderr)
            return 2
        plane = (plane_doc["axis"], plane_doc["value"])
    path = render_slice(doc, plane, args.out)
    print(f"slice_svg: {path}")
    return 0


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "run":
            return _cmd_run(args)
        if args.command == "check":
            return _cmd_check(args)
        if args.command == "render":
            return _cmd_render(args)
    except FireFrontError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2
    return 2


if __name__ == "__main__":
    sys.exit(main())
