"""Command line interface ``cgb``.

Exit codes: 0 pass, 1 check failed (defect above tolerance, law or sweep
flagged), 2 input error, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import json
import sys

from . import catalog
from .errors import NumericalError, SceneError
from .harness import (conformal_law_check, convergence_sweep, format_laws, format_sweep,
                      laws_passed, point_report, verify_gauss_bonnet)
from .jets import JetDomainError
from .scene import format_scene, load_scene

EXIT_OK, EXIT_FAIL, EXIT_INPUT, EXIT_NUMERICAL = 0, 1, 2, 3


def resolve_scene(spec):
    """A scene from ``catalog:<name>`` or a path to a scene file."""
    if spec.startswith("catalog:"):
        return catalog.get(spec.split(":", 1)[1]).scene
    try:
        return load_scene(spec)
    except OSError as exc:
        raise SceneError(f"cannot read scene file {spec!r}: {exc.strerror}") from None


def _orders(text):
    try:
        out = [int(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad order list {text!r}") from None
    if len(out) < 2:
        raise argparse.ArgumentTypeError("a sweep needs at least two orders")
    return out


def _point(text):
    try:
        vals = [float(t) for t in text.split(",")]
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad point {text!r}") from None
    if len(vals) != 4:
        raise argparse.ArgumentTypeError("a point needs four coordinates")
    return vals


def _face(text):
    try:
        axis, side = text.split("=")
        axis = int(axis.strip().lstrip("x")) - 1
        side = side.strip()
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad face {text!r}; use e.g. x1=hi") from None
    if not 0 <= axis < 4 or side not in ("lo", "hi"):
        raise argparse.ArgumentTypeError(f"bad face {text!r}; use e.g. x1=hi")
    return axis, side


def _positive(text):
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError("must be a positive integer")
    return v


def build_parser():
    p = argparse.ArgumentParser(prog="cgb", description="Corner Gauss-Bonnet verification engine")
    sub = p.add_subparsers(dest="command", required=True)

    v = sub.add_parser("verify", help="assemble both Gauss-Bonnet paths for a scene")
    v.add_argument("scene")
    v.add_argument("--quad-order", type=_positive, default=16)
    v.add_argument("--theta-order", type=_positive, default=32)
    v.add_argument("--tol", type=float, default=1e-3)
    v.add_argument("--format", choices=("text", "json"), default="text")
    v.add_argument("--no-error-estimate", action="store_true",
                   help="skip the half-order rerun")
    v.add_argument("--timings", action="store_true", help="include wall-clock timings")
    v.add_argument("--workers", type=_positive, default=1)

    la = sub.add_parser("laws", help="conformal transformation law residuals")
    la.add_argument("scene")
    la.add_argument("--omega", required=True)
    la.add_argument("--seed", type=int, default=0)
    la.add_argument("--samples", type=_positive, default=100)
    la.add_argument("--format", choices=("text", "json"), default="text")

    sw = sub.add_parser("sweep", help="totals and defects over several quadrature orders")
    sw.add_argument("scene")
    sw.add_argument("--orders", type=_orders, required=True)
    sw.add_argument("--theta-order", type=_positive, default=32)
    sw.add_argument("--format", choices=("text", "json"), default="text")

    pt = sub.add_parser("point", help="every pointwise quantity at one point")
    pt.add_argument("scene")
    pt.add_argument("--at", type=_point, required=True)
    pt.add_argument("--face", type=_face)
    pt.add_argument("--corner", action="store_true")
    pt.add_argument("--chart")
    pt.add_argument("--theta-order", type=_positive, default=32)

    sc = sub.add_parser("scene", help="scene utilities")
    scs = sc.add_subparsers(dest="scene_command", required=True)
    d = scs.add_parser("dump", help="write the scene file of a catalog entry")
    d.add_argument("name")
    return p


def _run(args, out):
    if args.command == "verify":
        scene = resolve_scene(args.scene)
        report = verify_gauss_bonnet(scene, args.quad_order, args.theta_order, tol=args.tol,
                                     estimate_error=not args.no_error_estimate,
                                     workers=args.workers, timings=args.timings)
        out.write(report.to_json() + "\n" if args.format == "json" else report.to_text())
        return EXIT_OK if report.passed else EXIT_FAIL
    if args.command == "laws":
        scene = resolve_scene(args.scene)
        laws = conformal_law_check(scene, args.omega, seed=args.seed, samples=args.samples)
        if args.format == "json":
            out.write(json.dumps({"scene": scene.name, "omega": args.omega, "seed": args.seed,
                                  "samples": args.samples, "laws": laws}, indent=2) + "\n")
        else:
            out.write(f"scene {scene.name}, omega {args.omega}, seed {args.seed}, "
                      f"samples {args.samples}\n\n" + format_laws(laws))
        return EXIT_OK if laws_passed(laws) else EXIT_FAIL
    if args.command == "sweep":
        scene = resolve_scene(args.scene)
        sweep = convergence_sweep(scene, args.orders, args.theta_order)
        out.write(json.dumps(sweep, indent=2) + "\n" if args.format == "json"
                  else format_sweep(sweep))
        return EXIT_OK if sweep["monotone"] else EXIT_FAIL
    if args.command == "point":
        if args.face is not None and args.corner:
            raise SceneError("use either --face or --corner, not both")
        scene = resolve_scene(args.scene)
        rep = point_report(scene, args.at, chart=args.chart, face=args.face,
                           corner=args.corner, theta_order=args.theta_order)
        out.write(json.dumps(rep, indent=2) + "\n")
        return EXIT_OK
    if args.command == "scene":
        out.write(format_scene(catalog.get(args.name).scene))
        return EXIT_OK
    raise SceneError(f"unknown command {args.command!r}")


def main(argv=None, out=None):
    out = sys.stdout if out is None else out
    args = build_parser().parse_args(argv)
    try:
        return _run(args, out)
    except NumericalError as exc:
        sys.stderr.write(f"cgb: numerical failure: {exc}\n")
        return EXIT_NUMERICAL
    except (JetDomainError, ZeroDivisionError, FloatingPointError) as exc:
        sys.stderr.write(f"cgb: numerical failure: {exc}\n")
        return EXIT_NUMERICAL
    except SceneError as exc:
        sys.stderr.write(f"cgb: input error: {exc}\n")
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
