"""Command line interface.

Exit codes: 0 certified pass, 1 certified failure or refutation,
2 inconclusive or undecided, 3 input error.
"""
from __future__ import annotations

import argparse
import sys
import time
from pathlib import Path

from . import geometry
from .errors import PolyDendriteError, RouteMismatch
from .io import (InputError, VerificationReport, cyclic_json, dendrite_json, dumps,
                 load_json, load_spec, load_system, matching_json, system_to_json,
                 validation_json)

EXIT_PASS, EXIT_FAIL, EXIT_UNDECIDED, EXIT_INPUT = 0, 1, 2, 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _common(p):
    p.add_argument("--depth", type=int, default=4, help="certification depth (default 4)")
    p.add_argument("--tol-geom", type=float, default=geometry.TOL_GEOM)
    p.add_argument("--tol-margin", type=float, default=geometry.TOL_MARGIN)
    p.add_argument("--json", metavar="OUT", help="write the JSON report to OUT ('-' for stdout)")
    p.add_argument("--svg", metavar="OUT", help="write an SVG picture to OUT")
    p.add_argument("--seed", type=int, default=0, help="seed for sampled checks")
    p.add_argument("--no-timing", action="store_true", help="omit the timing field")


def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="polydendrite", description=__doc__,
                 formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = ap.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("validate", help="check D1-D4 and classify")
    p.add_argument("system")
    _common(p)

    p = sub.add_parser("constants", help="geometric and derived constants")
    p.add_argument("system")
    p.add_argument("--delta", type=float, help="normalized delta (default delta_max / 2)")
    p.add_argument("--c-lambda", choices=["printed", "q_min"], default="printed")
    _common(p)

    p = sub.add_parser("cyclic", help="cyclic vertices and their parameters")
    p.add_argument("system")
    p.add_argument("--max-order", type=int, default=4)
    _common(p)

    p = sub.add_parser("matching", help="parameter matching condition")
    p.add_argument("system")
    p.add_argument("--tol-lambda", type=float, default=1e-6)
    _common(p)

    p = sub.add_parser("dendrite", help="finite-depth dendrite certification")
    p.add_argument("system")
    p.add_argument("--deform", metavar="SPEC", help="certify the deformation SPEC of the system")
    _common(p)

    p = sub.add_parser("deform", help="build and check a deformation")
    p.add_argument("system")
    p.add_argument("spec")
    p.add_argument("--out", help="write the deformed system file")
    _common(p)

    p = sub.add_parser("delta-max", help="the six bounds on delta")
    p.add_argument("system")
    p.add_argument("--c-lambda", choices=["printed", "q_min"], default="printed")
    _common(p)

    p = sub.add_parser("hatf", help="evaluate the conjugating map on a route")
    p.add_argument("system")
    p.add_argument("spec")
    p.add_argument("--word", default="", help="comma separated 0-based map indices")
    p.add_argument("--vertex", type=int, default=0)
    _common(p)

    p = sub.add_parser("render", help="SVG picture of the system")
    p.add_argument("system")
    p.add_argument("--deform", metavar="SPEC")
    _common(p)

    p = sub.add_parser("sweep", help="run a grid of deformations")
    p.add_argument("grid", help="grid JSON file")
    p.add_argument("--base", help="base system for grids of spec files")
    p.add_argument("--csv", metavar="OUT", help="CSV output ('-' for stdout, the default)")
    p.add_argument("--jobs", type=int, default=1)
    _common(p)
    return ap


# ---------------------------------------------------------------------------
# Subcommands: each returns (exit code, report body)
# ---------------------------------------------------------------------------

def _validate(args, system):
    from .system import INVALID, validate
    rep = validate(system, args.tol_geom)
    code = EXIT_FAIL if rep.classification == INVALID else EXIT_PASS
    return code, {"validation": validation_json(rep)}


def _constants(args, system):
    from .deformation import delta_max, derived_constants, geometric_constants
    geo = geometric_constants(system, tol=args.tol_geom)
    dm = delta_max(system, args.c_lambda)
    delta = args.delta if args.delta is not None else dm.delta_max / 2
    der = derived_constants(system, delta, args.c_lambda)
    return EXIT_PASS, {"scale": geo.scale, "geometric": geo.to_json(), "derived": der.to_json()}


def _cyclic(args, system):
    from .cyclic import find_cyclic_vertices, order_one_refinement
    cvs = find_cyclic_vertices(system, args.max_order, args.tol_geom)
    body = {"max_order": args.max_order, "cyclic": cyclic_json(system, cvs)}
    body["order_one_refinement"] = order_one_refinement(system, args.max_order)
    return EXIT_PASS, body


def _matching(args, system):
    from .cyclic import check_parameter_matching
    rep = check_parameter_matching(system, args.tol_lambda, tol=args.tol_geom)
    return (EXIT_PASS if rep.matched else EXIT_FAIL), {"matching": matching_json(rep)}


def _dendrite_code(kind):
    return {"CertifiedDendrite": EXIT_PASS, "RefutedTree": EXIT_FAIL}.get(kind, EXIT_UNDECIDED)


def _dendrite(args, system):
    from .attractor import dendrite_check
    if args.deform:
        from .deformation import build_deformed_system, certify_dendrite
        spec = load_spec(args.deform)
        deformed = build_deformed_system(system, spec, args.tol_geom)
        v = certify_dendrite(system, spec, deformed, args.depth)
    else:
        v = dendrite_check(system, args.depth, tol_geom=args.tol_geom, tol_margin=args.tol_margin)
    return _dendrite_code(v.kind), {"dendrite": dendrite_json(v)}


def _deform(args, system):
    from .cyclic import check_parameter_matching
    from .deformation import (build_deformed_system, delta_max, invariant_neighborhood_check,
                              normalized_delta, perturbation_bounds_check, validate_deformation)
    spec = load_spec(args.spec)
    deformed = build_deformed_system(system, spec, args.tol_geom)
    rep = validate_deformation(system, spec, deformed, tol=args.tol_geom)
    delta = normalized_delta(system, spec)
    dm = delta_max(system)
    body = {"delta": delta, "delta_max": dm.delta_max, "within_delta_max": delta < dm.delta_max,
            "deformation": {"a": rep.a, "b": rep.b, "c": rep.c, "bibj": rep.bibj,
                            "details": rep.details}}
    ok = rep.passed
    if delta < dm.delta_max:
        bounds = perturbation_bounds_check(system, deformed, delta, strict=False)
        body["perturbation"] = [{"map": b.k, "q": b.q, "q_new": b.q_new, "d_alpha": b.d_alpha,
                                 "passed": b.passed} for b in bounds]
        nb = invariant_neighborhood_check(system, deformed, delta)
        body["neighborhood"] = {"passed": nb.passed, "delta1": nb.delta1, "margins": nb.margins}
        ok = ok and all(b.passed for b in bounds) and nb.passed
    m = check_parameter_matching(deformed)
    body["matching"] = matching_json(m)
    body["deformed"] = system_to_json(deformed)
    if args.out:
        Path(args.out).write_text(dumps(system_to_json(deformed)))
    return (EXIT_PASS if ok else EXIT_FAIL), body


def _delta_max(args, system):
    from .deformation import delta_max
    rep = delta_max(system, args.c_lambda)
    return EXIT_PASS, {"delta_max": rep.to_json()}


def _hatf(args, system):
    from .deformation import build_deformed_system, hatf_eval
    spec = load_spec(args.spec)
    deformed = build_deformed_system(system, spec, args.tol_geom)
    word = tuple(int(c) for c in args.word.split(",") if c.strip())
    if any(not 0 <= c < system.m for c in word) or not 0 <= args.vertex < system.base.n:
        raise InputError("route out of range")
    try:
        z = hatf_eval(system, deformed, (word, args.vertex), args.tol_geom)
    except RouteMismatch as exc:
        return EXIT_FAIL, {"route": list(word), "vertex": args.vertex, "error": str(exc)}
    return EXIT_PASS, {"route": list(word), "vertex": args.vertex, "image": z}


def _render(args, system):
    from .render import RenderOptions, render
    overlay = None
    if args.deform:
        from .deformation import build_deformed_system
        overlay = build_deformed_system(system, load_spec(args.deform), args.tol_geom)
    svg = render(system, RenderOptions(depth=args.depth, overlay=overlay))
    out = args.svg or "-"
    if out == "-":
        sys.stdout.write(svg)
    else:
        Path(out).write_text(svg)
    return EXIT_PASS, {"svg": out, "pieces": system.m ** args.depth}


def _sweep(args):
    from .sweep import jobs_from_grid, rows_to_csv, run_sweep, summarize
    grid = load_json(args.grid)
    jobs = jobs_from_grid(grid, args.seed, args.base, Path(args.grid).parent)
    rows = run_sweep(jobs, args.depth, args.jobs)
    text = rows_to_csv(rows)
    if args.csv and args.csv != "-":
        Path(args.csv).write_text(text, newline="")
    else:
        sys.stdout.write(text)
    summary = summarize(rows)
    code = EXIT_FAIL if summary["errored"] else EXIT_PASS
    return code, {"summary": summary}


COMMANDS = {"validate": _validate, "constants": _constants, "cyclic": _cyclic,
            "matching": _matching, "dendrite": _dendrite, "deform": _deform,
            "delta-max": _delta_max, "hatf": _hatf, "render": _render}


def main(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else list(argv)
    try:
        args = build_parser().parse_args(argv)
    except UsageError as exc:
        print(f"polydendrite: usage error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    t0 = time.perf_counter()
    try:
        if args.command == "sweep":
            code, body = _sweep(args)
            source = args.grid
        else:
            system = load_system(args.system)
            code, body = COMMANDS[args.command](args, system)
            source = args.system
            if args.svg and args.command != "render":
                from .render import RenderOptions, render
                Path(args.svg).write_text(render(system, RenderOptions(depth=min(args.depth, 3))))
    except (InputError, OSError, ValueError, KeyError, TypeError) as exc:
        print(f"polydendrite: input error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except PolyDendriteError as exc:
        from .errors import GeometryError, InvalidSystem
        if isinstance(exc, (GeometryError, InvalidSystem)):
            print(f"polydendrite: input error: {exc}", file=sys.stderr)
            return EXIT_INPUT
        print(f"polydendrite: {type(exc).__name__}: {exc}", file=sys.stderr)
        code, body = EXIT_FAIL, {"error": {"type": type(exc).__name__, "message": str(exc)}}
        source = getattr(args, "system", getattr(args, "grid", ""))
    timing = None if args.no_timing else {"seconds": time.perf_counter() - t0}
    report = VerificationReport(args.command, str(source), dict(body, exit_code=code), timing)
    text = dumps(report)
    if args.json == "-":
        sys.stdout.write(text)
    elif args.json:
        Path(args.json).write_text(text)
    elif args.command not in ("render", "sweep"):
        summary = {k: v for k, v in report.to_json().items() if k != "timing"}
        sys.stdout.write(dumps(summary))
    return code


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
