"""Command line front end.

Exit codes: 0 when every asserted property holds, 1 when a property fails,
2 for usage and configuration errors.
"""
from __future__ import annotations

import argparse
import sys

from . import __version__
from .families import FAMILY_TAGS, FamilySpec, build_family, deform_null, mesh_table, scalar_field
from .formats import (
    dumps, family_spec_from_json, immersion_from_json, mesh_csv, mesh_json, metric_from_json, write_text,
)
from .immersion import classify
from .lorentz import DomainError, SignatureError
from .space_forms import BUILTIN_CHARTS, ConfigurationError
from .suites import SUITES, audit_lattice
from .twistor import audit_chart

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


def _positive(kind):
    def parse(text):
        val = kind(text)
        if val <= 0:
            raise argparse.ArgumentTypeError("must be positive")
        return val
    return parse


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--space", choices=sorted(FAMILY_TAGS), help="space form: r41, s41 or h41")
    p.add_argument("--grid", type=int, default=64, help="samples per axis (at least 4)")
    p.add_argument("--fd-step", type=float, default=1e-3, help="finite-difference step in (1e-8, 1e-1)")
    p.add_argument("--tol", type=_positive(float), default=1e-5, help="residual tolerance")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default=None, help="output file (stdout when omitted)")


def _add_family(p: argparse.ArgumentParser) -> None:
    p.add_argument("--family", help="family tag, e.g. i_lambda, j_lambda, i_c_lambda, j_c_lambda")
    p.add_argument("--lambda", dest="lam", default="zero", help="built-in scalar field name")
    p.add_argument("--theta", type=float, default=None)
    p.add_argument("--c", type=float, default=None)
    p.add_argument("--spec", help="family spec JSON file (overrides the family flags)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="lsl", description="Spacelike surfaces in Lorentzian space forms.")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("classify", help="classify a family member or a lattice immersion")
    _add_common(p)
    _add_family(p)
    p.add_argument("--immersion", help="immersion lattice JSON file instead of a family")

    p = sub.add_parser("verify", help="run a verification suite")
    p.add_argument("suite", help="one of: " + ", ".join(SUITES))
    _add_common(p)
    p.add_argument("--lambdaG", dest="lambda_g", type=float, default=None, help="metric parameter of the tension check")

    p = sub.add_parser("deform", help="deform a totally umbilic family member along null normals")
    _add_common(p)
    _add_family(p)
    p.add_argument("--format", choices=("csv", "json"), default=None, help="mesh format (default from --out suffix)")

    p = sub.add_parser("audit", help="curvature integrability audit of a metric chart")
    p.add_argument("--chart", default="conformal_x3sq", help="one of: " + ", ".join(BUILTIN_CHARTS))
    p.add_argument("--metric", help="metric lattice JSON file instead of a built-in chart")
    p.add_argument("--points", type=int, default=5)
    p.add_argument("--frames", type=int, default=50)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default=None)
    return parser


def _check_grid(args) -> None:
    if args.grid < 4:
        raise UsageError("--grid must be at least 4")
    if not (1e-8 < args.fd_step < 1e-1):
        raise UsageError("--fd-step must lie in (1e-8, 1e-1)")


def _family_spec(args) -> FamilySpec:
    if args.spec:
        return family_spec_from_json(args.spec)
    if not args.space or not args.family:
        raise UsageError("--space and --family are required (or --spec)")
    return FamilySpec(args.space, args.family, scalar_field(args.lam), args.theta, args.c)


def cmd_classify(args) -> int:
    _check_grid(args)
    if args.immersion:
        f = immersion_from_json(args.immersion)
        meta = {"source": args.immersion}
    else:
        spec = _family_spec(args)
        f = build_family(spec, args.grid, args.fd_step)
        meta = {"family": spec.to_json()}
    rep = classify(f, args.tol)
    out = rep.to_dict()
    out["grid"] = {"resolution": args.grid, "fd_step": args.fd_step, **meta}
    write_text(args.out, dumps(out))
    return EXIT_OK


def cmd_verify(args) -> int:
    if args.suite not in SUITES:
        raise UsageError(f"unknown suite {args.suite!r}; choose from {', '.join(SUITES)}")
    _check_grid(args)
    res = SUITES[args.suite](space=args.space, resolution=args.grid, fd_step=args.fd_step, tol=args.tol,
                             seed=args.seed, lambda_g=args.lambda_g)
    out = res.to_dict()
    out["config"] = {"space": args.space, "grid": args.grid, "fd_step": args.fd_step, "tol": args.tol,
                     "seed": args.seed, "lambdaG": args.lambda_g}
    write_text(args.out, dumps(out))
    return EXIT_OK if res.passed else EXIT_FAIL


def cmd_deform(args) -> int:
    _check_grid(args)
    spec = _family_spec(args)
    zero = FamilySpec(spec.space, spec.tag, scalar_field("zero"), spec.theta, spec.c)
    base = build_family(zero, args.grid, args.fd_step)
    g = deform_null(base, spec.lam, spec.model, tol=args.tol)
    columns, rows = mesh_table(g)
    fmt = args.format or ("json" if (args.out or "").endswith(".json") else "csv")
    meta = {"family": spec.to_json(), "grid": args.grid, "fd_step": args.fd_step, "tol": args.tol}
    write_text(args.out, mesh_csv(columns, rows) if fmt == "csv" else mesh_json(columns, rows, meta))
    lm = [r[-1] for r in rows]
    ok = all(v is not None and v < args.tol for v in lm)
    if not ok:
        print(f"positive semi-umbilicity fails: sup|L-| = {max(v for v in lm if v is not None):.3e}", file=sys.stderr)
    return EXIT_OK if ok else EXIT_FAIL


def cmd_audit(args) -> int:
    if args.metric:
        out = audit_lattice(metric_from_json(args.metric), args.frames, args.seed)
        out["chart"] = args.metric
    else:
        if args.chart not in BUILTIN_CHARTS:
            raise UsageError(f"unknown chart {args.chart!r}; choose from {', '.join(BUILTIN_CHARTS)}")
        out = audit_chart(BUILTIN_CHARTS[args.chart](), args.points, args.frames, args.seed)
    write_text(args.out, dumps(out))
    return EXIT_OK


COMMANDS = {"classify": cmd_classify, "verify": cmd_verify, "deform": cmd_deform, "audit": cmd_audit}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code not in (0, None) else EXIT_OK
    try:
        return COMMANDS[args.command](args)
    except (UsageError, ConfigurationError, DomainError, SignatureError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
