"""Command-line scenario runner.

Exit codes: 0 every mathematical check passed, 1 a check failed,
2 configuration error.
"""

from __future__ import annotations

import argparse
import json
import sys

from .scenarios import (ConfigError, emit_report, run_add_divisor,
                        run_hirzebruch, run_plane_curve, run_projection_study,
                        run_quadric_nodal)


def _common(sub):
    sub.add_argument("--prime", default="auto:31",
                     help="explicit prime or auto:<bits> (default auto:31)")
    sub.add_argument("--seed", type=int, default=0)
    sub.add_argument("--out", default=None, help="write the report to a file")
    sub.add_argument("--format", dest="fmt", default="text",
                     choices=["text", "csv", "structured"])
    sub.add_argument("--threads", type=int, default=1)
    sub.add_argument("--force", action="store_true",
                     help="ignore the matrix-size guardrail")
    sub.add_argument("--config", default=None,
                     help="JSON file with scenario parameters (flags override)")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="syzlab",
        description="Exact Koszul cohomology scenarios for curves on "
                    "rational surfaces")
    subs = ap.add_subparsers(dest="command", required=True)

    plane = subs.add_parser("plane", help="smooth plane curve of degree d")
    plane.add_argument("--degree", type=int, default=4)
    plane.add_argument("--problem-5-4", default=None,
                       help="comma-separated gamma values for the "
                            "colinear-points sweep (exploratory)")
    _common(plane)

    hirz = subs.add_parser("hirzebruch", help="curve kC0+mf on Sigma_e")
    hirz.add_argument("--e", type=int, default=1)
    hirz.add_argument("--k", type=int, default=3)
    hirz.add_argument("--m", type=int, default=4)
    hirz.add_argument("--mode", choices=["gonality", "canonical"],
                      default="gonality")
    _common(hirz)

    quad = subs.add_parser("quadric-nodal",
                           help="nodal curve on P1xP1 with gamma nodes")
    quad.add_argument("--k", type=int, default=3)
    quad.add_argument("--m", type=int, default=3)
    quad.add_argument("--gamma", type=int, default=1)
    _common(quad)

    proj = subs.add_parser("project", help="syzygy projection study")
    proj.add_argument("--degree", type=int, default=4)
    proj.add_argument("--strand", type=int, default=None)
    proj.add_argument("--samples", type=int, default=20,
                      help="points for survival sampling")
    proj.add_argument("--membership-points", type=int, default=5)
    proj.add_argument("--drop-degree", type=int, default=5,
                      help="degree for the generic-drop persistence check "
                           "(0 disables)")
    _common(proj)

    addd = subs.add_parser("add-divisor",
                           help="(M_k) before/after adding fiber divisors")
    addd.add_argument("--e", type=int, default=0)
    addd.add_argument("--k", type=int, default=3)
    addd.add_argument("--m", type=int, default=4)
    addd.add_argument("--fibers", type=int, default=1)
    addd.add_argument("--point", action="store_true",
                      help="request a point divisor (unsupported; see the "
                           "projection study)")
    _common(addd)
    return ap


def _load_config(args):
    if getattr(args, "config", None):
        with open(args.config) as fh:
            doc = json.load(fh)
        for key, val in doc.get("params", {}).items():
            attr = key.replace("-", "_")
            if getattr(args, attr, None) in (None,) or attr not in vars(args):
                setattr(args, attr, val)
        for key in ("prime", "seed", "fmt", "force", "threads"):
            if key in doc:
                setattr(args, key, doc[key])
    return args


def _prime_arg(s):
    try:
        return int(s)
    except (TypeError, ValueError):
        return s


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    args = _load_config(args)
    prime = _prime_arg(args.prime)
    try:
        if args.command == "plane":
            gammas = None
            if args.problem_5_4:
                gammas = [int(g) for g in str(args.problem_5_4).split(",")]
            report = run_plane_curve(args.degree, prime, args.seed,
                                     force=args.force, threads=args.threads,
                                     problem_5_4_gammas=gammas, fmt=args.fmt)
        elif args.command == "hirzebruch":
            report = run_hirzebruch(args.e, args.k, args.m, args.mode, prime,
                                    args.seed, force=args.force,
                                    threads=args.threads, fmt=args.fmt)
        elif args.command == "quadric-nodal":
            report = run_quadric_nodal(args.k, args.m, args.gamma, prime,
                                       args.seed, force=args.force,
                                       threads=args.threads, fmt=args.fmt)
        elif args.command == "project":
            report = run_projection_study(
                args.degree, args.strand, args.samples,
                args.membership_points,
                args.drop_degree or None, prime, args.seed,
                force=args.force, threads=args.threads, fmt=args.fmt)
        elif args.command == "add-divisor":
            kind = "point" if args.point else "fiber"
            report = run_add_divisor(args.e, args.k, args.m, args.fibers,
                                     divisor_kind=kind, prime_policy=prime,
                                     seed=args.seed, force=args.force,
                                     threads=args.threads, fmt=args.fmt)
        else:  # pragma: no cover
            raise ConfigError(f"unknown command {args.command!r}")
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 2
    text = emit_report(report, args.fmt)
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return 0 if report.passed else 1


if __name__ == "__main__":
    raise SystemExit(main())
