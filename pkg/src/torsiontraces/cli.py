"""Command-line front end.

Exit codes: 0 success, 1 verify failure, 2 bad spec or parameters,
3 resource limit, 4 empty shell schedule, 10 trace matrix NOT_SHOWN.
"""
from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from . import __version__, cache
from .errors import (
    DuplicateOrders,
    InfiniteOrder,
    InsufficientData,
    InvalidSpec,
    MalformedSpec,
    MalformedWord,
    MixedSpecs,
    ProfileMismatch,
    ResourceLimit,
    ScheduleInvalid,
    UnsupportedClass,
)
from .group import BUNDLED_SPECS, GroupSpec, parse_group_spec
from .growth import (
    DEFAULT_CAP,
    classify_growth,
    conjugacy_shell_counts,
    find_shell_sequence,
    profile_from_formula,
    profile_to_csv,
    read_profile,
    synthetic_profile,
)
from .report import divergence_doc, growth_doc, matrix_doc, profile_doc, render, schedule_doc, separability_doc
from .traces import MatrixVerdict, counterexample_partial_sums, separability_report, trace_matrix
from .verify import SCALES, run_suite, transcript

EXIT_OK = 0
EXIT_VERIFY_FAILED = 1
EXIT_BAD_INPUT = 2
EXIT_RESOURCE = 3
EXIT_EMPTY_SCHEDULE = 4
EXIT_NOT_SHOWN = 10

DEFAULT_MAX_RADIUS = 5000

log = logging.getLogger("torsiontraces")


class UsageError(Exception):
    pass


def load_spec(ref: str) -> GroupSpec:
    """A spec file path, or the name of a bundled group."""
    path = Path(ref)
    if path.is_file():
        return parse_group_spec(path.read_text())
    if ref in BUNDLED_SPECS:
        return BUNDLED_SPECS[ref]
    raise UsageError(f"--spec: {ref!r} is neither a file nor a bundled group ({', '.join(BUNDLED_SPECS)})")


def _emit(args, text: str) -> None:
    if args.output:
        out = Path(args.output)
        tmp = out.with_suffix(out.suffix + ".tmp")
        tmp.write_text(text)
        tmp.replace(out)
    else:
        sys.stdout.write(text)


def _check_radius(args) -> None:
    if args.radius < 0:
        raise UsageError("--radius must be >= 0")
    if args.radius > args.max_radius:
        raise ResourceLimit(f"--radius {args.radius} exceeds the cap --max-radius {args.max_radius}")


def _profile(args, spec: GroupSpec, rep, method: str):
    kind = "closed_form" if method == "closed-form" else "enumerated"
    cache_dir = Path(args.cache_dir) if args.cache_dir else cache.default_cache_dir()
    if not args.no_cache:
        hit = cache.lookup(cache_dir, rep, args.radius, kind)
        if hit is not None:
            log.info("cache hit for %s radius %d", rep, args.radius)
            return hit
    if kind == "closed_form":
        profile = profile_from_formula(spec, rep, args.radius)
    else:
        profile = conjugacy_shell_counts(rep, args.radius, workers=args.workers, cap=args.max_elements)
    if not args.no_cache:
        cache.store(cache_dir, profile)
    return profile


def cmd_profile(args) -> int:
    spec = load_spec(args.spec)
    rep = spec.parse_element(args.rep)
    _check_radius(args)
    profile = _profile(args, spec, rep, args.method)
    if args.format == "csv":
        _emit(args, profile_to_csv(profile))
    else:
        _emit(args, render("profile", profile_doc(profile), not args.no_timestamp))
    return EXIT_OK


def cmd_classify(args) -> int:
    spec = load_spec(args.spec)
    rep = spec.parse_element(args.rep)
    _check_radius(args)
    method = args.method
    if method == "auto":
        try:
            profile = _profile(args, spec, rep, "closed-form")
        except UnsupportedClass:
            profile = _profile(args, spec, rep, "enumerate")
    else:
        profile = _profile(args, spec, rep, method)
    body = {"profile": profile_doc(profile), "growth": growth_doc(classify_growth(profile))}
    _emit(args, render("classification", body, not args.no_timestamp))
    return EXIT_OK


def cmd_trace_matrix(args) -> int:
    spec = load_spec(args.spec)
    witnesses = [spec.parse_element(w) for w in args.witness]
    m = trace_matrix(witnesses, spec=spec)
    _emit(args, render("trace_matrix", matrix_doc(m), not args.no_timestamp))
    return EXIT_OK if m.verdict is MatrixVerdict.SEPARABLE else EXIT_NOT_SHOWN


def cmd_counterexample(args) -> int:
    if not args.c > 0:
        raise UsageError(f"--c must be > 0, got {args.c}")
    if args.s < 0:
        raise UsageError(f"--s must be >= 0, got {args.s}")
    if args.terms < 1:
        raise UsageError("--terms must be >= 1")
    if args.synthetic:
        try:
            profile = synthetic_profile(args.synthetic, args.max_length)
        except ValueError as exc:
            raise UsageError(str(exc)) from None
    elif args.profile:
        spec = load_spec(args.spec) if args.spec else None
        profile = read_profile(Path(args.profile), spec)
    elif args.spec and args.rep:
        spec = load_spec(args.spec)
        _check_radius(args)
        profile = _profile(args, spec, spec.parse_element(args.rep), "closed-form")
    else:
        raise UsageError("give --synthetic, --profile, or --spec with --rep")
    schedule = find_shell_sequence(profile, args.c, args.terms)
    if not len(schedule):
        body = {"provenance": str(profile.provenance), "radius": profile.radius,
                "schedule": schedule_doc(schedule),
                "message": "empty shell schedule: no obstruction evidence at this radius"}
        _emit(args, render("counterexample", body, not args.no_timestamp))
        return EXIT_EMPTY_SCHEDULE
    report = counterexample_partial_sums(profile, schedule, args.s, args.terms, args.threshold)
    _emit(args, render("counterexample", divergence_doc(report), not args.no_timestamp))
    return EXIT_OK


def cmd_report(args) -> int:
    spec = load_spec(args.spec)
    _check_radius(args)
    if not args.c > 0:
        raise UsageError(f"--c must be > 0, got {args.c}")
    witnesses = [spec.parse_element(w) for w in args.witness]
    r = separability_report(spec, witnesses, args.radius, args.s, args.c, args.terms, args.threshold)
    _emit(args, render("separability", separability_doc(r), not args.no_timestamp))
    return EXIT_OK


def cmd_verify(args) -> int:
    outcomes = run_suite(args.seed, args.scale, args.workers, args.inject_fault)
    text = transcript(outcomes, args.seed, args.scale)
    _emit(args, text)
    failed = [o for o in outcomes if not o.ok]
    if failed:
        print(f"invariant failed: {failed[0].name}", file=sys.stderr)
        return EXIT_VERIFY_FAILED
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--output", "-o", help="write here instead of stdout")
    common.add_argument("--no-timestamp", action="store_true", help="omit generated_at from reports")
    common.add_argument("--workers", type=int, default=1)
    common.add_argument("--cache-dir", help=f"profile cache (default ${cache.CACHE_ENV} or ~/.cache)")
    common.add_argument("--no-cache", action="store_true")
    common.add_argument("--max-radius", type=int, default=DEFAULT_MAX_RADIUS)
    common.add_argument("--max-elements", type=int, default=DEFAULT_CAP,
                        help="cap on the conjugator ball size for enumeration")
    common.add_argument("-v", "--verbose", action="store_true")

    p = argparse.ArgumentParser(prog="torsiontraces", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("profile", parents=[common], help="conjugacy shell counts n_l")
    sp.add_argument("--spec", required=True)
    sp.add_argument("--rep", required=True, help='class representative, e.g. "y:1 x:1 y:-1"')
    sp.add_argument("--radius", type=int, required=True)
    sp.add_argument("--method", choices=["enumerate", "closed-form"], default="enumerate")
    sp.add_argument("--format", choices=["csv", "report"], default="csv")
    sp.set_defaults(func=cmd_profile)

    sp = sub.add_parser("classify", parents=[common], help="growth verdict for one class")
    sp.add_argument("--spec", required=True)
    sp.add_argument("--rep", required=True)
    sp.add_argument("--radius", type=int, default=60)
    sp.add_argument("--method", choices=["auto", "enumerate", "closed-form"], default="auto")
    sp.set_defaults(func=cmd_classify)

    sp = sub.add_parser("trace-matrix", parents=[common], help="exact trace matrix of torsion idempotents")
    sp.add_argument("--spec", required=True)
    sp.add_argument("--witness", action="append", default=[], help="torsion element (repeatable)")
    sp.set_defaults(func=cmd_trace_matrix)

    sp = sub.add_parser("counterexample", parents=[common], help="divergence partial sums")
    sp.add_argument("--synthetic", help='synthetic profile: "2^l", "l^3" or "5"')
    sp.add_argument("--max-length", type=int, default=256, help="length range of a synthetic profile")
    sp.add_argument("--profile", help="profile CSV")
    sp.add_argument("--spec")
    sp.add_argument("--rep")
    sp.add_argument("--radius", type=int, default=300)
    sp.add_argument("--c", type=float, default=4.0, help="schedule exponent base")
    sp.add_argument("--s", type=float, default=3.0, help="Sobolev exponent")
    sp.add_argument("--terms", type=int, default=5)
    sp.add_argument("--threshold", type=float, default=1e6)
    sp.set_defaults(func=cmd_counterexample)

    sp = sub.add_parser("report", parents=[common], help="full separability verdict")
    sp.add_argument("--spec", required=True)
    sp.add_argument("--witness", action="append", default=[])
    sp.add_argument("--radius", type=int, default=300)
    sp.add_argument("--c", type=float, default=4.0)
    sp.add_argument("--s", type=float, default=3.0)
    sp.add_argument("--terms", type=int, default=8)
    sp.add_argument("--threshold", type=float, default=1e6)
    sp.set_defaults(func=cmd_report)

    sp = sub.add_parser("verify", parents=[common], help="run the invariant suite")
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--scale", choices=sorted(SCALES), default="default")
    sp.add_argument("--inject-fault", choices=["idempotency"], help="test hook")
    sp.set_defaults(func=cmd_verify)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except ResourceLimit as exc:
        print(f"resource limit: {exc}", file=sys.stderr)
        return EXIT_RESOURCE
    except DuplicateOrders as exc:
        print(f"invalid witnesses: {exc}", file=sys.stderr)
        return EXIT_BAD_INPUT
    except (MalformedSpec, InvalidSpec, MalformedWord, MixedSpecs, InfiniteOrder, UnsupportedClass,
            InsufficientData, ProfileMismatch, ScheduleInvalid, UsageError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_BAD_INPUT


if __name__ == "__main__":
    sys.exit(main())
