"""Command-line front end.

Exit codes: 0 SAT / success, 1 UNSAT, 2 bad input or usage, 3 internal
invariant violation (including oracle disagreement under ``--check``).
"""

from __future__ import annotations

import argparse
import logging
import os
import sys
from contextlib import nullcontext
from pathlib import Path

from . import lp, tolerances
from .arrangement import RegionGeometry, TraversalStats, build_arrangement, region_count_bound, traverse_regions
from .bench import loglog_slope, rows_to_csv, run_bench
from .formats import InputError, dump, functionals_from_json, load_problem, read_json
from .geometry import DegenerateInputError, DimensionError, LpCounter
from .lp import LpError
from .oracle import (
    BRUTE_FORCE_LIMIT,
    DEFAULT_SEED,
    OracleLimitExceeded,
    OracleReport,
    brute_force_regions,
    compare_regions,
    compare_verdicts,
    exhaustive_verify,
    sample_falsify,
)
from .verifier import InternalInvariantError, UnsupportedArchitecture, problem_arrangement, verify

EXIT_SAT, EXIT_UNSAT, EXIT_INPUT, EXIT_INTERNAL = 0, 1, 2, 3

log = logging.getLogger("polyverify")


class UsageError(Exception):
    pass


def _seed(args) -> int:
    if args.seed is not None:
        return args.seed
    env = os.environ.get("POLYVERIFY_SEED")
    if env is None:
        return 0
    try:
        return int(env, 0)
    except ValueError:
        raise UsageError(f"POLYVERIFY_SEED is not an integer: {env!r}")


def _tolerance_overrides(args) -> dict[str, float]:
    known = tolerances.DEFAULT.as_dict()
    out = {}
    for item in args.tol or []:
        name, _, value = item.partition("=")
        if name not in known or not value:
            raise UsageError(f"--tol expects NAME=VALUE with NAME in {sorted(known)}, got {item!r}")
        try:
            out[name] = float(value)
        except ValueError:
            raise UsageError(f"--tol {name}: not a number: {value!r}")
    return out


def _emit(text: str, path) -> None:
    if path:
        Path(path).write_text(text + "\n")
    else:
        print(text)


def _problem(args):
    return load_problem(args.bundle, args.network, args.input, args.output)


def _oracle_check(problem, verdict, seed: int) -> dict:
    a, _ = problem_arrangement(problem, seed)
    report = {}
    if len(a) <= BRUTE_FORCE_LIMIT:
        reference = exhaustive_verify(problem, seed=seed)
        result = compare_verdicts(verdict, reference)
        report["exhaustive_status"] = reference.status
    else:
        result = OracleReport(True, "")
        report["exhaustive_status"] = None
    cex = sample_falsify(problem, trials=2000, seed=DEFAULT_SEED)
    report["falsifier"] = None
    if cex is not None:
        report["falsifier"] = {"witness": cex.point.tolist(), "constraint_index": cex.constraint_index, "margin": cex.margin}
    if cex is not None and verdict.status == "SAT":
        result = OracleReport(False, f"sampling found a violation at {cex.point.tolist()} but verify said SAT")
    report["agreed"] = result.agreed
    report["details"] = result.details
    return report


def cmd_verify(args) -> int:
    seed = _seed(args)
    problem = _problem(args)
    verdict = verify(problem, exhaustive=args.exhaustive, workers=args.threads, seed=seed)
    report = verdict.to_dict()
    report["seed"] = seed
    if args.overrides:
        report["tolerance_overrides"] = args.overrides
    code = EXIT_SAT if verdict.sat else EXIT_UNSAT
    if args.check:
        report["check"] = _oracle_check(problem, verdict, seed)
        if not report["check"]["agreed"]:
            code = EXIT_INTERNAL
    _emit(dump(report), args.out)
    return code


def cmd_check(args) -> int:
    seed = _seed(args)
    problem = _problem(args)
    verdict = verify(problem, workers=args.threads, seed=seed)
    report = {"status": verdict.status, **_oracle_check(problem, verdict, seed), "seed": seed}
    _emit(dump(report), args.out)
    return EXIT_SAT if report["agreed"] else EXIT_INTERNAL


def cmd_enumerate(args) -> int:
    seed = _seed(args)
    dim, functionals = functionals_from_json(read_json(args.arrangement), str(args.arrangement))
    if not functionals:
        raise InputError(f"{args.arrangement}: no functionals")
    a = build_arrangement(functionals, seed=seed)
    visited: list[tuple] = []

    def visit(r, geom: RegionGeometry):
        visited.append((r, geom.witness))

    stats = TraversalStats()
    counter = LpCounter()
    count = traverse_regions(a, visit, workers=args.threads, counter=counter, stats=stats)
    bound = region_count_bound(len(a), dim)
    report = {
        "regions": count,
        "hyperplanes": len(a),
        "bound": bound,
        "level_counts": stats.level_counts,
        "lp_calls": stats.lp_calls,
        "seed": seed,
    }
    if args.overrides:
        report["tolerance_overrides"] = args.overrides
    code = EXIT_SAT
    if count > bound:
        log.error("region count %d exceeds the bound %d", count, bound)
        code = EXIT_INTERNAL
    if args.check:
        result = compare_regions({r for r, _ in visited}, brute_force_regions(a))
        report["check"] = {"agreed": result.agreed, "details": result.details}
        if not result.agreed:
            code = EXIT_INTERNAL
    if args.trace:
        lines = [f"{r.hex()} {' '.join(repr(float(v)) for v in x)}" for r, x in visited]
        if args.trace == "-":
            print("\n".join(lines))
        else:
            Path(args.trace).write_text("\n".join(lines) + "\n")
    if args.figure:
        from .plotting import plot_arrangement

        plot_arrangement(a, visited, args.figure)
    _emit(dump(report), args.out)
    return code


def _int_list(text: str) -> list[int]:
    try:
        return [int(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")


def cmd_bench(args) -> int:
    seeds = args.seeds if args.seeds is not None else [_seed(args)]
    rows = run_bench(args.arch, args.sizes, n=args.dim, seeds=seeds, M=args.M, m=args.m, workers=args.threads)
    _emit(rows_to_csv(rows).rstrip("\n"), args.out)
    if len(set(args.sizes)) > 1:
        log.info("log-log slope of lp_calls vs size: %.3f", loglog_slope([r.size for r in rows], [r.lp_calls for r in rows]))
    if args.figure:
        from .plotting import plot_bench

        plot_bench(rows, args.figure)
    return EXIT_SAT


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--seed", type=int, default=None, help="RNG seed (default: $POLYVERIFY_SEED or 0)")
    p.add_argument("--threads", type=int, default=os.cpu_count() or 1, help="worker threads for region expansion")
    p.add_argument("--tol", action="append", metavar="NAME=VALUE", help="override a tolerance (zero, feas, interior, objective)")
    p.add_argument("--backend", choices=sorted(lp.BACKENDS), default="highs", help="LP backend")
    p.add_argument("-o", "--out", default=None, help="write the report here instead of stdout")
    p.add_argument("-v", "--verbose", action="store_true")


def _add_problem_inputs(p: argparse.ArgumentParser) -> None:
    p.add_argument("--bundle", type=Path, help="problem bundle JSON")
    p.add_argument("--network", type=Path, help="network JSON")
    p.add_argument("--input", type=Path, help="input polytope JSON")
    p.add_argument("--output", type=Path, help="output polytope JSON")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="polyverify", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("verify", help="decide SAT/UNSAT for a problem")
    _add_problem_inputs(p)
    p.add_argument("--exhaustive", action="store_true", help="collect every violation instead of stopping at the first")
    p.add_argument("--check", action="store_true", help="cross-check against the brute-force oracles")
    _add_common(p)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("check", help="compare verify against the oracles")
    _add_problem_inputs(p)
    _add_common(p)
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("enumerate", help="traverse the regions of an arrangement")
    p.add_argument("arrangement", type=Path, help="arrangement JSON")
    p.add_argument("--trace", nargs="?", const="-", default=None, metavar="FILE", help="one line per region: hex encoding and witness")
    p.add_argument("--check", action="store_true", help="compare with brute-force enumeration")
    p.add_argument("--figure", default=None, help="save a 2-D plot of the regions")
    _add_common(p)
    p.set_defaults(func=cmd_enumerate)

    p = sub.add_parser("bench", help="scaling run; CSV on stdout")
    p.add_argument("--arch", choices=["shallow", "tll"], default="shallow")
    p.add_argument("--sizes", type=_int_list, default=[4, 8, 16])
    p.add_argument("--dim", type=int, default=2)
    p.add_argument("--seeds", type=_int_list, default=None)
    p.add_argument("--M", type=int, default=2, help="TLL selector sets per component")
    p.add_argument("--m", type=int, default=1, help="outputs")
    p.add_argument("--figure", default=None, help="save a log-log plot of the run")
    _add_common(p)
    p.set_defaults(func=cmd_bench)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_INPUT if exc.code else EXIT_SAT
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s: %(message)s")
    previous_backend = lp._backend
    try:
        args.overrides = _tolerance_overrides(args)
        if args.threads < 1:
            raise UsageError("--threads must be at least 1")
        lp.set_backend(args.backend)
        ctx = tolerances.use_tolerances(**args.overrides) if args.overrides else nullcontext()
        with ctx:
            return args.func(args)
    except (
        UsageError,
        InputError,
        DimensionError,
        DegenerateInputError,
        UnsupportedArchitecture,
        OracleLimitExceeded,
    ) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (InternalInvariantError, LpError) as exc:
        print(f"internal error: {exc}", file=sys.stderr)
        return EXIT_INTERNAL
    finally:
        lp._backend = previous_backend


if __name__ == "__main__":
    sys.exit(main())
