"""Command-line front end.

Exit codes: 0 success, 2 usage or parse error, 3 budget refusal,
4 internal invariant violation (LP infeasible, support overflow).
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from fractions import Fraction
from pathlib import Path

from . import __version__
from .algorithms import (
    AlgorithmConfig,
    approximation_ratio,
    brute_force_opt,
    deterministic_greedy,
    exact_expectation,
    fill_unassigned,
    query_bound,
    randomized_greedy,
)
from .core import (
    check_k_submodular,
    check_monotone,
    check_nonnegative,
    check_orthant_submodular,
    check_pairwise_monotone,
)
from .exceptions import BudgetExceededError, InstanceError, InternalInvariantError
from .instances import FAMILIES, dump_instance, load_instance, random_monotone_instance
from .lp import dump_lp

EXIT_OK, EXIT_USAGE, EXIT_BUDGET, EXIT_INTERNAL = 0, 2, 3, 4
BRUTE_FORCE_LIMIT = 10**6
CHECK_BUDGET = 10**8

DEFAULT_ROWS = ",".join(
    f"{n}:{k}:{family}" for n in (2, 3, 4) for k in (1, 2, 3) for family in FAMILIES
)
BENCH_COLUMNS = ["n", "k", "family", "det_value", "opt", "ratio", "queries", "query_bound",
                 "support_max"]


def _emit(text: str, out: str | None) -> None:
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def _dumps(doc) -> str:
    return json.dumps(doc, indent=2) + "\n"


def _num(v):
    if isinstance(v, Fraction):
        return int(v) if v.denominator == 1 else float(v)
    return v


def _read_order(path: str) -> list[str]:
    text = Path(path).read_text()
    try:
        order = json.loads(text)
    except json.JSONDecodeError:
        order = text.split()
    if not isinstance(order, list):
        raise InstanceError(f"{path}: order must be a list of element names")
    return [str(e) for e in order]


def _config_doc(args) -> dict:
    return {key: value for key, value in sorted(vars(args).items()) if key != "func"}


def _ratio(value, opt):
    if opt == 0:
        return None
    return float(Fraction(value) / Fraction(opt))


def cmd_solve(args) -> int:
    inst = load_instance(args.instance)
    order = _read_order(args.order) if args.order else None
    config = AlgorithmConfig(inst.k, tuple(order) if order else None, args.seed)
    enumerable = (inst.k + 1) ** inst.n <= min(args.budget, BRUTE_FORCE_LIMIT)
    optimum = opt_value = None
    if enumerable:
        optimum, opt_value = brute_force_opt(inst.oracle, inst.ground, args.budget)

    if args.algorithm == "det":
        certify = fill_unassigned(optimum) if optimum is not None else None
        try:
            report = deterministic_greedy(inst.oracle, inst.ground, config, optimum=certify)
        except InternalInvariantError as exc:
            if args.dump_lp and getattr(exc, "lp", None) is not None:
                dump_lp(exc.lp, args.dump_lp)
            raise
    else:
        report = randomized_greedy(inst.oracle, inst.ground, config)

    bound = approximation_ratio(inst.k)
    doc = {
        "version": __version__,
        "config": _config_doc(args),
        "instance": {"n": inst.n, "k": inst.k, "family": inst.family},
        **report.to_dict(inst.ground),
        "query_bound": query_bound(inst.n, inst.k) if args.algorithm == "det" else inst.k * inst.n + 1,
        "optimum": None,
        "optimal_solution": None,
        "ratio": None,
        "bound": float(bound),
        "bound_holds": None,
    }
    if optimum is not None:
        doc["optimum"] = _num(opt_value)
        doc["optimal_solution"] = inst.ground.mapping(optimum)
        doc["ratio"] = _ratio(report.value, opt_value)
        if args.algorithm == "det":
            doc["bound_holds"] = bool(Fraction(report.value) >= bound * Fraction(opt_value))
        elif inst.k ** inst.n <= args.budget:
            # the randomized guarantee is on the expectation, not on one sample
            expected = exact_expectation(inst.oracle, inst.ground, config, args.budget)
            doc["expected_value"] = _num(expected)
            doc["bound_holds"] = bool(Fraction(expected) >= bound * Fraction(opt_value))
    _emit(_dumps(doc), args.out)
    if args.trace:
        Path(args.trace).write_text("".join(json.dumps(r) + "\n" for r in report.trace))
    return EXIT_OK


def verify_table(table, budget: int = CHECK_BUDGET) -> dict:
    reports = {
        "monotone": check_monotone(table, budget),
        "k_submodular": check_k_submodular(table, budget),
        "orthant_submodular": check_orthant_submodular(table, budget),
        "pairwise_monotone": check_pairwise_monotone(table, budget),
        "nonnegative": check_nonnegative(table),
    }
    doc = {name: r.to_dict() for name, r in reports.items()}
    doc["characterization_consistent"] = reports["k_submodular"].holds == (
        reports["orthant_submodular"].holds and reports["pairwise_monotone"].holds
    )
    return doc


def cmd_verify(args) -> int:
    inst = load_instance(args.instance)
    table = inst.to_table(budget=args.budget)
    doc = {"version": __version__, "config": _config_doc(args), "n": inst.n, "k": inst.k,
           "family": inst.family, **verify_table(table, args.budget)}
    _emit(_dumps(doc), args.out)
    return EXIT_OK


def cmd_brute(args) -> int:
    inst = load_instance(args.instance)
    x, value = brute_force_opt(inst.oracle, inst.ground, args.budget)
    doc = {"version": __version__, "config": _config_doc(args),
           "solution": inst.ground.mapping(x), "value": _num(value)}
    _emit(_dumps(doc), args.out)
    return EXIT_OK


def parse_rows(spec: str) -> list[tuple[int, int, str, int | None]]:
    rows = []
    for item in filter(None, (s.strip() for s in spec.split(","))):
        parts = item.split(":")
        if len(parts) not in (3, 4) or parts[2] not in FAMILIES:
            raise InstanceError(f"bad row {item!r}; expected n:k:family[:seed]")
        try:
            seed = int(parts[3]) if len(parts) == 4 else None
            rows.append((int(parts[0]), int(parts[1]), parts[2], seed))
        except ValueError:
            raise InstanceError(f"bad row {item!r}; n, k and seed must be integers") from None
    return rows


def bench_row(n: int, k: int, family: str, seed: int) -> dict:
    inst = random_monotone_instance(seed, n, k, family)
    report = deterministic_greedy(inst.oracle, inst.ground)
    row = {"n": n, "k": k, "family": family, "det_value": _num(report.value), "opt": None,
           "ratio": None, "queries": report.total_queries, "query_bound": query_bound(n, k),
           "support_max": max(len(s) for s in report.supports)}
    if (k + 1) ** n <= BRUTE_FORCE_LIMIT:
        _, opt = brute_force_opt(inst.oracle, inst.ground)
        row["opt"] = _num(opt)
        row["ratio"] = _ratio(report.value, opt)
    return row


def cmd_bench(args) -> int:
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=BENCH_COLUMNS, lineterminator="\n")
    writer.writeheader()
    for n, k, family, seed in parse_rows(args.rows):
        row = bench_row(n, k, family, args.seed if seed is None else seed)
        writer.writerow({key: "" if v is None else v for key, v in row.items()})
    _emit(buf.getvalue(), args.out)
    return EXIT_OK


def cmd_gen(args) -> int:
    inst = random_monotone_instance(args.seed, args.n, args.k, args.family)
    _emit(dump_instance(inst), args.out)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ksubmax", description="Maximize monotone k-submodular functions."
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, instance=True):
        if instance:
            p.add_argument("--instance", required=True, metavar="PATH")
        p.add_argument("--out", metavar="PATH", help="write output here instead of stdout")

    p = sub.add_parser("solve", help="run a greedy and report the solution")
    common(p)
    p.add_argument("--algorithm", choices=("det", "rand"), default="det")
    p.add_argument("--seed", type=int)
    p.add_argument("--order", metavar="PATH", help="element order (JSON list or one name per line)")
    p.add_argument("--budget", type=int, default=BRUTE_FORCE_LIMIT,
                   help="enumeration budget for the brute-force comparison")
    p.add_argument("--trace", metavar="PATH", help="write the per-iteration trace as JSON lines")
    p.add_argument("--dump-lp", metavar="PATH", help="on solver failure, dump the failing LP")
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("verify", help="exhaustively check the instance's properties")
    common(p)
    p.add_argument("--budget", type=int, default=CHECK_BUDGET)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("brute", help="brute-force the optimum")
    common(p)
    p.add_argument("--budget", type=int, default=10**7)
    p.set_defaults(func=cmd_brute)

    p = sub.add_parser("bench", help="CSV of deterministic runs against the optimum")
    common(p, instance=False)
    p.add_argument("--rows", default=DEFAULT_ROWS, metavar="SPEC",
                   help="comma-separated n:k:family[:seed] rows")
    p.add_argument("--seed", type=int, default=0, help="seed for rows without one")
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("gen", help="generate a random monotone instance")
    common(p, instance=False)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--family", choices=FAMILIES, default="assignment_modular")
    p.set_defaults(func=cmd_gen)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    if args.command == "solve" and args.algorithm == "rand" and args.seed is None:
        print("error: --seed is required with --algorithm rand", file=sys.stderr)
        return EXIT_USAGE
    for name in ("budget", "n", "k"):
        if getattr(args, name, 1) is not None and getattr(args, name, 1) < 1:
            print(f"error: --{name} must be positive", file=sys.stderr)
            return EXIT_USAGE
    try:
        return args.func(args)
    except BudgetExceededError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_BUDGET
    except InstanceError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except InternalInvariantError as exc:
        print(f"internal error: {exc}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
