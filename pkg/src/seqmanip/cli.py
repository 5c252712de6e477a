"""Command-line front end.

JSON goes to standard output, logs to standard error.  Exit codes: 0 on
success, 1 on invalid input, 2 on an internal verification mismatch (the
dynamic program disagreeing with an oracle, which must never happen), 3 when
an oracle budget is exceeded.
"""

from __future__ import annotations

import argparse
import csv
import io
import itertools
import json
import sys
from fractions import Fraction
from typing import Sequence

from . import sweeps
from .dp import best_response_with_table
from .engine import manipulator_bundle
from .greedy import greedy_alg
from .model import (
    Instance,
    InstanceError,
    generate_random_instance,
    generate_tightness_instance,
    parse_instance,
    serialize_instance,
)
from .oracle import BudgetExceeded, choice_tree_best, dominated_greedy_best
from .responses import allocation_response, approximation_report, truthful_response

EXIT_OK = 0
EXIT_INVALID = 1
EXIT_MISMATCH = 2
EXIT_BUDGET = 3


def _log(message: str) -> None:
    print(message, file=sys.stderr)


def _emit(payload: object) -> None:
    print(json.dumps(payload, indent=2, sort_keys=True))


def _load_instance(path: str) -> Instance:
    if path == "-":
        return parse_instance(sys.stdin.read())
    with open(path, "r", encoding="utf-8") as handle:
        return parse_instance(handle.read())


def _ordered_bundle(inst: Instance, items: frozenset) -> list[str]:
    return [item for item in inst.manipulator_ranking if item in items]


def _sequence_payload(seq) -> list[dict]:
    return [{"item": item, "agent": agent} for item, agent in seq]


def _decimal(value: Fraction, places: int = 6) -> str:
    scaled = round(value * 10**places)
    return f"{scaled // 10**places}.{scaled % 10**places:0{places}d}"


def _solution_payload(inst: Instance, solution) -> dict:
    return {
        "bundle": _ordered_bundle(inst, solution.bundle.items),
        "utility": str(solution.utility),
        "strategy": list(solution.strategy),
        "sequence": _sequence_payload(solution.sequence),
    }


def _cmd_solve(args: argparse.Namespace) -> int:
    inst = _load_instance(args.instance)
    solution, table = best_response_with_table(inst)
    payload = _solution_payload(inst, solution)
    payload["dp_states"] = len(table)
    exit_code = EXIT_OK
    if args.check:
        reference, certificate = dominated_greedy_best(inst, policy_budget=args.budget)
        agrees = reference.utility == solution.utility
        payload["check"] = {
            "method": "dominated-greedy",
            "utility": str(reference.utility),
            "certificate_policy": list(certificate),
            "agrees": agrees,
        }
        if not agrees:
            _log("verification mismatch: dynamic program disagrees with the dominated-greedy oracle")
            exit_code = EXIT_MISMATCH
    if args.dump_table:
        payload["table"] = [
            {
                "state": {"x": state.x, "y": state.y, "last_rank": list(state.last_rank)},
                "utility": str(entry.utility),
                "pred": None
                if entry.pred is None
                else {"x": entry.pred.x, "y": entry.pred.y, "last_rank": list(entry.pred.last_rank)},
                "q": entry.q,
            }
            for state, entry in sorted(table.items())
        ]
    _emit(payload)
    return exit_code


def _cmd_greedy(args: argparse.Namespace) -> int:
    inst = _load_instance(args.instance)
    seq, strategy = greedy_alg(inst)
    bundle = manipulator_bundle(inst, seq)
    _emit(
        {
            "bundle": _ordered_bundle(inst, bundle.items),
            "utility": str(bundle.total_utility),
            "strategy": list(strategy),
            "sequence": _sequence_payload(seq),
        }
    )
    return EXIT_OK


def _cmd_truthful(args: argparse.Namespace) -> int:
    inst = _load_instance(args.instance)
    _emit(_solution_payload(inst, truthful_response(inst)))
    return EXIT_OK


def _cmd_oracle(args: argparse.Namespace) -> int:
    inst = _load_instance(args.instance)
    if args.method == "choice-tree":
        solution = choice_tree_best(inst, node_budget=args.budget)
        payload = _solution_payload(inst, solution)
    else:
        solution, certificate = dominated_greedy_best(inst, policy_budget=args.budget)
        payload = _solution_payload(inst, solution)
        payload["certificate_policy"] = list(certificate)
    payload["method"] = args.method
    _emit(payload)
    return EXIT_OK


def _cmd_ratio(args: argparse.Namespace) -> int:
    if args.tightness is not None:
        inst = generate_tightness_instance(args.tightness)
    elif args.instance is not None:
        inst = _load_instance(args.instance)
    else:
        raise InstanceError("ratio", "give an instance file or --tightness K")
    report = approximation_report(inst)
    _emit(
        {
            "truthful": str(report.truthful),
            "optimal": str(report.optimal),
            "ratio": str(report.ratio),
            "ratio_decimal": _decimal(report.ratio),
        }
    )
    return EXIT_OK


def _cmd_achievable(args: argparse.Namespace) -> int:
    inst = _load_instance(args.instance)
    target = [token for token in args.target.split(",") if token]
    result = allocation_response(inst, target)
    _emit({"target": sorted(target), "achievable": result})
    return EXIT_OK


def _cmd_gen(args: argparse.Namespace) -> int:
    if args.tightness is not None:
        inst = generate_tightness_instance(args.tightness)
        _log(f"generated tightness instance k={args.tightness}")
    else:
        if args.seed is None:
            raise InstanceError("gen", "--seed is required for random generation")
        inst = generate_random_instance(args.agents, args.items, args.seed)
        _log(f"generated random instance agents={args.agents} items={args.items} seed={args.seed}")
    text = serialize_instance(inst)
    if args.output and args.output != "-":
        with open(args.output, "w", encoding="utf-8") as handle:
            handle.write(text + "\n")
        _log(f"wrote {args.output}")
    else:
        print(text)
    return EXIT_OK


def _cmd_verify(args: argparse.Namespace) -> int:
    specs = []
    if args.exhaustive:
        specs.append(sweeps.iter_exhaustive_specs(args.agents, args.max_items))
    if args.random:
        specs.append(
            sweeps.iter_random_specs(args.random, [args.agents], args.max_items, args.seed)
        )
    if not specs:
        raise InstanceError("verify", "nothing to do: pass --exhaustive and/or --random COUNT")
    summary = sweeps.sweep(
        itertools.chain.from_iterable(specs),
        workers=args.workers,
        node_budget=args.budget,
        policy_budget=args.budget,
    )
    payload = {
        "checked": summary.checked,
        "agents": args.agents,
        "max_items": args.max_items,
        "seed": args.seed,
        "mismatches": [list(map(str, spec)) for spec in summary.mismatches],
        "half_violations": [list(map(str, spec)) for spec in summary.half_violations],
        "state_bound_violations": [list(map(str, spec)) for spec in summary.bound_violations],
        "ok": summary.ok,
    }
    _emit(payload)
    if not summary.ok:
        _log("verification mismatch: see the mismatch lists in the output")
        return EXIT_MISMATCH
    return EXIT_OK


def _cmd_bench(args: argparse.Namespace) -> int:
    sizes = [int(tok) for tok in args.sizes.split(",") if tok]
    params = [
        (args.agents, m, args.seed + offset)
        for m in sizes
        for offset in range(args.per_size)
    ]
    rows = sweeps.bench_many(params, workers=args.workers)
    rendered = [
        {
            "seed": row.seed,
            "n": row.n,
            "m": row.m,
            "k1": row.k1,
            "utility_opt": str(row.utility_opt),
            "utility_truthful": str(row.utility_truthful),
            "ratio": None if row.ratio is None else str(row.ratio),
            "dp_states": row.dp_states,
            "dp_millis": round(row.dp_millis, 3),
        }
        for row in rows
    ]
    if args.csv:
        buffer = io.StringIO()
        writer = csv.DictWriter(buffer, fieldnames=list(sweeps.BENCH_FIELDS))
        writer.writeheader()
        for row in rendered:
            writer.writerow({key: ("" if row[key] is None else row[key]) for key in sweeps.BENCH_FIELDS})
        if args.csv == "-":
            sys.stdout.write(buffer.getvalue())
        else:
            with open(args.csv, "w", encoding="utf-8", newline="") as handle:
                handle.write(buffer.getvalue())
            _log(f"wrote {args.csv}")
    else:
        _emit({"rows": rendered})
    return EXIT_OK


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="seqmanip",
        description="Exact best-response solvers for manipulating sequential allocation.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_instance(p: argparse.ArgumentParser) -> None:
        p.add_argument("instance", help="instance JSON file, or - for stdin")

    p_solve = sub.add_parser("solve", help="optimal response via the dynamic program")
    add_instance(p_solve)
    p_solve.add_argument("--check", action="store_true", help="cross-check against the dominated-greedy oracle")
    p_solve.add_argument("--dump-table", action="store_true", help="include the state table in the output")
    p_solve.add_argument("--budget", type=int, default=None, help="oracle budget for --check")
    p_solve.set_defaults(func=_cmd_solve)

    p_greedy = sub.add_parser("greedy", help="run the greedy procedure")
    add_instance(p_greedy)
    p_greedy.set_defaults(func=_cmd_greedy)

    p_truthful = sub.add_parser("truthful", help="execute the truthful strategy")
    add_instance(p_truthful)
    p_truthful.set_defaults(func=_cmd_truthful)

    p_oracle = sub.add_parser("oracle", help="run a brute-force oracle")
    add_instance(p_oracle)
    p_oracle.add_argument(
        "--method",
        choices=["choice-tree", "dominated-greedy"],
        default="choice-tree",
    )
    p_oracle.add_argument("--budget", type=int, default=None, help="search budget override")
    p_oracle.set_defaults(func=_cmd_oracle)

    p_ratio = sub.add_parser("ratio", help="truthful/optimal approximation report")
    p_ratio.add_argument("instance", nargs="?", default=None, help="instance JSON file")
    p_ratio.add_argument("--tightness", type=int, default=None, metavar="K", help="use the tightness family with eps = 1/K")
    p_ratio.set_defaults(func=_cmd_ratio)

    p_ach = sub.add_parser("achievable", help="can the manipulator get exactly a target bundle?")
    add_instance(p_ach)
    p_ach.add_argument("--target", required=True, help="comma-separated item list, e.g. a,b")
    p_ach.set_defaults(func=_cmd_achievable)

    p_gen = sub.add_parser("gen", help="generate an instance document")
    p_gen.add_argument("--agents", type=int, default=3)
    p_gen.add_argument("--items", type=int, default=6)
    p_gen.add_argument("--seed", type=int, default=None)
    p_gen.add_argument("--tightness", type=int, default=None, metavar="K")
    p_gen.add_argument("-o", "--output", default=None, help="output path (default stdout)")
    p_gen.set_defaults(func=_cmd_gen)

    p_verify = sub.add_parser("verify", help="sweep instances and check solver agreement")
    p_verify.add_argument("--agents", type=int, default=3)
    p_verify.add_argument("--max-items", type=int, default=5)
    p_verify.add_argument("--exhaustive", action="store_true", help="all policies x all ranking tuples up to --max-items")
    p_verify.add_argument("--random", type=int, default=0, metavar="COUNT", help="additionally check COUNT random instances")
    p_verify.add_argument("--seed", type=int, default=0)
    p_verify.add_argument("--budget", type=int, default=None)
    p_verify.add_argument("--workers", type=int, default=1)
    p_verify.set_defaults(func=_cmd_verify)

    p_bench = sub.add_parser("bench", help="time the dynamic program on generated instances")
    p_bench.add_argument("--agents", type=int, default=3)
    p_bench.add_argument("--sizes", default="10,15,20,25,30", help="comma-separated item counts")
    p_bench.add_argument("--per-size", type=int, default=3)
    p_bench.add_argument("--seed", type=int, default=0)
    p_bench.add_argument("--csv", default=None, metavar="PATH", help="write CSV to PATH ('-' for stdout) instead of JSON")
    p_bench.add_argument("--workers", type=int, default=1)
    p_bench.set_defaults(func=_cmd_bench)

    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code in (0, None) else EXIT_INVALID
    try:
        return args.func(args)
    except BudgetExceeded as exc:
        _log(f"error: {exc}")
        return EXIT_BUDGET
    except InstanceError as exc:
        _log(f"error: {exc}")
        return EXIT_INVALID
    except (ValueError, OSError) as exc:
        _log(f"error: {exc}")
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
