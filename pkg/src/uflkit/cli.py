"""Command line interface: solve, gen, bench, and verify subcommands.

Exit codes: 0 success, 2 input error, 3 numerical failure,
4 verification failure.
"""

from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from . import cluster as _cluster
from . import harness as _harness
from . import portfolio as _portfolio
from . import primal_dual as _pd
from . import rounding as _rounding
from . import sparsen as _sparsen
from .core import Instance, is_metric, validate
from .errors import NumericalFailure, UFLError
from .lp import client_shares, solve_relaxation

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_NUMERICAL = 3
EXIT_VERIFY = 4


def _read_instance(path: str, fmt: str | None) -> Instance:
    text = open(path).read()
    if fmt is None:
        fmt = "json" if path.endswith(".json") else "orlib"
    if fmt == "json":
        return _harness.parse_json(text)
    return _harness.parse_orlib(text)


def _cmd_solve(args) -> int:
    instance = _read_instance(args.input, args.format)
    validate(instance)
    if args.algo == "a1":
        gamma = args.gamma if args.gamma is not None else _portfolio.balanced_gamma()
        solution = _rounding.a1(instance, gamma, args.seed)
    elif args.algo == "jms":
        solution = _pd.jms(instance)
    elif args.algo == "myz":
        solution = _pd.myz(instance, args.delta)
    elif args.algo == "a2":
        solution = _portfolio.a2_randomized(instance, args.seed)
    elif args.algo == "best-of":
        solution = _portfolio.best_of(instance, args.trials, args.seed)
    else:
        solution = _portfolio.brute_force_opt(instance)
    json.dump(
        {
            "algo": args.algo,
            "open_facilities": list(solution.open_set),
            "assignment": [int(i) for i in solution.assignment],
            "facility_cost": solution.facility_cost,
            "connection_cost": solution.connection_cost,
            "total": solution.total_cost,
        },
        sys.stdout,
        indent=2,
    )
    print()
    return EXIT_OK


def _cmd_gen(args) -> int:
    if args.kind == "euclidean":
        instance = _harness.gen_euclidean(args.m, args.n, (args.cost_min, args.cost_max), args.seed)
    else:
        instance = _harness.gen_regular(args.m, args.n, args.seed)
    text = (
        _harness.emit_json(instance) if args.format == "json" else _harness.emit_orlib(instance)
    )
    with open(args.out, "w") as fh:
        fh.write(text)
    return EXIT_OK


def _cmd_bench(args) -> int:
    config = json.load(open(args.config))
    rows = _harness.run_bench(config)
    with open(args.out, "w") as fh:
        _harness.write_csv(rows, fh)
    return EXIT_OK


def _verify_metric(report) -> bool:
    ok = all(
        is_metric(_harness.gen_euclidean(6, 10, (0.1, 1.0), seed)) for seed in range(10)
    )
    bad = Instance(facility_costs=[1.0, 1.0], connection_costs=[[10.0, 1.0], [1.0, 1.0]])
    ok = ok and not is_metric(bad)
    report("metric check", ok)
    return ok


def _verify_main_lemma(report) -> bool:
    gammas = [1.1, 1.5, _portfolio.balanced_gamma(), 1.9]
    ok = True
    for seed in range(12):
        instance = _harness.gen_euclidean(6, 12, (0.1, 0.8), seed)
        primal, dual = solve_relaxation(instance)
        shares = client_shares(instance, primal, dual)
        for gamma in gammas:
            sp = _sparsen.sparsen(instance, primal, shares, gamma)
            n = instance.num_clients
            for j in range(n):
                for j2 in range(n):
                    if j2 != j and sp.are_neighbors(j, j2):
                        ok = ok and _sparsen.check_main_lemma(sp, j, j2)
    report("close/distant distance lemma sweep", ok)
    return ok


def _verify_symmetry(report) -> bool:
    ok = True
    for seed in range(8):
        instance = _harness.gen_euclidean(4, 8, (0.1, 0.6), seed)
        primal, dual = solve_relaxation(instance)
        shares = client_shares(instance, primal, dual)
        sp = _sparsen.sparsen(instance, primal, shares, _portfolio.balanced_gamma())
        adj = _cluster.support_adjacency(sp)
        probs = _cluster.exact_center_probabilities(adj)
        ok = ok and bool(np.max(np.abs(probs - probs.T)) <= 1e-12)
    report("random clustering symmetry", ok)
    return ok


def _verify_sandwich(report) -> bool:
    ok = True
    for seed in range(8):
        instance = _harness.gen_euclidean(6, 10, (0.1, 1.0), seed)
        primal, _ = solve_relaxation(instance)
        opt = _portfolio.brute_force_opt(instance)
        heuristics = [
            _pd.jms(instance),
            _pd.myz(instance, 1.504),
            _rounding.a1(instance, _portfolio.balanced_gamma(), seed),
        ]
        ok = ok and primal.objective <= opt.total_cost + 1e-6
        ok = ok and all(opt.total_cost <= h.total_cost + 1e-9 for h in heuristics)
    report("lp / optimum / heuristic sandwich", ok)
    return ok


def _cmd_verify(args) -> int:
    failures = 0

    def report(name: str, ok: bool):
        nonlocal failures
        print(f"[{'PASS' if ok else 'FAIL'}] {name}")
        if not ok:
            failures += 1

    _verify_metric(report)
    _verify_main_lemma(report)
    _verify_symmetry(report)
    _verify_sandwich(report)
    return EXIT_VERIFY if failures else EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="uflkit")
    sub = parser.add_subparsers(dest="command", required=True)

    solve = sub.add_parser("solve", help="solve an instance with a chosen algorithm")
    solve.add_argument("--algo", required=True, choices=["a1", "jms", "myz", "a2", "best-of", "exact"])
    solve.add_argument("--gamma", type=float, default=None)
    solve.add_argument("--delta", type=float, default=1.504)
    solve.add_argument("--seed", type=int, default=0)
    solve.add_argument("--trials", type=int, default=1)
    solve.add_argument("--input", required=True)
    solve.add_argument("--format", choices=["orlib", "json"], default=None)
    solve.set_defaults(func=_cmd_solve)

    gen = sub.add_parser("gen", help="generate a random instance")
    gen.add_argument("--kind", required=True, choices=["euclidean", "regular"])
    gen.add_argument("--m", type=int, required=True)
    gen.add_argument("--n", type=int, required=True)
    gen.add_argument("--seed", type=int, default=0)
    gen.add_argument("--out", required=True)
    gen.add_argument("--format", choices=["orlib", "json"], default="json")
    gen.add_argument("--cost-min", type=float, default=0.1)
    gen.add_argument("--cost-max", type=float, default=1.0)
    gen.set_defaults(func=_cmd_gen)

    bench = sub.add_parser("bench", help="run a benchmark grid from a JSON config")
    bench.add_argument("--config", required=True)
    bench.add_argument("--out", required=True)
    bench.set_defaults(func=_cmd_bench)

    verify = sub.add_parser("verify", help="run the invariant suites")
    verify.set_defaults(func=_cmd_verify)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except NumericalFailure as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except (UFLError, OSError, ValueError, KeyError) as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
