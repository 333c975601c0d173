"""Command-line entry point.

Exit codes: 0 success, 1 assertion/lemma/correctness violation, 2 bad input.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys

from .errors import InputError, RelaxschedError
from .graphs import generate_random_graph, load_graph, write_dimacs
from .harness import (
    ExperimentSpec,
    inversion_probability,
    lower_bound_extra_steps,
    run_experiment,
    write_csv,
)
from .incremental import assert_lemmas, run
from .sched import KINDS, STRATEGIES, SchedulerConfig
from .sssp import bucket_stats, dijkstra_oracle, relaxed_sssp
from .txsim import TxConfig, simulate, verify_tx_properties
from .workloads import DelaunayWorkload, generate_instance

EXIT_OK = 0
EXIT_VIOLATION = 1
EXIT_INPUT = 2


def _add_scheduler_flags(parser, default_kind="exact"):
    parser.add_argument("--scheduler", choices=KINDS, default=None)
    parser.set_defaults(default_kind=default_kind)
    parser.add_argument("--k", type=int, default=None)
    parser.add_argument("--q", type=int, default=None)
    parser.add_argument("--strategy", choices=STRATEGIES, default=None)
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--config", default=None,
                        help="TOML/INI scheduler config; flags override")


def _add_batch_flags(parser):
    parser.add_argument("--seeds", type=int, default=1,
                        help="number of seeds (batch mode when > 1)")
    parser.add_argument("--out", default=None, help="CSV output path")
    parser.add_argument("--trace", default=None,
                        help="JSONL trace path (single-seed runs only)")


def _scheduler_config(args):
    overrides = {"rng_seed": args.seed}
    if args.scheduler is not None:
        overrides["kind"] = args.scheduler
    if args.k is not None:
        overrides["k"] = args.k
    if args.q is not None:
        overrides["q"] = args.q
    if args.strategy is not None:
        overrides["adversary_strategy"] = args.strategy
    if args.config:
        return SchedulerConfig.from_file(args.config, **overrides)
    overrides.setdefault("kind", args.default_kind)
    if overrides["kind"] == "adversarial":
        overrides.setdefault("k", 2)
    return SchedulerConfig(**overrides)


def _batch_spec(args, kind, workload):
    config = _scheduler_config(args)
    return ExperimentSpec(
        kind=kind, n=args.n, workload=workload,
        scheduler_kinds=(config.kind,), k_values=(config.k,),
        q_values=(config.q,), strategies=(config.adversary_strategy,),
        seed_start=args.seed, seed_count=args.seeds,
        out_csv=args.out or "")


def _print_rows(rows):
    for row in rows:
        print(json.dumps({key: value for key, value in row.items()
                          if value != "" and key != "timestamp"}))


def _cmd_run_sort(args):
    if args.seeds > 1:
        _print_rows(run_experiment(_batch_spec(args, "sort-overhead",
                                               args.workload)))
        return EXIT_OK
    workload = generate_instance(args.workload, args.n, args.seed)
    config = _scheduler_config(args)
    report, trace = run(workload, config)
    if args.trace:
        trace.write_jsonl(args.trace)
    violations = []
    if config.kind != "multiqueue":
        violations = assert_lemmas(report, trace, config.k)
    print(report.to_json())
    for violation in violations:
        print(violation, file=sys.stderr)
    return EXIT_VIOLATION if violations else EXIT_OK


def _cmd_run_delaunay(args):
    if args.seeds > 1:
        _print_rows(run_experiment(_batch_spec(args, "delaunay-overhead",
                                               "delaunay")))
        return EXIT_OK
    if args.points:
        workload = DelaunayWorkload.from_tsv(args.points)
    else:
        workload = generate_instance("delaunay", args.n, args.seed)
    config = _scheduler_config(args)
    report, trace = run(workload, config)
    if args.trace:
        trace.write_jsonl(args.trace)
    violations = []
    if config.kind != "multiqueue":
        violations = assert_lemmas(report, trace, config.k)
    if not workload.validate_empty_circumcircles():
        violations.append("final mesh fails the empty-circumcircle check")
    print(report.to_json())
    for violation in violations:
        print(violation, file=sys.stderr)
    return EXIT_VIOLATION if violations else EXIT_OK


def _cmd_run_sssp(args):
    if args.seeds > 1 and not args.graph:
        config = _scheduler_config(args)
        spec = ExperimentSpec(
            kind="sssp-overhead", n=args.n, m=args.m,
            scheduler_kinds=(config.kind,), k_values=(config.k,),
            q_values=(config.q,), strategies=(config.adversary_strategy,),
            seed_start=args.seed, seed_count=args.seeds,
            out_csv=args.out or "")
        rows = run_experiment(spec)
        _print_rows(rows)
        failures = sum(row["correctness_failures"] for row in rows)
        return EXIT_VIOLATION if failures else EXIT_OK
    if args.graph:
        graph = load_graph(args.graph, args.graph_format)
    else:
        graph = generate_random_graph(args.n, args.m or 10 * args.n,
                                      args.seed)
    config = _scheduler_config(args)
    dist, stats = relaxed_sssp(graph, config, duplicates=args.duplicates,
                               pop_convention=args.pop_convention)
    oracle = dijkstra_oracle(graph)
    correct = dist == oracle
    if correct:
        bucket_stats(dist, graph)   # raises if the bucket property fails
    print(json.dumps({
        "n": graph.n, "m": graph.m, "reachable": stats.reachable,
        "total_pops": stats.total_pops, "stale_pops": stats.stale_pops,
        "skipped_pops": stats.skipped_pops, "d_max": stats.d_max,
        "w_min": stats.w_min, "correct": correct,
    }))
    if not correct:
        print("distances disagree with the Dijkstra oracle",
              file=sys.stderr)
        return EXIT_VIOLATION
    return EXIT_OK


def _cmd_run_txsim(args):
    if args.seeds > 1:
        config = _scheduler_config(args)
        spec = ExperimentSpec(
            kind="txsim", n=args.n, workload=args.workload,
            scheduler_kinds=(config.kind,), k_values=(config.k,),
            strategies=(config.adversary_strategy,),
            seed_start=args.seed, seed_count=args.seeds,
            tx_contention=args.contention, tx_workers=args.workers,
            tx_duration=args.duration, out_csv=args.out or "")
        rows = run_experiment(spec)
        _print_rows(rows)
        total = sum(row["violations"] for row in rows)
        return EXIT_VIOLATION if total else EXIT_OK
    workload = generate_instance(args.workload, args.n, args.seed)
    config = TxConfig(k=args.k or 2, contention_bound=args.contention,
                      workers=args.workers, duration=args.duration,
                      rng_seed=args.seed,
                      adversary_strategy=args.strategy or "max-rank")
    report = simulate(workload, config)
    violations = verify_tx_properties(report, config)
    if args.trace:
        report.write_event_log(args.trace)
    print(json.dumps({"n": report.n, "commits": report.commits,
                      "aborts": report.aborts,
                      "overhead": report.overhead_ratio}))
    for violation in violations:
        print(violation, file=sys.stderr)
    return EXIT_VIOLATION if violations else EXIT_OK


def _cmd_inversion_prob(args):
    estimates = inversion_probability(args.n, args.q, args.trials, args.seed)
    if args.out:
        with open(args.out, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["i", "probability"])
            for i, p in enumerate(estimates, start=1):
                writer.writerow([i, p])
    print(json.dumps({"n": args.n, "q": args.q, "trials": args.trials,
                      "min_probability": min(estimates[1:]),
                      "estimates": estimates}))
    return EXIT_OK


def _cmd_lower_bound(args):
    n_grid = [int(part) for part in args.n_grid.split(",")]
    table, slope, p_value = lower_bound_extra_steps(
        args.workload, n_grid, args.q, args.seeds)
    import math

    failed = [n for n, (mean, _) in table.items()
              if mean < math.log(n) / 8]
    print(json.dumps({
        "table": {str(n): {"mean": mean, "std": std}
                  for n, (mean, std) in table.items()},
        "slope": slope, "p_value": p_value,
        "below_eighth_log": failed,
    }))
    if args.out:
        rows = []
        for n, (mean, std) in table.items():
            rows.append({"experiment": "lower-bound", "workload":
                         args.workload, "n": n, "scheduler": "multiqueue",
                         "q": args.q, "seeds": args.seeds,
                         "mean_extra_steps": mean, "std_extra_steps": std})
        with open(args.out, "w", newline="") as fh:
            writer = csv.DictWriter(fh, fieldnames=list(rows[0]))
            writer.writeheader()
            writer.writerows(rows)
    if failed or not (slope > 0 and p_value < 0.01):
        return EXIT_VIOLATION
    return EXIT_OK


def _cmd_lemma_audit(args):
    k_values = tuple(int(part) for part in args.k_values.split(","))
    spec = ExperimentSpec(
        kind="lemma-audit", n=args.n, workload=args.workload,
        scheduler_kinds=("adversarial",), k_values=k_values,
        strategies=STRATEGIES, seed_start=args.seed, seed_count=args.seeds,
        tx_contention=args.contention, tx_workers=args.workers,
        tx_duration=args.duration, out_csv=args.out or "")
    rows = run_experiment(spec)
    _print_rows(rows)
    total = sum(row["violations"] for row in rows)
    return EXIT_VIOLATION if total else EXIT_OK


def _cmd_gen_graph(args):
    graph = generate_random_graph(args.n, args.m, args.seed)
    write_dimacs(graph, args.out)
    print(json.dumps({"n": graph.n, "m": graph.m, "out": args.out}))
    return EXIT_OK


def _cmd_gen_points(args):
    workload = generate_instance("delaunay", args.n, args.seed)
    workload.write_tsv(args.out)
    print(json.dumps({"n": workload.n, "out": args.out}))
    return EXIT_OK


def build_parser():
    parser = argparse.ArgumentParser(
        prog="relaxsched",
        description="Simulate incremental algorithms under relaxed "
                    "priority schedulers.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run-sort", help="BST-insertion sort / DAG workload")
    p.add_argument("--n", type=int, default=1024)
    p.add_argument("--workload", choices=("bst-sort", "dag"),
                   default="bst-sort")
    _add_scheduler_flags(p)
    _add_batch_flags(p)
    p.set_defaults(func=_cmd_run_sort)

    p = sub.add_parser("run-delaunay", help="incremental 2D Delaunay")
    p.add_argument("--n", type=int, default=512)
    p.add_argument("--points", default=None, help="TSV x<TAB>y input file")
    _add_scheduler_flags(p)
    _add_batch_flags(p)
    p.set_defaults(func=_cmd_run_delaunay)

    p = sub.add_parser("run-sssp", help="relaxed-queue shortest paths")
    p.add_argument("--n", type=int, default=10000)
    p.add_argument("--m", type=int, default=0)
    p.add_argument("--graph", default=None)
    p.add_argument("--graph-format", choices=("dimacs-gr", "tsv"),
                   default="dimacs-gr")
    p.add_argument("--duplicates", choices=("decrease-key", "insert-only"),
                   default="decrease-key")
    p.add_argument("--pop-convention", choices=("raw", "pessimistic"),
                   default="raw")
    _add_scheduler_flags(p)
    _add_batch_flags(p)
    p.set_defaults(func=_cmd_run_sssp)

    p = sub.add_parser("run-txsim", help="transactional conflict simulator")
    p.add_argument("--n", type=int, default=1024)
    p.add_argument("--workload", choices=("bst-sort", "dag"),
                   default="bst-sort")
    p.add_argument("--contention", type=int, default=8, help="C bound")
    p.add_argument("--workers", type=int, default=4)
    p.add_argument("--duration", type=int, default=1)
    _add_scheduler_flags(p, default_kind="adversarial")
    _add_batch_flags(p)
    p.set_defaults(func=_cmd_run_txsim)

    p = sub.add_parser("inversion-prob",
                       help="Pr[adjacent-label inversion] under a MultiQueue")
    p.add_argument("--n", type=int, default=64)
    p.add_argument("--q", type=int, default=8)
    p.add_argument("--trials", type=int, default=10000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default=None)
    p.set_defaults(func=_cmd_inversion_prob)

    p = sub.add_parser("lower-bound",
                       help="extra steps vs ln n under a MultiQueue")
    p.add_argument("--workload", choices=("bst-sort", "delaunay"),
                   default="bst-sort")
    p.add_argument("--n-grid", default="256,1024,4096")
    p.add_argument("--q", type=int, default=8)
    p.add_argument("--seeds", type=int, default=50)
    p.add_argument("--out", default=None)
    p.set_defaults(func=_cmd_lower_bound)

    p = sub.add_parser("lemma-audit",
                       help="deterministic bound checks over a seed grid")
    p.add_argument("--n", type=int, default=256)
    p.add_argument("--workload", choices=("bst-sort", "dag", "delaunay"),
                   default="bst-sort")
    p.add_argument("--k-values", default="2,4,8")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--seeds", type=int, default=100)
    p.add_argument("--contention", type=int, default=8)
    p.add_argument("--workers", type=int, default=4)
    p.add_argument("--duration", type=int, default=1)
    p.add_argument("--out", default=None)
    p.set_defaults(func=_cmd_lemma_audit)

    p = sub.add_parser("gen-graph", help="write a random DIMACS .gr graph")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_gen_graph)

    p = sub.add_parser("gen-points", help="write random grid points as TSV")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_gen_points)

    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (InputError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except RelaxschedError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VIOLATION


if __name__ == "__main__":
    sys.exit(main())
