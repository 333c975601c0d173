"""Experiment orchestration: seeded batch runs over scheduler grids,
statistical aggregation, and CSV/JSONL emission."""

from __future__ import annotations

import csv
import hashlib
import math
import statistics
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace

from scipy import stats as scipy_stats

from .errors import InputError
from .graphs import generate_random_graph, load_graph
from .incremental import assert_lemmas, run
from .sched import (
    LabeledTask,
    MultiQueueScheduler,
    SchedulerConfig,
    make_scheduler,
)
from .sssp import dijkstra_oracle, relaxed_sssp
from .txsim import TxConfig, simulate, verify_tx_properties
from .workloads import generate_instance

EXPERIMENT_KINDS = (
    "sort-overhead",
    "delaunay-overhead",
    "sssp-overhead",
    "txsim",
    "inversion-probability",
    "lemma-audit",
)

CSV_COLUMNS = [
    "experiment", "workload", "n", "m", "scheduler", "k", "q", "strategy",
    "seeds", "mean_extra_steps", "std_extra_steps", "mean_total_steps",
    "mean_overhead", "max_overhead", "mean_aborts", "std_aborts",
    "mean_pops", "mean_stale_pops", "correctness_failures", "violations",
    "timestamp",
]


@dataclass
class ExperimentSpec:
    kind: str
    n: int = 1024
    m: int = 0                      # sssp only; 0 means 10*n
    workload: str = "bst-sort"
    graph_path: str = ""
    graph_format: str = "dimacs-gr"
    scheduler_kinds: tuple = ("exact",)
    k_values: tuple = (2,)
    q_values: tuple = (8,)
    strategies: tuple = ("max-rank",)
    seed_start: int = 0
    seed_count: int = 1
    trials: int = 1000              # inversion-probability only
    tx_contention: int = 8
    tx_workers: int = 4
    tx_duration: int = 1
    out_csv: str = ""
    jobs: int = 1

    def __post_init__(self):
        if self.kind not in EXPERIMENT_KINDS:
            raise InputError(f"unknown experiment kind {self.kind!r}")
        if self.seed_count < 1:
            raise InputError("seed range must be nonempty")

    def grid(self):
        """Fully-specified scheduler grid points."""
        points = []
        for kind in self.scheduler_kinds:
            if kind == "exact":
                points.append(("exact", 1, 1, "max-rank"))
            elif kind == "adversarial":
                for k in self.k_values:
                    for strategy in self.strategies:
                        points.append(("adversarial", k, 1, strategy))
            elif kind == "multiqueue":
                for q in self.q_values:
                    points.append(("multiqueue", 1, q, "max-rank"))
            else:
                raise InputError(f"unknown scheduler kind {kind!r}")
        return points

    def seeds(self):
        return range(self.seed_start, self.seed_start + self.seed_count)

    @classmethod
    def from_file(cls, path, **overrides):
        import tomli

        with open(path, "rb") as fh:
            data = tomli.load(fh)
        data = data.get("experiment", data)
        for key in ("scheduler_kinds", "k_values", "q_values", "strategies"):
            if key in data:
                data[key] = tuple(data[key])
        data.update(overrides)
        return cls(**data)


def _scheduler_seed(seed):
    # Decorrelate the scheduler RNG stream from the instance seed.
    return seed * 0x9E3779B1 % (1 << 62) + 1


def _config_for(point, seed):
    kind, k, q, strategy = point
    return SchedulerConfig(kind=kind, k=k, q=q, adversary_strategy=strategy,
                           rng_seed=_scheduler_seed(seed))


# -- per-cell runners (module level so they pickle for worker pools) -------

def _sort_cell(spec: ExperimentSpec, point, seed):
    workload = generate_instance(spec.workload, spec.n, seed)
    report, _ = run(workload, _config_for(point, seed), instrument=False)
    return {"extra": report.extra_steps, "total": report.total_steps,
            "overhead": report.overhead_ratio}


_GRAPH_CACHE = {}


def _sssp_graph(spec: ExperimentSpec, seed):
    if spec.graph_path:
        key = (spec.graph_path, spec.graph_format)
        if key not in _GRAPH_CACHE:
            _GRAPH_CACHE.clear()
            _GRAPH_CACHE[key] = load_graph(spec.graph_path,
                                           spec.graph_format)
        return _GRAPH_CACHE[key]
    m = spec.m or 10 * spec.n
    key = (spec.n, m, seed)
    if key not in _GRAPH_CACHE:
        _GRAPH_CACHE.clear()
        graph = generate_random_graph(spec.n, m, seed)
        _GRAPH_CACHE[key] = (graph, dijkstra_oracle(graph))
    return _GRAPH_CACHE[key]


def _sssp_cell(spec: ExperimentSpec, point, seed):
    graph, oracle = _sssp_graph(spec, seed)
    dist, pops = relaxed_sssp(graph, _config_for(point, seed),
                              instrument=False)
    correct = dist == oracle
    overhead = pops.total_pops / pops.reachable if pops.reachable else 1.0
    return {"pops": pops.total_pops, "stale": pops.stale_pops,
            "overhead": overhead, "extra": pops.total_pops - pops.reachable,
            "total": pops.total_pops, "correct": correct}


def _txsim_cell(spec: ExperimentSpec, point, seed):
    kind, k, q, strategy = point
    if kind == "multiqueue":
        raise InputError("txsim runs on exact/adversarial schedulers only")
    workload = generate_instance(spec.workload, spec.n, seed)
    config = TxConfig(k=k, contention_bound=spec.tx_contention,
                      workers=spec.tx_workers, duration=spec.tx_duration,
                      rng_seed=_scheduler_seed(seed),
                      adversary_strategy=strategy)
    report = simulate(workload, config)
    violations = verify_tx_properties(report, config)
    return {"aborts": report.aborts, "overhead": report.overhead_ratio,
            "total": report.commits + report.aborts,
            "extra": report.aborts, "violations": len(violations)}


def _lemma_cell(spec: ExperimentSpec, point, seed):
    kind, k, q, strategy = point
    workload = generate_instance(spec.workload, spec.n, seed)
    report, trace = run(workload, _config_for(point, seed))
    violations = assert_lemmas(report, trace, k)
    tx_violations = 0
    if kind != "multiqueue" and spec.workload != "delaunay":
        tx_workload = generate_instance(spec.workload, spec.n, seed)
        config = TxConfig(k=k, contention_bound=spec.tx_contention,
                          workers=spec.tx_workers,
                          duration=spec.tx_duration,
                          rng_seed=_scheduler_seed(seed),
                          adversary_strategy=strategy)
        tx_report = simulate(tx_workload, config)
        tx_violations = len(verify_tx_properties(tx_report, config))
    return {"extra": report.extra_steps, "total": report.total_steps,
            "overhead": report.overhead_ratio,
            "violations": len(violations) + tx_violations}


_CELL_RUNNERS = {
    "sort-overhead": _sort_cell,
    "delaunay-overhead": _sort_cell,
    "sssp-overhead": _sssp_cell,
    "txsim": _txsim_cell,
    "lemma-audit": _lemma_cell,
}


def _run_one(args):
    spec, point, seed = args
    runner = _CELL_RUNNERS[spec.kind]
    return (point, seed), runner(spec, point, seed)


def run_experiment(spec: ExperimentSpec):
    """Execute the full seed x scheduler grid and aggregate one CSV row
    per grid point.  Returns the row dicts; writes spec.out_csv if set."""
    if spec.kind == "inversion-probability":
        raise InputError("use inversion_probability() for this kind")
    if spec.kind in ("sort-overhead", "delaunay-overhead"):
        spec = replace(spec, workload=(
            "delaunay" if spec.kind == "delaunay-overhead" else spec.workload))
    # Seed-major order so consecutive sssp cells reuse the cached graph.
    cells = [(spec, point, seed)
             for seed in spec.seeds() for point in spec.grid()]
    if spec.jobs > 1:
        with ProcessPoolExecutor(max_workers=spec.jobs) as pool:
            results = dict(pool.map(_run_one, cells, chunksize=1))
    else:
        results = dict(map(_run_one, cells))

    rows = []
    for point in spec.grid():
        samples = [results[(point, seed)] for seed in spec.seeds()]
        kind, k, q, strategy = point
        extras = [s["extra"] for s in samples]
        overheads = [s["overhead"] for s in samples]
        row = {
            "experiment": spec.kind,
            "workload": spec.workload,
            "n": spec.n,
            "m": spec.m or "",
            "scheduler": kind,
            "k": k,
            "q": q,
            "strategy": strategy,
            "seeds": len(samples),
            "mean_extra_steps": statistics.fmean(extras),
            "std_extra_steps": statistics.pstdev(extras),
            "mean_total_steps": statistics.fmean(
                s["total"] for s in samples),
            "mean_overhead": statistics.fmean(overheads),
            "max_overhead": max(overheads),
            "mean_aborts": statistics.fmean(
                s["aborts"] for s in samples) if "aborts" in samples[0]
                else "",
            "std_aborts": statistics.pstdev(
                s["aborts"] for s in samples) if "aborts" in samples[0]
                else "",
            "mean_pops": statistics.fmean(
                s["pops"] for s in samples) if "pops" in samples[0] else "",
            "mean_stale_pops": statistics.fmean(
                s["stale"] for s in samples) if "stale" in samples[0]
                else "",
            "correctness_failures": sum(
                0 if s.get("correct", True) else 1 for s in samples),
            "violations": sum(s.get("violations", 0) for s in samples),
            "timestamp": time.strftime("%Y-%m-%dT%H:%M:%S"),
        }
        rows.append(row)
    if spec.out_csv:
        write_csv(spec.out_csv, rows)
    return rows


def write_csv(path, rows):
    with open(path, "w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=CSV_COLUMNS)
        writer.writeheader()
        for row in rows:
            writer.writerow(row)


def hash_csv(path):
    """Content hash of a result CSV with the timestamp column blanked,
    so identical (spec, seed) runs hash identically."""
    digest = hashlib.sha256()
    with open(path, newline="") as fh:
        for row in csv.DictReader(fh):
            row["timestamp"] = ""
            digest.update(repr(sorted(row.items())).encode())
    return digest.hexdigest()


# -- dedicated statistical experiments -------------------------------------

def inversion_probability(n, q, trials, seed):
    """Estimate Pr[label i+1 is returned before label i] for a
    dependency-free label stream drained through a MultiQueue.

    Returns a list of length n-1; entry i-1 estimates Pr[inv_{i,i+1}]."""
    if trials < 1:
        raise InputError("trials must be >= 1")
    counts = [0] * (n - 1)
    for trial in range(trials):
        config = SchedulerConfig(kind="multiqueue", q=q,
                                 rng_seed=seed + trial)
        scheduler = MultiQueueScheduler(config, instrument=False)
        for label in range(1, n + 1):
            scheduler.insert(LabeledTask(task_id=label, label=label), label)
        position = [0] * (n + 1)
        pos = 0
        while not scheduler.empty():
            task, _ = scheduler.approx_get_min()
            scheduler.delete_task(task)
            pos += 1
            position[task.label] = pos
        for i in range(1, n):
            if position[i + 1] < position[i]:
                counts[i - 1] += 1
    return [c / trials for c in counts]


def lower_bound_extra_steps(workload_kind, n_grid, q, seeds, *,
                            scheduler_kind="multiqueue", jobs=1):
    """Mean extra steps vs n under a MultiQueue, with a regression of all
    per-run extra-step counts against ln n.

    Returns (table, slope, p_value) where table maps n to
    (mean_extra, std_extra)."""
    points_x = []
    points_y = []
    table = {}
    for n in n_grid:
        spec = ExperimentSpec(kind="sort-overhead", workload=workload_kind,
                              n=n, scheduler_kinds=(scheduler_kind,),
                              q_values=(q,), seed_start=0, seed_count=seeds,
                              jobs=jobs)
        cells = [(spec, point, seed)
                 for point in spec.grid() for seed in spec.seeds()]
        if jobs > 1:
            with ProcessPoolExecutor(max_workers=jobs) as pool:
                results = list(pool.map(_run_one, cells, chunksize=1))
        else:
            results = list(map(_run_one, cells))
        extras = [value["extra"] for _, value in results]
        table[n] = (statistics.fmean(extras), statistics.pstdev(extras))
        points_x.extend([math.log(n)] * len(extras))
        points_y.extend(extras)
    fit = scipy_stats.linregress(points_x, points_y)
    return table, fit.slope, fit.pvalue
