"""Single-source shortest paths driven by a relaxed priority queue with
DecreaseKey, plus a binary-heap Dijkstra oracle and bucket instrumentation
for the pop-count bound n + O(k^2 * d_max / w_min)."""

from __future__ import annotations

import heapq
import math
import random
from dataclasses import dataclass, field

from .errors import ContractError, InputError
from .graphs import WeightedDigraph
from .sched import LabeledTask, SchedulerConfig, make_scheduler

INF = math.inf


@dataclass
class PopStats:
    total_pops: int = 0
    stale_pops: int = 0
    skipped_pops: int = 0        # pessimistic convention only
    reachable: int = 0
    d_max: int = 0
    w_min: int = 1
    bucket_sizes: list = field(default_factory=list)

    @property
    def bucket_count(self):
        # t = ceil(d_max / w_min); rounds up when w_min does not divide.
        return -(-self.d_max // self.w_min)


def dijkstra_oracle(graph: WeightedDigraph, with_parents: bool = False):
    """Textbook binary-heap Dijkstra; returns distances (math.inf for
    unreachable vertices), plus parent pointers on request."""
    dist = [INF] * graph.n
    parent = [-1] * graph.n
    dist[graph.source] = 0
    heap = [(0, graph.source)]
    indptr = graph._indptr_list
    targets = graph._targets_list
    weights = graph._weights_list
    while heap:
        d, v = heapq.heappop(heap)
        if d > dist[v]:
            continue
        for idx in range(indptr[v], indptr[v + 1]):
            u = targets[idx]
            nd = d + weights[idx]
            if nd < dist[u]:
                dist[u] = nd
                parent[u] = v
                heapq.heappush(heap, (nd, u))
    if with_parents:
        return dist, parent
    return dist


def relaxed_sssp(graph: WeightedDigraph, scheduler_config: SchedulerConfig,
                 *, instrument: bool = True, duplicates: str = "decrease-key",
                 pop_convention: str = "raw"):
    """Run the relaxed-queue SSSP loop; returns (dist, PopStats).

    duplicates="insert-only" disables DecreaseKey and re-inserts fresh
    copies instead (a negative control: stale pops become possible).
    pop_convention="pessimistic" additionally counts, but does not execute,
    pops of vertices that arrive at their final distance before every
    lower bucket is finished (the accounting used by the pop bound).
    """
    if duplicates not in ("decrease-key", "insert-only"):
        raise InputError(f"unknown duplicates mode {duplicates!r}")
    if pop_convention not in ("raw", "pessimistic"):
        raise InputError(f"unknown pop convention {pop_convention!r}")

    scheduler = make_scheduler(scheduler_config, instrument=instrument)
    stats = PopStats()
    n = graph.n
    dist = [INF] * n
    resident = [False] * n
    dist[graph.source] = 0
    indptr = graph._indptr_list
    targets = graph._targets_list
    weights = graph._weights_list

    pessimistic = pop_convention == "pessimistic"
    if pessimistic:
        true_dist = dijkstra_oracle(graph)
        w_min = graph.min_weight()
        bucket_of = [
            (int(d) // w_min if d < INF else -1) for d in true_dist]
        remaining = {}
        for v, b in enumerate(bucket_of):
            if b >= 0:
                remaining[b] = remaining.get(b, 0) + 1
        frontier = 0

    generation = 0  # insert-only mode: fresh task ids per copy

    def push(v, priority):
        nonlocal generation
        if duplicates == "decrease-key":
            if resident[v]:
                scheduler.decrease_key(v, priority)
            else:
                scheduler.insert(LabeledTask(task_id=v, label=v + 1),
                                 priority)
                resident[v] = True
        else:
            generation += 1
            scheduler.insert(
                LabeledTask(task_id=(v, generation), label=v + 1), priority)

    push(graph.source, 0)
    while not scheduler.empty():
        task, cur_dist = scheduler.approx_get_min()
        stats.total_pops += 1
        scheduler.delete_task(task)
        if duplicates == "decrease-key":
            v = task.task_id
            resident[v] = False
        else:
            v = task.task_id[0]
        if cur_dist > dist[v]:
            stats.stale_pops += 1
            continue
        if pessimistic and cur_dist == true_dist[v]:
            if bucket_of[v] > frontier:
                # Under the pessimistic accounting this pop is counted but
                # not executed and the vertex is popped again later; the
                # surcharge is reported instead of replayed, so
                # total_pops + skipped_pops is the pessimistic count.
                stats.skipped_pops += 1
            b = bucket_of[v]
            remaining[b] -= 1
            if remaining[b] == 0:
                del remaining[b]
                if remaining:
                    frontier = min(remaining)
        for idx in range(indptr[v], indptr[v + 1]):
            u = targets[idx]
            nd = cur_dist + weights[idx]
            if nd < dist[u]:
                dist[u] = nd
                push(u, nd)

    stats.reachable = sum(1 for d in dist if d < INF)
    if graph.m:
        stats.w_min = graph.min_weight()
    finite = [int(d) for d in dist if d < INF]
    stats.d_max = max(finite) if finite else 0
    return dist, stats


def bucket_stats(dist, graph: WeightedDigraph, *, parents=None,
                 sample_size=100, rng_seed=0):
    """Bucket partition of the distance profile plus a check of the bucket
    property (no shortest path visits one bucket twice) on sampled
    parent-pointer paths.  Returns a populated PopStats."""
    stats = PopStats()
    stats.w_min = graph.min_weight()
    finite = [(v, int(d)) for v, d in enumerate(dist) if d < INF]
    stats.reachable = len(finite)
    stats.d_max = max((d for _, d in finite), default=0)
    sizes = [0] * (stats.d_max // stats.w_min + 1)
    for _, d in finite:
        sizes[d // stats.w_min] += 1
    stats.bucket_sizes = sizes

    if parents is None:
        oracle, parents = dijkstra_oracle(graph, with_parents=True)
        if [d for d in oracle] != [d for d in dist]:
            raise ContractError("dist does not match shortest distances")
    rng = random.Random(rng_seed)
    candidates = [v for v, _ in finite]
    sample = candidates if len(candidates) <= sample_size else \
        rng.sample(candidates, sample_size)
    for v in sample:
        seen = set()
        node = v
        while node != -1:
            bucket = int(dist[node]) // stats.w_min
            if bucket in seen:
                raise ContractError(
                    f"bucket property violated on path to {v}")
            seen.add(bucket)
            node = parents[node]
    return stats
