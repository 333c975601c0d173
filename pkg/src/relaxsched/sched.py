"""Relaxed priority schedulers: exact, adversarial k-relaxed, MultiQueue.

All three implementations share one contract:

    insert(task, priority)       -- add a resident task
    approx_get_min()             -- peek a task without removing it
    delete_task(task)            -- remove a previously returned task
    decrease_key(task, priority) -- lower a resident task's priority
    empty()                      -- True iff no resident tasks
    finalize_trace()             -- immutable per-run instrumentation

Priorities are compared as (priority, task_id) so ties are deterministic.
A "step" is one approx_get_min call; rank and fairness instrumentation is
counted per step.
"""

from __future__ import annotations

import heapq
import json
import random
from collections import Counter
from dataclasses import dataclass, field
from typing import Any, Optional

from sortedcontainers import SortedList

from .errors import (
    ContractError,
    EmptySchedulerError,
    InputError,
    StructuralError,
)

KINDS = ("exact", "adversarial", "multiqueue")
STRATEGIES = ("max-rank", "delay-top", "random-top-k")


@dataclass(frozen=True)
class LabeledTask:
    """A unit of work.  Lower label means higher priority; labels are unique
    within a run (a permutation of 1..n for the incremental workloads)."""

    task_id: int
    label: int
    payload_ref: Any = None


@dataclass(frozen=True)
class SchedulerConfig:
    kind: str = "exact"
    k: int = 1
    q: int = 1
    adversary_strategy: str = "max-rank"
    rng_seed: int = 0

    def __post_init__(self):
        if self.kind not in KINDS:
            raise InputError(f"unknown scheduler kind {self.kind!r}")
        if self.k < 1:
            raise InputError("relaxation factor k must be >= 1")
        if self.q < 1:
            raise InputError("queue count q must be >= 1")
        if self.kind == "exact" and self.k != 1:
            raise InputError("exact scheduler requires k=1")
        if self.adversary_strategy not in STRATEGIES:
            raise InputError(
                f"unknown adversary strategy {self.adversary_strategy!r}")

    @classmethod
    def from_file(cls, path, **overrides):
        """Load a config from a TOML or INI file.  Keyword overrides win
        over file values (used for CLI flags)."""
        text_fields = {"kind", "adversary_strategy"}
        values = {}
        if str(path).endswith(".toml"):
            import tomli

            with open(path, "rb") as fh:
                data = tomli.load(fh)
            values = data.get("scheduler", data)
        else:
            import configparser

            parser = configparser.ConfigParser()
            read = parser.read(path)
            if not read:
                raise InputError(f"cannot read config file {path}")
            section = "scheduler" if parser.has_section("scheduler") else \
                parser.default_section
            values = dict(parser[section])
        kwargs = {}
        for key, value in values.items():
            if key in text_fields:
                kwargs[key] = str(value)
            elif key in ("k", "q", "rng_seed"):
                kwargs[key] = int(value)
            else:
                raise InputError(f"unknown scheduler config key {key!r}")
        kwargs.update(overrides)
        return cls(**kwargs)


@dataclass
class SchedulerTrace:
    """Per-run instrumentation.  per_step holds (step, label, rank) triples;
    per_task_inversions maps label -> inv(u)."""

    per_step: list = field(default_factory=list)
    per_task_inversions: dict = field(default_factory=dict)
    max_rank_observed: int = 0
    total_steps: int = 0

    def inversion_histogram(self):
        return dict(Counter(self.per_task_inversions.values()))

    def write_jsonl(self, path):
        with open(path, "w") as fh:
            for t, label, rank in self.per_step:
                fh.write(json.dumps({"t": t, "label": label, "rank": rank}))
                fh.write("\n")
            footer = {
                "max_rank_observed": self.max_rank_observed,
                "inversion_histogram": {
                    str(inv): count
                    for inv, count in sorted(self.inversion_histogram().items())
                },
            }
            fh.write(json.dumps(footer))
            fh.write("\n")


class _BaseScheduler:
    """Shared residency bookkeeping and trace/fairness instrumentation.

    With instrument=False the per-step trace, rank computation, and
    inversion counters are skipped (used for large batch experiments where
    only pop counts matter).
    """

    def __init__(self, config: SchedulerConfig, instrument: bool = True):
        self.config = config
        self.instrument = instrument
        self._tasks = {}        # task_id -> LabeledTask
        self._prio = {}         # task_id -> priority
        self._trace = SchedulerTrace()
        self._finalized = False
        # Fairness bookkeeping: the currently tracked minimum resident task
        # and the number of steps it has waited since becoming the minimum.
        self._top_id = None
        self._top_wait = 0

    # -- residency ---------------------------------------------------------

    def empty(self) -> bool:
        return not self._tasks

    def __len__(self):
        return len(self._tasks)

    def _key(self, task_id):
        return (self._prio[task_id], task_id)

    def insert(self, task: LabeledTask, priority) -> None:
        if task.task_id in self._tasks:
            raise StructuralError(
                f"task {task.task_id} is already resident")
        self._tasks[task.task_id] = task
        self._prio[task.task_id] = priority
        self._insert_impl(task.task_id, priority)
        self._refresh_top()

    def delete_task(self, task: LabeledTask) -> None:
        task_id = task.task_id if isinstance(task, LabeledTask) else task
        if task_id not in self._tasks:
            raise StructuralError(f"task {task_id} is not resident")
        self._delete_impl(task_id, self._prio[task_id])
        del self._tasks[task_id]
        del self._prio[task_id]
        self._refresh_top()

    def decrease_key(self, task: LabeledTask, new_priority) -> None:
        task_id = task.task_id if isinstance(task, LabeledTask) else task
        if task_id not in self._tasks:
            raise StructuralError(f"task {task_id} is not resident")
        old = self._prio[task_id]
        if new_priority >= old:
            raise ContractError(
                f"decrease_key on task {task_id}: {new_priority} >= {old}")
        self._decrease_impl(task_id, old, new_priority)
        self._prio[task_id] = new_priority
        self._refresh_top()

    def approx_get_min(self):
        if not self._tasks:
            raise EmptySchedulerError("approx_get_min on empty scheduler")
        task_id, rank = self._select()
        task = self._tasks[task_id]
        self._trace.total_steps += 1
        if self.instrument:
            self._trace.per_step.append(
                (self._trace.total_steps, task.label, rank))
            if rank > self._trace.max_rank_observed:
                self._trace.max_rank_observed = rank
        if self._top_id is not None:
            if task_id == self._top_id:
                prev = self._trace.per_task_inversions.get(task.label, 0)
                self._trace.per_task_inversions[task.label] = max(
                    prev, self._top_wait)
                self._top_wait = 0
            else:
                self._top_wait += 1
        return task, self._prio[task_id]

    def finalize_trace(self) -> SchedulerTrace:
        self._finalized = True
        return self._trace

    # -- minimum tracking --------------------------------------------------

    def _refresh_top(self):
        new_top = self._min_task_id()
        if new_top != self._top_id:
            self._top_id = new_top
            self._top_wait = 0

    def top_wait(self) -> int:
        """Steps the current minimum task has waited since becoming minimum."""
        return self._top_wait

    # -- hooks for subclasses ---------------------------------------------

    def _insert_impl(self, task_id, priority):
        raise NotImplementedError

    def _delete_impl(self, task_id, priority):
        raise NotImplementedError

    def _decrease_impl(self, task_id, old_priority, new_priority):
        raise NotImplementedError

    def _select(self):
        """Return (task_id, rank) for the next approx_get_min."""
        raise NotImplementedError

    def _min_task_id(self):
        raise NotImplementedError

    def resident_labels_below_rank(self, rank):
        """Labels of the rank-1 highest-priority resident tasks (i.e. those
        ordered strictly before the task returned at the given rank).
        Only available on instrumented schedulers with an ordered pool."""
        raise NotImplementedError


class _OrderedPoolScheduler(_BaseScheduler):
    """Exact and adversarial schedulers share one ordered pool."""

    def __init__(self, config, instrument=True):
        super().__init__(config, instrument)
        self._pool = SortedList()

    def _insert_impl(self, task_id, priority):
        self._pool.add((priority, task_id))

    def _delete_impl(self, task_id, priority):
        self._pool.remove((priority, task_id))

    def _decrease_impl(self, task_id, old_priority, new_priority):
        self._pool.remove((old_priority, task_id))
        self._pool.add((new_priority, task_id))

    def _min_task_id(self):
        return self._pool[0][1] if self._pool else None

    def resident_labels_below_rank(self, rank):
        return [self._tasks[tid].label for _, tid in self._pool[:rank - 1]]


class ExactScheduler(_OrderedPoolScheduler):
    """The k=1 special case: always returns the minimum task, rank 1."""

    def _select(self):
        return self._pool[0][1], 1


class AdversarialScheduler(_OrderedPoolScheduler):
    """A k-relaxed scheduler that actively wastes work, subject to RankBound
    (rank <= k per step) and Fairness (inv(u) <= k-1) by construction.

    The fairness window may be widened (test-only) to build negative
    controls that violate the derived R_i <= k^2 guarantee.
    """

    def __init__(self, config, instrument=True, _fairness_window=None):
        super().__init__(config, instrument)
        self._rng = random.Random(config.rng_seed)
        self._window = config.k if _fairness_window is None else _fairness_window

    def _select(self):
        k = self.config.k
        size = len(self._pool)
        if self._top_wait >= self._window - 1:
            # Fairness forces the top task out now.
            idx = 0
        else:
            strategy = self.config.adversary_strategy
            if strategy == "max-rank":
                idx = min(k, size) - 1
            elif strategy == "delay-top":
                idx = min(2, size) - 1
            else:  # random-top-k
                idx = self._rng.randrange(min(k, size))
        rank = idx + 1
        if rank > k and self._window <= k:
            raise AssertionError("RankBound violated by adversary choice")
        return self._pool[idx][1], rank


class MultiQueueScheduler(_BaseScheduler):
    """q internal priority queues; tasks are placed by a seeded consistent
    hash of task_id, and approx_get_min samples two queues uniformly at
    random and returns the better of the two tops.

    Queue internals use lazy deletion: superseded heap entries (from
    decrease_key or delete_task) are skipped when they surface, so the
    semantic queue content never holds duplicates or stale copies.
    """

    def __init__(self, config, instrument=True):
        super().__init__(config, instrument)
        self._rng = random.Random(config.rng_seed)
        self._heaps = [[] for _ in range(config.q)]
        self._home = {}         # task_id -> home queue (consistent hash)
        self._pool = SortedList() if instrument else None

    def _insert_impl(self, task_id, priority):
        home = self._home.get(task_id)
        if home is None:
            home = self._rng.randrange(self.config.q)
            self._home[task_id] = home
        heapq.heappush(self._heaps[home], (priority, task_id))
        if self._pool is not None:
            self._pool.add((priority, task_id))

    def _delete_impl(self, task_id, priority):
        # Lazy: the heap entry becomes stale once residency is dropped.
        if self._pool is not None:
            self._pool.remove((priority, task_id))

    def _decrease_impl(self, task_id, old_priority, new_priority):
        heapq.heappush(self._heaps[self._home[task_id]],
                       (new_priority, task_id))
        if self._pool is not None:
            self._pool.remove((old_priority, task_id))
            self._pool.add((new_priority, task_id))

    def home_queue(self, task_id) -> Optional[int]:
        return self._home.get(task_id)

    def _peek(self, queue_index):
        heap = self._heaps[queue_index]
        prio = self._prio
        while heap:
            priority, task_id = heap[0]
            if prio.get(task_id) == priority:
                return heap[0]
            heapq.heappop(heap)
        return None

    def _select(self):
        entry = None
        while entry is None:
            i = self._rng.randrange(self.config.q)
            j = self._rng.randrange(self.config.q)
            top_i = self._peek(i)
            top_j = self._peek(j)
            if top_i is None:
                entry = top_j
            elif top_j is None:
                entry = top_i
            else:
                entry = min(top_i, top_j)
                # Two-choice rule: the better of the two sampled tops wins.
                assert entry[0] <= max(top_i[0], top_j[0])
        task_id = entry[1]
        if self._pool is not None:
            rank = self._pool.index(entry) + 1
        else:
            rank = 0
        return task_id, rank

    def _min_task_id(self):
        if self._pool is not None:
            return self._pool[0][1] if self._pool else None
        return None

    def resident_labels_below_rank(self, rank):
        if self._pool is None:
            raise ContractError("rank pool disabled (instrument=False)")
        return [self._tasks[tid].label for _, tid in self._pool[:rank - 1]]


def make_scheduler(config: SchedulerConfig, instrument: bool = True):
    if config.kind == "exact":
        return ExactScheduler(config, instrument)
    if config.kind == "adversarial":
        return AdversarialScheduler(config, instrument)
    return MultiQueueScheduler(config, instrument)
