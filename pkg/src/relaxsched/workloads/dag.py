"""Synthetic explicit-DAG workload: a controlled test substrate where the
dependency relation is given directly as (i, j) label pairs with i < j."""

from __future__ import annotations

import random

from ..errors import InputError
from ..sched import LabeledTask


class SyntheticDagWorkload:
    """Tasks 1..n with an explicit acyclic dependency edge set."""

    def __init__(self, n, edges):
        self.n = n
        self.edges = set()
        self.ancestors = {label: set() for label in range(1, n + 1)}
        self.dependents = {label: [] for label in range(1, n + 1)}
        for i, j in edges:
            if not (1 <= i < j <= n):
                raise InputError(f"bad dependency edge ({i}, {j})")
            if (i, j) in self.edges:
                continue
            self.edges.add((i, j))
            self.ancestors[j].add(i)
            self.dependents[i].append(j)
        self._reset()

    def _reset(self):
        self.processed = [False] * (self.n + 1)
        self._blockers = {
            label: len(self.ancestors[label])
            for label in range(1, self.n + 1)
        }

    # -- workload contract -------------------------------------------------

    def initial_tasks(self):
        return [LabeledTask(task_id=label, label=label)
                for label in range(1, self.n + 1)]

    def is_ready(self, label) -> bool:
        return self._blockers[label] == 0

    def unprocessed_ancestors(self, label):
        return [a for a in self.ancestors[label] if not self.processed[a]]

    def process(self, label):
        self.processed[label] = True
        for dep in self.dependents[label]:
            self._blockers[dep] -= 1
        return None

    # -- file format -------------------------------------------------------

    @classmethod
    def from_tsv(cls, path, n=None):
        edges = []
        highest = 0
        with open(path) as fh:
            for line in fh:
                line = line.strip()
                if not line:
                    continue
                i, j = (int(part) for part in line.split("\t"))
                edges.append((i, j))
                highest = max(highest, j)
        return cls(n if n is not None else highest, edges)

    def write_tsv(self, path):
        with open(path, "w") as fh:
            for i, j in sorted(self.edges):
                fh.write(f"{i}\t{j}\n")


def generate_dag(kind, n, rng_seed, *, density=2.0):
    """Edge generators: 'none' (empty relation), 'chain' (1->2->...->n),
    'fanout' (1 -> everything), and '1/i-tail' where each pair (i, j) is an
    edge independently with probability min(1, density/i) -- matching the
    dependency-density shape of the randomized incremental workloads."""
    if n < 1:
        raise InputError("n must be >= 1")
    rng = random.Random(rng_seed)
    edges = []
    if kind == "none":
        pass
    elif kind == "chain":
        edges = [(i, i + 1) for i in range(1, n)]
    elif kind == "fanout":
        edges = [(1, j) for j in range(2, n + 1)]
    elif kind == "1/i-tail":
        for i in range(1, n):
            p = min(1.0, density / i)
            for j in range(i + 1, n + 1):
                if rng.random() < p:
                    edges.append((i, j))
    else:
        raise InputError(f"unknown DAG kind {kind!r}")
    return SyntheticDagWorkload(n, edges)
