"""Comparison sorting via BST insertion.

A task inserts one key into a shared BST.  Task j depends on every
ancestor of its node in the *sequential* BST (the tree formed by inserting
keys in label order); by the insertion-order property every such ancestor
has a smaller label, and a task whose sequential parent is processed has
all of its ancestors processed.
"""

from __future__ import annotations

import random

from ..errors import ContractError, InputError
from ..sched import LabeledTask

_NIL = 0  # labels are 1-based; 0 is the null node


class BstSortWorkload:
    """n distinct keys; label order is the (random) insertion order."""

    def __init__(self, keys):
        keys = list(keys)
        if len(set(keys)) != len(keys):
            raise InputError("BST keys must be distinct")
        if not keys:
            raise InputError("need at least one key")
        self.n = len(keys)
        self.keys = keys  # keys[label - 1] is the key of task `label`
        self._build_sequential()
        self._reset_live()

    @classmethod
    def generate(cls, n, rng_seed):
        """n distinct keys drawn uniformly; the iid draw order doubles as a
        uniformly random label permutation."""
        rng = random.Random(rng_seed)
        return cls(rng.sample(range(n * 64), n))

    @classmethod
    def from_key_file(cls, path):
        with open(path) as fh:
            keys = [int(line) for line in fh if line.strip()]
        return cls(keys)

    def _build_sequential(self):
        n = self.n
        self.seq_parent = [_NIL] * (n + 1)
        self.seq_left = [_NIL] * (n + 1)
        self.seq_right = [_NIL] * (n + 1)
        self.ancestors = [()] * (n + 1)
        keys = self.keys
        for label in range(2, n + 1):
            key = keys[label - 1]
            node = 1
            path = []
            while True:
                path.append(node)
                if key < keys[node - 1]:
                    if self.seq_left[node] == _NIL:
                        self.seq_left[node] = label
                        break
                    node = self.seq_left[node]
                else:
                    if self.seq_right[node] == _NIL:
                        self.seq_right[node] = label
                        break
                    node = self.seq_right[node]
            self.seq_parent[label] = node
            self.ancestors[label] = tuple(path)

    def _reset_live(self):
        n = self.n
        self.processed = [False] * (n + 1)
        self.live_left = [_NIL] * (n + 1)
        self.live_right = [_NIL] * (n + 1)
        self.live_root = _NIL

    # -- workload contract -------------------------------------------------

    def initial_tasks(self):
        return [LabeledTask(task_id=label, label=label)
                for label in range(1, self.n + 1)]

    def is_ready(self, label) -> bool:
        # Processed nodes form a root-prefix of every ancestor path, so the
        # parent being processed implies all ancestors are.
        parent = self.seq_parent[label]
        return parent == _NIL or self.processed[parent]

    def unprocessed_ancestors(self, label):
        return [a for a in self.ancestors[label] if not self.processed[a]]

    def process(self, label):
        if not self.is_ready(label):
            raise ContractError(f"task {label} has an unprocessed ancestor")
        key = self.keys[label - 1]
        if self.live_root == _NIL:
            self.live_root = label
        else:
            node = self.live_root
            while True:
                if key < self.keys[node - 1]:
                    if self.live_left[node] == _NIL:
                        self.live_left[node] = label
                        break
                    node = self.live_left[node]
                else:
                    if self.live_right[node] == _NIL:
                        self.live_right[node] = label
                        break
                    node = self.live_right[node]
            if node != self.seq_parent[label]:
                raise ContractError(
                    f"task {label} landed under {node}, expected parent "
                    f"{self.seq_parent[label]}")
        self.processed[label] = True
        return None

    # -- verification helpers ----------------------------------------------

    def live_equals_sequential(self) -> bool:
        return (self.live_root == 1
                and self.live_left == self.seq_left
                and self.live_right == self.seq_right)

    def inorder_keys(self):
        out = []
        stack = []
        node = self.live_root
        while stack or node != _NIL:
            while node != _NIL:
                stack.append(node)
                node = self.live_left[node]
            node = stack.pop()
            out.append(self.keys[node - 1])
            node = self.live_right[node]
        return out
