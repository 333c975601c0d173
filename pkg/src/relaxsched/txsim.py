"""Discrete-event simulator of the transactional execution model.

Time advances in global integer steps.  Each of `workers` workers runs at
most one transaction; a transaction occupies `duration` consecutive steps
and attempts to commit at the end.  It aborts iff its interval overlapped
a running transaction it depends on; conflicts resolve in favor of the
higher-priority (lower-label) side, and an aborted transaction re-enters
the scheduler with its original label.

The transactional scheduler only sees a label once fewer than k smaller
labels remain uncommitted (the availability rule), and is fair: at most
k-1 fetches may be served past the highest-priority available label.
"""

from __future__ import annotations

import json
import random
from dataclasses import dataclass, field

from sortedcontainers import SortedList

from .errors import InputError
from .sched import STRATEGIES


@dataclass(frozen=True)
class TxConfig:
    k: int = 1
    contention_bound: int = 1          # C
    workers: int = 1
    duration: int = 1
    rng_seed: int = 0
    adversary_strategy: str = "max-rank"

    def __post_init__(self):
        if self.k < 1:
            raise InputError("k must be >= 1")
        if self.workers < 1 or self.duration < 1:
            raise InputError("workers and duration must be >= 1")
        if self.workers * self.duration > self.contention_bound:
            raise InputError(
                "workers * duration must not exceed the contention bound C")
        if self.adversary_strategy not in STRATEGIES:
            raise InputError(
                f"unknown adversary strategy {self.adversary_strategy!r}")


@dataclass
class TxReport:
    n: int = 0
    commits: int = 0
    aborts: int = 0
    per_tx_abort_counts: dict = field(default_factory=dict)
    availability_trace: dict = field(default_factory=dict)  # label -> step
    fetch_inversions: dict = field(default_factory=dict)    # label -> inv(u)
    events: list = field(default_factory=list)
    # Per-attempt overlap sets: label -> list of sets of overlapping labels.
    attempt_overlaps: dict = field(default_factory=dict)
    commit_fetch_index: dict = field(default_factory=dict)
    first_fetch_index: dict = field(default_factory=dict)
    last_fetch_index: dict = field(default_factory=dict)
    fetch_labels: list = field(default_factory=list)
    commit_step: dict = field(default_factory=dict)
    available_fetch_index: dict = field(default_factory=dict)

    @property
    def overhead_ratio(self):
        return (self.commits + self.aborts) / self.n if self.n else 1.0

    def write_event_log(self, path):
        with open(path, "w") as fh:
            for event in self.events:
                fh.write(json.dumps(event))
                fh.write("\n")


class _Running:
    __slots__ = ("label", "worker", "start", "end", "overlaps")

    def __init__(self, label, worker, start, end):
        self.label = label
        self.worker = worker
        self.start = start
        self.end = end
        self.overlaps = set()


def simulate(workload, config: TxConfig, *, enforce_availability=True):
    """Run every task of `workload` (anything exposing n, ancestors via
    unprocessed_ancestors-compatible data) to commit.  Returns a TxReport.

    enforce_availability=False drops the availability rule (test-only
    negative control; the concurrent A_ij lemma then fails)."""
    n = workload.n
    ancestors = [set(workload.ancestors[label]) if label else set()
                 for label in range(0, n + 1)]
    rng = random.Random(config.rng_seed)
    report = TxReport(n=n)

    uncommitted = SortedList(range(1, n + 1))
    pool = set(range(1, n + 1))     # not committed, not running
    running = {}                    # label -> _Running
    active = []                     # _Running objects currently executing
    step = 0
    fetch_index = 0
    top_label = None
    top_wait = 0
    k = config.k

    def available_labels():
        if enforce_availability:
            window = uncommitted[:k]
        else:
            window = uncommitted
        return [label for label in window if label in pool]

    def refresh_top():
        nonlocal top_label, top_wait
        avail = available_labels()
        new_top = avail[0] if avail else None
        if new_top != top_label:
            top_label = new_top
            top_wait = 0

    def record_availability():
        window = uncommitted[:k] if enforce_availability else uncommitted
        for label in window:
            if label not in report.availability_trace:
                report.availability_trace[label] = step
                report.available_fetch_index[label] = fetch_index

    def fetch():
        """One scheduler return; or None if nothing is available."""
        nonlocal top_label, top_wait, fetch_index
        avail = available_labels()
        if not avail:
            return None
        refresh_top()
        if top_wait >= k - 1:
            choice = avail[0]
        else:
            strategy = config.adversary_strategy
            if strategy == "max-rank":
                choice = avail[-1] if len(avail) <= k else avail[k - 1]
            elif strategy == "delay-top":
                choice = avail[min(1, len(avail) - 1)]
            else:
                choice = avail[rng.randrange(min(k, len(avail)))]
        if choice == top_label:
            prev = report.fetch_inversions.get(choice, 0)
            report.fetch_inversions[choice] = max(prev, top_wait)
            top_wait = 0
        else:
            top_wait += 1
        fetch_index += 1
        report.fetch_labels.append(choice)
        if choice not in report.first_fetch_index:
            report.first_fetch_index[choice] = fetch_index
        report.last_fetch_index[choice] = fetch_index
        return choice

    record_availability()
    while uncommitted:
        # Phase A: commit attempts for transactions ending now, resolved in
        # priority (label) order.
        ending = sorted(label for label, tx in running.items()
                        if tx.end == step - 1)
        for label in ending:
            tx = running.pop(label)
            active.remove(tx)
            conflicted = sorted(
                other for other in tx.overlaps
                if other in ancestors[label])
            report.attempt_overlaps.setdefault(label, []).append(
                set(tx.overlaps))
            if conflicted:
                report.aborts += 1
                report.per_tx_abort_counts[label] = \
                    report.per_tx_abort_counts.get(label, 0) + 1
                pool.add(label)
                report.events.append({"step": step, "worker": tx.worker,
                                      "event": "abort", "label": label,
                                      "conflict_with": conflicted[0]})
            else:
                report.commits += 1
                uncommitted.remove(label)
                report.commit_step[label] = step
                report.commit_fetch_index[label] = fetch_index
                report.events.append({"step": step, "worker": tx.worker,
                                      "event": "commit", "label": label})
        if ending:
            record_availability()
            refresh_top()
        if not uncommitted:
            break
        # Phase B: idle workers fetch, in worker order.
        busy = {tx.worker for tx in running.values()}
        for worker in range(config.workers):
            if worker in busy:
                continue
            label = fetch()
            if label is None:
                break
            pool.discard(label)
            tx = _Running(label, worker, step, step + config.duration - 1)
            tx.overlaps.update(other.label for other in active)
            for other in active:
                other.overlaps.add(label)
            active.append(tx)
            running[label] = tx
            busy.add(worker)
            report.events.append({"step": step, "worker": worker,
                                  "event": "fetch", "label": label})
            refresh_top()
        step += 1
    return report


def verify_tx_properties(report: TxReport, config: TxConfig):
    """Check the transactional-model guarantees on a finished run; returns
    a list of violation strings (empty iff compliant):
      (a) availability rule held at every fetch
      (b) fetch fairness inv(u) <= k-1
      (c) interval contention <= C for every attempt
      (d) no label >= i + 2k(C+k) fetched before commit of i or run
          concurrently with i
      (e) R_i <= k(k+C)
    """
    violations = []
    k = config.k
    C = config.contention_bound
    n = report.n

    # (a) at each fetch of u, fewer than k smaller labels were uncommitted;
    # reconstructed by replaying fetch/commit order.  commit_fetch records
    # the fetch counter at commit time, so "committed before fetch #idx"
    # means commit_fetch <= idx - 1.
    commit_fetch = report.commit_fetch_index
    for label in range(1, n + 1):
        if label not in report.first_fetch_index:
            violations.append(f"availability: label {label} never fetched")
    uncommitted_replay = SortedList(range(1, n + 1))
    commits_in_order = sorted(
        commit_fetch.items(), key=lambda item: item[1])
    next_commit = 0
    for idx, label in enumerate(report.fetch_labels, start=1):
        while (next_commit < len(commits_in_order)
               and commits_in_order[next_commit][1] <= idx - 1):
            uncommitted_replay.remove(commits_in_order[next_commit][0])
            next_commit += 1
        if report.first_fetch_index.get(label) != idx:
            continue
        smaller_uncommitted = uncommitted_replay.bisect_left(label)
        if smaller_uncommitted > k - 1:
            violations.append(
                f"availability: label {label} fetched with "
                f"{smaller_uncommitted} smaller uncommitted labels")

    # (b)
    for label, inv in report.fetch_inversions.items():
        if inv > k - 1:
            violations.append(
                f"fairness: label {label} waited {inv} fetches > k-1")

    # (c)
    for label, attempts in report.attempt_overlaps.items():
        for overlaps in attempts:
            if len(overlaps) > C:
                violations.append(
                    f"contention: label {label} overlapped {len(overlaps)} "
                    f"> C={C}")

    # (d)
    bound = 2 * k * (C + k)
    fetch_labels = report.fetch_labels
    committed = [False] * (n + 2)
    min_uncommitted = 1
    commit_at_fetch = {}
    for label, idx in commit_fetch.items():
        commit_at_fetch.setdefault(idx, []).append(label)
    for idx, label in enumerate(fetch_labels, start=1):
        if label - min_uncommitted >= bound:
            violations.append(
                f"A_ij: fetch #{idx} returned label {label} while label "
                f"{min_uncommitted} was uncommitted (gap >= {bound})")
        for done in commit_at_fetch.get(idx, ()):
            committed[done] = True
        while min_uncommitted <= n and committed[min_uncommitted]:
            min_uncommitted += 1
    for label, attempts in report.attempt_overlaps.items():
        for overlaps in attempts:
            for other in overlaps:
                if other - label >= bound:
                    violations.append(
                        f"A_ij: label {other} ran concurrently with "
                        f"{label} (gap >= {bound})")

    # (e) fetches of larger labels between availability and the committing
    # fetch of i, plus all transactions ever concurrent with i.
    r_bound = k * (k + C)
    for label in range(1, n + 1):
        start = report.available_fetch_index.get(label, 0)
        end = report.last_fetch_index.get(label)
        if end is None:
            continue
        # Fetches strictly between availability and the committing fetch.
        larger = sum(1 for other in fetch_labels[start:end - 1]
                     if other > label)
        concurrent = set()
        for overlaps in report.attempt_overlaps.get(label, ()):
            concurrent.update(overlaps)
        r_value = larger + len(concurrent)
        if r_value > r_bound:
            violations.append(
                f"R_i: label {label} observed R={r_value} > "
                f"k(k+C)={r_bound}")
    return violations
