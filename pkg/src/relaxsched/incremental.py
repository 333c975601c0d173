"""Generic execution loop for incremental algorithms on relaxed schedulers.

Drives any workload through any scheduler: peek a task, process it if all
of its ancestors are processed, otherwise count one extra step and charge
it to a label pair via the ancestor-chain recursion.
"""

from __future__ import annotations

import csv
import json
from collections import Counter
from dataclasses import dataclass, field

from .errors import ContractError, DeadlockError
from .sched import SchedulerConfig, SchedulerTrace, make_scheduler


@dataclass
class ExecutionReport:
    """Totals for one run.  extra_steps = total_steps - n; charged_pairs
    maps (i, j) label pairs (i < j) to charge counts; per_label_R maps a
    label i to the observed R_i (returns of labels > i before i was
    processed)."""

    n: int = 0
    total_steps: int = 0
    extra_steps: int = 0
    charged_pairs: Counter = field(default_factory=Counter)
    processed_order: list = field(default_factory=list)
    processed_step: dict = field(default_factory=dict)
    per_label_R: dict = field(default_factory=dict)

    @property
    def overhead_ratio(self) -> float:
        return self.total_steps / self.n if self.n else 1.0

    def to_json(self) -> str:
        return json.dumps({
            "n": self.n,
            "total_steps": self.total_steps,
            "extra_steps": self.extra_steps,
            "processed_order": self.processed_order,
            "charged_pairs": [
                [i, j, count]
                for (i, j), count in sorted(self.charged_pairs.items())
            ],
            "per_label_R": {str(i): r for i, r in sorted(
                self.per_label_R.items())},
        })

    def write_charged_pairs_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["i", "j", "count"])
            for (i, j), count in sorted(self.charged_pairs.items()):
                writer.writerow([i, j, count])


def charge_step(workload, blocked_label: int):
    """Walk the ancestor chain of a blocked task down to the pair
    (u', u'') where u' is the highest-priority unprocessed ancestor of u''
    and u' itself is fully ready; returns that (i, j) label pair."""
    ancestors = sorted(workload.unprocessed_ancestors(blocked_label))
    if not ancestors:
        raise ContractError(
            f"charge_step called on processable task {blocked_label}")
    child = blocked_label
    parent = ancestors[0]
    while True:
        up = sorted(workload.unprocessed_ancestors(parent))
        if not up:
            return parent, child
        child = parent
        parent = up[0]


def run(workload, scheduler_config: SchedulerConfig, *,
        instrument: bool = True):
    """Execute a workload to completion.  Returns (ExecutionReport,
    SchedulerTrace).

    With instrument=False, rank-dependent bookkeeping (per_label_R, the
    per-step trace) is skipped; extra-step counting and charging remain.
    """
    scheduler = make_scheduler(scheduler_config, instrument=instrument)
    report = ExecutionReport(n=workload.n)
    for task in workload.initial_tasks():
        scheduler.insert(task, task.label)

    k = scheduler_config.k
    # min_unprocessed tracks the smallest unprocessed label; used both for
    # per_label_R truncation and for deadlock detection.
    processed = [False] * (workload.n + 1)
    min_unprocessed = 1
    blocked_streak = 0
    blocked_streak_hit_top = False

    track_r = instrument

    while not scheduler.empty():
        task, _priority = scheduler.approx_get_min()
        report.total_steps += 1
        label = task.label
        if track_r:
            # All resident tasks ordered before the returned one have
            # smaller labels; each sees one more return of a larger label.
            step = scheduler._trace.per_step[-1]
            for smaller in scheduler.resident_labels_below_rank(step[2]):
                report.per_label_R[smaller] = \
                    report.per_label_R.get(smaller, 0) + 1
        if workload.is_ready(label):
            scheduler.delete_task(task)
            new_tasks = workload.process(label)
            report.processed_order.append(label)
            report.processed_step[label] = report.total_steps
            processed[label] = True
            while (min_unprocessed <= workload.n
                   and processed[min_unprocessed]):
                min_unprocessed += 1
            if new_tasks:
                for new_task in new_tasks:
                    scheduler.insert(new_task, new_task.label)
            blocked_streak = 0
            blocked_streak_hit_top = False
        else:
            report.extra_steps += 1
            pair = charge_step(workload, label)
            report.charged_pairs[pair] += 1
            blocked_streak += 1
            if label == min_unprocessed:
                blocked_streak_hit_top = True
            if blocked_streak >= k and blocked_streak_hit_top:
                raise DeadlockError(
                    f"no progress for {blocked_streak} steps including a "
                    f"blocked top task (label {min_unprocessed})")

    trace = scheduler.finalize_trace()
    return report, trace


def assert_lemmas(report: ExecutionReport, trace: SchedulerTrace, k: int):
    """Check the deterministic consequences of RankBound + Fairness:
    (a) no label >= i + 2k^2 is returned before label i is processed;
    (b) every observed R_i <= k^2.
    Returns a list of violation strings (empty iff compliant)."""
    violations = []
    bound = 2 * k * k
    processed_step = report.processed_step
    n = report.n
    processed = [False] * (n + 2)
    min_unprocessed = 1
    for step, label, _rank in trace.per_step:
        if label - min_unprocessed >= bound:
            violations.append(
                f"A_ij: step {step} returned label {label} while label "
                f"{min_unprocessed} (gap >= {bound}) was unprocessed")
        if processed_step.get(label) == step:
            processed[label] = True
            while min_unprocessed <= n and processed[min_unprocessed]:
                min_unprocessed += 1
    for label, r_value in report.per_label_R.items():
        if r_value > k * k:
            violations.append(
                f"R_i: label {label} observed R={r_value} > k^2={k * k}")
    return violations
