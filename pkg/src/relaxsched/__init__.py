"""Deterministic simulation framework for incremental algorithms driven by
exact, adversarial k-relaxed, and MultiQueue priority schedulers."""

from .sched import (
    LabeledTask,
    SchedulerConfig,
    SchedulerTrace,
    make_scheduler,
)
from .incremental import ExecutionReport, assert_lemmas, charge_step, run

__all__ = [
    "LabeledTask",
    "SchedulerConfig",
    "SchedulerTrace",
    "make_scheduler",
    "ExecutionReport",
    "assert_lemmas",
    "charge_step",
    "run",
]

__version__ = "0.1.0"
