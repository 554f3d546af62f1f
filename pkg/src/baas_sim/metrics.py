"""Per-task records, aggregate reports and their CSV forms."""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

TASKS_HEADER = (
    "cloudlet_id", "user_id", "vm_id", "priority", "length_mi",
    "arrival_ms", "start_ms", "finish_ms", "wait_ms", "turnaround_ms",
)
COMPARISON_HEADER = (
    "policy", "n_tasks", "avg_wait_ms", "max_wait_ms",
    "makespan_ms", "load_cov", "starved_count",
)

DEFAULT_STARVATION_THRESHOLD_MS = 300_000


@dataclass(frozen=True, slots=True)
class TaskRecord:
    cloudlet_id: int
    user_id: int
    vm_id: int
    priority: int
    length_mi: int
    arrival_ms: int
    start_ms: int
    finish_ms: int

    @property
    def wait_ms(self) -> int:
        return self.start_ms - self.arrival_ms

    @property
    def turnaround_ms(self) -> int:
        return self.finish_ms - self.arrival_ms


@dataclass(frozen=True)
class MetricsReport:
    policy: str
    n_tasks: int
    total_wait_ms: int
    max_wait_ms: int
    makespan_ms: int
    load_cov: float
    starved_count: int
    per_vm_busy_ms: tuple[int, ...]

    @property
    def avg_wait_ms(self) -> Fraction:
        return Fraction(self.total_wait_ms, self.n_tasks)

    def row(self) -> tuple:
        return (
            self.policy,
            self.n_tasks,
            format_3dp(self.avg_wait_ms),
            self.max_wait_ms,
            self.makespan_ms,
            format_3dp(self.load_cov),
            self.starved_count,
        )


def format_3dp(value) -> str:
    """Exactly three decimals, rounding half away from zero.

    Works on the exact rational value (floats included), so ties are
    detected exactly.
    """
    v = Fraction(value)
    sign = "-" if v < 0 else ""
    q = math.floor(abs(v) * 1000 + Fraction(1, 2))
    return f"{sign}{q // 1000}.{q % 1000:03d}"


def load_cov(per_vm_busy_ms: Sequence[int]) -> float:
    """Population coefficient of variation of per-VM busy time."""
    n = len(per_vm_busy_ms)
    if n == 0:
        raise ValueError("load_cov of an empty list")
    total = sum(per_vm_busy_ms)
    if total <= 0:
        raise ValueError("load_cov undefined for zero mean")
    # sd/mean == sqrt(n*sum(x^2) - sum(x)^2) / sum(x), integer until the sqrt
    spread = n * sum(x * x for x in per_vm_busy_ms) - total * total
    return math.sqrt(spread) / total


def starved_count(records: Iterable[TaskRecord], threshold_ms: int) -> int:
    if threshold_ms < 0:
        raise ValueError("threshold_ms must be >= 0")
    return sum(1 for r in records if r.wait_ms > threshold_ms)


def compute_report(records: Sequence[TaskRecord], vm_busy: Sequence[int], policy,
                   threshold_ms: int = DEFAULT_STARVATION_THRESHOLD_MS) -> MetricsReport:
    if not records:
        raise ValueError("cannot report on an empty run")
    waits = [r.start_ms - r.arrival_ms for r in records]
    return MetricsReport(
        policy=getattr(policy, "value", policy),
        n_tasks=len(records),
        total_wait_ms=sum(waits),
        max_wait_ms=max(waits),
        makespan_ms=max(r.finish_ms for r in records) - min(r.arrival_ms for r in records),
        load_cov=load_cov(vm_busy),
        starved_count=sum(1 for w in waits if w > threshold_ms),
        per_vm_busy_ms=tuple(vm_busy),
    )


def tasks_csv(records: Iterable[TaskRecord]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(TASKS_HEADER)
    for r in sorted(records, key=lambda r: r.cloudlet_id):
        w.writerow((r.cloudlet_id, r.user_id, r.vm_id, r.priority, r.length_mi,
                    r.arrival_ms, r.start_ms, r.finish_ms, r.wait_ms, r.turnaround_ms))
    return buf.getvalue()


def comparison_csv(reports: Iterable[MetricsReport]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(COMPARISON_HEADER)
    for rep in reports:
        w.writerow(rep.row())
    return buf.getvalue()
