"""Scheduling policies and the VM assignment rule.

The ``select_*`` functions are the reference definitions: each is an
argmin over a total order ending in ``cloudlet_id``. The engine uses the
indexed queues from :func:`make_ready_queue`, which return the same
choices without rescanning the whole ready set on every dispatch.

Priority 0 is the highest. The hybrid policy orders tasks by
(aged priority, length, arrival, id), where the aged priority drops by
one level for every ``aging_quantum_ms`` spent waiting.
"""

from __future__ import annotations

import enum
import heapq
import math
from dataclasses import dataclass
from typing import Iterable, NamedTuple, Optional, Sequence

from .entities import VmState

INFINITE = math.inf


class PolicyId(str, enum.Enum):
    FCFS = "fcfs"
    SJF = "sjf"
    PRIORITY = "priority"
    HYBRID = "hybrid"

    @classmethod
    def parse(cls, name: "str | PolicyId") -> "PolicyId":
        if isinstance(name, PolicyId):
            return name
        try:
            return cls(str(name).strip().lower())
        except ValueError:
            raise ValueError(f"unknown policy: {name}") from None


POLICY_ORDER = (PolicyId.FCFS, PolicyId.SJF, PolicyId.PRIORITY, PolicyId.HYBRID)


@dataclass(frozen=True)
class HybridParams:
    aging_quantum_ms: float = 20000
    priority_levels: int = 8

    def __post_init__(self):
        q = self.aging_quantum_ms
        if q != INFINITE and (not float(q).is_integer() or q <= 0):
            raise ValueError("aging_quantum_ms must be a positive integer or infinite")
        if self.priority_levels < 1:
            raise ValueError("priority_levels must be >= 1")


class ReadyTask(NamedTuple):
    cloudlet_id: int
    arrival_ms: int
    length_mi: int
    priority: int
    user_id: int


def effective_priority(priority: int, arrival_ms: int, now_ms: int,
                       aging_quantum_ms: float) -> int:
    if aging_quantum_ms == INFINITE:
        return priority
    return max(0, priority - (now_ms - arrival_ms) // int(aging_quantum_ms))


def _fcfs_key(t: ReadyTask):
    return (t.arrival_ms, t.cloudlet_id)


def _sjf_key(t: ReadyTask):
    return (t.length_mi, t.arrival_ms, t.cloudlet_id)


def _priority_key(t: ReadyTask):
    return (t.priority, t.arrival_ms, t.cloudlet_id)


def _pick(ready: Iterable[ReadyTask], key) -> Optional[int]:
    best = min(ready, key=key, default=None)
    return None if best is None else best.cloudlet_id


def select_fcfs(ready: Iterable[ReadyTask]) -> Optional[int]:
    return _pick(ready, _fcfs_key)


def select_sjf(ready: Iterable[ReadyTask]) -> Optional[int]:
    return _pick(ready, _sjf_key)


def select_priority(ready: Iterable[ReadyTask]) -> Optional[int]:
    return _pick(ready, _priority_key)


def select_hybrid(ready: Iterable[ReadyTask], now_ms: int,
                  params: HybridParams = HybridParams()) -> Optional[int]:
    q = params.aging_quantum_ms
    return _pick(
        ready,
        lambda t: (effective_priority(t.priority, t.arrival_ms, now_ms, q),
                   t.length_mi, t.arrival_ms, t.cloudlet_id),
    )


def select(policy: PolicyId, ready: Iterable[ReadyTask], now_ms: int = 0,
           params: HybridParams = HybridParams()) -> Optional[int]:
    policy = PolicyId.parse(policy)
    if policy is PolicyId.HYBRID:
        return select_hybrid(ready, now_ms, params)
    return {
        PolicyId.FCFS: select_fcfs,
        PolicyId.SJF: select_sjf,
        PolicyId.PRIORITY: select_priority,
    }[policy](ready)


def assign_vm(idle_vms: Sequence[VmState]) -> int:
    """Least-loaded idle VM by accumulated busy time, lowest id on ties."""
    if not idle_vms:
        raise ValueError("assign_vm called with no idle VM")
    return min(idle_vms, key=lambda v: (v.total_busy_ms, v.vm_id)).vm_id


class StaticReadyQueue:
    """Heap for policies whose key does not change while a task waits."""

    def __init__(self, key):
        self._key = key
        self._heap: list = []

    def __len__(self):
        return len(self._heap)

    def add(self, task: ReadyTask, now_ms: int) -> None:
        heapq.heappush(self._heap, (*self._key(task), task))

    def pop(self, now_ms: int) -> ReadyTask:
        return heapq.heappop(self._heap)[-1]


class AgingReadyQueue:
    """Hybrid ready set indexed by current aged priority.

    One heap per priority level, keyed by (length, arrival, id), plus a
    heap of pending promotions. A task moves down one level at each
    ``arrival + k * quantum``; promotions due by ``now`` are applied before
    every pop, so ``pop(now)`` equals ``select_hybrid(ready, now)``.
    Superseded heap entries are skipped lazily.
    """

    def __init__(self, params: HybridParams):
        self.levels = params.priority_levels
        q = params.aging_quantum_ms
        self.quantum = None if q == INFINITE else int(q)
        self._heaps: list[list] = [[] for _ in range(self.levels)]
        self._level: dict[int, int] = {}
        self._tasks: dict[int, ReadyTask] = {}
        self._promotions: list = []

    def __len__(self):
        return len(self._tasks)

    def _place(self, task: ReadyTask, level: int) -> None:
        self._level[task.cloudlet_id] = level
        heapq.heappush(self._heaps[level],
                       (task.length_mi, task.arrival_ms, task.cloudlet_id))

    def add(self, task: ReadyTask, now_ms: int) -> None:
        if not 0 <= task.priority < self.levels:
            raise ValueError(
                f"cloudlet {task.cloudlet_id}: priority {task.priority} outside "
                f"[0, {self.levels - 1}]"
            )
        q = self.quantum
        level = task.priority
        if q is not None:
            level = max(0, task.priority - (now_ms - task.arrival_ms) // q)
        self._tasks[task.cloudlet_id] = task
        self._place(task, level)
        if level > 0 and q is not None:
            due = task.arrival_ms + (task.priority - level + 1) * q
            heapq.heappush(self._promotions, (due, task.cloudlet_id))

    def _promote(self, now_ms: int) -> None:
        promos = self._promotions
        q = self.quantum
        while promos and promos[0][0] <= now_ms:
            due, cid = heapq.heappop(promos)
            if cid not in self._tasks:
                continue
            level = self._level[cid] - 1
            self._place(self._tasks[cid], level)
            if level > 0:
                heapq.heappush(promos, (due + q, cid))

    def pop(self, now_ms: int) -> ReadyTask:
        self._promote(now_ms)
        for level, heap in enumerate(self._heaps):
            while heap:
                cid = heap[0][2]
                if self._level.get(cid) == level:
                    heapq.heappop(heap)
                    del self._level[cid]
                    return self._tasks.pop(cid)
                heapq.heappop(heap)
        raise IndexError("pop from empty ready queue")


def make_ready_queue(policy: PolicyId, params: HybridParams = HybridParams()):
    policy = PolicyId.parse(policy)
    if policy is PolicyId.HYBRID:
        return AgingReadyQueue(params)
    return StaticReadyQueue(
        {
            PolicyId.FCFS: _fcfs_key,
            PolicyId.SJF: _sjf_key,
            PolicyId.PRIORITY: _priority_key,
        }[policy]
    )
