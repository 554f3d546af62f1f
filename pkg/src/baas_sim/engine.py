"""Discrete-event core: integer-millisecond clock, event queue, main loop."""

from __future__ import annotations

import enum
import heapq
from typing import NamedTuple, Optional, Sequence

from .entities import EntityError, World, exec_duration
from .metrics import TaskRecord
from .policies import HybridParams, PolicyId, ReadyTask, make_ready_queue
from .workload import Cloudlet


class CausalityError(RuntimeError):
    """An event was scheduled before the current clock."""


class EventKind(enum.IntEnum):
    ARRIVAL = 0
    COMPLETION = 1


class Event(NamedTuple):
    time_ms: int
    seq: int
    kind: EventKind
    cloudlet_id: int
    vm_id: int = -1


class EventQueue:
    """Events ordered by (time_ms, seq); equal timestamps pop FIFO."""

    def __init__(self):
        self._heap: list[Event] = []
        self._next_seq = 0
        self.now_ms = 0

    def __len__(self):
        return len(self._heap)

    def __bool__(self):
        return bool(self._heap)

    def push_event(self, event: Event) -> None:
        if event.time_ms < self.now_ms:
            raise CausalityError(
                f"event at t={event.time_ms} scheduled while clock={self.now_ms}"
            )
        heapq.heappush(self._heap, event)
        self._next_seq = max(self._next_seq, event.seq + 1)

    def schedule(self, time_ms: int, kind: EventKind, cloudlet_id: int,
                 vm_id: int = -1) -> Event:
        """Create an event with the next sequence number and enqueue it."""
        ev = Event(time_ms, self._next_seq, kind, cloudlet_id, vm_id)
        self.push_event(ev)
        return ev

    def peek_time(self) -> Optional[int]:
        return self._heap[0].time_ms if self._heap else None

    def pop_next(self) -> Optional[Event]:
        if not self._heap:
            return None
        ev = heapq.heappop(self._heap)
        self.now_ms = ev.time_ms
        return ev


class SimulationRun:
    """One non-preemptive, space-shared simulation over a finite workload.

    Events sharing a timestamp are all drained before dispatching, so every
    task that arrives or frees a VM at time t is visible to the policy at t.
    Not thread-safe; independent runs share nothing.
    """

    def __init__(self, world: World, cloudlets: Sequence[Cloudlet],
                 policy: PolicyId | str = PolicyId.FCFS,
                 params: HybridParams = HybridParams()):
        self.world = world
        self.policy = PolicyId.parse(policy)
        self.params = params
        self.clock_ms = 0
        self.queue = EventQueue()
        self.ready = make_ready_queue(self.policy, params)
        self.records: list[TaskRecord] = []
        self.dispatch_order: list[int] = []
        self._cloudlets: dict[int, Cloudlet] = {}
        self._running: dict[int, tuple[int, int]] = {}  # cloudlet -> (start, lease)
        self._idle: list[tuple[int, int]] = []
        for c in cloudlets:
            if c.cloudlet_id in self._cloudlets:
                raise EntityError(f"duplicate cloudlet_id {c.cloudlet_id}")
            self._cloudlets[c.cloudlet_id] = c
        for c in sorted(cloudlets, key=lambda c: (c.arrival_ms, c.cloudlet_id)):
            self.queue.schedule(c.arrival_ms, EventKind.ARRIVAL, c.cloudlet_id)

    def run(self) -> list[TaskRecord]:
        world = self.world
        if not world.ready:
            raise EntityError("entity handshake incomplete; refusing to dispatch")
        for vm in world.vms:
            if not vm.idle:
                raise EntityError(f"vm {vm.vm_id} busy at start of run")
        self._idle = [(vm.total_busy_ms, vm.vm_id) for vm in world.vms]
        heapq.heapify(self._idle)

        queue = self.queue
        while queue:
            ev = queue.pop_next()
            self.clock_ms = ev.time_ms
            self._handle(ev)
            while queue and queue.peek_time() == self.clock_ms:
                self._handle(queue.pop_next())
            self._dispatch()

        if len(self.ready) or self._running:
            raise EntityError("run ended with unfinished work")
        self.records.sort(key=lambda r: r.cloudlet_id)
        return self.records

    def _handle(self, ev: Event) -> None:
        c = self._cloudlets[ev.cloudlet_id]
        if ev.kind is EventKind.ARRIVAL:
            self.ready.add(
                ReadyTask(c.cloudlet_id, c.arrival_ms, c.length_mi, c.priority, c.user_id),
                self.clock_ms,
            )
            return
        vm = self.world.vm(ev.vm_id)
        if vm.current_cloudlet != c.cloudlet_id:
            raise EntityError(f"vm {vm.vm_id} is not running cloudlet {c.cloudlet_id}")
        start, lease_id = self._running.pop(c.cloudlet_id)
        self.world.leases.release(lease_id, self.clock_ms)
        vm.current_cloudlet = None
        vm.busy_until_ms = 0
        heapq.heappush(self._idle, (vm.total_busy_ms, vm.vm_id))
        self.records.append(
            TaskRecord(c.cloudlet_id, c.user_id, vm.vm_id, c.priority, c.length_mi,
                       c.arrival_ms, start, self.clock_ms)
        )

    def _dispatch(self) -> None:
        world = self.world
        now = self.clock_ms
        while self._idle and len(self.ready):
            task = self.ready.pop(now)
            # same rule as policies.assign_vm: min (total_busy_ms, vm_id)
            _, vm_id = heapq.heappop(self._idle)
            vm = world.vm(vm_id)
            c = self._cloudlets[task.cloudlet_id]
            duration = exec_duration(c, vm.spec)
            if not self.dispatch_order:
                world.handshake_log.append(("first_dispatch", now))
            lease = world.leases.acquire(c.user_id, c.cloudlet_id, vm_id,
                                         world.chain_for(c.cloudlet_id), now)
            vm.current_cloudlet = c.cloudlet_id
            vm.busy_until_ms = now + duration
            vm.total_busy_ms += duration
            self._running[c.cloudlet_id] = (now, lease.lease_id)
            self.dispatch_order.append(c.cloudlet_id)
            self.queue.schedule(now + duration, EventKind.COMPLETION, c.cloudlet_id, vm_id)

    @property
    def per_vm_busy_ms(self) -> list[int]:
        return [vm.total_busy_ms for vm in self.world.vms]


def simulate(world: World, cloudlets: Sequence[Cloudlet], policy: PolicyId | str,
             params: HybridParams = HybridParams()) -> SimulationRun:
    """Build a run, execute it and return it (records in ``run.records``)."""
    sim = SimulationRun(world, cloudlets, policy, params)
    sim.run()
    return sim
