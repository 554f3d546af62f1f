"""Deterministic discrete-event simulation of cloud task scheduling with
blockchain-as-a-service leases.

Policies: FCFS, SJF, non-preemptive priority, and a hybrid of priority and
SJF with linear aging.
"""

from .engine import Event, EventKind, EventQueue, SimulationRun, simulate
from .entities import (BlockchainLease, CisRegistry, DatacenterSpec, EntityError,
                       LeaseRegistry, VmSpec, VmState, World, exec_duration,
                       uniform_datacenters)
from .metrics import MetricsReport, TaskRecord, compute_report, load_cov, starved_count
from .policies import INFINITE, HybridParams, PolicyId, ReadyTask, effective_priority
from .workload import Cloudlet, Prng, WorkloadConfig, generate, load_csv

__version__ = "0.1.0"

__all__ = [
    "BlockchainLease", "CisRegistry", "Cloudlet", "DatacenterSpec", "EntityError",
    "Event", "EventKind", "EventQueue", "HybridParams", "INFINITE", "LeaseRegistry",
    "MetricsReport", "PolicyId", "Prng", "ReadyTask", "SimulationRun", "TaskRecord",
    "VmSpec", "VmState", "WorkloadConfig", "World", "compute_report",
    "effective_priority", "exec_duration", "generate", "load_cov", "load_csv",
    "simulate", "starved_count", "uniform_datacenters",
]
