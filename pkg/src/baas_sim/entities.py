"""Datacenter, Cloud Info Service, VMs and the blockchain lease layer.

Blockchains are bookkeeping only: a lease binds a user's cloudlet to a
VM and a virtual chain id for the duration of its execution.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

from .workload import Cloudlet


class EntityError(RuntimeError):
    """Inconsistent entity state; inside a run this means a simulator bug."""


@dataclass(frozen=True)
class VmSpec:
    vm_id: int
    mips: int = 250
    pes: int = 1
    ram_mb: int = 512
    bandwidth: int = 1000
    image_size_mb: int = 10000

    def __post_init__(self):
        if self.mips < 1:
            raise EntityError(f"vm {self.vm_id}: mips must be >= 1")
        if self.pes < 1:
            raise EntityError(f"vm {self.vm_id}: pes must be >= 1")


@dataclass(frozen=True)
class DatacenterSpec:
    dc_id: int
    vm_specs: tuple[VmSpec, ...]

    def __post_init__(self):
        if not self.vm_specs:
            raise EntityError(f"datacenter {self.dc_id} hosts no VMs")
        ids = [v.vm_id for v in self.vm_specs]
        if len(set(ids)) != len(ids):
            raise EntityError(f"datacenter {self.dc_id}: duplicate vm_id")


@dataclass(slots=True)
class VmState:
    spec: VmSpec
    busy_until_ms: int = 0
    total_busy_ms: int = 0
    current_cloudlet: Optional[int] = None

    @property
    def vm_id(self) -> int:
        return self.spec.vm_id

    @property
    def idle(self) -> bool:
        return self.current_cloudlet is None


@dataclass(slots=True)
class BlockchainLease:
    lease_id: int
    user_id: int
    cloudlet_id: int
    vm_id: int
    chain_id: int
    acquired_ms: int
    released_ms: Optional[int] = None

    @property
    def active(self) -> bool:
        return self.released_ms is None


class CisRegistry:
    """Cloud Info Service: datacenter registration and virtual chain ids."""

    def __init__(self):
        self.datacenters: dict[int, DatacenterSpec] = {}
        self.chains: list[int] = []
        self._chain_set: set[int] = set()

    def register_datacenter(self, dc: DatacenterSpec) -> None:
        if dc.dc_id in self.datacenters:
            raise EntityError(f"datacenter {dc.dc_id} already registered")
        self.datacenters[dc.dc_id] = dc

    def prepare_blockchains(self, count: int) -> list[int]:
        if count < 0:
            raise EntityError("blockchain count must be >= 0")
        start = self.chains[-1] + 1 if self.chains else 0
        fresh = list(range(start, start + count))
        self.chains.extend(fresh)
        self._chain_set.update(fresh)
        return fresh

    def has_chain(self, chain_id: int) -> bool:
        return chain_id in self._chain_set

    def dc_characteristics(self, dc_id: int) -> DatacenterSpec:
        try:
            return self.datacenters[dc_id]
        except KeyError:
            raise EntityError(f"unknown datacenter {dc_id}") from None


class LeaseRegistry:
    """Issues and retires blockchain leases; one active lease per cloudlet."""

    def __init__(self, cis: CisRegistry):
        self.cis = cis
        self.leases: list[BlockchainLease] = []
        self._active: dict[int, BlockchainLease] = {}
        self.released_count = 0

    @property
    def acquired_count(self) -> int:
        return len(self.leases)

    @property
    def active_count(self) -> int:
        return len(self._active)

    def active_for(self, cloudlet_id: int) -> Optional[BlockchainLease]:
        return self._active.get(cloudlet_id)

    def acquire(self, user_id, cloudlet_id, vm_id, chain_id, now_ms) -> BlockchainLease:
        if not self.cis.has_chain(chain_id):
            raise EntityError(f"unknown chain {chain_id}")
        if cloudlet_id in self._active:
            raise EntityError(f"cloudlet {cloudlet_id} already holds an active lease")
        lease = BlockchainLease(
            lease_id=len(self.leases),
            user_id=user_id,
            cloudlet_id=cloudlet_id,
            vm_id=vm_id,
            chain_id=chain_id,
            acquired_ms=now_ms,
        )
        self.leases.append(lease)
        self._active[cloudlet_id] = lease
        return lease

    def release(self, lease_id: int, now_ms: int) -> BlockchainLease:
        if not 0 <= lease_id < len(self.leases):
            raise EntityError(f"unknown lease {lease_id}")
        lease = self.leases[lease_id]
        if lease.released_ms is not None:
            raise EntityError(f"lease {lease_id} already released")
        if now_ms < lease.acquired_ms:
            raise EntityError(f"lease {lease_id} released before it was acquired")
        lease.released_ms = now_ms
        del self._active[lease.cloudlet_id]
        self.released_count += 1
        return lease


def exec_duration(cloudlet: Cloudlet, vm_spec: VmSpec) -> int:
    """Execution time in ms: ceil(length * 1000 / (mips * usable PEs))."""
    if cloudlet.length_mi < 1:
        raise EntityError(f"cloudlet {cloudlet.cloudlet_id}: length_mi must be >= 1")
    if vm_spec.mips < 1:
        raise EntityError(f"vm {vm_spec.vm_id}: mips must be >= 1")
    rate = vm_spec.mips * min(cloudlet.pes, vm_spec.pes)
    return -(-cloudlet.length_mi * 1000 // rate)


@dataclass
class World:
    """Everything one simulation run owns besides the event queue.

    ``build`` performs the setup handshake (broker request, datacenter
    registration, chain preparation, characteristics response) and logs
    each step in ``handshake_log``. Runs refuse to dispatch until it
    has completed.
    """

    cis: CisRegistry = field(default_factory=CisRegistry)
    vms: list[VmState] = field(default_factory=list)
    leases: Optional[LeaseRegistry] = None
    handshake_log: list[tuple] = field(default_factory=list)
    ready: bool = False

    @classmethod
    def build(cls, datacenters: list[DatacenterSpec], chains: int) -> "World":
        if chains < 1:
            raise EntityError("chains must be >= 1")
        if not datacenters:
            raise EntityError("at least one datacenter is required")
        world = cls()
        world.leases = LeaseRegistry(world.cis)
        world.handshake_log.append(("broker_request",))
        for dc in datacenters:
            world.cis.register_datacenter(dc)
            world.handshake_log.append(("dc_registration", dc.dc_id))
        world.cis.prepare_blockchains(chains)
        world.handshake_log.append(("blockchain_preparation", chains))
        seen_vms = set()
        for dc in datacenters:
            spec = world.cis.dc_characteristics(dc.dc_id)
            world.handshake_log.append(("dc_characteristics", dc.dc_id))
            for vm in spec.vm_specs:
                if vm.vm_id in seen_vms:
                    raise EntityError(f"vm_id {vm.vm_id} used by two datacenters")
                seen_vms.add(vm.vm_id)
                world.vms.append(VmState(vm))
        world.vms.sort(key=lambda v: v.vm_id)
        world.ready = True
        return world

    def chain_for(self, cloudlet_id: int) -> int:
        chains = self.cis.chains
        return chains[cloudlet_id % len(chains)]

    def vm(self, vm_id: int) -> VmState:
        # vms are sorted and usually dense from 0
        if 0 <= vm_id < len(self.vms) and self.vms[vm_id].vm_id == vm_id:
            return self.vms[vm_id]
        for v in self.vms:
            if v.vm_id == vm_id:
                return v
        raise EntityError(f"unknown vm {vm_id}")


def uniform_datacenters(vm_count: int, dc_count: int = 1, template: VmSpec | None = None
                        ) -> list[DatacenterSpec]:
    """Spread ``vm_count`` identical VMs round-robin over ``dc_count`` datacenters."""
    if dc_count < 1:
        raise EntityError("dc_count must be >= 1")
    if vm_count < dc_count:
        raise EntityError("vm_count must be >= dc_count so every datacenter hosts a VM")
    template = template or VmSpec(vm_id=0)
    per_dc: list[list[VmSpec]] = [[] for _ in range(dc_count)]
    for i in range(vm_count):
        per_dc[i % dc_count].append(
            VmSpec(i, template.mips, template.pes, template.ram_mb,
                   template.bandwidth, template.image_size_mb)
        )
    return [DatacenterSpec(d, tuple(vms)) for d, vms in enumerate(per_dc)]
