"""
The elastic cloud cluster: VMs colocated on physical hosts, each walking a provisioning
pipeline before it can take jobs, plus the autoscaler that grows and shrinks the pool.
"""

import math
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from typing import *

from yacs.config import CfgNode

from burstsim.clusters.base import BatchCluster, QueueEntry
from burstsim.errors import AboveMax, ConfigError, IllegalTransition, InvariantViolation, PoolExhausted
from burstsim.sim.engine import EventKind, SimEngine, SimEvent
from burstsim.utils.logging import logger
from burstsim.utils.utils import to_fraction
from burstsim.workload.utils import Job, AppProfile


class VmState(str, Enum):
    REQUESTED = "Requested"
    BOOTING = "Booting"
    UPDATING = "Updating"
    INSTALLING_PACKAGES = "InstallingPackages"
    MOUNTING_FILESYSTEMS = "MountingFilesystems"
    CONFIGURING_SCHEDULER = "ConfiguringScheduler"
    CONFIGURING_IDENTITY = "ConfiguringIdentity"
    READY = "Ready"
    BUSY = "Busy"
    DRAINING = "Draining"
    TERMINATED = "Terminated"


# (stage, state it completes, state it leads to); "request" takes no time
PROVISIONING_STAGES = (
    ("request", VmState.REQUESTED, VmState.BOOTING),
    ("boot", VmState.BOOTING, VmState.UPDATING),
    ("update", VmState.UPDATING, VmState.INSTALLING_PACKAGES),
    ("packages", VmState.INSTALLING_PACKAGES, VmState.MOUNTING_FILESYSTEMS),
    ("mounts", VmState.MOUNTING_FILESYSTEMS, VmState.CONFIGURING_SCHEDULER),
    ("scheduler", VmState.CONFIGURING_SCHEDULER, VmState.CONFIGURING_IDENTITY),
    ("identity", VmState.CONFIGURING_IDENTITY, VmState.READY),
)
STAGE_NAMES = tuple(stage for stage, _, _ in PROVISIONING_STAGES[1:])
_STAGE_BY_STATE = {state: (stage, nxt) for stage, state, nxt in PROVISIONING_STAGES}
PROVISIONING_STATES = tuple(state for _, state, _ in PROVISIONING_STAGES)
ALIVE_STATES = PROVISIONING_STATES + (VmState.READY, VmState.BUSY, VmState.DRAINING)


@dataclass
class VmInstance:
    id: str
    host_id: Optional[int]
    role: str = "compute"
    state: VmState = VmState.REQUESTED
    stage_entered_at: int = 0
    requested_at: int = 0
    ready_at: Optional[int] = None
    terminated_at: Optional[int] = None
    job_id: Optional[str] = None

    @property
    def alive(self) -> bool:
        return self.state in ALIVE_STATES

    @property
    def provisioning(self) -> bool:
        return self.state in PROVISIONING_STATES

    def to_dict(self) -> Dict:
        return {"id": self.id, "host_id": self.host_id, "role": self.role, "state": self.state.value,
                "stage_entered_at": self.stage_entered_at, "ready_at": self.ready_at,
                "job_id": self.job_id}


@dataclass
class CloudQueueEntry(QueueEntry):
    vm_ids: List[str] = field(default_factory=list)


@dataclass
class ScaleAction:
    t: int
    demand: int
    target: int
    action: str = "none"
    count: int = 0


class CloudPool(BatchCluster):
    r"""A Jetstream-like pool of homogeneous VMs fronted by a Slurm-like queue.

    Ready VMs are the nodes of the queue. New VMs are placed first-fit by host id and
    become Ready once every provisioning stage has completed; each stage completion is a
    ``VmStageComplete`` event on ``engine``, as is every termination.

    Args:
        engine (:obj:`SimEngine`): engine the pool schedules its VM events on.
        name (:obj:`str`): e.g. ``jetstream``.
        profiles (:obj:`Mapping[str, AppProfile]`): application profiles.
        host_count (:obj:`int`): physical hosts.
        vcpus_per_host (:obj:`int`): physical vCPUs of one host.
        oversubscription (:obj:`Fraction`): vCPU overcommit factor, at least 1.
        vm_vcpus (:obj:`int`): vCPUs of the compute VM flavor, 1 to 44.
        stage_latencies_s (:obj:`Mapping[str, int]`): duration of every provisioning stage.
        min_vms (:obj:`int`): floor of the compute VM count.
        max_vms (:obj:`int`): ceiling of the compute VM count.
        elastic (:obj:`bool`): whether an autoscaler may grow the pool; bounds the largest
            job the queue accepts by ``max_vms`` instead of the current VM count.
        master_vm (:obj:`bool`): keep a persistent Slurm controller VM.
        login_vm (:obj:`bool`): keep a persistent job submission VM.
        headroom_factor (:obj:`Fraction`): autoscaler target multiplier.
        cooldown_s (:obj:`int`): no scale-down within this long of the last scale-up.
        autoscale_interval_s (:obj:`int`): period of the autoscaler tick.
    """
    kind = "cloud"
    entry_class = CloudQueueEntry
    PARTITION = "cloud"

    def __init__(self,
                 engine: SimEngine,
                 name: str,
                 profiles: Mapping[str, AppProfile],
                 host_count: int = 320,
                 vcpus_per_host: int = 48,
                 oversubscription: Fraction = Fraction(1),
                 vm_vcpus: int = 2,
                 stage_latencies_s: Optional[Mapping[str, int]] = None,
                 min_vms: int = 0,
                 max_vms: int = 8,
                 elastic: bool = False,
                 master_vm: bool = True,
                 login_vm: bool = True,
                 headroom_factor: Fraction = Fraction(1),
                 cooldown_s: int = 600,
                 autoscale_interval_s: int = 60,
                 backfill_enabled: bool = True,
                 ):
        latencies = dict(stage_latencies_s or {})
        unknown = set(latencies) - set(STAGE_NAMES)
        if unknown:
            raise ConfigError("{}: unknown provisioning stage(s) {}".format(name, sorted(unknown)))
        if any(v < 0 for v in latencies.values()):
            raise ConfigError("{}: stage latencies must be >= 0".format(name))
        if not 1 <= vm_vcpus <= 44:
            raise ConfigError("{}: vm_vcpus must be in [1, 44]".format(name))
        if host_count < 1 or vcpus_per_host < 1:
            raise ConfigError("{}: host_count and vcpus_per_host must be >= 1".format(name))
        if oversubscription < 1:
            raise ConfigError("{}: oversubscription must be >= 1".format(name))
        self.vms_per_host = math.floor(vcpus_per_host * Fraction(oversubscription) / vm_vcpus)
        if not 0 <= min_vms <= max_vms <= host_count * self.vms_per_host:
            raise ConfigError("{}: need 0 <= min_vms ({}) <= max_vms ({}) <= {} placeable VMs".format(
                name, min_vms, max_vms, host_count * self.vms_per_host))
        if autoscale_interval_s < 1 or cooldown_s < 0 or headroom_factor <= 0:
            raise ConfigError("{}: invalid autoscaler settings".format(name))

        self.engine = engine
        self.host_count = host_count
        self.vcpus_per_host = vcpus_per_host
        self.oversubscription = Fraction(oversubscription)
        self.vm_vcpus = vm_vcpus
        self.stage_latencies_s = {stage: int(latencies.get(stage, 0)) for stage in STAGE_NAMES}
        self.min_vms = min_vms
        self.max_vms = max_vms
        self.elastic = elastic
        self.headroom_factor = Fraction(headroom_factor)
        self.cooldown_s = cooldown_s
        self.autoscale_interval_s = autoscale_interval_s
        self.horizon: Optional[int] = None
        self.last_scale_up: Optional[int] = None
        self.actions: List[ScaleAction] = []

        self.host_used: List[int] = [0] * host_count
        self.vms: Dict[str, VmInstance] = {}
        self._vm_counter = 0
        self.service_vms: List[VmInstance] = []
        for role, wanted in (("master", master_vm), ("login", login_vm)):
            if wanted:
                self.service_vms.append(VmInstance(id="{}-{}".format(name, role), host_id=None, role=role,
                                                   state=VmState.READY, ready_at=0))
        super().__init__(name, profiles, backfill_enabled)
        engine.register(EventKind.VM_STAGE_COMPLETE, self.on_vm_event)
        engine.register(EventKind.AUTOSCALE_TICK, self.on_autoscale_tick)

    @classmethod
    def from_config(cls, engine: SimEngine, config: CfgNode, profiles: Mapping[str, AppProfile]) -> "CloudPool":
        r"""Build the pool from the ``cloud`` and ``autoscaler`` sections of a scenario and
        request its initial VMs at the engine's clock."""
        cloud, autoscaler = config.cloud, config.autoscaler
        pool = cls(engine=engine,
                   name=cloud.name,
                   profiles=profiles,
                   host_count=cloud.host_count,
                   vcpus_per_host=cloud.vcpus_per_host,
                   oversubscription=to_fraction(cloud.oversubscription),
                   vm_vcpus=cloud.vm_vcpus,
                   stage_latencies_s=dict(cloud.stage_latencies_s),
                   min_vms=cloud.min_vms,
                   max_vms=cloud.max_vms,
                   elastic=autoscaler.enabled,
                   master_vm=cloud.master_vm,
                   login_vm=cloud.login_vm,
                   headroom_factor=to_fraction(autoscaler.headroom_factor),
                   cooldown_s=autoscaler.cooldown_s,
                   autoscale_interval_s=autoscaler.interval_s,
                   backfill_enabled=cloud.backfill)
        initial = min(max(cloud.initial_vms, cloud.min_vms), cloud.max_vms)
        pool.scale_up(initial, engine.clock, prewarm=cloud.prewarm)
        logger.info(f"{pool.name}: {pool.host_count} hosts x {pool.vms_per_host} VMs, "
                    f"{initial} initial VM(s), min {pool.min_vms} max {pool.max_vms}, "
                    f"provisioning {pool.provisioning_latency_s}s")
        return pool

    @property
    def provisioning_latency_s(self) -> int:
        return sum(self.stage_latencies_s.values())

    # queue interface

    @property
    def partitions(self) -> List[str]:
        return [self.PARTITION]

    def partition_of(self, job: Job) -> str:
        return self.PARTITION

    def compute_vms(self, *states: VmState) -> List[VmInstance]:
        vms = list(self.vms.values())
        if states:
            vms = [vm for vm in vms if vm.state in states]
        return vms

    @property
    def alive_count(self) -> int:
        r"""Compute VMs not yet Terminated, Draining ones included."""
        return len([vm for vm in self.vms.values() if vm.alive])

    @property
    def active_count(self) -> int:
        r"""Compute VMs that are neither Draining nor Terminated."""
        return len([vm for vm in self.vms.values() if vm.alive and vm.state != VmState.DRAINING])

    def capacity(self, partition: str = PARTITION) -> int:
        return self.max_vms if self.elastic else self.active_count

    def free_nodes(self, partition: str = PARTITION) -> int:
        return len(self.compute_vms(VmState.READY))

    def extra_releases(self, partition: str, now: int) -> List[Tuple[int, int]]:
        return [(max(vm.ready_at, now), 1) for vm in self.vms.values() if vm.provisioning]

    def _release_nodes(self, entry: CloudQueueEntry) -> int:
        return len([i for i in entry.vm_ids if self.vms[i].state == VmState.BUSY])

    def _allocate(self, entry: CloudQueueEntry, t: int):
        ready = self.compute_vms(VmState.READY)[:entry.assigned_nodes]
        if len(ready) < entry.assigned_nodes:
            raise IllegalTransition("{}: job {} needs {} Ready VMs, {} available".format(
                self.name, entry.job.id, entry.assigned_nodes, len(ready)))
        for vm in ready:
            vm.state = VmState.BUSY
            vm.stage_entered_at = t
            vm.job_id = entry.job.id
        entry.vm_ids = [vm.id for vm in ready]

    def _release(self, entry: CloudQueueEntry, t: int):
        for vm_id in entry.vm_ids:
            vm = self.vms[vm_id]
            vm.job_id = None
            if vm.state == VmState.DRAINING:
                self._terminate(vm, t)
            else:
                vm.state = VmState.READY
                vm.stage_entered_at = t

    # VM lifecycle

    def _place(self, n: int) -> List[int]:
        hosts, used = [], list(self.host_used)
        host = 0
        for _ in range(n):
            while host < self.host_count and used[host] + self.vm_vcpus > self.vcpus_per_host * self.oversubscription:
                host += 1
            if host == self.host_count:
                raise PoolExhausted("{}: no host has room for {} more VM(s)".format(self.name, n - len(hosts)))
            used[host] += self.vm_vcpus
            hosts.append(host)
        return hosts

    def placeable(self) -> int:
        free = sum(self.vms_per_host - used // self.vm_vcpus for used in self.host_used)
        return min(free, self.max_vms - self.alive_count)

    def scale_up(self, n: int, t: int, prewarm: bool = False) -> List[VmInstance]:
        r"""Request ``n`` compute VMs at ``t``.

        Each VM schedules its provisioning stages back to back and is Ready at
        ``t`` plus the summed stage latencies, or at ``t`` itself when ``prewarm`` is set.

        Raises:
            AboveMax: the pool would exceed ``max_vms``.
            PoolExhausted: the hosts cannot take ``n`` more VMs.
        """
        if n <= 0:
            return []
        if self.alive_count + n > self.max_vms:
            raise AboveMax("{}: {} alive + {} requested > max_vms {}".format(
                self.name, self.alive_count, n, self.max_vms))
        hosts = self._place(n)
        created = []
        for host in hosts:
            self._vm_counter += 1
            vm = VmInstance(id="{}-vm{:04d}".format(self.name, self._vm_counter), host_id=host,
                            stage_entered_at=t, requested_at=t,
                            ready_at=t if prewarm else t + self.provisioning_latency_s)
            self.host_used[host] += self.vm_vcpus
            self.vms[vm.id] = vm
            self.engine.schedule(t, EventKind.VM_STAGE_COMPLETE, {"vm_id": vm.id, "stage": "request"})
            created.append(vm)
        self.dirty = True
        logger.debug(f"{self.name}: requested {n} VM(s) at t={t}")
        return created

    def scale_down(self, n: int, t: int) -> int:
        r"""Remove up to ``n`` compute VMs, never below ``min_vms``: idle Ready VMs first
        (newest first), then VMs still provisioning, then Busy ones, which drain and
        terminate when their job ends. Returns how many were removed or set draining."""
        count = min(n, self.active_count - self.min_vms)
        if count <= 0:
            return 0
        newest_first = list(reversed(list(self.vms.values())))
        candidates = [vm for vm in newest_first if vm.state == VmState.READY]
        candidates += [vm for vm in newest_first if vm.provisioning]
        candidates += [vm for vm in newest_first if vm.state == VmState.BUSY]
        for vm in candidates[:count]:
            if vm.state == VmState.BUSY:
                vm.state = VmState.DRAINING
                vm.stage_entered_at = t
            else:
                self._terminate(vm, t)
        self.dirty = True
        logger.debug(f"{self.name}: removed {count} VM(s) at t={t}")
        return count

    def _terminate(self, vm: VmInstance, t: int):
        payload = {"vm_id": vm.id, "stage": "terminate"}
        if t > self.engine.clock:
            self.engine.schedule(t, EventKind.VM_STAGE_COMPLETE, payload)
        else:
            self.engine.emit(EventKind.VM_STAGE_COMPLETE, payload)

    def on_vm_event(self, event: SimEvent):
        vm = self.vms[event.payload["vm_id"]]
        stage, t = event.payload["stage"], event.time
        if vm.state == VmState.TERMINATED:
            return
        if stage == "terminate":
            vm.state = VmState.TERMINATED
            vm.stage_entered_at = t
            vm.terminated_at = t
            self.host_used[vm.host_id] -= self.vm_vcpus
            self.dirty = True
            return
        expected, nxt = _STAGE_BY_STATE.get(vm.state, (None, None))
        if stage != expected:
            raise IllegalTransition("{}: stage {} completed while {} is {}".format(
                self.name, stage, vm.id, vm.state.value))
        vm.state = nxt
        vm.stage_entered_at = t
        if nxt == VmState.READY:
            self.dirty = True
            return
        next_stage = _STAGE_BY_STATE[nxt][0]
        delay = 0 if vm.ready_at == vm.requested_at else self.stage_latencies_s[next_stage]
        self.engine.schedule(t + delay, EventKind.VM_STAGE_COMPLETE, {"vm_id": vm.id, "stage": next_stage})

    # autoscaler

    def start_autoscaler(self, t: int, horizon: Optional[int] = None):
        self.horizon = horizon
        self.engine.schedule(t, EventKind.AUTOSCALE_TICK, {"pool": self.name})

    def on_autoscale_tick(self, event: SimEvent):
        self.autoscale_tick(event.time)
        nxt = event.time + self.autoscale_interval_s
        if self.horizon is None or nxt <= self.horizon:
            self.engine.schedule(nxt, EventKind.AUTOSCALE_TICK, {"pool": self.name})

    def pending_node_demand(self) -> int:
        return sum(e.job.nodes for e in self.pending_entries())

    def autoscale_target(self) -> int:
        r"""``clamp(ceil(demand * headroom), min_vms, max_vms)`` over the nodes of queued
        cloud jobs, raised to the widest queued job so a headroom below 1 cannot starve it."""
        pending = self.pending_entries()
        demand = sum(e.job.nodes for e in pending)
        widest = max((e.job.nodes for e in pending), default=0)
        return min(max(math.ceil(demand * self.headroom_factor), widest, self.min_vms), self.max_vms)

    def cooling_down(self, t: int) -> bool:
        return self.last_scale_up is not None and t - self.last_scale_up < self.cooldown_s

    def autoscale_tick(self, t: int) -> ScaleAction:
        r"""Move the pool toward :meth:`autoscale_target`. Scale-down waits until
        ``cooldown_s`` has passed since the last scale-up."""
        demand = self.pending_node_demand()
        target = self.autoscale_target()
        current = self.active_count
        action = ScaleAction(t=t, demand=demand, target=target)
        if target > current:
            n = min(target - current, self.placeable())
            if n > 0:
                self.scale_up(n, t)
                self.last_scale_up = t
                action.action, action.count = "up", n
        elif target < current:
            if not self.cooling_down(t):
                action.count = self.scale_down(current - target, t)
                action.action = "down" if action.count else "none"
        if action.action != "none":
            logger.debug(f"{self.name}: autoscale at t={t}: demand {demand}, target {target}, "
                         f"{action.action} {action.count}")
        self.actions.append(action)
        return action

    def check_invariants(self, t: int):
        super().check_invariants(t)
        for host, used in enumerate(self.host_used):
            if used > self.vcpus_per_host * self.oversubscription:
                raise InvariantViolation("{}: host {} holds {} vCPUs".format(self.name, host, used))
        alive = self.alive_count
        if alive > self.max_vms:
            raise InvariantViolation("{}: {} VMs alive, max_vms is {}".format(self.name, alive, self.max_vms))
        for entry in self.running_entries():
            for vm_id in entry.vm_ids:
                if self.vms[vm_id].state not in (VmState.BUSY, VmState.DRAINING):
                    raise InvariantViolation("{}: job {} holds VM {} in state {}".format(
                        self.name, entry.job.id, vm_id, self.vms[vm_id].state.value))
