"""
One simulation instance: the engine, both clusters and the federation router wired
together through event handlers. Nothing here is global; independent instances may run
side by side.
"""

from typing import *

from yacs.config import CfgNode

from burstsim.clusters import CloudPool, EntryState, HpcCluster, QueueEntry, TERMINAL_STATES
from burstsim.errors import IllegalTransition, InvariantViolation
from burstsim.federation import FederationRouter, Policy, Target, WaitTable, load_policy
from burstsim.sim import EventKind, EventLog, SimEngine, SimEvent
from burstsim.utils.logging import logger
from burstsim.workload import Job, Trace, load_app_profiles, load_trace


class Simulation(object):
    r"""A federated HPC + cloud system driven by a trace.

    Args:
        config (:obj:`CfgNode`): a checked scenario (see :func:`burstsim.config.load_scenario`).
        trace (:obj:`Trace`, optional): the workload; loaded from ``config.trace`` when
            omitted, drawing synthetic workloads from this instance's random stream.
        policy (:obj:`Policy`, optional): overrides ``config.policy.variant``.
    """

    def __init__(self,
                 config: CfgNode,
                 trace: Optional[Trace] = None,
                 policy: Optional[Policy] = None,
                 ):
        self.config = config
        self.engine = SimEngine(seed=config.reproduce.seed)
        self.profiles = load_app_profiles(config)
        self.hpc = HpcCluster.from_config(config.hpc, self.profiles)
        self.cloud = CloudPool.from_config(self.engine, config, self.profiles)
        self.router = FederationRouter(
            hpc=self.hpc,
            cloud=self.cloud,
            policy=policy if policy is not None else load_policy(config.policy),
            wait_table=WaitTable.from_csv(config.policy.wait_table_path or None),
            wait_source=config.policy.wait_source,
        )
        self.horizon_s = config.simulation.horizon_s
        self.check_invariants = config.simulation.check_invariants
        self.unfinished: Set[str] = set()
        self._idle_state: Optional[Tuple] = None

        self.engine.register(EventKind.JOB_ARRIVAL, self.on_arrival)
        self.engine.register(EventKind.JOB_START, self.on_job_start)
        self.engine.register(EventKind.JOB_END, self.on_job_end)
        self.engine.register(EventKind.CANCEL_REQUEST, self.on_cancel)
        self.engine.add_step_hook(self.on_instant)
        if config.autoscaler.enabled:
            self.cloud.start_autoscaler(self.engine.clock)

        if trace is None:
            trace = load_trace(config, self.engine.rng)
        self.trace = trace
        admitted = 0
        for job in trace:
            if self.admits(job.submit_time):
                self.submit(job)
                admitted += 1
        logger.info(f"simulation ready: {admitted}/{len(trace)} jobs admitted, policy {self.router.policy!r}")

    def admits(self, t: int) -> bool:
        return self.horizon_s < 0 or t < self.horizon_s

    @property
    def policy_name(self) -> str:
        return self.router.policy.name

    # submissions

    def submit(self, job: Job, target: Optional[Target] = None):
        r"""Schedule the arrival of ``job`` at its submit time; ``target`` pins the cluster."""
        payload = {"job": job.to_dict()}
        if target is not None:
            payload["target"] = Target(target).value
        self.unfinished.add(job.id)
        return self.engine.schedule(job.submit_time, EventKind.JOB_ARRIVAL, payload)

    # handlers

    def on_arrival(self, event: SimEvent):
        job = Job.from_dict(event.payload["job"])
        target = event.payload.get("target")
        decision = self.router.route(job, event.time, target=Target(target) if target else None)
        self.router.dispatch(decision, job, event.time)
        logger.debug(f"t={event.time} job {job.id} -> {[x.value for x in decision.targets]} ({decision.reason})")

    def _start(self, entry: QueueEntry):
        self.engine.emit(EventKind.JOB_START, {
            "job_id": entry.job.id,
            "cluster": entry.cluster,
            "kind": self.router.target_of(entry.cluster).value,
            "nodes": entry.assigned_nodes,
        })

    def on_job_start(self, event: SimEvent):
        job_id, cluster_name = event.payload["job_id"], event.payload["cluster"]
        target = self.router.target_of(cluster_name)
        entry = self.router.clusters[target].entries[job_id]
        self.engine.schedule(entry.expected_end, EventKind.JOB_END, {
            "job_id": job_id,
            "cluster": cluster_name,
            "outcome": EntryState.WALLTIME_KILLED.value if entry.killed else EntryState.FINISHED.value,
        })
        for sibling in self.router.siblings_to_cancel(job_id, target):
            self.engine.emit(EventKind.CANCEL_REQUEST, {
                "job_id": job_id,
                "cluster": self.router.clusters[sibling].name,
                "reason": "started on {}".format(cluster_name),
            })

    def on_job_end(self, event: SimEvent):
        job_id = event.payload["job_id"]
        cluster = self.router.clusters[self.router.target_of(event.payload["cluster"])]
        cluster.finish(cluster.entries[job_id], event.time, reschedule=False)
        self.unfinished.discard(job_id)

    def on_cancel(self, event: SimEvent):
        job_id = event.payload["job_id"]
        target = self.router.target_of(event.payload["cluster"])
        if not self.router.cancel_copy(job_id, target, event.time):
            raise IllegalTransition("copy of job {} on {} is not pending".format(job_id, event.payload["cluster"]))
        copies = self.router.copies(job_id)
        if all(e.state == EntryState.CANCELLED for e in copies.entries.values()):
            self.unfinished.discard(job_id)

    def cancel(self, job_id: str) -> bool:
        r"""User cancellation at the current clock. Only pending copies can be cancelled;
        returns ``False`` if no copy was pending."""
        pending = self.router.pending_copies(job_id)
        if self.router.copies(job_id) is not None and self.router.copies(job_id).winner is not None:
            return False
        for target in pending:
            self.engine.emit(EventKind.CANCEL_REQUEST, {
                "job_id": job_id,
                "cluster": self.router.clusters[target].name,
                "reason": "user",
            })
        if pending:
            self.on_instant(self.engine.clock)
        return bool(pending)

    def on_instant(self, t: int):
        r"""Scheduling passes once every event of instant ``t`` is in: HPC first, then the
        cloud, repeated while cancellations leave a cluster with a changed queue."""
        while self.hpc.dirty or self.cloud.dirty:
            if self.hpc.dirty:
                for entry in self.hpc.try_schedule(t):
                    self._start(entry)
            if self.cloud.dirty:
                for entry in self.cloud.try_schedule(t):
                    self._start(entry)
        if self.check_invariants:
            self.verify(t)

    def verify(self, t: int):
        self.hpc.check_invariants(t)
        self.cloud.check_invariants(t)
        for job_id, copies in self.router.registry.items():
            executed = [e for e in copies.entries.values()
                        if e.state not in (EntryState.PENDING, EntryState.CANCELLED)]
            if len(executed) > 1:
                raise InvariantViolation("job {} executes on {} clusters".format(job_id, len(executed)))

    # driving

    def _fingerprint(self) -> Tuple:
        return (tuple(e.job.id for e in self.hpc.pending_entries()),
                tuple(e.job.id for e in self.cloud.pending_entries()),
                tuple((vm.id, vm.state.value) for vm in self.cloud.vms.values()))

    def _stalled(self) -> bool:
        r"""True once only autoscale ticks are queued, nothing runs or provisions, the
        cooldown is over and the last tick left the state as the one before it did."""
        idle = (self.engine.only_queued(EventKind.AUTOSCALE_TICK)
                and not self.hpc.running_entries() and not self.cloud.running_entries()
                and not any(vm.provisioning for vm in self.cloud.vms.values())
                and not self.cloud.cooling_down(self.engine.clock))
        if not idle:
            self._idle_state = None
            return False
        state = self._fingerprint()
        stalled = state == self._idle_state
        self._idle_state = state
        return stalled

    def _step(self) -> bool:
        if not self.engine.step():
            return False
        if self._stalled():
            raise InvariantViolation("stalled at t={}: {} job(s) can never start".format(
                self.engine.clock, len(self.unfinished)))
        return True

    def run(self) -> EventLog:
        r"""Process events until every admitted job has finished or been cancelled."""
        while self.unfinished and self._step():
            pass
        if self.unfinished:
            raise InvariantViolation("{} job(s) never finished".format(len(self.unfinished)))
        logger.info(f"run finished at t={self.engine.clock}: {len(self.engine.log)} events")
        return self.engine.log

    def run_until(self, t: int) -> EventLog:
        return self.engine.run_until(t)

    def step_until_terminal(self, job_id: str) -> EventLog:
        while not self.is_terminal(job_id) and self._step():
            pass
        return self.engine.log

    def is_terminal(self, job_id: str) -> bool:
        copies = self.router.copies(job_id)
        if copies is None:
            return False
        return all(e.state in TERMINAL_STATES for e in copies.entries.values())

    @property
    def log(self) -> EventLog:
        return self.engine.log
