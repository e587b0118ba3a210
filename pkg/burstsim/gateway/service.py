"""
The gateway's state: system and application registries plus gateway jobs, fronting one
simulation instance. All access goes through a single lock, so the simulation only ever
sees one request at a time.
"""

import threading
from typing import *

from yacs.config import CfgNode

from burstsim.clusters import EntryState
from burstsim.errors import BurstSimError
from burstsim.federation import Target
from burstsim.gateway.models import (
    AppRegistration,
    BadRequest,
    Conflict,
    EXECUTION_KINDS,
    ExecutionSystem,
    GatewayJob,
    GatewayStatus,
    NotFound,
    StorageSystem,
    SYSTEM_KINDS,
)
from burstsim.simulation import Simulation
from burstsim.utils.logging import logger
from burstsim.workload import CLUSTER_HINTS, Job, Trace


def _positive_int(params: Mapping, key: str, default: Optional[int] = None) -> int:
    value = params.get(key, default)
    if value is None:
        raise BadRequest("parameters.{} is required".format(key))
    if isinstance(value, bool) or not isinstance(value, int) or value < 1:
        raise BadRequest("parameters.{} must be a positive integer".format(key))
    return value


def _text(body: Mapping, key: str, required: bool = True, default: str = "") -> str:
    value = body.get(key, None)
    if value is None:
        if required:
            raise BadRequest("field {!r} is required".format(key))
        return default
    if not isinstance(value, str) or (required and not value.strip()):
        raise BadRequest("field {!r} must be a non-empty string".format(key))
    return value


class GatewayService(object):
    r"""Agave-style registries and job tracking on top of a :class:`Simulation`.

    Virtual time only moves when a request asks for it: a ``sim_time`` argument first
    advances the simulation, and a job submitted without one blocks until it is terminal.

    Args:
        config (:obj:`CfgNode`): the scenario; its trace is ignored, jobs come from the API.
        preregister (:obj:`bool`): register the scenario's two execution systems, a
            storage system and one application per profile.
    """

    def __init__(self, config: CfgNode, preregister: bool = True):
        self.config = config
        self.simulation = Simulation(config, trace=Trace())
        self.lock = threading.Lock()
        self.systems: Dict[str, Union[ExecutionSystem, StorageSystem]] = {}
        self.apps: Dict[str, AppRegistration] = {}
        self.jobs: Dict[str, GatewayJob] = {}
        self._submitted = 0
        if preregister:
            self._preregister()

    def _preregister(self):
        hpc, cloud = self.simulation.hpc, self.simulation.cloud
        self._add_system(ExecutionSystem(hpc.name, "hpc", "HPC system, {} nodes".format(hpc.total_nodes)))
        self._add_system(ExecutionSystem(cloud.name, "cloud", "cloud extension, up to {} VMs".format(cloud.max_vms)))
        self._add_system(StorageSystem("{}-work".format(hpc.name), self.config.gateway.storage_root,
                                       "shared work filesystem"))
        for profile in self.simulation.profiles.values():
            app_id = "{}-{}".format(profile.name, profile.version) if profile.version else profile.name
            self._add_app(AppRegistration(app_id, profile.name, profile.version, profile.name,
                                          description=profile.description))

    # virtual time

    @property
    def clock(self) -> int:
        return self.simulation.engine.clock

    def _advance(self, sim_time: Optional[int], inclusive: bool = True):
        if sim_time is None:
            return
        if sim_time < self.clock:
            raise BadRequest("X-Sim-Time {} is before the simulation clock {}".format(sim_time, self.clock))
        try:
            if inclusive:
                self.simulation.run_until(sim_time)
            else:
                self.simulation.engine.run_before(sim_time)
        except BurstSimError as e:
            raise BadRequest(str(e))

    # registries

    def _add_system(self, system):
        if system.id in self.systems:
            raise Conflict("system {!r} already exists".format(system.id))
        self.systems[system.id] = system
        return system

    def _add_app(self, app: AppRegistration):
        if app.id in self.apps:
            raise Conflict("app {!r} already exists".format(app.id))
        if any((a.name, a.version) == (app.name, app.version) for a in self.apps.values()):
            raise Conflict("app {} {} already registered".format(app.name, app.version))
        self.apps[app.id] = app
        return app

    def register_system(self, body: Mapping) -> Dict:
        system_id = _text(body, "id")
        kind = _text(body, "kind")
        if kind not in SYSTEM_KINDS:
            raise BadRequest("kind must be one of {}".format(SYSTEM_KINDS))
        description = _text(body, "description", required=False)
        with self.lock:
            if kind == "storage":
                system = StorageSystem(system_id, _text(body, "root_path", required=False, default="/"), description)
            else:
                system = ExecutionSystem(system_id, kind, description)
            return self._add_system(system).to_dict()

    def list_systems(self) -> List[Dict]:
        with self.lock:
            return [s.to_dict() for s in self.systems.values()]

    def register_app(self, body: Mapping) -> Dict:
        name = _text(body, "name")
        version = _text(body, "version", required=False)
        profile = _text(body, "profile", required=False, default=name)
        app_id = _text(body, "id", required=False, default="{}-{}".format(name, version) if version else name)
        default_system = body.get("default_system")
        with self.lock:
            if profile not in self.simulation.profiles:
                raise BadRequest("no run-time profile named {!r}".format(profile))
            if default_system is not None:
                self._execution_system(default_system)
            app = AppRegistration(app_id, name, version, profile, default_system,
                                  _text(body, "description", required=False))
            return self._add_app(app).to_dict()

    def list_apps(self) -> List[Dict]:
        with self.lock:
            return [a.to_dict() for a in self.apps.values()]

    def _execution_system(self, system_id) -> ExecutionSystem:
        system = self.systems.get(system_id)
        if system is None:
            raise NotFound("unknown system {!r}".format(system_id))
        if system.kind not in EXECUTION_KINDS:
            raise BadRequest("system {!r} is not an execution system".format(system_id))
        return system

    # jobs

    def submit_job(self, body: Mapping, sim_time: Optional[int] = None) -> Dict:
        r"""Create a gateway job and hand it to the simulation.

        With ``sim_time`` the job is submitted at that virtual time and the call returns at
        once; without it the job is submitted at the current clock and the simulation runs
        until the job is terminal.
        """
        app_id = _text(body, "app")
        params = body.get("parameters") or {}
        if not isinstance(params, Mapping):
            raise BadRequest("parameters must be an object")
        target = body.get("target", "auto") or "auto"
        hint = body.get("cluster_hint", "auto")
        if hint not in CLUSTER_HINTS:
            raise BadRequest("cluster_hint must be one of {}".format(CLUSTER_HINTS))
        with self.lock:
            app = self.apps.get(app_id)
            if app is None:
                raise NotFound("unknown app {!r}".format(app_id))
            profile = self.simulation.profiles[app.profile]
            nodes = _positive_int(params, "nodes")
            tasks_per_node = _positive_int(params, "tasks_per_node", 1)
            walltime = _positive_int(params, "req_walltime_s")
            runtime = _positive_int(params, "base_runtime_s", profile.base_runtime_s)
            if target == "auto" and app.default_system:
                target = app.default_system
            pinned = None if target == "auto" else Target(self._execution_system(target).kind)

            self._advance(sim_time, inclusive=False)
            submit_time = self.clock
            job = Job(id="gw-{}".format(self._submitted + 1), submit_time=submit_time, app=profile.name,
                      nodes=nodes, req_walltime_s=walltime, base_runtime_s=runtime,
                      user=str(body.get("user", "anon")), tasks_per_node=tasks_per_node, cluster_hint=hint)
            if not self.simulation.router.fits_somewhere(job):
                raise BadRequest("no execution system can hold {} nodes".format(nodes))
            try:
                self.simulation.submit(job, target=pinned)
            except BurstSimError as e:
                raise BadRequest(str(e))
            self._submitted += 1
            gjob = GatewayJob(id=job.id, app_id=app.id,
                              parameters={"nodes": nodes, "tasks_per_node": tasks_per_node,
                                          "req_walltime_s": walltime, "base_runtime_s": runtime},
                              target=target)
            gjob.provenance = {
                "inputs": dict(gjob.parameters),
                "app": {"id": app.id, "name": app.name, "version": app.version},
                "submit_time": submit_time,
            }
            gjob.advance(GatewayStatus.SUBMITTED)
            self.jobs[gjob.id] = gjob
            logger.info(f"gateway job {gjob.id} ({app.id}, {nodes} nodes) submitted at t={submit_time}")
            if sim_time is None:
                try:
                    self.simulation.step_until_terminal(gjob.id)
                except BurstSimError as e:
                    raise BadRequest(str(e))
            return self._refresh(gjob).to_dict()

    def get_job(self, job_id: str, sim_time: Optional[int] = None) -> Dict:
        with self.lock:
            self._advance(sim_time)
            return self._refresh(self._job(job_id)).to_dict()

    def list_jobs(self, sim_time: Optional[int] = None) -> List[Dict]:
        with self.lock:
            self._advance(sim_time)
            return [self._refresh(j).to_dict() for j in self.jobs.values()]

    def cancel_job(self, job_id: str, sim_time: Optional[int] = None) -> Dict:
        r"""Cancel pending copies; a running or finished job is left alone."""
        with self.lock:
            self._advance(sim_time)
            gjob = self._job(job_id)
            cancelled = self.simulation.cancel(job_id)
            return {"id": job_id, "cancelled": cancelled, "status": self._refresh(gjob).status.value}

    def _job(self, job_id: str) -> GatewayJob:
        gjob = self.jobs.get(job_id)
        if gjob is None:
            raise NotFound("unknown job {!r}".format(job_id))
        return gjob

    def _system_for(self, cluster_name: str, kind: str) -> str:
        if cluster_name in self.systems:
            return cluster_name
        for system in self.systems.values():
            if system.kind == kind:
                return system.id
        return cluster_name

    def _refresh(self, gjob: GatewayJob) -> GatewayJob:
        r"""Bring status and provenance in line with the router's registry."""
        if gjob.final:
            return gjob
        copies = self.simulation.router.copies(gjob.id)
        if copies is None:
            return gjob
        gjob.advance(GatewayStatus.QUEUED)
        gjob.provenance["decision"] = copies.decision.to_dict()
        winner = copies.winner
        if winner is not None:
            entry = copies.entries[winner]
            gjob.provenance.update({
                "system": self._system_for(entry.cluster, winner.value),
                "cluster": entry.cluster,
                "start_time": entry.start_time,
                "end_time": entry.end_time,
            })
            gjob.advance(GatewayStatus.RUNNING)
            if entry.state == EntryState.FINISHED:
                gjob.advance(GatewayStatus.FINISHED)
            elif entry.state == EntryState.WALLTIME_KILLED:
                gjob.advance(GatewayStatus.FAILED)
        elif all(e.state == EntryState.CANCELLED for e in copies.entries.values()):
            gjob.provenance["end_time"] = max(e.end_time for e in copies.entries.values())
            gjob.advance(GatewayStatus.CANCELLED)
        return gjob
