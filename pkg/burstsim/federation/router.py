from dataclasses import dataclass, field
from enum import Enum
from typing import *

from yacs.config import CfgNode

from burstsim.clusters import BatchCluster, CloudPool, EntryState, HpcCluster, QueueEntry
from burstsim.errors import ConfigError, JobTooLarge, UnroutableJob
from burstsim.federation.wait_table import WaitTable
from burstsim.utils.logging import logger
from burstsim.utils.utils import signature
from burstsim.workload.profiles import runtime_on
from burstsim.workload.utils import Job


class Target(str, Enum):
    HPC = "hpc"
    CLOUD = "cloud"


# dispatch order, also the tie-break for simultaneous starts
TARGET_ORDER = (Target.HPC, Target.CLOUD)


@dataclass
class BurstDecision:
    r"""Where one job goes, and why.

    ``est_tts_hpc_s`` / ``est_tts_cloud_s`` are filled by predictive policies only.
    """
    job_id: str
    targets: Tuple[Target, ...]
    policy_name: str
    reason: str = ""
    est_tts_hpc_s: Optional[int] = None
    est_tts_cloud_s: Optional[int] = None

    def __post_init__(self):
        if not self.targets:
            raise ValueError("decision for job {} has no target".format(self.job_id))
        self.targets = tuple(t for t in TARGET_ORDER if t in self.targets)

    def to_dict(self) -> Dict:
        return {"job_id": self.job_id, "targets": [t.value for t in self.targets],
                "policy": self.policy_name, "reason": self.reason,
                "est_tts_hpc_s": self.est_tts_hpc_s, "est_tts_cloud_s": self.est_tts_cloud_s}


class Policy(object):
    r"""Base class of the routing policies. A policy looks at one job at submission time
    and names its target cluster(s); :class:`FederationRouter` supplies the estimates.
    """
    name: str = None
    predictive: bool = False

    @classmethod
    def from_config(cls, config: CfgNode, **kwargs):
        init_args = signature(cls.__init__).args
        _init_dict = {**{k: v for k, v in config.items() if k in init_args}, **kwargs}
        return cls(**_init_dict)

    def decide(self, job: Job, t: int, router: "FederationRouter") -> BurstDecision:
        raise NotImplementedError

    def _single(self, job: Job, target: Target, reason: str) -> BurstDecision:
        return BurstDecision(job.id, (target,), self.name, reason)

    def __repr__(self):
        return self.name


class HintOnly(Policy):
    r"""Follow the user's ``cluster_hint``; ``auto`` means HPC."""
    name = "HintOnly"

    def decide(self, job, t, router):
        target = Target.CLOUD if job.cluster_hint == "cloud" else Target.HPC
        return self._single(job, target, "hint {}".format(job.cluster_hint))


class AlwaysHpc(Policy):
    name = "AlwaysHpc"

    def decide(self, job, t, router):
        return self._single(job, Target.HPC, "fixed")


class AlwaysCloud(Policy):
    name = "AlwaysCloud"

    def decide(self, job, t, router):
        return self._single(job, Target.CLOUD, "fixed")


class DualSubmit(Policy):
    r"""Submit to both clusters; the copy that starts first wins, the other is cancelled."""
    name = "DualSubmit"

    def decide(self, job, t, router):
        return BurstDecision(job.id, TARGET_ORDER, self.name, "dual submission")


class PredictivePolicy(Policy):
    predictive = True

    def _estimated(self, job, t, router, target, reason) -> BurstDecision:
        decision = self._single(job, target, reason)
        decision.est_tts_hpc_s = router.est_tts_hpc(job, t)
        decision.est_tts_cloud_s = router.est_tts_cloud(job, t)
        return decision


class WaitThreshold(PredictivePolicy):
    r"""Burst when the estimated HPC queue wait exceeds ``threshold_s``.

    Args:
        threshold_s (:obj:`int`): wait, in seconds, above which the job goes to the cloud.
    """
    name = "WaitThreshold"

    def __init__(self, threshold_s: int = 3600):
        if threshold_s <= 0:
            raise ConfigError("WaitThreshold needs threshold_s > 0, got {}".format(threshold_s))
        self.threshold_s = threshold_s

    def decide(self, job, t, router):
        wait = router.estimate_wait(job, t)
        target = Target.CLOUD if wait is None or wait > self.threshold_s else Target.HPC
        return self._estimated(job, t, router, target,
                               "estimated wait {}s vs threshold {}s".format(wait, self.threshold_s))

    def __repr__(self):
        return "{}({})".format(self.name, self.threshold_s)


class CostModel(PredictivePolicy):
    r"""Burst iff the estimated cloud time-to-solution is strictly lower than the HPC one.

    HPC: estimated queue wait plus HPC run time. Cloud: time until enough VMs are Ready
    and the cloud queue reaches the job, plus the (slower) cloud run time.
    """
    name = "CostModel"

    def decide(self, job, t, router):
        decision = self._estimated(job, t, router, Target.HPC, "")
        hpc, cloud = decision.est_tts_hpc_s, decision.est_tts_cloud_s
        if cloud is not None and (hpc is None or cloud < hpc):
            decision.targets = (Target.CLOUD,)
        decision.reason = "tts hpc {} vs cloud {}".format(hpc, cloud)
        return decision


POLICY_CLASS = {
    "HintOnly": HintOnly,
    "AlwaysHpc": AlwaysHpc,
    "AlwaysCloud": AlwaysCloud,
    "DualSubmit": DualSubmit,
    "WaitThreshold": WaitThreshold,
    "CostModel": CostModel,
}


def load_policy(config: CfgNode, variant: Optional[str] = None) -> Policy:
    r"""
    Args:
        config (:obj:`CfgNode`): the ``policy`` section of a scenario.
        variant (:obj:`str`, optional): overrides ``config.variant``.

    Returns:
        A routing policy.
    """
    variant = variant or config.variant
    if variant not in POLICY_CLASS:
        raise ConfigError("unknown policy {!r}, choose from {}".format(variant, sorted(POLICY_CLASS)))
    return POLICY_CLASS[variant].from_config(config)


@dataclass
class JobCopies:
    job: Job
    decision: BurstDecision
    entries: Dict[Target, QueueEntry] = field(default_factory=dict)

    @property
    def winner(self) -> Optional[Target]:
        for target in TARGET_ORDER:
            entry = self.entries.get(target)
            if entry is not None and entry.state not in (EntryState.PENDING, EntryState.CANCELLED):
                return target
        return None


class FederationRouter(object):
    r"""Shared job registry over an HPC cluster and a cloud pool.

    Decides where each job runs, submits its copies and keeps track of them so that,
    under dual submission, only the first copy to start executes.

    Args:
        hpc (:obj:`HpcCluster`): the fixed-capacity system.
        cloud (:obj:`CloudPool`): the elastic system.
        policy (:obj:`Policy`): routing policy.
        wait_table (:obj:`WaitTable`, optional): historical waits for ``wait_source='table'``.
        wait_source (:obj:`str`): ``table`` or ``live`` (ask the HPC scheduler).
    """

    def __init__(self,
                 hpc: HpcCluster,
                 cloud: CloudPool,
                 policy: Policy,
                 wait_table: Optional[WaitTable] = None,
                 wait_source: str = "table",
                 ):
        if wait_source not in ("table", "live"):
            raise ConfigError("wait_source must be 'table' or 'live', got {!r}".format(wait_source))
        self.clusters: Dict[Target, BatchCluster] = {Target.HPC: hpc, Target.CLOUD: cloud}
        self.policy = policy
        self.wait_table = wait_table if wait_table is not None else WaitTable.from_csv()
        self.wait_source = wait_source
        self.registry: Dict[str, JobCopies] = {}

    @property
    def hpc(self) -> HpcCluster:
        return self.clusters[Target.HPC]

    @property
    def cloud(self) -> CloudPool:
        return self.clusters[Target.CLOUD]

    def target_of(self, cluster_name: str) -> Target:
        for target, cluster in self.clusters.items():
            if cluster.name == cluster_name:
                return target
        raise KeyError(cluster_name)

    # estimates

    def estimate_wait(self, job: Job, t: int, source: Optional[str] = None) -> Optional[int]:
        r"""Expected HPC queue wait of ``job`` submitted at ``t``; ``None`` if it can never start."""
        source = source or self.wait_source
        if source == "table":
            return self.wait_table.estimate_wait_s(job)
        start = self.hpc.estimate_start(job, t)
        return None if start is None else start - t

    def cloud_ready_delay(self, job: Job, t: int) -> Optional[int]:
        r"""Time until the cloud could start ``job``: zero when enough idle Ready VMs exist
        and nothing queues ahead, otherwise the provisioning latency of the VMs it lacks
        combined with the cloud queue ahead of it."""
        cloud = self.cloud
        if not cloud.fits(job):
            return None
        if cloud.free_nodes() >= job.nodes and not cloud.pending_entries():
            return 0
        extra = []
        if cloud.elastic:
            shortfall = min(max(job.nodes - cloud.active_count, 0), cloud.placeable())
            if shortfall:
                extra.append((t + cloud.provisioning_latency_s, shortfall))
        try:
            start = cloud.estimate_start(job, t, extra)
        except JobTooLarge:
            return None
        return None if start is None else start - t

    def est_tts_hpc(self, job: Job, t: int) -> Optional[int]:
        if not self.hpc.fits(job):
            return None
        wait = self.estimate_wait(job, t)
        return None if wait is None else wait + runtime_on(job, "hpc", self.hpc.profiles)

    def est_tts_cloud(self, job: Job, t: int) -> Optional[int]:
        delay = self.cloud_ready_delay(job, t)
        return None if delay is None else delay + runtime_on(job, "cloud", self.cloud.profiles)

    # routing

    def fits_somewhere(self, job: Job) -> bool:
        return any(cluster.fits(job) for cluster in self.clusters.values())

    def route(self, job: Job, t: int, target: Optional[Target] = None) -> BurstDecision:
        r"""Apply the policy (or the explicit ``target``) and drop targets that can never
        hold the job.

        Raises:
            UnroutableJob: neither cluster can ever fit the job.
        """
        if target is not None:
            decision = BurstDecision(job.id, (Target(target),), "Explicit", "requested {}".format(Target(target).value))
        else:
            decision = self.policy.decide(job, t, self)
        fitting = [x for x in decision.targets if self.clusters[x].fits(job)]
        if not fitting:
            others = [x for x in TARGET_ORDER if x not in decision.targets and self.clusters[x].fits(job)]
            if not others:
                raise UnroutableJob("job {} ({} nodes) fits on no cluster".format(job.id, job.nodes))
            logger.warning(f"job {job.id}: {decision.targets[0].value} cannot hold {job.nodes} nodes, "
                           f"sending it to {others[0].value}")
            decision.reason = "{}; redirected, {} too small".format(decision.reason, decision.targets[0].value)
            fitting = others
        decision.targets = tuple(fitting)
        return decision

    def dispatch(self, decision: BurstDecision, job: Job, t: int) -> List[QueueEntry]:
        r"""Submit one copy of ``job`` per target, HPC first, and record them."""
        if job.id in self.registry:
            raise ValueError("job {} already dispatched".format(job.id))
        copies = JobCopies(job, decision)
        self.registry[job.id] = copies
        for target in decision.targets:
            copies.entries[target] = self.clusters[target].submit(job, t)
        return list(copies.entries.values())

    def siblings_to_cancel(self, job_id: str, started: Target) -> List[Target]:
        r"""Pending copies that lose to the copy just started on ``started``."""
        copies = self.registry.get(job_id)
        if copies is None:
            return []
        return [target for target, entry in copies.entries.items()
                if target != started and entry.state == EntryState.PENDING]

    def cancel_copy(self, job_id: str, target: Target, t: int) -> bool:
        copies = self.registry.get(job_id)
        if copies is None or target not in copies.entries:
            return False
        return self.clusters[target].cancel(job_id, t)

    def pending_copies(self, job_id: str) -> List[Target]:
        copies = self.registry.get(job_id)
        if copies is None:
            return []
        return [x for x, e in copies.entries.items() if e.state == EntryState.PENDING]

    def copies(self, job_id: str) -> Optional[JobCopies]:
        return self.registry.get(job_id)
