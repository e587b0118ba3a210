from typing import *

from yacs.config import CfgNode

from burstsim.clusters.base import BatchCluster, QueueEntry
from burstsim.errors import ConfigError, InvariantViolation
from burstsim.utils.logging import logger
from burstsim.workload.utils import Job, AppProfile


class HpcCluster(BatchCluster):
    r"""A fixed-size HPC system split into partitions.

    Each partition keeps its own queue; a job runs in ``job.partition`` or, when unset,
    in :py:attr:`default_partition`. An empty ``partitions`` mapping means one partition
    named ``default`` spanning every node.

    Args:
        name (:obj:`str`): e.g. ``stampede2``.
        total_nodes (:obj:`int`): node count of the machine.
        cores_per_node (:obj:`int`): cores per node, used to convert SWF processor counts.
        profiles (:obj:`Mapping[str, AppProfile]`): application profiles.
        partitions (:obj:`Mapping[str, int]`, optional): partition name to node count.
        default_partition (:obj:`str`, optional): partition of jobs that name none.
        backfill_enabled (:obj:`bool`): EASY backfill on or off.
    """
    kind = "hpc"

    def __init__(self,
                 name: str,
                 total_nodes: int,
                 profiles: Mapping[str, AppProfile],
                 cores_per_node: int = 48,
                 partitions: Optional[Mapping[str, int]] = None,
                 default_partition: Optional[str] = None,
                 backfill_enabled: bool = True,
                 ):
        if total_nodes < 1:
            raise ConfigError("{}: total_nodes must be >= 1".format(name))
        if not partitions:
            partitions = {"default": total_nodes}
            default_partition = "default"
        if any(n < 1 for n in partitions.values()):
            raise ConfigError("{}: partition sizes must be >= 1".format(name))
        if sum(partitions.values()) > total_nodes:
            raise ConfigError("{}: partitions hold {} nodes, the machine has {}".format(
                name, sum(partitions.values()), total_nodes))
        if default_partition is None:
            default_partition = next(iter(partitions))
        if default_partition not in partitions:
            raise ConfigError("{}: default partition {!r} is not defined".format(name, default_partition))
        self.total_nodes = total_nodes
        self.cores_per_node = cores_per_node
        self.partition_nodes: Dict[str, int] = dict(partitions)
        self.default_partition = default_partition
        self.used: Dict[str, int] = {p: 0 for p in self.partition_nodes}
        super().__init__(name, profiles, backfill_enabled)

    @classmethod
    def from_config(cls, config: CfgNode, profiles: Mapping[str, AppProfile]) -> "HpcCluster":
        pairs = config.partitions.items() if isinstance(config.partitions, Mapping) else (config.partitions or [])
        partitions = {str(k): int(v) for k, v in pairs}
        cluster = cls(name=config.name,
                      total_nodes=config.total_nodes,
                      profiles=profiles,
                      cores_per_node=config.cores_per_node,
                      partitions=partitions,
                      default_partition=config.default_partition if partitions else None,
                      backfill_enabled=config.backfill)
        logger.info(f"{cluster.name}: {cluster.total_nodes} nodes, partitions {cluster.partition_nodes}")
        return cluster

    @property
    def partitions(self) -> List[str]:
        return list(self.partition_nodes)

    def partition_of(self, job: Job) -> str:
        partition = job.partition or self.default_partition
        if partition not in self.partition_nodes:
            # a trace may name partitions of another machine
            return self.default_partition
        return partition

    def capacity(self, partition: str) -> int:
        return self.partition_nodes[partition]

    def free_nodes(self, partition: str) -> int:
        return self.partition_nodes[partition] - self.used[partition]

    def _allocate(self, entry: QueueEntry, t: int):
        self.used[entry.partition] += entry.assigned_nodes

    def _release(self, entry: QueueEntry, t: int):
        self.used[entry.partition] -= entry.assigned_nodes

    def check_invariants(self, t: int):
        super().check_invariants(t)
        for partition in self.partitions:
            busy = sum(e.assigned_nodes for e in self.running[partition])
            if busy != self.used[partition] or busy > self.partition_nodes[partition]:
                raise InvariantViolation("{}:{} has {} busy nodes of {}".format(
                    self.name, partition, busy, self.partition_nodes[partition]))
