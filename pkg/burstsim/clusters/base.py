import heapq
import itertools
from dataclasses import dataclass
from enum import Enum
from typing import *

from burstsim.errors import IllegalTransition, JobTooLarge, InvariantViolation
from burstsim.utils.logging import logger
from burstsim.workload.profiles import raw_runtime
from burstsim.workload.utils import Job, AppProfile


class EntryState(str, Enum):
    PENDING = "Pending"
    RUNNING = "Running"
    FINISHED = "Finished"
    CANCELLED = "Cancelled"
    WALLTIME_KILLED = "WalltimeKilled"


TERMINAL_STATES = (EntryState.FINISHED, EntryState.CANCELLED, EntryState.WALLTIME_KILLED)

_TRANSITIONS = {
    EntryState.PENDING: (EntryState.RUNNING, EntryState.CANCELLED),
    EntryState.RUNNING: (EntryState.FINISHED, EntryState.WALLTIME_KILLED),
}


@dataclass
class QueueEntry:
    job: Job
    enqueue_time: int
    cluster: str
    partition: str
    order: int
    state: EntryState = EntryState.PENDING
    start_time: Optional[int] = None
    end_time: Optional[int] = None
    assigned_nodes: int = 0
    runtime_s: Optional[int] = None
    killed: bool = False

    def transition(self, new_state: EntryState):
        if new_state not in _TRANSITIONS.get(self.state, ()):
            raise IllegalTransition("job {} on {}: {} -> {} is not allowed".format(
                self.job.id, self.cluster, self.state.value, new_state.value))
        self.state = new_state

    @property
    def walltime_end(self) -> Optional[int]:
        if self.start_time is None:
            return None
        return self.start_time + self.job.req_walltime_s

    @property
    def expected_end(self) -> Optional[int]:
        if self.start_time is None:
            return None
        return self.start_time + self.runtime_s

    def to_dict(self) -> Dict:
        return {
            "job_id": self.job.id,
            "cluster": self.cluster,
            "partition": self.partition,
            "state": self.state.value,
            "enqueue_time": self.enqueue_time,
            "start_time": self.start_time,
            "end_time": self.end_time,
            "assigned_nodes": self.assigned_nodes,
        }


def plan_pass(now: int,
              free: int,
              releases: Iterable[Tuple[int, int]],
              pending: Sequence[Tuple[int, int]],
              backfill: bool) -> List[int]:
    r"""One FCFS + EASY-backfill scheduling pass.

    Args:
        now (:obj:`int`): current time.
        free (:obj:`int`): idle nodes.
        releases (:obj:`Iterable[Tuple[int, int]]`): ``(time, nodes)`` pairs of nodes that
            become idle later, running jobs at their walltime expiry included.
        pending (:obj:`Sequence[Tuple[int, int]]`): ``(nodes, walltime)`` per queued job,
            in queue order.
        backfill (:obj:`bool`): enable EASY backfill behind a blocked head job.

    Returns:
        :obj:`List[int]`: indices into ``pending`` of the jobs to start at ``now``.
    """
    releases = list(releases)
    started = []
    idx = 0
    while idx < len(pending) and pending[idx][0] <= free:
        nodes, walltime = pending[idx]
        free -= nodes
        releases.append((now + walltime, nodes))
        started.append(idx)
        idx += 1
    if idx >= len(pending) or not backfill or free == 0:
        return started

    # reservation for the blocked head job
    head_nodes = pending[idx][0]
    shadow, extra = None, 0
    avail = free
    for when, nodes in sorted(releases):
        avail += nodes
        if avail >= head_nodes:
            shadow, extra = when, avail - head_nodes
            break

    for j in range(idx + 1, len(pending)):
        nodes, walltime = pending[j]
        if nodes > free:
            continue
        if shadow is None or now + walltime <= shadow:
            free -= nodes
            started.append(j)
        elif nodes <= extra:
            free -= nodes
            extra -= nodes
            started.append(j)
        if free == 0:
            break
    return started


def plan_start(now: int,
               free: int,
               releases: Iterable[Tuple[int, int]],
               pending: Sequence[Tuple[int, int]],
               target: int,
               backfill: bool) -> Optional[int]:
    r"""Replay the queue forward with walltimes as run times and return the time
    ``pending[target]`` starts, or ``None`` if it never fits.
    """
    heap = list(releases)
    heapq.heapify(heap)
    queue = list(enumerate(pending))
    while True:
        picks = plan_pass(now, free, heap, [p for _, p in queue], backfill)
        picked = set(picks)
        for i in picks:
            key, (nodes, walltime) = queue[i]
            if key == target:
                return now
            free -= nodes
            heapq.heappush(heap, (now + walltime, nodes))
        queue = [item for i, item in enumerate(queue) if i not in picked]
        if not heap:
            return None
        now = heap[0][0]
        while heap and heap[0][0] == now:
            free += heapq.heappop(heap)[1]


class BatchCluster(object):
    r"""A Slurm-like batch system: per-partition FCFS queues with EASY backfill.

    Subclasses describe where nodes come from: :py:meth:`capacity`,
    :py:meth:`free_nodes`, :py:meth:`extra_releases`, :py:meth:`_allocate` and
    :py:meth:`_release`. Run times come from the app profiles for this cluster's
    :py:attr:`kind`.

    Args:
        name (:obj:`str`): cluster name, used in logs and records.
        profiles (:obj:`Mapping[str, AppProfile]`): application profiles.
        backfill_enabled (:obj:`bool`): EASY backfill on or off.
    """
    kind: str = None
    entry_class = QueueEntry

    def __init__(self,
                 name: str,
                 profiles: Mapping[str, AppProfile],
                 backfill_enabled: bool = True,
                 ):
        self.name = name
        self.profiles = profiles
        self.backfill_enabled = backfill_enabled
        self.entries: Dict[str, QueueEntry] = {}
        self.pending: Dict[str, List[QueueEntry]] = {p: [] for p in self.partitions}
        self.running: Dict[str, List[QueueEntry]] = {p: [] for p in self.partitions}
        self._order = itertools.count()
        self.dirty = False

    # subclass interface

    @property
    def partitions(self) -> List[str]:
        raise NotImplementedError

    def partition_of(self, job: Job) -> str:
        raise NotImplementedError

    def capacity(self, partition: str) -> int:
        r"""The most nodes a single job may ever get in ``partition``."""
        raise NotImplementedError

    def free_nodes(self, partition: str) -> int:
        raise NotImplementedError

    def extra_releases(self, partition: str, now: int) -> List[Tuple[int, int]]:
        r"""Capacity arriving later that is not tied to a running job."""
        return []

    def _allocate(self, entry: QueueEntry, t: int):
        raise NotImplementedError

    def _release(self, entry: QueueEntry, t: int):
        raise NotImplementedError

    def _release_nodes(self, entry: QueueEntry) -> int:
        return entry.assigned_nodes

    # operations

    def fits(self, job: Job) -> bool:
        try:
            return job.nodes <= self.capacity(self.partition_of(job))
        except ValueError:
            return False

    def submit(self, job: Job, t: int) -> QueueEntry:
        partition = self.partition_of(job)
        if job.nodes > self.capacity(partition):
            raise JobTooLarge("job {} needs {} nodes, {}:{} offers {}".format(
                job.id, job.nodes, self.name, partition, self.capacity(partition)))
        if job.id in self.entries:
            raise ValueError("job {} already submitted to {}".format(job.id, self.name))
        entry = self.entry_class(job=job, enqueue_time=t, cluster=self.name,
                                 partition=partition, order=next(self._order))
        self.entries[job.id] = entry
        self.pending[partition].append(entry)
        self.dirty = True
        logger.debug(f"{self.name}: job {job.id} queued on {partition} at t={t}")
        return entry

    def _releases(self, partition: str, now: int) -> List[Tuple[int, int]]:
        releases = [(e.walltime_end, self._release_nodes(e)) for e in self.running[partition]]
        releases.extend(self.extra_releases(partition, now))
        return [r for r in releases if r[1] > 0]

    def try_schedule(self, t: int) -> List[QueueEntry]:
        started = []
        for partition in self.partitions:
            queue = self.pending[partition]
            if not queue:
                continue
            picks = plan_pass(t, self.free_nodes(partition), self._releases(partition, t),
                              [(e.job.nodes, e.job.req_walltime_s) for e in queue],
                              self.backfill_enabled)
            if not picks:
                continue
            picked = set(picks)
            for i in sorted(picks):
                self._start(queue[i], t)
                started.append(queue[i])
            self.pending[partition] = [e for i, e in enumerate(queue) if i not in picked]
        self.dirty = False
        return started

    def _start(self, entry: QueueEntry, t: int):
        entry.transition(EntryState.RUNNING)
        raw = raw_runtime(entry.job, self.kind, self.profiles)
        entry.start_time = t
        entry.runtime_s = min(raw, entry.job.req_walltime_s)
        entry.killed = raw > entry.job.req_walltime_s
        entry.assigned_nodes = entry.job.nodes
        self._allocate(entry, t)
        self.running[entry.partition].append(entry)
        logger.debug(f"{self.name}: job {entry.job.id} started at t={t} on {entry.assigned_nodes} node(s)")

    def finish(self, entry: QueueEntry, t: int, reschedule: bool = True) -> List[QueueEntry]:
        r"""Complete a running entry at ``t``; frees its nodes and, unless told otherwise,
        runs a scheduling pass. Returns the entries that pass started."""
        if entry.state != EntryState.RUNNING:
            raise IllegalTransition("job {} on {} is {}, not Running".format(
                entry.job.id, self.name, entry.state.value))
        if t != entry.expected_end:
            raise IllegalTransition("job {} on {} ends at t={}, not t={}".format(
                entry.job.id, self.name, entry.expected_end, t))
        entry.transition(EntryState.WALLTIME_KILLED if entry.killed else EntryState.FINISHED)
        entry.end_time = t
        self.running[entry.partition].remove(entry)
        self._release(entry, t)
        self.dirty = True
        if reschedule:
            return self.try_schedule(t)
        return []

    def cancel(self, job_id: str, t: int) -> bool:
        entry = self.entries.get(job_id)
        if entry is None or entry.state != EntryState.PENDING:
            return False
        entry.transition(EntryState.CANCELLED)
        entry.end_time = t
        self.pending[entry.partition].remove(entry)
        self.dirty = True
        return True

    def estimate_start(self, job: Job, t: int, extra: Iterable[Tuple[int, int]] = ()) -> Optional[int]:
        r"""Start time the scheduler would give ``job`` if submitted at ``t`` and nothing
        else arrived, assuming every job runs to its walltime. Does not mutate state.

        Args:
            job (:obj:`Job`): the (not yet submitted, or still pending) job.
            t (:obj:`int`): submission time.
            extra (:obj:`Iterable[Tuple[int, int]]`): hypothetical ``(time, nodes)``
                capacity additions, e.g. VMs that would be provisioned for it.
        """
        partition = self.partition_of(job)
        if job.nodes > self.capacity(partition) + sum(k for _, k in extra):
            raise JobTooLarge("job {} needs {} nodes, {}:{} offers {}".format(
                job.id, job.nodes, self.name, partition, self.capacity(partition)))
        queue = [(e.job.nodes, e.job.req_walltime_s) for e in self.pending[partition]
                 if e.job.id != job.id]
        queued = [i for i, e in enumerate(self.pending[partition]) if e.job.id == job.id]
        if queued:
            target = queued[0]
            queue.insert(target, (job.nodes, job.req_walltime_s))
        else:
            target = len(queue)
            queue.append((job.nodes, job.req_walltime_s))
        releases = self._releases(partition, t) + list(extra)
        return plan_start(t, self.free_nodes(partition), releases, queue, target, self.backfill_enabled)

    # bookkeeping

    def pending_entries(self) -> List[QueueEntry]:
        return [e for p in self.partitions for e in self.pending[p]]

    def running_entries(self) -> List[QueueEntry]:
        return [e for p in self.partitions for e in self.running[p]]

    def check_invariants(self, t: int):
        for entry in self.running_entries():
            if entry.start_time + entry.job.req_walltime_s < t:
                raise InvariantViolation("job {} on {} runs past its walltime".format(entry.job.id, self.name))
