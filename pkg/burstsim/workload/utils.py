import copy
import json
from dataclasses import dataclass, field, asdict
from fractions import Fraction
from typing import *

from burstsim.errors import DuplicateId, NonPositiveField

CLUSTER_HINTS = ("hpc", "cloud", "auto")


@dataclass(frozen=True)
class AppProfile:
    r"""Run-time profile of one application.

    Args:
        name (:obj:`str`): application name, e.g. ``NAMD``.
        base_runtime_s (:obj:`int`): HPC run time at the reference node/task count.
        cloud_slowdown (:obj:`Fraction`): cloud run time divided by HPC run time.
        reference_nodes (:obj:`int`): node count the base run time was measured at.
        reference_tasks (:obj:`int`): total MPI tasks of the reference run.
        version (:obj:`str`, optional): application version, informational.
        description (:obj:`str`, optional): free text.
    """
    name: str
    base_runtime_s: int
    cloud_slowdown: Fraction
    reference_nodes: int = 1
    reference_tasks: int = 1
    version: str = ""
    description: str = ""

    def __post_init__(self):
        if self.base_runtime_s <= 0:
            raise NonPositiveField("{}: base_runtime_s must be > 0".format(self.name))
        if self.cloud_slowdown <= 0:
            raise NonPositiveField("{}: cloud_slowdown must be > 0".format(self.name))
        if self.reference_nodes <= 0 or self.reference_tasks <= 0:
            raise NonPositiveField("{}: reference nodes/tasks must be > 0".format(self.name))

    def to_dict(self) -> Dict:
        output = asdict(self)
        output["cloud_slowdown"] = str(self.cloud_slowdown)
        return output


@dataclass
class Job(object):
    r"""A batch request as submitted by a user.

    ``base_runtime_s`` is the job's true execution time on the HPC system. It may exceed
    ``req_walltime_s``, in which case the job is killed at its walltime.
    """
    id: str
    submit_time: int
    app: str
    nodes: int
    req_walltime_s: int
    base_runtime_s: int
    user: str = "anon"
    tasks_per_node: int = 1
    cluster_hint: str = "auto"
    partition: Optional[str] = None

    def __post_init__(self):
        if self.submit_time < 0:
            raise NonPositiveField("job {}: submit_time must be >= 0".format(self.id))
        for name in ("nodes", "tasks_per_node", "req_walltime_s", "base_runtime_s"):
            if getattr(self, name) < 1:
                raise NonPositiveField("job {}: {} must be >= 1".format(self.id, name))
        if self.cluster_hint not in CLUSTER_HINTS:
            raise ValueError("job {}: cluster_hint must be one of {}".format(self.id, CLUSTER_HINTS))

    def to_dict(self) -> Dict:
        r"""Serialize this instance to a Python dictionary."""
        return copy.deepcopy(self.__dict__)

    def to_json_string(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, ensure_ascii=False)

    @classmethod
    def from_dict(cls, data: Dict) -> "Job":
        return cls(**{k: data[k] for k in cls.__dataclass_fields__ if k in data})


class Trace(object):
    r"""An ordered list of jobs: sorted by submit time (stable), ids unique."""

    def __init__(self, jobs: Optional[Iterable[Job]] = None, dropped: int = 0):
        jobs = list(jobs) if jobs is not None else []
        self.dropped = dropped
        seen = set()
        for job in jobs:
            if job.id in seen:
                raise DuplicateId("duplicate job id {!r}".format(job.id))
            seen.add(job.id)
        self.jobs: List[Job] = sorted(jobs, key=lambda j: j.submit_time)

    def __len__(self):
        return len(self.jobs)

    def __iter__(self):
        return iter(self.jobs)

    def __getitem__(self, idx):
        return self.jobs[idx]

    def __eq__(self, other):
        if not isinstance(other, Trace):
            return NotImplemented
        return self.jobs == other.jobs

    def __repr__(self):
        return "Trace({} jobs)".format(len(self.jobs))

    def to_jsonl(self, path: str):
        with open(path, "w", encoding="utf-8") as f:
            for job in self.jobs:
                data = job.to_dict()
                data["submit_time_s"] = data.pop("submit_time")
                f.write(json.dumps(data, sort_keys=True) + "\n")
