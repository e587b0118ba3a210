"""
This file contains the logic for loading job traces: the JSON Lines trace format and the
Standard Workload Format (SWF) used by public HPC workload archives.
"""

import json
import math
from abc import abstractmethod
from typing import *

from burstsim.errors import ParseError, NonPositiveField, DuplicateId
from burstsim.utils.logging import logger
from burstsim.workload.utils import Job, Trace, CLUSTER_HINTS


class TraceProcessor(object):
    """
    Base class of the trace readers. A processor turns one file into a :class:`Trace`;
    subclasses implement :py:meth:`get_jobs`.
    """

    @classmethod
    def from_config(cls, trace_config) -> "TraceProcessor":
        return cls()

    def get_trace(self, path: str) -> Trace:
        jobs = list(self.get_jobs(path))
        seen = set()
        for lineno, job in jobs:
            if job.id in seen:
                raise DuplicateId("duplicate job id {!r}".format(job.id), line=lineno)
            seen.add(job.id)
        return Trace([job for _, job in jobs], dropped=getattr(self, "dropped", 0))

    @abstractmethod
    def get_jobs(self, path: str) -> Iterator[Tuple[int, Job]]:
        """yield ``(line number, job)`` pairs read from ``path``"""
        raise NotImplementedError


class JsonlTraceProcessor(TraceProcessor):
    """
    One JSON object per line. Required fields: ``id``, ``submit_time_s``, ``app``,
    ``nodes``, ``req_walltime_s``, ``base_runtime_s``; optional ``user`` (``anon``),
    ``tasks_per_node`` (1), ``cluster_hint`` (``auto``) and ``partition``. Unknown fields
    are ignored.

    Examples:

    ..  code-block:: python

        trace = JsonlTraceProcessor().get_trace("traces/calibration.jsonl")
        assert trace[0].app == "GROMACS"
    """

    required = ("id", "submit_time_s", "app", "nodes", "req_walltime_s", "base_runtime_s")
    int_fields = ("submit_time_s", "nodes", "req_walltime_s", "base_runtime_s", "tasks_per_node")

    def get_jobs(self, path):
        with open(path, encoding="utf-8") as f:
            for lineno, line in enumerate(f, start=1):
                if not line.strip():
                    continue
                try:
                    record = json.loads(line)
                except json.JSONDecodeError as e:
                    raise ParseError("malformed JSON: {}".format(e.msg), line=lineno)
                if not isinstance(record, dict):
                    raise ParseError("expected a JSON object", line=lineno)
                yield lineno, self._to_job(record, lineno)

    def _to_job(self, record: Dict, lineno: int) -> Job:
        missing = [k for k in self.required if k not in record]
        if missing:
            raise ParseError("missing field(s) {}".format(", ".join(missing)), line=lineno)
        for key in self.int_fields:
            if key in record and (isinstance(record[key], bool) or not isinstance(record[key], int)):
                raise ParseError("field {} must be an integer".format(key), line=lineno)
        if record["submit_time_s"] < 0:
            raise NonPositiveField("submit_time_s must be >= 0", line=lineno)
        for key in ("nodes", "req_walltime_s", "base_runtime_s", "tasks_per_node"):
            if key in record and record[key] < 1:
                raise NonPositiveField("{} must be >= 1".format(key), line=lineno)
        hint = record.get("cluster_hint", "auto")
        if hint not in CLUSTER_HINTS:
            raise ParseError("cluster_hint must be one of {}".format(CLUSTER_HINTS), line=lineno)
        return Job(
            id=str(record["id"]),
            submit_time=record["submit_time_s"],
            app=str(record["app"]),
            nodes=record["nodes"],
            req_walltime_s=record["req_walltime_s"],
            base_runtime_s=record["base_runtime_s"],
            user=str(record.get("user", "anon")),
            tasks_per_node=record.get("tasks_per_node", 1),
            cluster_hint=hint,
            partition=record.get("partition"),
        )


class SwfTraceProcessor(TraceProcessor):
    """
    Standard Workload Format reader. Lines starting with ``;`` are header comments.

    Column mapping (1-based): 1 -> id, 2 -> submit time, 4 -> run time,
    ``req_walltime_column`` (8 by default) -> requested walltime, 5 (allocated processors)
    divided by ``cores_per_node`` and rounded up -> nodes, 12 -> user. Records whose run
    time or processor count is missing (``-1``) are dropped and counted in
    :py:attr:`dropped`. A non-positive requested walltime falls back to the run time.

    Args:
        cores_per_node (:obj:`int`): cores of one node of the traced machine.
        app (:obj:`str`): application profile assigned to every record.
        req_walltime_column (:obj:`int`): column holding the requested walltime.
    """

    def __init__(self, cores_per_node: int = 48, app: str = "generic", req_walltime_column: int = 8):
        if cores_per_node < 1:
            raise ValueError("cores_per_node must be >= 1")
        self.cores_per_node = cores_per_node
        self.app = app
        self.req_walltime_column = req_walltime_column
        self.dropped = 0

    @classmethod
    def from_config(cls, trace_config) -> "SwfTraceProcessor":
        return cls(cores_per_node=trace_config.swf_cores_per_node, app=trace_config.swf_app,
                   req_walltime_column=trace_config.swf_req_walltime_column)

    def get_jobs(self, path):
        self.dropped = 0
        with open(path, encoding="utf-8") as f:
            for lineno, line in enumerate(f, start=1):
                line = line.strip()
                if not line or line.startswith(";"):
                    continue
                job = self._to_job(line.split(), lineno)
                if job is not None:
                    yield lineno, job
        if self.dropped:
            logger.warning(f"{path}: dropped {self.dropped} SWF record(s) with missing run time or processors")

    def _to_job(self, fields: List[str], lineno: int) -> Optional[Job]:
        if len(fields) < max(5, self.req_walltime_column):
            raise ParseError("expected at least {} columns, got {}".format(
                max(5, self.req_walltime_column), len(fields)), line=lineno)
        try:
            values = [int(float(v)) for v in fields]
        except ValueError:
            raise ParseError("non-numeric SWF column", line=lineno)
        job_number, submit, runtime, procs = values[0], values[1], values[3], values[4]
        if runtime < 0 or procs < 0:
            self.dropped += 1
            return None
        if submit < 0:
            raise NonPositiveField("submit time must be >= 0", line=lineno)
        walltime = values[self.req_walltime_column - 1]
        runtime = max(runtime, 1)
        if walltime <= 0:
            walltime = runtime
        user = "u{}".format(values[11]) if len(values) >= 12 and values[11] >= 0 else "anon"
        return Job(
            id=str(job_number),
            submit_time=submit,
            app=self.app,
            nodes=max(1, math.ceil(procs / self.cores_per_node)),
            req_walltime_s=walltime,
            base_runtime_s=runtime,
            user=user,
        )


def load_trace_jsonl(path: str) -> Trace:
    return JsonlTraceProcessor().get_trace(path)


def load_trace_swf(path: str, cores_per_node: int = 48, app: str = "generic",
                   req_walltime_column: int = 8) -> Trace:
    processor = SwfTraceProcessor(cores_per_node=cores_per_node, app=app,
                                  req_walltime_column=req_walltime_column)
    return processor.get_trace(path)


PROCESSORS = {
    "jsonl": JsonlTraceProcessor,
    "swf": SwfTraceProcessor,
}
