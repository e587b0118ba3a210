from dataclasses import dataclass, asdict
from fractions import Fraction
from typing import *

import pandas as pd

from burstsim.errors import CorruptLog
from burstsim.sim import EventKind, EventLog
from burstsim.utils.logging import logger
from burstsim.utils.utils import lower_median

RECORD_COLUMNS = ["job_id", "app", "cluster", "submit_s", "start_s", "end_s", "wait_s", "run_s", "tts_s", "outcome"]
EXECUTED_OUTCOMES = ("Finished", "WalltimeKilled")


@dataclass
class JobRecord:
    r"""What happened to one copy of one job.

    ``wait_s``, ``run_s`` and ``tts_s`` are set for executed copies only, with
    ``tts_s == wait_s + run_s``.
    """
    job_id: str
    app: str
    cluster: str
    submit_s: int
    start_s: Optional[int]
    end_s: Optional[int]
    wait_s: Optional[int]
    run_s: Optional[int]
    tts_s: Optional[int]
    outcome: str
    kind: str = ""
    nodes: int = 1
    req_walltime_s: int = 1

    @property
    def executed(self) -> bool:
        return self.outcome in EXECUTED_OUTCOMES

    def to_row(self) -> Dict:
        row = asdict(self)
        return {k: row[k] for k in RECORD_COLUMNS}


def _get(payload: Dict, key: str, lineno: int):
    try:
        return payload[key]
    except (KeyError, TypeError):
        raise CorruptLog("entry {}: payload lacks {!r}".format(lineno, key))


def collect(log: EventLog) -> List[JobRecord]:
    r"""One record per executed or cancelled job copy, in the order the copies ended.

    Raises:
        CorruptLog: an event refers to a job or copy the log never introduced.
    """
    jobs: Dict[str, Dict] = {}
    started: Dict[Tuple[str, str], Tuple[int, str]] = {}
    records: List[JobRecord] = []
    for lineno, entry in enumerate(log, start=1):
        kind, payload = entry.kind, entry.payload
        if kind == EventKind.JOB_ARRIVAL.value:
            job = _get(payload, "job", lineno)
            jobs[_get(job, "id", lineno)] = job
        elif kind == EventKind.JOB_START.value:
            key = (_get(payload, "job_id", lineno), _get(payload, "cluster", lineno))
            if key[0] not in jobs:
                raise CorruptLog("entry {}: job {} starts before it arrived".format(lineno, key[0]))
            if key in started:
                raise CorruptLog("entry {}: job {} starts twice on {}".format(lineno, *key))
            started[key] = (entry.t, payload.get("kind", ""))
        elif kind == EventKind.JOB_END.value:
            key = (_get(payload, "job_id", lineno), _get(payload, "cluster", lineno))
            if key not in started:
                raise CorruptLog("entry {}: job {} ends on {} without starting".format(lineno, *key))
            start, target = started.pop(key)
            job = jobs[key[0]]
            submit = job["submit_time"]
            records.append(JobRecord(
                job_id=key[0], app=job["app"], cluster=key[1], submit_s=submit,
                start_s=start, end_s=entry.t, wait_s=start - submit, run_s=entry.t - start,
                tts_s=entry.t - submit, outcome=_get(payload, "outcome", lineno), kind=target,
                nodes=job["nodes"], req_walltime_s=job["req_walltime_s"],
            ))
        elif kind == EventKind.CANCEL_REQUEST.value:
            job_id = _get(payload, "job_id", lineno)
            if job_id not in jobs:
                raise CorruptLog("entry {}: cancel of unknown job {}".format(lineno, job_id))
            job = jobs[job_id]
            records.append(JobRecord(
                job_id=job_id, app=job["app"], cluster=_get(payload, "cluster", lineno),
                submit_s=job["submit_time"], start_s=None, end_s=entry.t, wait_s=None,
                run_s=None, tts_s=None, outcome="Cancelled",
                nodes=job["nodes"], req_walltime_s=job["req_walltime_s"],
            ))
    if started:
        logger.debug(f"{len(started)} job copies still running at the end of the log")
    return records


def records_to_frame(records: Sequence[JobRecord]) -> pd.DataFrame:
    frame = pd.DataFrame([r.to_row() for r in records], columns=RECORD_COLUMNS)
    for column in ("start_s", "end_s", "wait_s", "run_s", "tts_s"):
        frame[column] = frame[column].astype("Int64")
    return frame


def write_records_csv(records: Sequence[JobRecord], path: str) -> None:
    records_to_frame(records).to_csv(path, index=False, lineterminator="\n")


def vm_seconds(log: EventLog) -> int:
    r"""Summed lifetime of compute VMs, from request to termination; VMs alive at the end
    of the log count up to its last event."""
    if len(log) == 0:
        return 0
    end = log[len(log) - 1].t
    born: Dict[str, int] = {}
    total = 0
    for entry in log:
        if entry.kind != EventKind.VM_STAGE_COMPLETE.value:
            continue
        vm_id, stage = entry.payload.get("vm_id"), entry.payload.get("stage")
        if stage == "request":
            born[vm_id] = entry.t
        elif stage == "terminate" and vm_id in born:
            total += entry.t - born.pop(vm_id)
    total += sum(end - t for t in born.values())
    return total


def summary(records: Sequence[JobRecord], log: EventLog) -> Dict:
    r"""``median_tts_s`` (lower median), ``mean_wait_s``, ``jobs_bursted`` (executed on the
    cloud) and ``vm_hours`` over the executed copies."""
    executed = [r for r in records if r.executed]
    waits = [r.wait_s for r in executed]
    mean_wait = Fraction(sum(waits), len(waits)) if waits else None
    return {
        "jobs": len({r.job_id for r in records}),
        "jobs_executed": len(executed),
        "jobs_cancelled": len([r for r in records if r.outcome == "Cancelled"]),
        "jobs_walltime_killed": len([r for r in executed if r.outcome == "WalltimeKilled"]),
        "jobs_bursted": len([r for r in executed if r.kind == "cloud"]),
        "median_tts_s": lower_median([r.tts_s for r in executed]),
        "mean_wait_s": None if mean_wait is None else round(float(mean_wait), 3),
        "vm_hours": round(vm_seconds(log) / 3600, 4),
    }
