import hashlib
import heapq
import json
from dataclasses import dataclass, field
from enum import Enum
from typing import *

import numpy as np

from burstsim.errors import SchedulingInPast, CorruptLog
from burstsim.utils.logging import logger
from burstsim.utils.reproducibility import seeded_rng


class EventKind(str, Enum):
    JOB_ARRIVAL = "JobArrival"
    JOB_START = "JobStart"
    JOB_END = "JobEnd"
    VM_STAGE_COMPLETE = "VmStageComplete"
    AUTOSCALE_TICK = "AutoscaleTick"
    CANCEL_REQUEST = "CancelRequest"


def canonical_payload(payload: Dict) -> str:
    r"""The fixed serialization used for digests and log export."""
    return json.dumps(payload, sort_keys=True, separators=(",", ":"), ensure_ascii=False)


@dataclass(frozen=True)
class SimEvent:
    r"""A timestamped event. Events order lexicographically on ``(time, sequence)``.

    Args:
        time (:obj:`int`): virtual seconds.
        sequence (:obj:`int`): tie-breaker, assigned by the engine from a monotone counter.
        kind (:obj:`EventKind`): what happened.
        payload (:obj:`dict`): kind-specific, JSON-serializable data.
    """
    time: int
    sequence: int
    kind: EventKind
    payload: Dict = field(default_factory=dict, compare=False)

    def __lt__(self, other: "SimEvent"):
        return (self.time, self.sequence) < (other.time, other.sequence)


@dataclass(frozen=True)
class LogEntry:
    t: int
    kind: str
    payload: Dict

    @property
    def digest(self) -> str:
        return hashlib.sha256(canonical_payload(self.payload).encode("utf-8")).hexdigest()

    def to_json_string(self) -> str:
        return canonical_payload({"t": self.t, "kind": self.kind, "payload": self.payload})


class EventLog(object):
    r"""Append-only record of processed events, in processing order."""

    def __init__(self, entries: Optional[Iterable[LogEntry]] = None):
        self._entries: List[LogEntry] = list(entries) if entries is not None else []

    def append(self, event: SimEvent):
        self._entries.append(LogEntry(event.time, event.kind.value, event.payload))

    @property
    def entries(self) -> Tuple[LogEntry, ...]:
        return tuple(self._entries)

    def __len__(self):
        return len(self._entries)

    def __iter__(self):
        return iter(self._entries)

    def __getitem__(self, idx):
        return self._entries[idx]

    def __eq__(self, other):
        if not isinstance(other, EventLog):
            return NotImplemented
        return self.dumps() == other.dumps()

    def dumps(self) -> str:
        return "".join(entry.to_json_string() + "\n" for entry in self._entries)

    def to_jsonl(self, path: str) -> None:
        with open(path, "w", encoding="utf-8", newline="\n") as f:
            f.write(self.dumps())

    @classmethod
    def from_jsonl(cls, path: str) -> "EventLog":
        entries = []
        with open(path, encoding="utf-8") as f:
            for lineno, line in enumerate(f, start=1):
                if not line.strip():
                    continue
                try:
                    obj = json.loads(line)
                    entry = LogEntry(int(obj["t"]), str(obj["kind"]), dict(obj["payload"]))
                    EventKind(entry.kind)
                except (ValueError, KeyError, TypeError) as e:
                    raise CorruptLog("line {}: {}".format(lineno, e))
                entries.append(entry)
        return cls(entries)


Handler = Callable[[SimEvent], None]


class SimEngine(object):
    r"""Deterministic discrete-event engine.

    One virtual clock, one event heap ordered by ``(time, sequence)``, one seeded random
    stream and one append-only :class:`EventLog`. Handlers are registered per
    :class:`EventKind`; step hooks run once all events of a given instant have been
    processed, and may schedule further events at that same instant.

    Args:
        seed (:obj:`int`): seed of the instance's only random stream.
    """

    def __init__(self, seed: int = 0):
        self.clock: int = 0
        self.seed = seed
        self._rng: Optional[np.random.Generator] = None
        self._queue: List[SimEvent] = []
        self._sequence = 0
        self._handlers: Dict[EventKind, Handler] = {}
        self._step_hooks: List[Callable[[int], None]] = []
        self.log = EventLog()

    @property
    def rng(self) -> np.random.Generator:
        if self._rng is None:
            self._rng = seeded_rng(self.seed)
        return self._rng

    def register(self, kind: EventKind, handler: Handler):
        self._handlers[EventKind(kind)] = handler

    def add_step_hook(self, hook: Callable[[int], None]):
        self._step_hooks.append(hook)

    def _next_event(self, time: int, kind: EventKind, payload: Optional[Dict]) -> SimEvent:
        if time < self.clock:
            raise SchedulingInPast("event {} at t={} is before the clock t={}".format(
                EventKind(kind).value, time, self.clock))
        event = SimEvent(int(time), self._sequence, EventKind(kind), dict(payload or {}))
        self._sequence += 1
        return event

    def schedule(self, time: int, kind: EventKind, payload: Optional[Dict] = None) -> SimEvent:
        event = self._next_event(time, kind, payload)
        heapq.heappush(self._queue, event)
        return event

    def emit(self, kind: EventKind, payload: Optional[Dict] = None) -> SimEvent:
        r"""Create an event at the current clock and process it right away."""
        event = self._next_event(self.clock, kind, payload)
        self._process(event)
        return event

    def _process(self, event: SimEvent):
        self.log.append(event)
        handler = self._handlers.get(event.kind)
        if handler is not None:
            handler(event)

    @property
    def pending(self) -> int:
        return len(self._queue)

    def peek_time(self) -> Optional[int]:
        return self._queue[0].time if self._queue else None

    def only_queued(self, kind: EventKind) -> bool:
        r"""Whether every queued event is of ``kind``; ``False`` on an empty queue."""
        return bool(self._queue) and all(event.kind == kind for event in self._queue)

    def _run_hooks(self):
        for hook in self._step_hooks:
            hook(self.clock)

    def step(self) -> bool:
        r"""Process every event of the next instant (and its step hooks).

        Returns ``False`` when the queue was empty.
        """
        if not self._queue:
            return False
        now = self._queue[0].time
        self.clock = now
        while self._queue and self._queue[0].time == now:
            self._process(heapq.heappop(self._queue))
            if not self._queue or self._queue[0].time > now:
                self._run_hooks()
        return True

    def run_until(self, t_end: int) -> EventLog:
        if t_end < self.clock:
            raise SchedulingInPast("cannot run back to t={} from t={}".format(t_end, self.clock))
        while self._queue and self._queue[0].time <= t_end:
            self.step()
        self.clock = max(self.clock, int(t_end))
        logger.debug(f"engine advanced to t={self.clock}, {len(self.log)} events logged")
        return self.log

    def run_before(self, t: int) -> EventLog:
        r"""Process every instant strictly earlier than ``t`` and move the clock to ``t``,
        leaving events at ``t`` queued so new submissions at ``t`` join the same instant."""
        if t < self.clock:
            raise SchedulingInPast("cannot run back to t={} from t={}".format(t, self.clock))
        while self._queue and self._queue[0].time < t:
            self.step()
        self.clock = int(t)
        return self.log
