import pytest

from burstsim.errors import CorruptLog, SchedulingInPast
from burstsim.sim import EventKind, EventLog, SimEngine


def _recording_engine(seed=0):
    engine = SimEngine(seed=seed)
    seen = []
    engine.register(EventKind.JOB_ARRIVAL, lambda e: seen.append((e.time, e.payload["n"])))
    return engine, seen


def test_events_run_in_time_then_sequence_order():
    engine, seen = _recording_engine()
    engine.schedule(5, EventKind.JOB_ARRIVAL, {"n": 0})
    engine.schedule(3, EventKind.JOB_ARRIVAL, {"n": 1})
    engine.schedule(3, EventKind.JOB_ARRIVAL, {"n": 2})
    engine.run_until(10)
    assert seen == [(3, 1), (3, 2), (5, 0)]
    assert engine.clock == 10
    assert [entry.t for entry in engine.log] == [3, 3, 5]


def test_scheduling_in_the_past_raises():
    engine, _ = _recording_engine()
    engine.schedule(4, EventKind.JOB_ARRIVAL, {"n": 0})
    engine.step()
    with pytest.raises(SchedulingInPast):
        engine.schedule(3, EventKind.JOB_ARRIVAL, {"n": 1})
    with pytest.raises(SchedulingInPast):
        engine.run_until(2)


def test_step_hook_runs_once_per_instant_after_its_last_event():
    engine, seen = _recording_engine()
    hooks = []
    engine.add_step_hook(lambda t: hooks.append((t, len(seen))))
    for t, n in ((1, 0), (1, 1), (2, 2)):
        engine.schedule(t, EventKind.JOB_ARRIVAL, {"n": n})
    engine.run_until(5)
    assert hooks == [(1, 2), (2, 3)]


def test_hook_may_add_work_at_the_same_instant():
    engine, seen = _recording_engine()
    fired = []

    def hook(t):
        if not fired:
            fired.append(t)
            engine.schedule(t, EventKind.JOB_ARRIVAL, {"n": 99})

    engine.add_step_hook(hook)
    engine.schedule(7, EventKind.JOB_ARRIVAL, {"n": 1})
    engine.run_until(7)
    assert seen == [(7, 1), (7, 99)]


def test_emit_processes_immediately_at_the_clock():
    engine, seen = _recording_engine()
    engine.run_until(12)
    event = engine.emit(EventKind.JOB_ARRIVAL, {"n": 5})
    assert event.time == 12
    assert seen == [(12, 5)]
    assert engine.pending == 0


def test_run_before_leaves_events_at_the_boundary_queued():
    engine, seen = _recording_engine()
    engine.schedule(10, EventKind.JOB_ARRIVAL, {"n": 1})
    engine.schedule(20, EventKind.JOB_ARRIVAL, {"n": 2})
    engine.run_before(20)
    assert seen == [(10, 1)]
    assert engine.clock == 20
    assert engine.peek_time() == 20


def test_only_queued():
    engine, _ = _recording_engine()
    assert not engine.only_queued(EventKind.AUTOSCALE_TICK)
    engine.schedule(5, EventKind.AUTOSCALE_TICK)
    engine.schedule(9, EventKind.JOB_ARRIVAL, {"n": 0})
    assert not engine.only_queued(EventKind.AUTOSCALE_TICK)
    engine.run_until(9)
    engine.schedule(60, EventKind.AUTOSCALE_TICK)
    assert engine.only_queued(EventKind.AUTOSCALE_TICK)


def test_log_survives_jsonl(tmp_path):
    engine, _ = _recording_engine()
    engine.schedule(1, EventKind.JOB_ARRIVAL, {"n": 1, "name": "ü"})
    engine.schedule(2, EventKind.CANCEL_REQUEST, {"job_id": "a"})
    engine.run_until(3)
    path = str(tmp_path / "events.jsonl")
    engine.log.to_jsonl(path)
    loaded = EventLog.from_jsonl(path)
    assert loaded == engine.log
    assert loaded[0].digest == engine.log[0].digest
    with open(path, encoding="utf-8") as f:
        assert f.readline() == '{"kind":"JobArrival","payload":{"n":1,"name":"ü"},"t":1}\n'


def test_corrupt_log_lines_are_reported(tmp_path):
    path = tmp_path / "bad.jsonl"
    path.write_text('{"t": 0, "kind": "JobArrival", "payload": {}}\n{"t": 1, "kind": "Nope", "payload": {}}\n')
    with pytest.raises(CorruptLog, match="line 2"):
        EventLog.from_jsonl(str(path))


def test_random_stream_depends_on_seed_only():
    a = SimEngine(seed=42).rng.integers(0, 1 << 30, size=8)
    b = SimEngine(seed=42).rng.integers(0, 1 << 30, size=8)
    c = SimEngine(seed=43).rng.integers(0, 1 << 30, size=8)
    assert (a == b).all()
    assert not (a == c).all()
