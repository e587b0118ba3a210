from .engine import EventKind, SimEvent, EventLog, LogEntry, SimEngine, canonical_payload
