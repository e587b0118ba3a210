import copy
from dataclasses import dataclass, field, asdict
from enum import Enum
from typing import *


class GatewayError(Exception):
    r"""An API error carrying its HTTP status code."""
    code = 400

    def __init__(self, message: str, code: Optional[int] = None):
        super().__init__(message)
        if code is not None:
            self.code = code

    def to_dict(self) -> Dict:
        return {"error": str(self), "code": self.code}


class BadRequest(GatewayError):
    code = 400


class NotFound(GatewayError):
    code = 404


class Conflict(GatewayError):
    code = 409


EXECUTION_KINDS = ("hpc", "cloud")
SYSTEM_KINDS = EXECUTION_KINDS + ("storage",)


@dataclass
class ExecutionSystem:
    id: str
    kind: str
    description: str = ""

    def to_dict(self) -> Dict:
        return asdict(self)


@dataclass
class StorageSystem:
    id: str
    root_path: str
    description: str = ""
    kind: str = "storage"

    def to_dict(self) -> Dict:
        return asdict(self)


@dataclass
class AppRegistration:
    r"""An application as the gateway exposes it: a versioned name bound to a run-time
    profile and, optionally, to the execution system it runs on by default."""
    id: str
    name: str
    version: str
    profile: str
    default_system: Optional[str] = None
    description: str = ""

    def to_dict(self) -> Dict:
        return asdict(self)


class GatewayStatus(str, Enum):
    PENDING = "PENDING"
    SUBMITTED = "SUBMITTED"
    QUEUED = "QUEUED"
    RUNNING = "RUNNING"
    FINISHED = "FINISHED"
    FAILED = "FAILED"
    CANCELLED = "CANCELLED"


_RANK = {s: i for i, s in enumerate(GatewayStatus)}
FINAL_STATUSES = (GatewayStatus.FINISHED, GatewayStatus.FAILED, GatewayStatus.CANCELLED)


@dataclass
class GatewayJob:
    id: str
    app_id: str
    parameters: Dict
    target: str = "auto"
    status: GatewayStatus = GatewayStatus.PENDING
    provenance: Dict = field(default_factory=dict)

    def advance(self, status: GatewayStatus) -> bool:
        r"""Move forward to ``status``; stale (earlier) statuses are ignored."""
        if self.status in FINAL_STATUSES or _RANK[status] <= _RANK[self.status]:
            return False
        self.status = status
        return True

    @property
    def final(self) -> bool:
        return self.status in FINAL_STATUSES

    def to_dict(self) -> Dict:
        return {
            "id": self.id,
            "app_id": self.app_id,
            "parameters": copy.deepcopy(self.parameters),
            "target": self.target,
            "status": self.status.value,
            "provenance": copy.deepcopy(self.provenance),
        }
