"""
Historical queue-wait estimates: a grid of median waits, as a percentage of the requested
run time, indexed by requested run time and node count.
"""

import os
from fractions import Fraction
from typing import *

import pandas as pd

from burstsim.errors import ConfigError
from burstsim.utils.utils import round_half_up
from burstsim.workload.utils import Job

RUNTIME_BIN_LABELS = ("1-4", "4-16", "16-64", "64-256", "256-1024", "1024-4096")
NODE_BIN_LABELS = ("1-4", "4-16", "16-64", "64-256", ">256")

# upper bounds, inclusive; the last bin is open-ended
_RUNTIME_UPPER_MIN = (4, 16, 64, 256, 1024)
_NODE_UPPER = (4, 16, 64, 256)

DEFAULT_WAIT_TABLE = os.path.join(os.path.dirname(os.path.dirname(__file__)), "resources", "wait_table.csv")


def runtime_bin(req_walltime_s: int) -> int:
    r"""Row index for a requested walltime. Requests under one minute clamp to the first
    row, requests over 4096 minutes to the last."""
    minutes = Fraction(req_walltime_s, 60)
    for i, upper in enumerate(_RUNTIME_UPPER_MIN):
        if minutes <= upper:
            return i
    return len(_RUNTIME_UPPER_MIN)


def node_bin(nodes: int) -> int:
    for i, upper in enumerate(_NODE_UPPER):
        if nodes <= upper:
            return i
    return len(_NODE_UPPER)


class WaitTable(object):
    r"""6 x 5 grid of median queue waits in percent of requested run time.

    Args:
        cells (:obj:`Sequence[Sequence[Fraction]]`): one row per runtime bin, one column
            per node bin, all non-negative.
    """

    def __init__(self, cells: Sequence[Sequence[Fraction]]):
        rows = [list(map(Fraction, row)) for row in cells]
        if len(rows) != len(RUNTIME_BIN_LABELS) or any(len(r) != len(NODE_BIN_LABELS) for r in rows):
            raise ConfigError("wait table must have {} rows of {} cells".format(
                len(RUNTIME_BIN_LABELS), len(NODE_BIN_LABELS)))
        if any(cell < 0 for row in rows for cell in row):
            raise ConfigError("wait table cells must be >= 0")
        self.cells = rows

    @classmethod
    def from_csv(cls, path: Optional[str] = None) -> "WaitTable":
        path = path or DEFAULT_WAIT_TABLE
        if not os.path.exists(path):
            raise ConfigError("wait table {} does not exist".format(path))
        # read as text so "0.13" stays exactly 13/100
        frame = pd.read_csv(path, dtype=str, index_col=0)
        if tuple(c.strip() for c in frame.columns) != NODE_BIN_LABELS:
            raise ConfigError("{}: node bins must be {}".format(path, ",".join(NODE_BIN_LABELS)))
        if tuple(str(i).strip() for i in frame.index) != RUNTIME_BIN_LABELS:
            raise ConfigError("{}: runtime bins must be {}".format(path, ",".join(RUNTIME_BIN_LABELS)))
        try:
            cells = [[Fraction(v.strip().rstrip("%")) for v in row] for row in frame.values.tolist()]
        except (ValueError, AttributeError):
            raise ConfigError("{}: cells must be decimal percentages".format(path))
        return cls(cells)

    def lookup(self, runtime_row: int, node_col: int) -> Fraction:
        return self.cells[runtime_row][node_col]

    def percentage(self, job: Job) -> Fraction:
        return self.lookup(runtime_bin(job.req_walltime_s), node_bin(job.nodes))

    def estimate_wait_s(self, job: Job) -> int:
        r"""``req_walltime_s * cell / 100``, rounded half-up to whole seconds."""
        return round_half_up(job.req_walltime_s * self.percentage(job) / 100)
