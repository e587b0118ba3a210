import json
from decimal import Decimal, ROUND_HALF_UP
from fractions import Fraction
from typing import *

import pandas as pd

from burstsim.federation.wait_table import NODE_BIN_LABELS, RUNTIME_BIN_LABELS, node_bin, runtime_bin
from burstsim.metrics.records import JobRecord
from burstsim.utils.utils import format_hms, lower_median, round_half_up

EMPTY_CELL = "-"


def format_decimal(value: Fraction, places: int = 2) -> str:
    r"""Exact half-up decimal rendering of a rational, e.g. ``Fraction(119, 80) -> '1.49'``."""
    value = Fraction(value)
    exact = Decimal(value.numerator) / Decimal(value.denominator)
    return str(exact.quantize(Decimal(1).scaleb(-places), rounding=ROUND_HALF_UP))


class BinnedWaitReport(object):
    r"""Median queue wait in percent of requested run time, binned like the wait table.

    Cells without jobs hold ``None`` and render as ``-``; even-sized cells take the
    lower-middle value.
    """

    def __init__(self, cells: List[List[Optional[Fraction]]], counts: List[List[int]]):
        self.cells = cells
        self.counts = counts

    def cell(self, runtime_row: int, node_col: int) -> Optional[Fraction]:
        return self.cells[runtime_row][node_col]

    def to_frame(self) -> pd.DataFrame:
        rows = [[EMPTY_CELL if c is None else format_decimal(c) + "%" for c in row] for row in self.cells]
        return pd.DataFrame(rows, index=pd.Index(RUNTIME_BIN_LABELS, name="req_minutes"),
                            columns=list(NODE_BIN_LABELS))

    def to_csv(self, path: Optional[str] = None) -> str:
        text = self.to_frame().to_csv(lineterminator="\n")
        if path is not None:
            with open(path, "w", encoding="utf-8", newline="\n") as f:
                f.write(text)
        return text

    def to_dict(self) -> Dict:
        return {
            "runtime_bins_min": list(RUNTIME_BIN_LABELS),
            "node_bins": list(NODE_BIN_LABELS),
            "median_wait_pct": [[None if c is None else format_decimal(c) for c in row] for row in self.cells],
            "jobs": self.counts,
        }

    def to_json_string(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)


def binned_wait_report(records: Iterable[JobRecord]) -> BinnedWaitReport:
    r"""Bin executed copies by requested walltime and node count and take the median of
    ``wait_s / req_walltime_s * 100`` per bin. Cancelled copies do not count."""
    ratios: List[List[List[Fraction]]] = [[[] for _ in NODE_BIN_LABELS] for _ in RUNTIME_BIN_LABELS]
    for record in records:
        if not record.executed:
            continue
        row, col = runtime_bin(record.req_walltime_s), node_bin(record.nodes)
        ratios[row][col].append(Fraction(record.wait_s * 100, record.req_walltime_s))
    cells = [[lower_median(cell) for cell in row] for row in ratios]
    counts = [[len(cell) for cell in row] for row in ratios]
    return BinnedWaitReport(cells, counts)


def _mean(values: Sequence[int]) -> Fraction:
    return Fraction(sum(values), len(values))


def comparison_report(records_a: Sequence[JobRecord],
                      records_b: Sequence[JobRecord],
                      label_a: str = "hpc",
                      label_b: str = "cloud",
                      ) -> pd.DataFrame:
    r"""Per-application mean run time and time-to-solution of two scenarios side by side,
    rendered H:MM:SS, with the ``b / a`` run-time ratio to two decimals.

    Args:
        records_a (:obj:`Sequence[JobRecord]`): records of the reference scenario.
        records_b (:obj:`Sequence[JobRecord]`): records of the compared scenario.
        label_a (:obj:`str`): column prefix of the reference scenario.
        label_b (:obj:`str`): column prefix of the compared scenario.
    """
    executed_a = [r for r in records_a if r.executed]
    executed_b = [r for r in records_b if r.executed]
    if not executed_a or not executed_b:
        raise ValueError("comparison needs executed jobs in both record sets")
    apps = sorted({r.app for r in executed_a} & {r.app for r in executed_b})
    rows = []
    for app in apps:
        run_a = _mean([r.run_s for r in executed_a if r.app == app])
        run_b = _mean([r.run_s for r in executed_b if r.app == app])
        tts_a = _mean([r.tts_s for r in executed_a if r.app == app])
        tts_b = _mean([r.tts_s for r in executed_b if r.app == app])
        rows.append({
            "app": app,
            "{}_run".format(label_a): format_hms(round_half_up(run_a)),
            "{}_run".format(label_b): format_hms(round_half_up(run_b)),
            "run_ratio": format_decimal(run_b / run_a),
            "{}_tts".format(label_a): format_hms(round_half_up(tts_a)),
            "{}_tts".format(label_b): format_hms(round_half_up(tts_b)),
            "tts_ratio": format_decimal(tts_b / tts_a),
        })
    return pd.DataFrame(rows)


def policy_table(summaries: Mapping[str, Dict]) -> pd.DataFrame:
    r"""One row per policy summary, in the given order."""
    columns = ["policy", "median_tts_s", "mean_wait_s", "jobs_bursted", "vm_hours"]
    rows = [{"policy": name, **{k: s.get(k) for k in columns[1:]}} for name, s in summaries.items()]
    return pd.DataFrame(rows, columns=columns)


def tts_reduction(baseline: Dict, other: Dict) -> Optional[Fraction]:
    r"""Relative drop of the median time-to-solution from ``baseline`` to ``other``;
    ``None`` when either summary has no median."""
    before, after = baseline.get("median_tts_s"), other.get("median_tts_s")
    if not before or after is None:
        return None
    return 1 - Fraction(after) / Fraction(before)
