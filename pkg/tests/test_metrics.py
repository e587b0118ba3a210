from fractions import Fraction

import pytest

from burstsim.errors import CorruptLog
from burstsim.metrics import (
    JobRecord,
    binned_wait_report,
    collect,
    comparison_report,
    format_decimal,
    policy_table,
    summary,
    tts_reduction,
    vm_seconds,
    write_records_csv,
)
from burstsim.sim import EventLog, LogEntry


def rec(job_id, walltime, nodes, wait, run=10, outcome="Finished", app="NAMD", cluster="hpc", kind="hpc"):
    return JobRecord(job_id=job_id, app=app, cluster=cluster, submit_s=0, start_s=wait, end_s=wait + run,
                     wait_s=wait, run_s=run, tts_s=wait + run, outcome=outcome, kind=kind,
                     nodes=nodes, req_walltime_s=walltime)


def cancelled(job_id, walltime, nodes, end=5):
    return JobRecord(job_id=job_id, app="NAMD", cluster="cloud", submit_s=0, start_s=None, end_s=end,
                     wait_s=None, run_s=None, tts_s=None, outcome="Cancelled",
                     nodes=nodes, req_walltime_s=walltime)


@pytest.fixture
def twelve_jobs():
    return [
        # 16-64 min, 1-4 nodes: 1%, 2%, 5%
        rec("a1", 1800, 2, 18), rec("a2", 1800, 1, 36), rec("a3", 1800, 4, 90),
        # 1-4 min, >256 nodes: 50%, 100%
        rec("b1", 120, 300, 60), rec("b2", 120, 512, 120),
        # 64-256 min, 4-16 nodes: 0%, 1%, 2%, 10%
        rec("c1", 7200, 8, 0), rec("c2", 7200, 8, 72), rec("c3", 7200, 16, 144), rec("c4", 7200, 5, 720),
        # 1024-4096 min, 16-64 nodes: 0.5%, 1.5%
        rec("d1", 180000, 32, 900), rec("d2", 180000, 64, 2700),
        # 4-16 min, 64-256 nodes: 1/6 %
        rec("e1", 600, 100, 1, outcome="WalltimeKilled"),
        # a losing duplicate never counts
        cancelled("a1", 1800, 2),
    ]


class TestBinnedWaitReport:
    def test_hand_computed_medians(self, twelve_jobs):
        report = binned_wait_report(twelve_jobs)
        assert report.cell(2, 0) == 2
        assert report.cell(0, 4) == 50
        assert report.cell(3, 1) == 1
        assert report.cell(5, 2) == Fraction(1, 2)
        assert report.cell(1, 3) == Fraction(1, 6)
        filled = {(2, 0), (0, 4), (3, 1), (5, 2), (1, 3)}
        for r in range(6):
            for c in range(5):
                if (r, c) not in filled:
                    assert report.cell(r, c) is None
        assert sum(map(sum, report.counts)) == 12
        assert report.counts[2][0] == 3

    def test_rendering(self, twelve_jobs, tmp_path):
        report = binned_wait_report(twelve_jobs)
        lines = report.to_csv(str(tmp_path / "wait_bins.csv")).splitlines()
        assert lines[0] == "req_minutes,1-4,4-16,16-64,64-256,>256"
        assert lines[1] == "1-4,-,-,-,-,50.00%"
        assert lines[2] == "4-16,-,-,-,0.17%,-"
        assert lines[3] == "16-64,2.00%,-,-,-,-"
        assert lines[6] == "1024-4096,-,-,0.50%,-,-"
        assert (tmp_path / "wait_bins.csv").read_text(encoding="utf-8").splitlines() == lines
        assert report.to_dict()["median_wait_pct"][3][1] == "1.00"

    def test_format_decimal_rounds_half_up(self):
        assert format_decimal(Fraction(119, 80)) == "1.49"
        assert format_decimal(Fraction(1, 8)) == "0.13"
        assert format_decimal(Fraction(0)) == "0.00"


class TestSummary:
    def test_summary_over_executed_copies(self, twelve_jobs):
        log = EventLog([
            LogEntry(0, "VmStageComplete", {"vm_id": "v1", "stage": "request"}),
            LogEntry(1800, "VmStageComplete", {"vm_id": "v2", "stage": "request"}),
            LogEntry(3600, "VmStageComplete", {"vm_id": "v1", "stage": "terminate"}),
            LogEntry(7200, "AutoscaleTick", {"pool": "cloud"}),
        ])
        assert vm_seconds(log) == 3600 + 5400
        result = summary(twelve_jobs, log)
        assert result["jobs"] == 12
        assert result["jobs_executed"] == 12
        assert result["jobs_cancelled"] == 1
        assert result["jobs_walltime_killed"] == 1
        assert result["jobs_bursted"] == 0
        assert result["vm_hours"] == 2.5
        tts = sorted(r.tts_s for r in twelve_jobs if r.executed)
        assert result["median_tts_s"] == tts[5]
        assert result["mean_wait_s"] == round(sum(r.wait_s for r in twelve_jobs if r.executed) / 12, 3)

    def test_empty(self):
        result = summary([], EventLog())
        assert result["median_tts_s"] is None and result["mean_wait_s"] is None
        assert result["vm_hours"] == 0

    def test_tts_reduction(self):
        assert tts_reduction({"median_tts_s": 1200}, {"median_tts_s": 600}) == Fraction(1, 2)
        assert tts_reduction({"median_tts_s": 600}, {"median_tts_s": 900}) == Fraction(-1, 2)
        assert tts_reduction({"median_tts_s": None}, {"median_tts_s": 600}) is None
        assert tts_reduction({"median_tts_s": 600}, {}) is None

    def test_policy_table(self):
        table = policy_table({"AlwaysHpc": {"median_tts_s": 10, "mean_wait_s": 1.0, "jobs_bursted": 0, "vm_hours": 0.0},
                              "DualSubmit": {"median_tts_s": 5, "mean_wait_s": 0.5, "jobs_bursted": 3, "vm_hours": 1.0}})
        assert list(table["policy"]) == ["AlwaysHpc", "DualSubmit"]
        assert list(table["median_tts_s"]) == [10, 5]


class TestComparison:
    def test_run_time_table(self):
        hpc = [rec("g", 7200, 4, 0, run=3940, app="GROMACS"), rec("n", 600, 8, 0, run=160)]
        cloud = [rec("g", 7200, 4, 0, run=6366, app="GROMACS", cluster="cloud", kind="cloud"),
                 rec("n", 600, 8, 0, run=238, cluster="cloud", kind="cloud")]
        table = comparison_report(hpc, cloud).set_index("app")
        assert table.loc["GROMACS", "hpc_run"] == "1:05:40"
        assert table.loc["GROMACS", "cloud_run"] == "1:46:06"
        assert table.loc["GROMACS", "run_ratio"] == "1.62"
        assert table.loc["NAMD", "hpc_run"] == "0:02:40"
        assert table.loc["NAMD", "cloud_run"] == "0:03:58"
        assert table.loc["NAMD", "run_ratio"] == "1.49"

    def test_needs_executed_jobs(self):
        with pytest.raises(ValueError):
            comparison_report([], [rec("n", 600, 8, 0)])


class TestCollect:
    def _log(self):
        job = {"id": "x", "submit_time": 0, "app": "NAMD", "nodes": 2, "req_walltime_s": 600}
        return EventLog([
            LogEntry(0, "JobArrival", {"job": job}),
            LogEntry(5, "JobStart", {"job_id": "x", "cluster": "hpc", "kind": "hpc", "nodes": 2}),
            LogEntry(5, "CancelRequest", {"job_id": "x", "cluster": "cloud", "reason": "started on hpc"}),
            LogEntry(165, "JobEnd", {"job_id": "x", "cluster": "hpc", "outcome": "Finished"}),
        ])

    def test_records_from_log(self, tmp_path):
        records = collect(self._log())
        assert [(r.cluster, r.outcome) for r in records] == [("cloud", "Cancelled"), ("hpc", "Finished")]
        done = records[1]
        assert (done.wait_s, done.run_s, done.tts_s) == (5, 160, 165)
        path = tmp_path / "records.csv"
        write_records_csv(records, str(path))
        lines = path.read_text(encoding="utf-8").splitlines()
        assert lines[0] == "job_id,app,cluster,submit_s,start_s,end_s,wait_s,run_s,tts_s,outcome"
        assert lines[1] == "x,NAMD,cloud,0,,5,,,,Cancelled"
        assert lines[2] == "x,NAMD,hpc,0,5,165,5,160,165,Finished"

    def test_start_without_arrival(self):
        log = EventLog([LogEntry(5, "JobStart", {"job_id": "x", "cluster": "hpc"})])
        with pytest.raises(CorruptLog):
            collect(log)
