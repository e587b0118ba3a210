from collections import defaultdict

import numpy as np
import pytest

from burstsim.config import load_scenario
from burstsim.errors import InvariantViolation
from burstsim.federation import load_policy
from burstsim.metrics import collect, summary, tts_reduction
from burstsim.simulation import Simulation
from burstsim.workload import Job, Trace

FLAT_PROFILE = [{"name": "flat", "base_runtime_s": 100, "cloud_slowdown": "1"}]


def _schedule(log):
    return {(r.job_id, r.start_s, r.end_s, r.outcome) for r in collect(log) if r.executed}


def _starts(log):
    return {r.job_id: (r.start_s, r.end_s) for r in collect(log) if r.executed}


def _random_trace(rng, n_jobs, max_nodes, app="flat", horizon=2000):
    jobs = []
    for i in range(n_jobs):
        walltime = int(rng.integers(10, 500))
        jobs.append(Job(id="j{:04d}".format(i), submit_time=int(rng.integers(0, horizon)), app=app,
                        nodes=int(rng.integers(1, max_nodes + 1)), req_walltime_s=walltime,
                        base_runtime_s=int(rng.integers(1, 600))))
    return Trace(jobs)


class TestCalibration:
    def test_calibrated_run_times(self, scenario_path):
        config = load_scenario(scenario_path("calibration.yaml"))
        simulation = Simulation(config)
        records = collect(simulation.run())
        runs = {r.job_id: r.run_s for r in records if r.executed}
        assert runs == {
            "gromacs-hpc": 3940, "gromacs-cloud": 6366,
            "namd-hpc": 160, "namd-cloud": 238,
            "openseessp-hpc": 226, "openseessp-cloud": 403,
            "wrf-hpc": 230, "wrf-cloud": 369,
        }
        assert all(r.wait_s == 0 for r in records)
        assert {r.job_id: r.kind for r in records}["namd-cloud"] == "cloud"


class TestDeterminism:
    def test_same_seed_same_bytes(self, scenario_path):
        logs, summaries = [], []
        for _ in range(2):
            simulation = Simulation(load_scenario(scenario_path("default.yaml")))
            log = simulation.run()
            logs.append(log.dumps())
            summaries.append(summary(collect(log), log))
        assert logs[0] == logs[1]
        assert summaries[0] == summaries[1]

    def test_seed_changes_a_stochastic_run(self, scenario_path):
        dumps = []
        for seed in (100, 101):
            config = load_scenario(scenario_path("default.yaml"))
            config.reproduce.seed = seed
            dumps.append(Simulation(config).run().dumps())
        assert dumps[0] != dumps[1]

    def test_horizon(self, scenario_path):
        config = load_scenario(scenario_path("default.yaml"))
        config.simulation.horizon_s = 0
        log = Simulation(config).run()
        assert len(log) == 0
        config.simulation.horizon_s = 7200
        records = collect(Simulation(config).run())
        assert records and all(r.submit_s < 7200 for r in records)


class TestFederation:
    def test_exactly_once_under_dual_submission(self, small_config):
        rng = np.random.default_rng(7)
        total_jobs = 0
        for scenario in range(50):
            hpc_nodes = int(rng.integers(2, 33))
            max_vms = int(rng.integers(1, 17))
            config = small_config(hpc_nodes=hpc_nodes, max_vms=max_vms,
                                  initial_vms=int(rng.integers(0, max_vms + 1)),
                                  prewarm=bool(rng.integers(0, 2)), latency=int(rng.integers(0, 121)),
                                  autoscale=bool(rng.integers(0, 2)), policy="DualSubmit", seed=scenario)
            config.apps.profiles = FLAT_PROFILE + [{"name": "slow", "base_runtime_s": 100, "cloud_slowdown": "3/2"}]
            trace = _random_trace(rng, 200, hpc_nodes, app="flat" if scenario % 2 else "slow", horizon=20000)
            simulation = Simulation(config, trace=trace)
            log = simulation.run()
            copies = defaultdict(list)
            for record in collect(log):
                copies[record.job_id].append(record)
            assert len(copies) == len(trace)
            for job_id, records in copies.items():
                executed = [r for r in records if r.executed]
                assert len(executed) == 1, (scenario, job_id)
                assert all(r.outcome == "Cancelled" for r in records if r is not executed[0])
            for copies_of_job in simulation.router.registry.values():
                assert len(copies_of_job.entries) in (1, 2)
            total_jobs += len(trace)
        assert total_jobs == 10000

    def test_cloud_matches_an_equal_hpc_cluster(self, small_config):
        rng = np.random.default_rng(11)
        for _ in range(100):
            n = int(rng.integers(1, 9))
            trace = _random_trace(rng, 30, n)
            schedules = []
            for policy, hpc_nodes in (("AlwaysCloud", 64), ("AlwaysHpc", n)):
                config = small_config(hpc_nodes=hpc_nodes, max_vms=n, latency=0, prewarm=False, policy=policy)
                config.apps.profiles = FLAT_PROFILE
                schedules.append(_starts(Simulation(config, trace=trace).run()))
            assert schedules[0] == schedules[1]

    def test_without_cloud_every_policy_is_the_hpc_baseline(self, small_config):
        trace = _random_trace(np.random.default_rng(3), 60, 8, app="NAMD")
        schedules = {}
        for policy in ("AlwaysHpc", "AlwaysCloud", "DualSubmit", "CostModel", "WaitThreshold"):
            config = small_config(hpc_nodes=8, max_vms=0, policy=policy)
            schedules[policy] = _schedule(Simulation(config, trace=trace).run())
        baseline = schedules.pop("AlwaysHpc")
        for policy, schedule in schedules.items():
            assert schedule == baseline, policy

    def test_bursting_beats_hpc_only_under_overload(self, small_config, record_property):
        # 2-node, 600 s jobs every 75 s: twice what 8 HPC nodes can serve
        jobs = [Job(id="o{:03d}".format(i), submit_time=75 * i, app="flat", nodes=2,
                    req_walltime_s=600, base_runtime_s=600) for i in range(200)]
        trace = Trace(jobs)
        config = small_config(hpc_nodes=8, max_vms=8, prewarm=True, policy="AlwaysHpc", wait_source="live")
        config.apps.profiles = FLAT_PROFILE
        summaries = {}
        for policy in ("AlwaysHpc", "DualSubmit", "CostModel"):
            simulation = Simulation(config, trace=trace, policy=load_policy(config.policy, policy))
            log = simulation.run()
            summaries[policy] = summary(collect(log), log)
        assert summaries["DualSubmit"]["median_tts_s"] == 600
        for policy in ("DualSubmit", "CostModel"):
            reduction = tts_reduction(summaries["AlwaysHpc"], summaries[policy])
            # shows up in --junitxml output
            record_property("median_tts_reduction_" + policy, float(reduction))
            assert reduction > 0


class TestControl:
    def test_user_cancel_of_a_pending_job(self, small_config, make_job):
        config = small_config(hpc_nodes=4, max_vms=0)
        simulation = Simulation(config, trace=Trace([make_job("blocker", nodes=4, walltime=100),
                                                     make_job("x", nodes=4, walltime=100)]))
        simulation.run_until(10)
        assert not simulation.cancel("blocker")
        assert simulation.cancel("x")
        records = {r.job_id: r for r in collect(simulation.run())}
        assert records["x"].outcome == "Cancelled" and records["x"].end_s == 10
        assert records["blocker"].outcome == "Finished"
        assert simulation.is_terminal("x")

    def test_walltime_kill_is_recorded(self, small_config, make_job):
        config = small_config(hpc_nodes=4, max_vms=0)
        simulation = Simulation(config, trace=Trace([make_job("k", nodes=1, walltime=100, runtime=150)]))
        (record,) = collect(simulation.run())
        assert (record.outcome, record.run_s) == ("WalltimeKilled", 100)

    def test_low_headroom_still_provisions_the_whole_job(self, small_config, make_job):
        config = small_config(max_vms=8, initial_vms=0, autoscale=True, policy="AlwaysCloud")
        config.autoscaler.headroom_factor = 0.5
        simulation = Simulation(config, trace=Trace([make_job("x", nodes=4, walltime=2000, runtime=160)]))
        (record,) = collect(simulation.run())
        # first tick at t=0 precedes the arrival; the t=60 tick requests 4 VMs, Ready 315 s later
        assert (record.outcome, record.kind, record.start_s, record.end_s) == ("Finished", "cloud", 375, 613)
        assert max(a.target for a in simulation.cloud.actions) == 4

    def test_stalled_autoscaler_raises(self, small_config, make_job):
        config = small_config(max_vms=8, initial_vms=0, autoscale=True, policy="AlwaysCloud")
        simulation = Simulation(config, trace=Trace([make_job("x", nodes=4, walltime=2000)]))
        simulation.cloud.autoscale_tick = lambda t: None
        with pytest.raises(InvariantViolation, match="stalled"):
            simulation.run()
        assert simulation.engine.clock == 60

    def test_stalled_blocking_wait_raises(self, small_config, make_job):
        config = small_config(max_vms=8, initial_vms=0, autoscale=True, policy="AlwaysCloud")
        simulation = Simulation(config, trace=Trace([make_job("x", nodes=4, walltime=2000)]))
        simulation.cloud.autoscale_tick = lambda t: None
        with pytest.raises(InvariantViolation):
            simulation.step_until_terminal("x")

    def test_invariant_checks_catch_corruption(self, small_config, make_job):
        config = small_config(hpc_nodes=4, max_vms=0)
        simulation = Simulation(config, trace=Trace([make_job("a", nodes=2, walltime=100)]))
        simulation.run_until(0)
        simulation.hpc.used["default"] = 3
        with pytest.raises(InvariantViolation):
            simulation.verify(0)
