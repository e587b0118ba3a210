import os

import pytest

from burstsim.default_config import get_default_config
from burstsim.utils.logging import init_logger
from burstsim.workload import Job, load_app_profiles

ROOT = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))
SCENARIO_DIR = os.path.join(ROOT, "scenarios")
TRACE_DIR = os.path.join(ROOT, "traces")


@pytest.fixture(scope="session", autouse=True)
def quiet_logger():
    # per-event DEBUG output slows the property runs down considerably
    init_logger(log_level="WARNING")


def _make_job(job_id, submit=0, nodes=1, walltime=600, runtime=None, app="NAMD", hint="auto", partition=None):
    return Job(id=job_id, submit_time=submit, app=app, nodes=nodes, req_walltime_s=walltime,
               base_runtime_s=walltime if runtime is None else runtime,
               cluster_hint=hint, partition=partition)


def _small_config(hpc_nodes=8, max_vms=8, initial_vms=None, prewarm=True, policy="AlwaysHpc",
                  latency=None, seed=1, wait_source="live", check_invariants=True,
                  autoscale=False, min_vms=0):
    cfg = get_default_config()
    cfg.reproduce.seed = seed
    cfg.simulation.check_invariants = check_invariants
    cfg.hpc.name = "hpc"
    cfg.hpc.total_nodes = hpc_nodes
    cfg.hpc.partitions = []
    cfg.cloud.name = "cloud"
    cfg.cloud.min_vms = min_vms
    cfg.cloud.max_vms = max_vms
    cfg.cloud.initial_vms = max_vms if initial_vms is None else initial_vms
    cfg.cloud.prewarm = prewarm
    if latency is not None:
        for stage in list(cfg.cloud.stage_latencies_s.keys()):
            cfg.cloud.stage_latencies_s[stage] = latency
    cfg.autoscaler.enabled = autoscale
    cfg.policy.variant = policy
    cfg.policy.wait_source = wait_source
    return cfg


@pytest.fixture
def config():
    return get_default_config()


@pytest.fixture
def profiles(config):
    return load_app_profiles(config)


@pytest.fixture
def make_job():
    return _make_job


@pytest.fixture
def small_config():
    return _small_config


@pytest.fixture
def scenario_path():
    return lambda name: os.path.join(SCENARIO_DIR, name)


@pytest.fixture
def trace_path():
    return lambda name: os.path.join(TRACE_DIR, name)
