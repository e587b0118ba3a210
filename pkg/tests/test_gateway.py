import pytest

from burstsim.config import load_scenario
from burstsim.gateway import SIM_TIME_HEADER, GatewayService, create_app
from burstsim.metrics import collect
from burstsim.simulation import Simulation
from burstsim.workload import Job, Trace, load_trace_jsonl


@pytest.fixture
def service(small_config):
    return GatewayService(small_config(hpc_nodes=8, max_vms=8, policy="AlwaysHpc"))


@pytest.fixture
def client(service):
    return create_app(service).test_client()


def at(t):
    return {SIM_TIME_HEADER: str(t)}


def namd(nodes=8, walltime=600, **params):
    return {"app": "NAMD-2.10", "parameters": {"nodes": nodes, "req_walltime_s": walltime, **params}}


class TestRegistries:
    def test_preregistered_systems_and_apps(self, client):
        systems = client.get("/v1/systems").get_json()
        assert [(s["id"], s["kind"]) for s in systems] == [("hpc", "hpc"), ("cloud", "cloud"), ("hpc-work", "storage")]
        apps = {a["id"]: a for a in client.get("/v1/apps").get_json()}
        assert set(apps) == {"GROMACS-2016.4", "NAMD-2.10", "OpenSeesSP-2.5.0", "WRF-3.6.1", "generic"}
        assert apps["NAMD-2.10"]["profile"] == "NAMD"

    def test_register_systems(self, small_config):
        client = create_app(GatewayService(small_config(), preregister=False)).test_client()
        assert client.get("/v1/systems").get_json() == []
        resp = client.post("/v1/systems", json={"id": "comet", "kind": "hpc", "description": "second site"})
        assert resp.status_code == 201
        assert client.post("/v1/systems", json={"id": "comet", "kind": "hpc"}).status_code == 409
        resp = client.post("/v1/systems", json={"id": "tape", "kind": "archive"})
        assert resp.status_code == 400
        assert resp.get_json()["code"] == 400
        resp = client.post("/v1/systems", json={"id": "scratch", "kind": "storage", "root_path": "/scratch"})
        assert resp.get_json() == {"id": "scratch", "root_path": "/scratch", "description": "", "kind": "storage"}
        assert len(client.get("/v1/systems").get_json()) == 2

    def test_register_apps(self, client):
        resp = client.post("/v1/apps", json={"name": "NAMD", "version": "2.12"})
        assert resp.status_code == 201
        assert resp.get_json()["id"] == "NAMD-2.12"
        assert client.post("/v1/apps", json={"name": "NAMD", "version": "2.12"}).status_code == 409
        assert client.post("/v1/apps", json={"name": "LAMMPS"}).status_code == 400
        resp = client.post("/v1/apps", json={"name": "namd-cloud", "profile": "NAMD", "default_system": "nowhere"})
        assert resp.status_code == 404
        resp = client.post("/v1/apps", json={"name": "namd-cloud", "profile": "NAMD", "default_system": "hpc-work"})
        assert resp.status_code == 400


class TestJobs:
    def test_status_progression(self, client):
        resp = client.post("/v1/jobs", json=namd(), headers=at(0))
        assert resp.status_code == 201
        job = resp.get_json()
        assert (job["id"], job["status"]) == ("gw-1", "SUBMITTED")
        assert job["provenance"]["inputs"] == {"nodes": 8, "tasks_per_node": 1, "req_walltime_s": 600,
                                               "base_runtime_s": 160}
        job = client.get("/v1/jobs/gw-1", headers=at(0)).get_json()
        assert job["status"] == "RUNNING"
        assert job["provenance"]["decision"]["targets"] == ["hpc"]
        assert client.get("/v1/jobs/gw-1", headers=at(159)).get_json()["status"] == "RUNNING"
        job = client.get("/v1/jobs/gw-1", headers=at(160)).get_json()
        assert job["status"] == "FINISHED"
        assert (job["provenance"]["system"], job["provenance"]["start_time"], job["provenance"]["end_time"]) == \
            ("hpc", 0, 160)

    def test_blocking_submit_on_the_default_system(self, client):
        client.post("/v1/apps", json={"name": "namd-cloud", "profile": "NAMD", "default_system": "cloud"})
        job = client.post("/v1/jobs", json={"app": "namd-cloud",
                                             "parameters": {"nodes": 8, "req_walltime_s": 600}}).get_json()
        assert job["status"] == "FINISHED"
        assert job["target"] == "cloud"
        provenance = job["provenance"]
        assert provenance["cluster"] == "cloud"
        assert provenance["end_time"] - provenance["start_time"] == 238

    def test_walltime_kill_fails_the_job(self, client):
        job = client.post("/v1/jobs", json=namd(walltime=100)).get_json()
        assert job["status"] == "FAILED"
        assert job["provenance"]["end_time"] == 100

    def test_cancel(self, client):
        client.post("/v1/jobs", json=namd(), headers=at(0))
        client.post("/v1/jobs", json=namd(), headers=at(0))
        assert client.get("/v1/jobs/gw-2", headers=at(10)).get_json()["status"] == "QUEUED"
        resp = client.post("/v1/jobs/gw-2/cancel", headers=at(10)).get_json()
        assert resp == {"id": "gw-2", "cancelled": True, "status": "CANCELLED"}
        resp = client.post("/v1/jobs/gw-1/cancel").get_json()
        assert resp == {"id": "gw-1", "cancelled": False, "status": "RUNNING"}
        jobs = client.get("/v1/jobs", headers=at(1000)).get_json()
        assert [j["status"] for j in jobs] == ["FINISHED", "CANCELLED"]
        assert jobs[1]["provenance"]["end_time"] == 10

    def test_errors_are_json(self, client):
        resp = client.post("/v1/jobs", json={"app": "LAMMPS", "parameters": {"nodes": 1, "req_walltime_s": 60}})
        assert resp.status_code == 404
        assert resp.get_json()["code"] == 404
        assert client.post("/v1/jobs", json={"app": "NAMD-2.10", "parameters": {"req_walltime_s": 60}}).status_code == 400
        assert client.post("/v1/jobs", json=namd(nodes=0)).status_code == 400
        assert client.post("/v1/jobs", json=namd(), headers=at("soon")).status_code == 400
        assert client.post("/v1/jobs", data="nodes=8").status_code == 400
        assert client.get("/v1/jobs/gw-9").status_code == 404
        resp = client.get("/v1/nothing")
        assert resp.status_code == 404 and resp.get_json()["code"] == 404

    def test_clock_never_runs_backwards(self, client):
        client.get("/v1/jobs", headers=at(500))
        resp = client.post("/v1/jobs", json=namd(), headers=at(100))
        assert resp.status_code == 400


def test_gateway_submission_matches_direct_submission(small_config):
    config = small_config(hpc_nodes=8, policy="AlwaysHpc")
    client = create_app(GatewayService(config)).test_client()
    client.post("/v1/jobs", json=namd(), headers=at(0))
    client.post("/v1/jobs", json=namd(nodes=4), headers=at(100))
    via_gateway = {j["id"]: (j["provenance"]["start_time"], j["provenance"]["end_time"])
                   for j in client.get("/v1/jobs", headers=at(10 ** 4)).get_json()}

    trace = Trace([Job(id="gw-1", submit_time=0, app="NAMD", nodes=8, req_walltime_s=600, base_runtime_s=160),
                   Job(id="gw-2", submit_time=100, app="NAMD", nodes=4, req_walltime_s=600, base_runtime_s=160)])
    direct = {r.job_id: (r.start_s, r.end_s) for r in collect(Simulation(config, trace=trace).run())}
    assert via_gateway == direct == {"gw-1": (0, 160), "gw-2": (160, 320)}


def test_jobs_no_system_can_hold_are_rejected(small_config):
    client = create_app(GatewayService(small_config(hpc_nodes=8, max_vms=4, policy="AlwaysHpc"))).test_client()
    assert client.post("/v1/jobs", json=namd(nodes=100), headers=at(0)).status_code == 400
    assert client.post("/v1/jobs", json=namd(nodes=100)).status_code == 400
    assert client.post("/v1/jobs", json={**namd(), "cluster_hint": "grid"}, headers=at(0)).status_code == 400
    assert client.get("/v1/jobs", headers=at(10)).get_json() == []

    resp = client.post("/v1/jobs", json={**namd(nodes=6), "target": "cloud"}, headers=at(10))
    assert resp.status_code == 201 and resp.get_json()["id"] == "gw-1"
    job = client.get("/v1/jobs/gw-1", headers=at(1000)).get_json()
    assert job["status"] == "FINISHED"
    assert job["provenance"]["system"] == "hpc"


def test_calibration_through_the_gateway_logs_like_a_direct_run(scenario_path, trace_path):
    direct = Simulation(load_scenario(scenario_path("calibration.yaml"))).run().dumps()

    service = GatewayService(load_scenario(scenario_path("calibration.yaml")))
    client = create_app(service).test_client()
    app_ids = {a["profile"]: a["id"] for a in client.get("/v1/apps").get_json()}
    renames = {}
    for job in load_trace_jsonl(trace_path("calibration.jsonl")):
        body = {"app": app_ids[job.app], "user": job.user, "cluster_hint": job.cluster_hint,
                "parameters": {"nodes": job.nodes, "tasks_per_node": job.tasks_per_node,
                               "req_walltime_s": job.req_walltime_s, "base_runtime_s": job.base_runtime_s}}
        resp = client.post("/v1/jobs", json=body, headers=at(job.submit_time))
        assert resp.status_code == 201
        renames['"{}"'.format(resp.get_json()["id"])] = '"{}"'.format(job.id)
    jobs = client.get("/v1/jobs", headers=at(10 ** 5)).get_json()
    assert [j["status"] for j in jobs] == ["FINISHED"] * 8

    via_gateway = service.simulation.log.dumps()
    for gateway_id, job_id in renames.items():
        via_gateway = via_gateway.replace(gateway_id, job_id)
    assert via_gateway == direct
