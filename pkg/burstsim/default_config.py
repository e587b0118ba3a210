from yacs.config import CfgNode


def get_default_config():
    # burstsim's default configuration options: the Stampede2 + Jetstream setup
    cfg = CfgNode(new_allowed=True)

    cfg.reproduce = CfgNode(new_allowed=True)
    cfg.reproduce.seed = 100  # the only random stream of a run is seeded from this

    # SIMULATION
    ##################################
    cfg.simulation = CfgNode(new_allowed=True)
    cfg.simulation.horizon_s = -1  # jobs submitted at or after the horizon are not admitted; -1 admits all
    cfg.simulation.check_invariants = False  # capacity and exactly-once checks after every time step

    # HPC SYSTEM
    ##################################
    cfg.hpc = CfgNode(new_allowed=True)
    cfg.hpc.name = "stampede2"
    cfg.hpc.total_nodes = 5936
    cfg.hpc.cores_per_node = 48
    cfg.hpc.partitions = [["knl", 4200], ["skx", 1736]]  # [name, nodes] pairs; empty -> one partition
    cfg.hpc.default_partition = "skx"
    cfg.hpc.backfill = True

    # CLOUD POOL
    ##################################
    cfg.cloud = CfgNode(new_allowed=True)
    cfg.cloud.name = "jetstream"
    cfg.cloud.host_count = 320
    cfg.cloud.vcpus_per_host = 48
    cfg.cloud.oversubscription = 1.0
    cfg.cloud.vm_vcpus = 2
    cfg.cloud.stage_latencies_s = CfgNode(new_allowed=True)
    cfg.cloud.stage_latencies_s.boot = 60
    cfg.cloud.stage_latencies_s.update = 120
    cfg.cloud.stage_latencies_s.packages = 90
    cfg.cloud.stage_latencies_s.mounts = 15
    cfg.cloud.stage_latencies_s.scheduler = 20
    cfg.cloud.stage_latencies_s.identity = 10
    cfg.cloud.min_vms = 0
    cfg.cloud.max_vms = 8
    cfg.cloud.initial_vms = 8  # requested at t=0
    cfg.cloud.prewarm = False  # initial VMs start Ready
    cfg.cloud.master_vm = True
    cfg.cloud.login_vm = True
    cfg.cloud.backfill = True

    cfg.autoscaler = CfgNode(new_allowed=True)
    cfg.autoscaler.enabled = False
    cfg.autoscaler.interval_s = 60
    cfg.autoscaler.headroom_factor = 1.0
    cfg.autoscaler.cooldown_s = 600

    # ROUTING
    ##################################
    cfg.policy = CfgNode(new_allowed=True)
    cfg.policy.variant = "HintOnly"  # HintOnly | AlwaysHpc | AlwaysCloud | DualSubmit | WaitThreshold | CostModel
    cfg.policy.threshold_s = 3600  # WaitThreshold only
    cfg.policy.wait_source = "table"  # table | live
    cfg.policy.wait_table_path = None  # None -> the shipped table

    # APPLICATIONS
    ##################################
    cfg.apps = CfgNode(new_allowed=True)
    cfg.apps.path = None  # optional YAML list of profiles, overrides entries below by name
    cfg.apps.profiles = [
        {"name": "GROMACS", "base_runtime_s": 3940, "cloud_slowdown": "6366/3940",
         "reference_nodes": 4, "reference_tasks": 8, "version": "2016.4",
         "description": "molecular dynamics"},
        {"name": "NAMD", "base_runtime_s": 160, "cloud_slowdown": "238/160",
         "reference_nodes": 8, "reference_tasks": 16, "version": "2.10",
         "description": "molecular dynamics"},
        {"name": "OpenSeesSP", "base_runtime_s": 226, "cloud_slowdown": "403/226",
         "reference_nodes": 1, "reference_tasks": 1, "version": "2.5.0",
         "description": "earthquake engineering, finite elements"},
        {"name": "WRF", "base_runtime_s": 230, "cloud_slowdown": "369/230",
         "reference_nodes": 2, "reference_tasks": 4, "version": "3.6.1",
         "description": "weather research and forecasting"},
        {"name": "generic", "base_runtime_s": 3600, "cloud_slowdown": "1.6227",
         "description": "default for traces without application names"},
    ]

    # WORKLOAD
    ##################################
    cfg.trace = CfgNode(new_allowed=True)
    cfg.trace.source = "jsonl"  # jsonl | swf | synthetic
    cfg.trace.path = None
    cfg.trace.swf_cores_per_node = 48
    cfg.trace.swf_app = "generic"
    cfg.trace.swf_req_walltime_column = 8
    cfg.trace.synthetic = CfgNode(new_allowed=True)
    cfg.trace.synthetic.rate_jobs_per_hour = 10.0
    cfg.trace.synthetic.duration_s = 86400
    cfg.trace.synthetic.node_dist = [[1, 0.5], [2, 0.3], [4, 0.2]]  # [value, probability] pairs
    cfg.trace.synthetic.walltime_dist = [[1800, 0.5], [3600, 0.3], [7200, 0.2]]
    cfg.trace.synthetic.app_mix = [["GROMACS", 0.25], ["NAMD", 0.25], ["OpenSeesSP", 0.25], ["WRF", 0.25]]
    cfg.trace.synthetic.runtime_fraction = [0.2, 1.0]
    cfg.trace.synthetic.cluster_hint = "auto"

    # GATEWAY
    ##################################
    cfg.gateway = CfgNode(new_allowed=True)
    cfg.gateway.host = "127.0.0.1"
    cfg.gateway.port = 8080
    cfg.gateway.storage_root = "/work"

    # LOGGING
    ##################################
    cfg.logging = CfgNode(new_allowed=True)
    cfg.logging.path = None  # set by `burstsim run --out`
    cfg.logging.file_level = "NOTSET"
    cfg.logging.console_level = "INFO"
    cfg.logging.overwrite = True

    return cfg
