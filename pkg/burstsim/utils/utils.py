from fractions import Fraction
from decimal import Decimal, ROUND_HALF_UP
from typing import List, Sequence, Union
import inspect
import math
from collections import namedtuple


def round_half_up(value: Union[int, float, Fraction, Decimal]) -> int:
    r"""round to whole seconds, halves away from zero (time values are never negative)."""
    if isinstance(value, Fraction):
        return math.floor(value + Fraction(1, 2))
    return int(Decimal(str(value)).quantize(Decimal(1), rounding=ROUND_HALF_UP))


def ceil_int(value: Union[int, Fraction]) -> int:
    return int(math.ceil(value))


def to_fraction(value) -> Fraction:
    r"""Parse a rational config value.

    Accepts ints, floats (taken at their decimal spelling, so ``1.4875`` is exactly
    119/80), decimal strings and ``"num/den"`` strings.
    """
    if isinstance(value, Fraction):
        return value
    if isinstance(value, bool):
        raise ValueError("boolean is not a rational value")
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, float):
        return Fraction(repr(value))
    if isinstance(value, str):
        return Fraction(value.strip())
    raise ValueError("cannot interpret {!r} as a rational value".format(value))


def format_hms(seconds: int) -> str:
    r"""``3940 -> '1:05:40'``, the H:MM:SS spelling used in run-time tables."""
    seconds = int(seconds)
    sign = "-" if seconds < 0 else ""
    seconds = abs(seconds)
    h, rem = divmod(seconds, 3600)
    m, s = divmod(rem, 60)
    return "{}{}:{:02d}:{:02d}".format(sign, h, m, s)


def lower_median(values: Sequence):
    r"""Median taking the lower-middle element for even-sized inputs.

    Returns ``None`` for an empty sequence.
    """
    if len(values) == 0:
        return None
    ordered = sorted(values)
    return ordered[(len(ordered) - 1) // 2]


def signature(f):
    r"""Get the function f 's input arguments. A useful gadget
    when some function slot might be instantiated into multiple functions.

    Args:
        f (:obj:`function`) : the function to get the input arguments.

    Returns:
        namedtuple : of args, default, varargs, keywords, respectively.s

    """
    sig = inspect.signature(f)
    args = [
        p.name for p in sig.parameters.values()
        if p.kind == inspect.Parameter.POSITIONAL_OR_KEYWORD
    ]
    varargs = [
        p.name for p in sig.parameters.values()
        if p.kind == inspect.Parameter.VAR_POSITIONAL
    ]
    varargs = varargs[0] if varargs else None
    keywords = [
        p.name for p in sig.parameters.values()
        if p.kind == inspect.Parameter.VAR_KEYWORD
    ]
    keywords = keywords[0] if keywords else None
    defaults = [
        p.default for p in sig.parameters.values()
        if p.kind == inspect.Parameter.POSITIONAL_OR_KEYWORD
        and p.default is not p.empty
    ] or None
    argspec = namedtuple('Signature', ['args', 'defaults',
                                        'varargs', 'keywords'])
    return argspec(args, defaults, varargs, keywords)


def check_config_conflicts(config):
    r"""check the conflicts of global config, raising :class:`ConfigError` on the first one.
    """
    import os
    from burstsim.errors import ConfigError
    from burstsim.workload.profiles import load_app_profiles
    from burstsim.workload.synthetic import normalize_distribution

    def require(condition, message):
        if not condition:
            raise ConfigError(message)

    seed = config.reproduce.seed
    require(isinstance(seed, int) and 0 <= seed < 2 ** 64, "reproduce.seed must be an unsigned 64-bit integer")
    require(config.simulation.horizon_s >= -1, "simulation.horizon_s must be >= 0, or -1 for no horizon")

    hpc = config.hpc
    require(hpc.total_nodes >= 1 and hpc.cores_per_node >= 1, "hpc.total_nodes and hpc.cores_per_node must be >= 1")
    partitions = dict(hpc.partitions.items()) if hasattr(hpc.partitions, "items") else dict(map(tuple, hpc.partitions or []))
    if partitions:
        require(all(int(n) >= 1 for n in partitions.values()), "hpc partitions must hold >= 1 node")
        require(sum(int(n) for n in partitions.values()) <= hpc.total_nodes,
                "hpc partitions hold more than hpc.total_nodes")
        require(hpc.default_partition in partitions,
                "hpc.default_partition {!r} is not a partition".format(hpc.default_partition))

    cloud = config.cloud
    require(1 <= cloud.vm_vcpus <= 44, "cloud.vm_vcpus must be in [1, 44]")
    require(cloud.host_count >= 1 and cloud.vcpus_per_host >= 1, "cloud.host_count and cloud.vcpus_per_host must be >= 1")
    try:
        oversubscription = to_fraction(cloud.oversubscription)
    except (ValueError, ZeroDivisionError):
        raise ConfigError("cloud.oversubscription must be a number")
    require(oversubscription >= 1, "cloud.oversubscription must be >= 1")
    placeable = cloud.host_count * math.floor(cloud.vcpus_per_host * oversubscription / cloud.vm_vcpus)
    require(0 <= cloud.min_vms <= cloud.max_vms <= placeable,
            "need 0 <= cloud.min_vms <= cloud.max_vms <= {} placeable VMs".format(placeable))
    require(cloud.initial_vms >= 0, "cloud.initial_vms must be >= 0")
    stages = ("boot", "update", "packages", "mounts", "scheduler", "identity")
    for stage, latency in cloud.stage_latencies_s.items():
        require(stage in stages, "unknown provisioning stage {!r}".format(stage))
        require(isinstance(latency, int) and latency >= 0, "stage latency {} must be an integer >= 0".format(stage))

    autoscaler = config.autoscaler
    require(autoscaler.interval_s >= 1, "autoscaler.interval_s must be >= 1")
    require(autoscaler.cooldown_s >= 0, "autoscaler.cooldown_s must be >= 0")
    require(to_fraction(autoscaler.headroom_factor) > 0, "autoscaler.headroom_factor must be > 0")

    from burstsim.federation.router import POLICY_CLASS
    policy = config.policy
    require(policy.variant in POLICY_CLASS, "policy.variant must be one of {}".format(sorted(POLICY_CLASS)))
    require(policy.variant != "WaitThreshold" or policy.threshold_s > 0, "policy.threshold_s must be > 0")
    require(policy.wait_source in ("table", "live"), "policy.wait_source must be table or live")
    if policy.wait_table_path:
        require(os.path.exists(policy.wait_table_path), "wait table {} does not exist".format(policy.wait_table_path))

    if config.apps.get("path", None):
        require(os.path.exists(config.apps.path), "app profile file {} does not exist".format(config.apps.path))
    profiles = load_app_profiles(config)

    trace = config.trace
    require(trace.source in ("jsonl", "swf", "synthetic"), "trace.source must be jsonl, swf or synthetic")
    if trace.source in ("jsonl", "swf"):
        require(bool(trace.path), "trace.path is required for a {} trace".format(trace.source))
        require(os.path.exists(trace.path), "trace file {} does not exist".format(trace.path))
    if trace.source == "swf":
        require(trace.swf_cores_per_node >= 1, "trace.swf_cores_per_node must be >= 1")
        require(trace.swf_req_walltime_column in (8, 9), "trace.swf_req_walltime_column must be 8 or 9")
        require(trace.swf_app in profiles, "trace.swf_app {!r} has no profile".format(trace.swf_app))
    if trace.source == "synthetic":
        synth = trace.synthetic
        require(synth.rate_jobs_per_hour >= 0 and synth.duration_s >= 0,
                "synthetic rate and duration must be >= 0")
        normalize_distribution(synth.node_dist, "node_dist")
        normalize_distribution(synth.walltime_dist, "walltime_dist")
        apps = normalize_distribution(synth.app_mix, "app_mix")
        missing = [app for app in apps[0] if app not in profiles]
        require(not missing, "app_mix names apps without a profile: {}".format(missing))
