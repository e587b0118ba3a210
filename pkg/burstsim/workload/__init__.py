from yacs.config import CfgNode
import numpy as np

from burstsim.errors import ConfigError
from burstsim.utils.logging import logger
from .utils import AppProfile, CLUSTER_HINTS, Job, Trace
from .profiles import load_app_profiles, runtime_on, raw_runtime, profile_from_dict
from .trace_processor import PROCESSORS, load_trace_jsonl, load_trace_swf, SwfTraceProcessor
from .synthetic import synth_workload, normalize_distribution


def load_trace(config: CfgNode, rng: np.random.Generator) -> Trace:
    r"""A trace loader using a global config.

    ``trace.source`` selects ``jsonl``, ``swf`` or ``synthetic``; synthetic workloads draw
    from ``rng``, which must be the simulation's own random stream.
    """
    trace_config = config.trace
    source = trace_config.source
    if source == "synthetic":
        synth = trace_config.synthetic
        trace = synth_workload(
            rate_jobs_per_hour=synth.rate_jobs_per_hour,
            duration_s=synth.duration_s,
            node_dist=synth.node_dist,
            walltime_dist=synth.walltime_dist,
            app_mix=synth.app_mix,
            rng=rng,
            runtime_fraction=tuple(synth.runtime_fraction),
            cluster_hint=synth.cluster_hint,
        )
    elif source in PROCESSORS:
        trace = PROCESSORS[source].from_config(trace_config).get_trace(trace_config.path)
    else:
        raise ConfigError("unknown trace source {!r}".format(source))
    logger.info(f"trace loaded from {source}: {len(trace)} jobs")
    return trace
