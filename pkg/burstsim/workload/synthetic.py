import math
from typing import *

import numpy as np

from burstsim.errors import InvalidDistribution
from burstsim.utils.logging import logger
from burstsim.workload.utils import Job, Trace

Distribution = Union[Mapping[Any, float], Sequence[Sequence]]


def normalize_distribution(dist: Distribution, name: str = "distribution") -> Tuple[List, np.ndarray]:
    r"""Split a discrete distribution into ``(values, probabilities)``.

    ``dist`` is a mapping ``value -> probability`` or a sequence of ``[value, probability]``
    pairs. Probabilities must be non-negative and sum to 1 within 1e-9.
    """
    pairs = list(dist.items()) if isinstance(dist, Mapping) else [tuple(p) for p in dist]
    if not pairs:
        raise InvalidDistribution("{} is empty".format(name))
    if any(len(p) != 2 for p in pairs):
        raise InvalidDistribution("{} must hold [value, probability] pairs".format(name))
    values = [p[0] for p in pairs]
    probs = np.array([float(p[1]) for p in pairs], dtype=float)
    if (probs < 0).any() or not np.isfinite(probs).all():
        raise InvalidDistribution("{} has a negative or non-finite probability".format(name))
    if abs(math.fsum(probs) - 1.0) > 1e-9:
        raise InvalidDistribution("{} probabilities sum to {}, not 1".format(name, math.fsum(probs)))
    return values, probs


def synth_workload(rate_jobs_per_hour: float,
                   duration_s: int,
                   node_dist: Distribution,
                   walltime_dist: Distribution,
                   app_mix: Distribution,
                   rng: np.random.Generator,
                   runtime_fraction: Tuple[float, float] = (0.2, 1.0),
                   cluster_hint: str = "auto",
                   id_prefix: str = "job",
                   ) -> Trace:
    r"""Generate a Poisson-arrival workload.

    Args:
        rate_jobs_per_hour (:obj:`float`): mean arrival rate; 0 yields an empty trace.
        duration_s (:obj:`int`): arrivals are generated in ``[0, duration_s)``.
        node_dist (:obj:`Distribution`): node counts.
        walltime_dist (:obj:`Distribution`): requested walltimes in seconds.
        app_mix (:obj:`Distribution`): application names.
        rng (:obj:`numpy.random.Generator`): the simulation's random stream.
        runtime_fraction (:obj:`Tuple[float, float]`): actual run time is drawn uniformly
            in this fraction range of the requested walltime.

    Returns:
        :obj:`Trace`: jobs in submit order.
    """
    node_values, node_probs = normalize_distribution(node_dist, "node_dist")
    wall_values, wall_probs = normalize_distribution(walltime_dist, "walltime_dist")
    app_values, app_probs = normalize_distribution(app_mix, "app_mix")
    lo, hi = runtime_fraction
    if not 0 < lo <= hi:
        raise InvalidDistribution("runtime_fraction must satisfy 0 < lo <= hi, got {}".format(runtime_fraction))
    if rate_jobs_per_hour < 0:
        raise InvalidDistribution("arrival rate must be >= 0")

    jobs = []
    if rate_jobs_per_hour == 0 or duration_s <= 0:
        return Trace(jobs)
    mean_gap = 3600.0 / float(rate_jobs_per_hour)
    t = 0.0
    while True:
        t += rng.exponential(mean_gap)
        if t >= duration_s:
            break
        nodes = int(node_values[rng.choice(len(node_values), p=node_probs)])
        walltime = int(wall_values[rng.choice(len(wall_values), p=wall_probs)])
        app = str(app_values[rng.choice(len(app_values), p=app_probs)])
        runtime = math.ceil(rng.uniform(lo, hi) * walltime)
        jobs.append(Job(
            id="{}{:06d}".format(id_prefix, len(jobs)),
            submit_time=int(t),
            app=app,
            nodes=nodes,
            req_walltime_s=walltime,
            base_runtime_s=max(runtime, 1),
            user="synthetic",
            cluster_hint=cluster_hint,
        ))
    logger.info(f"synthesized {len(jobs)} jobs over {duration_s} s at {rate_jobs_per_hour} jobs/h")
    return Trace(jobs)
