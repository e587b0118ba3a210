r"""Application performance model: HPC base run time plus a scalar cloud slowdown."""
from typing import *

import yaml
from yacs.config import CfgNode

from burstsim.errors import UnknownApp, ConfigError
from burstsim.utils.logging import logger
from burstsim.utils.utils import to_fraction, ceil_int
from burstsim.workload.utils import AppProfile, Job

TARGETS = ("hpc", "cloud")


def profile_from_dict(data: Mapping) -> AppProfile:
    try:
        return AppProfile(
            name=str(data["name"]),
            base_runtime_s=int(data["base_runtime_s"]),
            cloud_slowdown=to_fraction(data["cloud_slowdown"]),
            reference_nodes=int(data.get("reference_nodes", 1)),
            reference_tasks=int(data.get("reference_tasks", 1)),
            version=str(data.get("version", "") or ""),
            description=str(data.get("description", "") or ""),
        )
    except (KeyError, TypeError, ValueError, ZeroDivisionError) as e:
        raise ConfigError("invalid app profile {!r}: {}".format(dict(data), e))


def load_app_profiles(config: CfgNode) -> Dict[str, AppProfile]:
    r"""Build the profile table from ``config.apps``.

    Profiles listed inline in ``apps.profiles`` come first; a YAML list at
    ``apps.path`` overrides entries of the same name.
    """
    entries = list(config.apps.profiles or [])
    if config.apps.get("path", None):
        with open(config.apps.path, encoding="utf-8") as f:
            loaded = yaml.safe_load(f) or []
        if not isinstance(loaded, list):
            raise ConfigError("{}: app profile file must hold a list".format(config.apps.path))
        entries.extend(loaded)
    profiles: Dict[str, AppProfile] = {}
    for entry in entries:
        profile = profile_from_dict(entry)
        profiles[profile.name] = profile
    logger.debug(f"loaded {len(profiles)} app profiles: {sorted(profiles)}")
    return profiles


def resolve_profile(job: Job, profiles: Mapping[str, AppProfile]) -> AppProfile:
    try:
        return profiles[job.app]
    except KeyError:
        raise UnknownApp(job.app)


def raw_runtime(job: Job, target: str, profiles: Mapping[str, AppProfile]) -> int:
    r"""Execution time the job would need on ``target`` if it were never killed."""
    profile = resolve_profile(job, profiles)
    if target == "hpc":
        return job.base_runtime_s
    if target == "cloud":
        return ceil_int(job.base_runtime_s * profile.cloud_slowdown)
    raise ValueError("target must be one of {}, got {!r}".format(TARGETS, target))


def runtime_on(job: Job, target: str, profiles: Mapping[str, AppProfile]) -> int:
    r"""Run time of ``job`` on ``target`` (``hpc`` or ``cloud``), capped at the walltime.

    Args:
        job (:obj:`Job`): the job.
        target (:obj:`str`): ``hpc`` or ``cloud``.
        profiles (:obj:`Mapping[str, AppProfile]`): profile table the job's app resolves in.

    Returns:
        :obj:`int`: seconds, ``ceil(base * slowdown)`` on the cloud.
    """
    return min(raw_runtime(job, target, profiles), job.req_walltime_s)
