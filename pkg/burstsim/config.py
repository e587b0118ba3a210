import os
from typing import *

from yacs.config import CfgNode

from burstsim.default_config import get_default_config
from burstsim.errors import ConfigError
from burstsim.utils.logging import logger
from burstsim.utils.utils import check_config_conflicts

# scenario keys holding file paths, resolved against the scenario's directory
PATH_KEYS = (("trace", "path"), ("apps", "path"), ("policy", "wait_table_path"))


def get_config_from_file(path):
    if not os.path.exists(path):
        raise ConfigError("scenario file {} does not exist".format(path))
    cfg = CfgNode(new_allowed=True)
    try:
        cfg.merge_from_file(path)
    except Exception as e:
        raise ConfigError("{}: {}".format(path, e))
    return cfg


def get_user_config(usr_config_path, default_config=None):
    r"""Merge a scenario YAML over the defaults and resolve its relative paths."""
    if default_config is None:
        config = get_default_config()
    else:
        config = default_config
    usr_config = get_config_from_file(usr_config_path)
    try:
        config.merge_from_other_cfg(usr_config)
    except (KeyError, ValueError) as e:
        raise ConfigError("{}: {}".format(usr_config_path, e))

    base_dir = os.path.dirname(os.path.abspath(usr_config_path))
    for section, key in PATH_KEYS:
        value = config[section].get(key, None)
        if value and not os.path.isabs(value):
            config[section][key] = os.path.normpath(os.path.join(base_dir, value))
    return config


def load_scenario(path: str) -> CfgNode:
    config = get_user_config(path)
    check_config_conflicts(config)
    logger.info(f"scenario {path} loaded: policy {config.policy.variant}, trace {config.trace.source}")
    return config


def save_config_to_yaml(config, out_dir: Optional[str] = None):
    saved_yaml_path = os.path.join(out_dir or config.logging.path, "config.yaml")
    with open(saved_yaml_path, 'w', encoding="utf-8") as f:
        f.write(config.dump())
    logger.info("Config saved as {}".format(saved_yaml_path))
    return saved_yaml_path
