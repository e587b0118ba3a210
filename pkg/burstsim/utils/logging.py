# -*- coding: utf-8 -*-
import os
import sys
import shutil

from loguru import logger

LOG_FORMAT = "[<green>{time:YYYY-MM-DD HH:mm:ss}</green> {level}] {module}.{function} {message}"


def config_output_dir(out_dir: str, overwrite: bool = True) -> str:
    r""" Prepare the directory a run writes its artifacts into.

    An existing directory is emptied when ``overwrite`` is set, otherwise a
    :obj:`FileExistsError` is raised. Parent directories are created as needed.
    """
    if os.path.exists(out_dir):
        if not os.path.isdir(out_dir):
            raise NotADirectoryError(f"output path `{out_dir}` exists and is not a directory.")
        if os.listdir(out_dir):
            if not overwrite:
                raise FileExistsError("Output dir {} exists and can't overwrite!".format(out_dir))
            shutil.rmtree(out_dir)
            os.makedirs(out_dir)
    else:
        os.makedirs(out_dir)
    return out_dir


def _level(level):
    if isinstance(level, str) and level.upper() == "NOTSET":
        return 0
    return level


def init_logger(
    log_file=None,
    log_file_level="NOTSET",
    log_level="INFO",
):
    logger.remove()
    logger.add(sys.stderr, level=_level(log_level), format=LOG_FORMAT)

    if log_file and log_file != '':
        logger.add(log_file, level=_level(log_file_level), format=LOG_FORMAT)
    return logger
