"""Subpackage that contains the CLI application."""

import logging
import os
import pathlib
from typing import Any, Dict, Optional

import panaetius
from panaetius.exceptions import LoggingDirectoryDoesNotExistException

from emowave.pipeline.config import CONFIG_DEFAULTS

DEFAULT_CONFIG_PATH = "~/emowave/.config"


def load_config(config_path: Optional[str] = None) -> Any:
    """
    Read the config.yml and register every key with its default.

    The config directory is `config_path`, else `$EMOWAVE_CONFIG`, else `~/emowave/.config`.
    Each key can also be given as an environment variable, e.g. `EMOWAVE_KNN_C` for `knn.c`.

    Args:
        config_path (str | None, optional): the directory holding the config.yml.

    Returns:
        Any: the panaetius config, with `knn.c` available as `config.knn_c`.
    """
    config_path = config_path or os.environ.get("EMOWAVE_CONFIG") or DEFAULT_CONFIG_PATH
    config = panaetius.Config("emowave", config_path, skip_header_init=True)
    for key, default in CONFIG_DEFAULTS.items():
        panaetius.set_config(config, key, default)
    return config


def configure_logger(config: Any) -> logging.Logger:
    """Create the `emowave` logger, falling back to stderr if the logging directory is missing."""
    logging.getLogger("emowave").handlers.clear()
    try:
        logger = panaetius.set_logger(config, panaetius.SimpleLogger(logging_level=config.logging_level))
    except LoggingDirectoryDoesNotExistException:
        _logging_path = config.logging_path
        config.logging_path = ""
        logger = panaetius.set_logger(config, panaetius.SimpleLogger(logging_level=config.logging_level))
        logger.warning("Logging directory %s does not exist", _logging_path)
    return logger


def settings(config: Any) -> Dict[str, Any]:
    """Return the registered keys as dotted settings for [PipelineConfig][emowave.pipeline.config.PipelineConfig]."""
    return {key: getattr(config, key.replace(".", "_")) for key in CONFIG_DEFAULTS}


def config_directory(config: Any) -> pathlib.Path:
    """Return the directory relative data paths resolve against."""
    return pathlib.Path(str(config.config_path)).expanduser()
