"""Subpackage containing utility objects."""

from __future__ import annotations

import json
import pathlib
import zlib
from dataclasses import dataclass
from typing import Any

import numpy as np


@dataclass
class Success:
    """
    An emowave success object.

    This is returned from the [pipeline stages][emowave.pipeline.stages] and the artifact writers
    such as [write_json()][emowave.utils.write_json].

    Attributes:
        message (str): A success message.
    """

    message: str


def derive_seed(seed: int, name: str) -> int:
    """
    Derive a named sub-seed from the run seed.

    Every stochastic stage draws from its own sub-seed so that stages can be rerun on their own
    and still see the same random stream.

    Args:
        seed (int): the run seed from the config.yml.
        name (str): the stage name, e.g. `knn.folds`.

    Returns:
        int: a 32 bit seed that only depends on `seed` and `name`.
    """
    sequence = np.random.SeedSequence([int(seed), zlib.crc32(name.encode("utf-8"))])
    return int(sequence.generate_state(1)[0])


def write_json(path: pathlib.Path, payload: Any) -> Success:
    """
    Write a JSON document with sorted keys so reruns are byte-identical.

    Args:
        path (pathlib.Path): the destination file.
        payload (Any): any JSON serialisable object.

    Returns:
        Success: A [Success][emowave.utils.Success] with the path as the message.
    """
    path = pathlib.Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", encoding="utf-8") as json_file:
        json_file.write(json.dumps(payload, sort_keys=True, indent=2))
        json_file.write("\n")
    return Success(str(path))


def read_json(path: pathlib.Path) -> Any:
    """Read a JSON document written by [write_json()][emowave.utils.write_json]."""
    with pathlib.Path(path).open("r", encoding="utf-8") as json_file:
        return json.load(json_file)
