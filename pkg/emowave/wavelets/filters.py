"""Submodule containing the orthogonal wavelet filter pairs."""

from __future__ import annotations

import functools
import pathlib
from dataclasses import dataclass
from typing import Dict, Sequence, Tuple

import numpy as np
import yaml

from emowave import exceptions

FILTER_TABLE = pathlib.Path(__file__).parent / "filters.yml"
ORTHOGONALITY_TOLERANCE = 1e-10


def quadrature_mirror(lowpass: Sequence[float]) -> np.ndarray:
    """Derive the high-pass filter `g[n] = (-1)^n * h[L-1-n]` from a low-pass filter."""
    lowpass = np.asarray(lowpass, dtype=np.float64)
    signs = np.where(np.arange(lowpass.size) % 2 == 0, 1.0, -1.0)
    return signs * lowpass[::-1]


@dataclass(frozen=True)
class WaveletFilterPair:
    """
    An orthogonal quadrature-mirror filter pair.

    Attributes:
        name (str): the wavelet family, e.g. `db4`.
        lowpass_h (np.ndarray): the scaling filter h[n].
        highpass_g (np.ndarray): the wavelet filter g[n].
    """

    name: str
    lowpass_h: np.ndarray
    highpass_g: np.ndarray

    def __post_init__(self) -> None:
        lowpass = np.array(self.lowpass_h, dtype=np.float64)
        highpass = np.array(self.highpass_g, dtype=np.float64)
        if lowpass.ndim != 1 or lowpass.size < 2 or lowpass.size % 2:
            raise exceptions.InvalidFilterBank(f"{self.name}: filters must have an even length")
        if highpass.shape != lowpass.shape:
            raise exceptions.InvalidFilterBank(f"{self.name}: h and g differ in length")
        for shift in range(0, lowpass.size, 2):
            overlap = float(np.dot(lowpass[: lowpass.size - shift], lowpass[shift:]))
            target = 1.0 if shift == 0 else 0.0
            if abs(overlap - target) > ORTHOGONALITY_TOLERANCE:
                raise exceptions.InvalidFilterBank(
                    f"{self.name}: h is not orthonormal to its shift by {shift}"
                )
        if not np.allclose(highpass, quadrature_mirror(lowpass), rtol=0.0, atol=ORTHOGONALITY_TOLERANCE):
            raise exceptions.InvalidFilterBank(f"{self.name}: g is not the quadrature mirror of h")
        lowpass.setflags(write=False)
        highpass.setflags(write=False)
        object.__setattr__(self, "lowpass_h", lowpass)
        object.__setattr__(self, "highpass_g", highpass)

    @property
    def length(self) -> int:
        """Number of filter taps."""
        return int(self.lowpass_h.size)

    @classmethod
    def from_lowpass(cls, name: str, lowpass: Sequence[float]) -> WaveletFilterPair:
        """Build a pair from its low-pass filter, deriving the high-pass mirror."""
        return cls(name=name, lowpass_h=np.asarray(lowpass, dtype=np.float64), highpass_g=quadrature_mirror(lowpass))


@functools.lru_cache(maxsize=None)
def _filter_table() -> Dict[str, Tuple[float, ...]]:
    with FILTER_TABLE.open("r", encoding="utf-8") as table_file:
        table = yaml.safe_load(table_file)
    return {name: tuple(entry["lowpass"]) for name, entry in table.items()}


def available_wavelets() -> Tuple[str, ...]:
    """Return the wavelet families in the filter table."""
    return tuple(sorted(_filter_table()))


def load_filters(name: str) -> WaveletFilterPair:
    """
    Load a filter pair from the bundled filter table.

    Args:
        name (str): the wavelet family, e.g. `haar` or `db4`.

    Raises:
        exceptions.UnknownWavelet: raised if the family is not in the table.

    Returns:
        WaveletFilterPair: the validated filter pair.
    """
    table = _filter_table()
    key = name.strip().lower()
    if key not in table:
        raise exceptions.UnknownWavelet(
            f"Wavelet {name} not found, available: {', '.join(available_wavelets())}"
        )
    return WaveletFilterPair.from_lowpass(key, table[key])
