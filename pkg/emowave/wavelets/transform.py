"""
Submodule containing the multilevel discrete wavelet transform.

One analysis step filters the signal with the low-pass filter h[n] and the high-pass filter g[n]
and keeps every second output:

    a[n] = sum_k x[k] * h[2n - k]
    d[n] = sum_k x[k] * g[2n - k]

Boundaries are handled by extending the signal. The symmetric, reflect and zero modes keep
every coefficient whose filter support touches the signal, giving `ceil((N + F - 1) / 2)`
coefficients for a signal of N samples and a filter of F taps. The periodic mode wraps the
signal around and gives `ceil(N / 2)` coefficients.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import List, Sequence, Tuple, Union

import numpy as np

from emowave import exceptions
from emowave.wavelets.filters import WaveletFilterPair

Signal = Union[Sequence[float], np.ndarray]


class ExtensionMode(str, enum.Enum):
    """How a signal is extended beyond its boundaries."""

    SYMMETRIC = "symmetric"
    REFLECT = "reflect"
    ZERO = "zero"
    PERIODIC = "periodic"


_PAD_MODES = {
    ExtensionMode.SYMMETRIC: "symmetric",
    ExtensionMode.REFLECT: "reflect",
    ExtensionMode.ZERO: "constant",
}

RHYTHM_BANDS: Tuple[Tuple[str, float, float], ...] = (
    ("delta", 0.0, 4.0),
    ("theta", 4.0, 8.0),
    ("alpha", 8.0, 13.0),
    ("beta", 13.0, 30.0),
    ("gamma", 30.0, 100.0),
)
NO_RHYTHM = "none"


@dataclass(frozen=True)
class WaveletDecomposition:
    """
    The coefficient sets of a multilevel decomposition.

    Attributes:
        details (tuple[np.ndarray, ...]): detail sets in level order d1..dL.
        approximation (np.ndarray): the final approximation aL.
        levels (int): the depth L.
        extension_mode (ExtensionMode): the boundary handling used.
        signal_length (int): length of the decomposed signal.
        wavelet (str): the wavelet family used.
    """

    details: Tuple[np.ndarray, ...]
    approximation: np.ndarray
    levels: int
    extension_mode: ExtensionMode
    signal_length: int
    wavelet: str = ""

    def coefficient_sets(self) -> List[Tuple[str, np.ndarray]]:
        """Return `(set id, coefficients)` pairs in the order d1..dL, aL."""
        sets = [(f"d{level}", detail) for level, detail in enumerate(self.details, start=1)]
        sets.append((f"a{self.levels}", self.approximation))
        return sets


@dataclass(frozen=True)
class SubbandEntry:
    """
    The frequency range a coefficient set covers.

    Attributes:
        set_id (str): `d1`..`dL` or `aL`.
        low_hz (float): exclusive lower edge.
        high_hz (float): inclusive upper edge.
        rhythm (str): the EEG rhythm holding at least half of the range, else `none`.
    """

    set_id: str
    low_hz: float
    high_hz: float
    rhythm: str


@dataclass(frozen=True)
class SubbandMap:
    """The dyadic frequency ranges of a decomposition, finest detail first."""

    entries: Tuple[SubbandEntry, ...]

    def theta_sets(self) -> Tuple[str, ...]:
        """Return the ids of the sets labelled theta."""
        return tuple(entry.set_id for entry in self.entries if entry.rhythm == "theta")

    def entry(self, set_id: str) -> SubbandEntry:
        """Return the entry of one coefficient set."""
        for candidate in self.entries:
            if candidate.set_id == set_id:
                return candidate
        raise KeyError(set_id)


def _as_signal(signal: Signal) -> np.ndarray:
    values = np.asarray(signal, dtype=np.float64)
    if values.ndim != 1:
        raise exceptions.ShapeMismatch(f"Expected a 1-D signal, got shape {values.shape}")
    return values


def coefficient_count(signal_length: int, filter_length: int, mode: ExtensionMode) -> int:
    """Return the number of coefficients one analysis step produces per branch."""
    if ExtensionMode(mode) is ExtensionMode.PERIODIC:
        return -(-signal_length // 2)
    return -(-(signal_length + filter_length - 1) // 2)


def max_level(signal_length: int, filter_length: int, mode: ExtensionMode = ExtensionMode.SYMMETRIC) -> int:
    """
    Return the deepest admissible decomposition level.

    A level is admissible while the depth does not exceed `floor(log2(N))` and the input to
    every level is at least one filter long.

    Args:
        signal_length (int): length of the signal to decompose.
        filter_length (int): number of filter taps.
        mode (ExtensionMode, optional): the boundary handling. Defaults to symmetric.

    Returns:
        int: the deepest level, 0 if not even one step is possible.
    """
    if signal_length < 2:
        return 0
    ceiling = int(math.floor(math.log2(signal_length)))
    level, length = 0, signal_length
    while level < ceiling and length >= filter_length:
        length = coefficient_count(length, filter_length, mode)
        level += 1
    return level


def dwt_step(
    signal: Signal,
    filters: WaveletFilterPair,
    mode: ExtensionMode = ExtensionMode.SYMMETRIC,
) -> Tuple[np.ndarray, np.ndarray]:
    """
    Run one analysis step of the filter bank.

    Args:
        signal (Signal): the 1-D input.
        filters (WaveletFilterPair): the filter pair.
        mode (ExtensionMode, optional): the boundary handling. Defaults to symmetric.

    Raises:
        exceptions.SignalTooShort: raised if the signal has fewer than two samples.

    Returns:
        tuple[np.ndarray, np.ndarray]: the approximation and detail coefficients.
    """
    values = _as_signal(signal)
    if values.size < 2:
        raise exceptions.SignalTooShort(f"A decomposition step needs 2 samples, got {values.size}")
    mode = ExtensionMode(mode)
    pad = filters.length - 1
    if mode is ExtensionMode.PERIODIC:
        if values.size % 2:
            values = np.append(values, values[-1])
        padded = np.pad(values, (pad, 0), mode="wrap")
    else:
        padded = np.pad(values, pad, mode=_PAD_MODES[mode])
    count = coefficient_count(values.size, filters.length, mode)
    # the valid convolution at index i is sum_j h[j] * x[i - j] over the extended signal
    approx = np.convolve(padded, filters.lowpass_h, mode="valid")[::2][:count]
    detail = np.convolve(padded, filters.highpass_g, mode="valid")[::2][:count]
    return approx, detail


def idwt_step(
    approx: np.ndarray,
    detail: np.ndarray,
    filters: WaveletFilterPair,
    mode: ExtensionMode,
    signal_length: int,
) -> np.ndarray:
    """
    Invert one analysis step.

    Every coefficient spreads back over the samples its filter touched:
    `x[2n - j] += h[j] * a[n] + g[j] * d[n]`. Samples outside the signal are dropped, or wrapped
    around in periodic mode.

    Args:
        approx (np.ndarray): the approximation coefficients.
        detail (np.ndarray): the detail coefficients.
        filters (WaveletFilterPair): the filter pair used for the analysis.
        mode (ExtensionMode): the boundary handling used for the analysis.
        signal_length (int): length of the signal that was analysed.

    Raises:
        exceptions.ShapeMismatch: raised if the coefficient counts do not fit `signal_length`.

    Returns:
        np.ndarray: the reconstructed signal.
    """
    mode = ExtensionMode(mode)
    expected = coefficient_count(signal_length, filters.length, mode)
    if approx.size != expected or detail.size != expected:
        raise exceptions.ShapeMismatch(
            f"A signal of {signal_length} samples has {expected} coefficients per branch, "
            f"got {approx.size} approximation and {detail.size} detail"
        )
    positions = 2 * np.arange(expected)[:, None] - np.arange(filters.length)[None, :]
    contributions = np.outer(approx, filters.lowpass_h) + np.outer(detail, filters.highpass_g)
    if mode is ExtensionMode.PERIODIC:
        period = signal_length + signal_length % 2
        signal = np.zeros(period)
        np.add.at(signal, positions % period, contributions)
        return signal[:signal_length]
    signal = np.zeros(signal_length)
    inside = (positions >= 0) & (positions < signal_length)
    np.add.at(signal, positions[inside], contributions[inside])
    return signal


def wavedec(
    signal: Signal,
    filters: WaveletFilterPair,
    levels: int,
    mode: ExtensionMode = ExtensionMode.SYMMETRIC,
) -> WaveletDecomposition:
    """
    Decompose a signal over several levels by repeatedly splitting the approximation.

    Args:
        signal (Signal): the 1-D input.
        filters (WaveletFilterPair): the filter pair.
        levels (int): the depth L.
        mode (ExtensionMode, optional): the boundary handling. Defaults to symmetric.

    Raises:
        exceptions.InvalidLevels: raised if `levels` is below 1.
        exceptions.TooManyLevels: raised if `levels` exceeds [max_level()][emowave.wavelets.transform.max_level].

    Returns:
        WaveletDecomposition: details d1..dL and the approximation aL.
    """
    values = _as_signal(signal)
    mode = ExtensionMode(mode)
    if levels < 1:
        raise exceptions.InvalidLevels(f"Decomposition depth {levels} is not >= 1")
    deepest = max_level(values.size, filters.length, mode)
    if levels > deepest:
        raise exceptions.TooManyLevels(levels, deepest)
    approx = values
    details = []
    for _ in range(levels):
        approx, detail = dwt_step(approx, filters, mode)
        details.append(detail)
    return WaveletDecomposition(
        details=tuple(details),
        approximation=approx,
        levels=levels,
        extension_mode=mode,
        signal_length=int(values.size),
        wavelet=filters.name,
    )


def waverec(decomposition: WaveletDecomposition, filters: WaveletFilterPair) -> np.ndarray:
    """
    Reconstruct the signal of a decomposition.

    Args:
        decomposition (WaveletDecomposition): the output of [wavedec()][emowave.wavelets.transform.wavedec].
        filters (WaveletFilterPair): the filter pair used for the decomposition.

    Raises:
        exceptions.ShapeMismatch: raised if a coefficient set has the wrong length, the level
            count is inconsistent or the filters differ from the decomposition's.

    Returns:
        np.ndarray: the reconstructed signal.
    """
    if decomposition.wavelet and decomposition.wavelet != filters.name:
        raise exceptions.ShapeMismatch(
            f"Decomposition used {decomposition.wavelet}, got filters {filters.name}"
        )
    if len(decomposition.details) != decomposition.levels:
        raise exceptions.ShapeMismatch(
            f"{decomposition.levels} levels declared, {len(decomposition.details)} detail sets found"
        )
    lengths = [decomposition.signal_length]
    for _ in range(decomposition.levels):
        lengths.append(coefficient_count(lengths[-1], filters.length, decomposition.extension_mode))
    signal = np.asarray(decomposition.approximation, dtype=np.float64)
    for level in range(decomposition.levels, 0, -1):
        signal = idwt_step(
            signal,
            np.asarray(decomposition.details[level - 1], dtype=np.float64),
            filters,
            decomposition.extension_mode,
            lengths[level - 1],
        )
    return signal


def subband_map(sampling_rate: float, levels: int) -> SubbandMap:
    """
    Assign each coefficient set its dyadic frequency range and EEG rhythm.

    Detail level l covers `(fs / 2^(l+1), fs / 2^l]` and the approximation aL covers
    `(0, fs / 2^(L+1)]`. A set is labelled with the rhythm holding at least half of its
    bandwidth, otherwise `none`.

    Args:
        sampling_rate (float): the sampling rate fs in Hz.
        levels (int): the depth L.

    Raises:
        exceptions.InvalidSamplingRate: raised if `sampling_rate` is not positive.
        exceptions.InvalidLevels: raised if `levels` is below 1.

    Returns:
        SubbandMap: entries d1..dL, aL.
    """
    if sampling_rate <= 0:
        raise exceptions.InvalidSamplingRate(f"Sampling rate {sampling_rate} is not > 0")
    if levels < 1:
        raise exceptions.InvalidLevels(f"Decomposition depth {levels} is not >= 1")
    ranges = [
        (f"d{level}", sampling_rate / 2 ** (level + 1), sampling_rate / 2**level)
        for level in range(1, levels + 1)
    ]
    ranges.append((f"a{levels}", 0.0, sampling_rate / 2 ** (levels + 1)))
    return SubbandMap(
        entries=tuple(SubbandEntry(set_id, low, high, _rhythm(low, high)) for set_id, low, high in ranges)
    )


def _rhythm(low_hz: float, high_hz: float) -> str:
    bandwidth = high_hz - low_hz
    for name, band_low, band_high in RHYTHM_BANDS:
        inside = min(high_hz, band_high) - max(low_hz, band_low)
        if inside > 0 and inside >= 0.5 * bandwidth:
            return name
    return NO_RHYTHM
