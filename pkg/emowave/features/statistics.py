"""
Submodule reducing wavelet coefficients to five statistics per channel.

The five statistics of a coefficient set c of N values taken from a segment of N_s samples are

- `abs_max`: max |c_i|
- `mean_abs`: (1/N) sum |c_i|
- `std_dev`: the population standard deviation of c
- `avg_power`: (1/N) sum c_i^2
- `avg_energy`: (1/N_s) sum c_i^2

Power is normalised by the coefficient count and energy by the segment length, so the two are
distinct squared-magnitude summaries.
"""

from __future__ import annotations

import enum
import logging
import pathlib
from dataclasses import dataclass, replace
from typing import Iterable, List, Optional, Sequence, Tuple, Union

import numpy as np
import pandas as pd

from emowave import exceptions
from emowave.signals.recordings import DEFAULT_SUBJECT, EmotionLabel, Segment, canonical_order
from emowave.utils import Success
from emowave.wavelets import transform
from emowave.wavelets.filters import WaveletFilterPair

logger = logging.getLogger(__name__)

FEATURE_NAMES: Tuple[str, ...] = ("abs_max", "mean_abs", "std_dev", "avg_power", "avg_energy")
METADATA_COLUMNS: Tuple[str, ...] = ("subject", "recording_id", "session", "offset")
LABEL_COLUMN = "label"
CLASS_COUNT = 3


class BandPolicy(str, enum.Enum):
    """Which coefficient sets feed the statistics."""

    ALL = "all"
    THETA = "theta"


@dataclass(frozen=True)
class ChannelFeatures:
    """The five statistics of one channel."""

    abs_max: float
    mean_abs: float
    std_dev: float
    avg_power: float
    avg_energy: float

    def as_array(self) -> np.ndarray:
        """Return the statistics in `FEATURE_NAMES` order."""
        return np.array([self.abs_max, self.mean_abs, self.std_dev, self.avg_power, self.avg_energy])


@dataclass(frozen=True)
class FeatureVector:
    """
    The fused statistics of one segment.

    Attributes:
        values (np.ndarray): `5 * len(channel_order)` statistics, one block per channel.
        label (EmotionLabel): the label of the segment.
        channel_order (tuple[str, ...]): the channel of each block.
        session (int): the session of the segment.
        recording_id (str): the source recording.
        offset (int): the window offset in the source recording.
        subject (str): the participant.
    """

    values: np.ndarray
    label: EmotionLabel
    channel_order: Tuple[str, ...]
    session: int = 1
    recording_id: str = ""
    offset: int = 0
    subject: str = DEFAULT_SUBJECT

    def __post_init__(self) -> None:
        values = np.array(self.values, dtype=np.float64)
        if values.ndim != 1 or values.size != len(FEATURE_NAMES) * len(self.channel_order):
            raise exceptions.DimensionMismatch(len(FEATURE_NAMES) * len(self.channel_order), values.size)
        if not np.isfinite(values).all():
            raise exceptions.NonNumericSample("Feature vectors must be finite")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "channel_order", tuple(self.channel_order))
        object.__setattr__(self, "label", EmotionLabel.parse(self.label))


@dataclass(frozen=True)
class LabeledDataset:
    """
    Feature vectors sharing one layout.

    Attributes:
        vectors (tuple[FeatureVector, ...]): the vectors.
        class_count (int): always 3.
    """

    vectors: Tuple[FeatureVector, ...]
    class_count: int = CLASS_COUNT

    def __post_init__(self) -> None:
        vectors = tuple(self.vectors)
        if vectors:
            layout = vectors[0].channel_order
            for vector in vectors[1:]:
                if vector.channel_order != layout:
                    raise exceptions.DimensionMismatch(len(layout) * len(FEATURE_NAMES), vector.values.size)
        object.__setattr__(self, "vectors", vectors)

    def __len__(self) -> int:
        return len(self.vectors)

    @property
    def channel_order(self) -> Tuple[str, ...]:
        """The channel layout shared by every vector, empty for an empty dataset."""
        return self.vectors[0].channel_order if self.vectors else ()

    def matrix(self) -> np.ndarray:
        """Return the vectors as an `(n, 5 * channels)` matrix."""
        if not self.vectors:
            return np.empty((0, len(FEATURE_NAMES) * len(self.channel_order)))
        return np.vstack([vector.values for vector in self.vectors])

    def labels(self) -> np.ndarray:
        """Return the integer labels."""
        return np.array([int(vector.label) for vector in self.vectors], dtype=np.int64)

    def with_matrix(self, matrix: np.ndarray) -> LabeledDataset:
        """Return a copy whose values are the rows of `matrix`, keeping labels and provenance."""
        return LabeledDataset(tuple(replace(vector, values=row) for vector, row in zip(self.vectors, matrix)))

    def subset(self, indices: Iterable[int]) -> LabeledDataset:
        """Return the vectors at `indices`."""
        return LabeledDataset(tuple(self.vectors[index] for index in indices))

    def select_channels(self, channels: Sequence[str]) -> LabeledDataset:
        """
        Keep only the blocks of `channels`, fused in TP9, AF7, AF8, TP10 order.

        Raises:
            exceptions.MissingColumn: raised if a channel is not in the dataset.
        """
        selected = canonical_order(channels)
        missing = [channel for channel in selected if channel not in self.channel_order]
        if missing:
            raise exceptions.MissingColumn(f"Channels {missing} not found in the feature vectors")
        width = len(FEATURE_NAMES)
        columns = np.concatenate(
            [np.arange(width) + width * self.channel_order.index(channel) for channel in selected]
        )
        return LabeledDataset(
            tuple(replace(vector, values=vector.values[columns], channel_order=selected) for vector in self.vectors)
        )


@dataclass(frozen=True)
class ScalingParams:
    """
    Per-dimension z-score parameters fitted on a training set.

    Attributes:
        mean (np.ndarray): the training mean of each dimension.
        scale (np.ndarray): the training population standard deviation of each dimension.
    """

    mean: np.ndarray
    scale: np.ndarray

    def transform(self, matrix: np.ndarray) -> np.ndarray:
        """Z-score `matrix`, passing zero-variance dimensions through unchanged."""
        matrix = np.asarray(matrix, dtype=np.float64)
        constant = self.scale == 0
        scaled = (matrix - self.mean) / np.where(constant, 1.0, self.scale)
        return np.where(constant, matrix, scaled)

    def as_dict(self) -> dict:
        """Return the parameters as JSON-ready lists."""
        return {"mean": self.mean.tolist(), "scale": self.scale.tolist()}

    @classmethod
    def from_dict(cls, payload: dict) -> ScalingParams:
        """Rebuild the parameters from [as_dict()][emowave.features.statistics.ScalingParams.as_dict]."""
        return cls(mean=np.asarray(payload["mean"], dtype=np.float64), scale=np.asarray(payload["scale"], dtype=np.float64))


def channel_statistics(coeffs: Union[Sequence[float], np.ndarray], segment_length: Optional[int] = None) -> ChannelFeatures:
    """
    Reduce a coefficient set to the five statistics.

    Args:
        coeffs (Sequence[float] | np.ndarray): the coefficients.
        segment_length (int | None, optional): samples in the originating segment, the
            normaliser of `avg_energy`. Defaults to the coefficient count.

    Raises:
        exceptions.EmptyInput: raised if `coeffs` is empty.

    Returns:
        ChannelFeatures: the five statistics.
    """
    values = np.asarray(coeffs, dtype=np.float64).ravel()
    if values.size == 0:
        raise exceptions.EmptyInput("Statistics need at least one coefficient")
    if not np.isfinite(values).all():
        raise exceptions.NonNumericSample("Coefficients must be finite")
    magnitudes = np.abs(values)
    sum_of_squares = float(np.sum(values * values))
    return ChannelFeatures(
        abs_max=float(magnitudes.max()),
        mean_abs=float(magnitudes.mean()),
        std_dev=float(values.std()),
        avg_power=sum_of_squares / values.size,
        avg_energy=sum_of_squares / (segment_length or values.size),
    )


def _selected_coefficients(
    decomposition: transform.WaveletDecomposition,
    band_policy: BandPolicy,
    sampling_rate: float,
) -> np.ndarray:
    sets = decomposition.coefficient_sets()
    if BandPolicy(band_policy) is BandPolicy.THETA:
        theta = set(transform.subband_map(sampling_rate, decomposition.levels).theta_sets())
        if not theta:
            raise exceptions.NoThetaSubband(
                f"No coefficient set covers theta at {sampling_rate} Hz with {decomposition.levels} levels"
            )
        sets = [(set_id, coefficients) for set_id, coefficients in sets if set_id in theta]
    return np.concatenate([coefficients for _, coefficients in sets])


def segment_features(
    segment: Segment,
    filters: WaveletFilterPair,
    levels: int,
    mode: transform.ExtensionMode = transform.ExtensionMode.SYMMETRIC,
    band_policy: BandPolicy = BandPolicy.ALL,
    sampling_rate: float = 256.0,
    channels: Optional[Sequence[str]] = None,
) -> FeatureVector:
    """
    Decompose every channel of a segment and fuse the channel statistics.

    Args:
        segment (Segment): the segment.
        filters (WaveletFilterPair): the filter pair.
        levels (int): the decomposition depth.
        mode (ExtensionMode, optional): the boundary handling. Defaults to symmetric.
        band_policy (BandPolicy, optional): all coefficient sets or the theta sets only.
        sampling_rate (float, optional): needed to locate the theta sets. Defaults to 256 Hz.
        channels (Sequence[str] | None, optional): channels to fuse. Defaults to all channels
            of the segment.

    Raises:
        exceptions.NoThetaSubband: raised if the theta policy finds no theta set.

    Returns:
        FeatureVector: `5 * channels` statistics labelled with the segment's label.
    """
    channel_order = canonical_order(channels if channels is not None else segment.channels)
    blocks = []
    for channel in channel_order:
        decomposition = transform.wavedec(segment.channel(channel), filters, levels, mode)
        coefficients = _selected_coefficients(decomposition, band_policy, sampling_rate)
        blocks.append(channel_statistics(coefficients, segment.window_length).as_array())
    return FeatureVector(
        values=np.concatenate(blocks),
        label=segment.label,
        channel_order=channel_order,
        session=segment.source_session,
        recording_id=segment.recording_id,
        offset=segment.offset,
        subject=segment.subject,
    )


def extract_features(
    segments: Sequence[Segment],
    filters: WaveletFilterPair,
    levels: int,
    mode: transform.ExtensionMode = transform.ExtensionMode.SYMMETRIC,
    band_policy: BandPolicy = BandPolicy.ALL,
    sampling_rate: float = 256.0,
    channels: Optional[Sequence[str]] = None,
) -> LabeledDataset:
    """Run [segment_features()][emowave.features.statistics.segment_features] over many segments."""
    vectors = tuple(
        segment_features(segment, filters, levels, mode, band_policy, sampling_rate, channels)
        for segment in segments
    )
    logger.info("Extracted %s feature vectors with %s", len(vectors), filters.name)
    return LabeledDataset(vectors)


def standardize(train: LabeledDataset, test: LabeledDataset) -> Tuple[LabeledDataset, LabeledDataset, ScalingParams]:
    """
    Z-score both datasets with the training mean and standard deviation.

    Args:
        train (LabeledDataset): the training set the parameters are fitted on.
        test (LabeledDataset): the test set, transformed with the training parameters.

    Raises:
        exceptions.EmptyDataset: raised if `train` is empty.

    Returns:
        tuple[LabeledDataset, LabeledDataset, ScalingParams]: the scaled sets and parameters.
    """
    if len(train) == 0:
        raise exceptions.EmptyDataset("Cannot fit scaling parameters on an empty training set")
    matrix = train.matrix()
    params = ScalingParams(mean=matrix.mean(axis=0), scale=matrix.std(axis=0))
    scaled_test = test.with_matrix(params.transform(test.matrix())) if len(test) else test
    return train.with_matrix(params.transform(matrix)), scaled_test, params


def feature_columns(channel_order: Sequence[str]) -> List[str]:
    """Return the CSV column names `<channel>_<statistic>` of a layout."""
    return [f"{channel}_{name}" for channel in channel_order for name in FEATURE_NAMES]


def export_csv(dataset: LabeledDataset, path: Union[str, pathlib.Path]) -> Success:
    """
    Write a feature matrix as CSV, one row per vector and the label column last.

    Args:
        dataset (LabeledDataset): the vectors to write.
        path (str | pathlib.Path): the destination file.

    Returns:
        Success: A [Success][emowave.utils.Success] with the path of the CSV as the message.
    """
    csv_path = pathlib.Path(path)
    csv_path.parent.mkdir(parents=True, exist_ok=True)
    frame = pd.DataFrame(dataset.matrix(), columns=feature_columns(dataset.channel_order))
    frame.insert(0, "offset", [vector.offset for vector in dataset.vectors])
    frame.insert(0, "session", [vector.session for vector in dataset.vectors])
    frame.insert(0, "recording_id", [vector.recording_id for vector in dataset.vectors])
    frame.insert(0, "subject", [vector.subject for vector in dataset.vectors])
    frame[LABEL_COLUMN] = [vector.label.display_name for vector in dataset.vectors]
    frame.to_csv(csv_path, index=False)
    return Success(str(csv_path))


def import_csv(path: Union[str, pathlib.Path]) -> LabeledDataset:
    """
    Read a feature matrix written by [export_csv()][emowave.features.statistics.export_csv].

    Raises:
        exceptions.MissingColumn: raised if the metadata or label columns are missing.

    Returns:
        LabeledDataset: the vectors with their provenance.
    """
    csv_path = pathlib.Path(path)
    frame = pd.read_csv(
        csv_path,
        float_precision="round_trip",
        dtype={"subject": str, "recording_id": str},
        keep_default_na=False,
    )
    for column in (*METADATA_COLUMNS, LABEL_COLUMN):
        if column not in frame.columns:
            raise exceptions.MissingColumn(f"Column {column} not found in {csv_path}")
    value_columns = [column for column in frame.columns if column not in (*METADATA_COLUMNS, LABEL_COLUMN)]
    channel_order = tuple(dict.fromkeys(column.rsplit("_", 2)[0] for column in value_columns))
    if value_columns != feature_columns(channel_order):
        raise exceptions.MissingColumn(f"Feature columns of {csv_path} do not follow the channel layout")
    matrix = frame[value_columns].to_numpy(dtype=np.float64)
    vectors = tuple(
        FeatureVector(
            values=matrix[row],
            label=EmotionLabel.parse(frame[LABEL_COLUMN].iloc[row]),
            channel_order=channel_order,
            session=int(frame["session"].iloc[row]),
            recording_id=str(frame["recording_id"].iloc[row]),
            offset=int(frame["offset"].iloc[row]),
            subject=str(frame["subject"].iloc[row]),
        )
        for row in range(len(frame))
    )
    return LabeledDataset(vectors)
