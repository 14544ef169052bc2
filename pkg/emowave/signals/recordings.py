"""Submodule which loads, validates, segments and splits EEG recordings."""

from __future__ import annotations

import enum
import logging
import os
import pathlib
from collections import defaultdict
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Dict, Generic, Iterable, List, Mapping, Optional, Sequence, Tuple, TypeVar, Union

import numpy as np
import pandas as pd

from emowave import exceptions
from emowave.utils import Success

logger = logging.getLogger(__name__)

CANONICAL_CHANNELS: Tuple[str, ...] = ("TP9", "AF7", "AF8", "TP10")
DEFAULT_SAMPLING_RATE_HZ = 256.0
DEFAULT_SUBJECT = "all"


class EmotionLabel(enum.IntEnum):
    """The three emotional states, encoded as Positive=0, Neutral=1, Negative=2."""

    POSITIVE = 0
    NEUTRAL = 1
    NEGATIVE = 2

    @property
    def display_name(self) -> str:
        """Return the label as it is written in CSV files and reports, e.g. `Positive`."""
        return self.name.capitalize()

    @classmethod
    def parse(cls, value: Union[str, int, "EmotionLabel"]) -> EmotionLabel:
        """
        Parse a label from its name or its integer encoding.

        Args:
            value (str | int | EmotionLabel): `Positive`, `neutral`, `2`, ...

        Raises:
            exceptions.UnknownLabel: raised if the value is not one of the three labels.

        Returns:
            EmotionLabel: the parsed label.
        """
        if isinstance(value, cls):
            return value
        text = str(value).strip()
        if text.lstrip("-").isdigit():
            try:
                return cls(int(text))
            except ValueError as value_error:
                raise exceptions.UnknownLabel(f"Label {value!r} is not 0, 1 or 2") from value_error
        try:
            return cls[text.upper()]
        except KeyError as key_error:
            raise exceptions.UnknownLabel(
                f"Label {value!r} is not one of Positive, Neutral, Negative"
            ) from key_error


def canonical_order(channels: Iterable[str]) -> Tuple[str, ...]:
    """Sort channel names into the fixed TP9, AF7, AF8, TP10 fusion order."""
    return tuple(sorted(channels, key=CANONICAL_CHANNELS.index))


@dataclass(frozen=True)
class ColumnSchema:
    """
    Names the CSV columns to read.

    Attributes:
        channel_columns (Mapping[str, str]): channel name to CSV column, e.g. `TP9: RAW_TP9`.
        timestamp_column (str | None, optional): the timestamp column. It must be present but
            is not used, since the sampling rate is declared in the config.yml.
        label_column (str | None, optional): a per-row label column. When `None` the label is
            declared per file.
    """

    channel_columns: Mapping[str, str] = field(
        default_factory=lambda: {channel: f"RAW_{channel}" for channel in CANONICAL_CHANNELS}
    )
    timestamp_column: Optional[str] = "TimeStamp"
    label_column: Optional[str] = None

    def required_columns(self) -> List[str]:
        """Return every column the CSV header must contain."""
        columns = [self.timestamp_column] if self.timestamp_column else []
        columns.extend(self.channel_columns[channel] for channel in self.channels)
        if self.label_column:
            columns.append(self.label_column)
        return columns

    @property
    def channels(self) -> Tuple[str, ...]:
        """The channels named by the schema in fusion order."""
        return canonical_order(self.channel_columns)


@dataclass(frozen=True)
class EegRecording:
    """
    A multi-channel EEG recording of one emotional state.

    Attributes:
        channels (tuple[str, ...]): channel names, a subset of TP9, AF7, AF8, TP10.
        samples (np.ndarray): a read-only `(channels, samples)` array in microvolts.
        sampling_rate (float): samples per second.
        session_id (int): 1-based session ordinal.
        label (EmotionLabel): the emotional state of the whole recording.
        recording_id (str): a name for the recording, usually the file stem.
        subject (str): the participant the recording belongs to.
    """

    channels: Tuple[str, ...]
    samples: np.ndarray
    sampling_rate: float
    session_id: int
    label: EmotionLabel
    recording_id: str = ""
    subject: str = DEFAULT_SUBJECT

    def __post_init__(self) -> None:
        channels = tuple(self.channels)
        if not channels:
            raise exceptions.InvalidRecording("A recording needs at least one channel")
        if len(set(channels)) != len(channels):
            raise exceptions.InvalidRecording(f"Duplicate channels in {channels}")
        unknown = [channel for channel in channels if channel not in CANONICAL_CHANNELS]
        if unknown:
            raise exceptions.InvalidRecording(f"Unknown channels {unknown}")
        samples = np.array(self.samples, dtype=np.float64, ndmin=2)
        if samples.ndim != 2 or samples.shape[0] != len(channels):
            raise exceptions.InvalidRecording(
                f"Expected {len(channels)} equally long channel sequences, got shape {samples.shape}"
            )
        if samples.shape[1] < 1:
            raise exceptions.InvalidRecording("A recording needs at least one sample")
        if not np.isfinite(samples).all():
            raise exceptions.NonNumericSample("Recording samples must be finite")
        if self.sampling_rate <= 0:
            raise exceptions.InvalidSamplingRate(f"Sampling rate {self.sampling_rate} is not > 0")
        if self.session_id < 1:
            raise exceptions.InvalidRecording(f"Session {self.session_id} is not a 1-based ordinal")
        samples.setflags(write=False)
        object.__setattr__(self, "channels", channels)
        object.__setattr__(self, "samples", samples)
        object.__setattr__(self, "label", EmotionLabel.parse(self.label))

    @property
    def sample_count(self) -> int:
        """Number of samples per channel."""
        return int(self.samples.shape[1])


@dataclass(frozen=True)
class Segment:
    """
    A fixed-length window cut from a recording.

    Attributes:
        channel_data (np.ndarray): a read-only `(channels, window_length)` array.
        channels (tuple[str, ...]): channel names in row order.
        window_length (int): samples per channel.
        source_session (int): the session of the source recording.
        label (EmotionLabel): the label of the source recording.
        offset (int): index of the first sample of the window in the recording.
        recording_id (str): the source recording.
        subject (str): the participant.
    """

    channel_data: np.ndarray
    channels: Tuple[str, ...]
    window_length: int
    source_session: int
    label: EmotionLabel
    offset: int = 0
    recording_id: str = ""
    subject: str = DEFAULT_SUBJECT

    @property
    def session(self) -> int:
        """Alias of `source_session` shared with feature vectors for splitting."""
        return self.source_session

    def channel(self, name: str) -> np.ndarray:
        """Return the window of one channel."""
        return self.channel_data[self.channels.index(name)]


SessionTagged = TypeVar("SessionTagged")


@dataclass(frozen=True)
class DatasetSplit(Generic[SessionTagged]):
    """
    Train and test partitions split by session.

    Attributes:
        train (list): items from every session but the latest of their subject/label group.
        test (list): items from the latest session of their subject/label group.
    """

    train: List[SessionTagged]
    test: List[SessionTagged]


@dataclass(frozen=True)
class RecordingSource:
    """
    One data file entry of the config.yml.

    Attributes:
        path (pathlib.Path): the CSV file.
        label (EmotionLabel | None): the per-file label, `None` when a label column is used.
        session (int | None): the session ordinal, derived from file order when `None`.
        subject (str): the participant.
    """

    path: pathlib.Path
    label: Optional[EmotionLabel] = None
    session: Optional[int] = None
    subject: str = DEFAULT_SUBJECT


def load_recording(
    path: Union[str, pathlib.Path],
    schema: ColumnSchema,
    *,
    label: Optional[Union[str, EmotionLabel]] = None,
    session_id: int = 1,
    sampling_rate: float = DEFAULT_SAMPLING_RATE_HZ,
    subject: str = DEFAULT_SUBJECT,
    recording_id: Optional[str] = None,
) -> EegRecording:
    """
    Load one recording from a CSV file.

    Args:
        path (str | pathlib.Path): the CSV file, UTF-8 with a header row.
        schema (ColumnSchema): the columns to read.
        label (str | EmotionLabel | None, optional): the per-file label. Required unless the
            schema names a label column.
        session_id (int, optional): the session ordinal. Defaults to 1.
        sampling_rate (float, optional): the declared sampling rate. Defaults to 256 Hz.
        subject (str, optional): the participant. Defaults to `all`.
        recording_id (str | None, optional): the recording identity. Defaults to the file stem.

    Raises:
        exceptions.DataPathDoesNotExist: raised if the file does not exist.
        exceptions.UnreadableFile: raised if the file cannot be read or is not UTF-8.
        exceptions.EmptyFile: raised if the file has no header or no data rows.
        exceptions.RaggedRows: raised if a row has the wrong number of fields.
        exceptions.MissingColumn: raised if a schema column is absent.
        exceptions.NonNumericSample: raised if a channel value is not a finite number.

    Returns:
        EegRecording: the channels in fusion order with samples in file row order.
    """
    csv_path = pathlib.Path(path).expanduser()
    if not csv_path.is_file():
        raise exceptions.DataPathDoesNotExist(f"Data file {csv_path} does not exist.")
    # the header is read as a data row so that every row is held to its field count
    try:
        rows = pd.read_csv(csv_path, header=None, dtype=str, keep_default_na=False, encoding="utf-8")
    except pd.errors.EmptyDataError as empty_data_error:
        raise exceptions.EmptyFile(f"Data file {csv_path} is empty.") from empty_data_error
    except pd.errors.ParserError as parser_error:
        raise exceptions.RaggedRows(f"Data file {csv_path}: {parser_error}") from parser_error
    except UnicodeDecodeError as unicode_error:
        raise exceptions.UnreadableFile(f"Data file {csv_path} is not UTF-8: {unicode_error}") from unicode_error
    except OSError as os_error:
        raise exceptions.UnreadableFile(f"Data file {csv_path} cannot be read: {os_error}") from os_error
    frame = rows.iloc[1:].reset_index(drop=True)
    frame.columns = [str(name) for name in rows.iloc[0]]
    if frame.empty:
        raise exceptions.EmptyFile(f"Data file {csv_path} has no data rows.")

    for column in schema.required_columns():
        if column not in frame.columns:
            raise exceptions.MissingColumn(f"Column {column} not found in {csv_path}")
    # with keep_default_na=False only a missing field can produce a NaN
    if frame.isna().to_numpy().any():
        raise exceptions.RaggedRows(f"Data file {csv_path} has a row with missing fields.")

    channels = schema.channels
    samples = np.empty((len(channels), len(frame)), dtype=np.float64)
    for row, channel in enumerate(channels):
        column = schema.channel_columns[channel]
        try:
            samples[row] = np.array(frame[column].tolist(), dtype=np.float64)
        except ValueError as value_error:
            raise exceptions.NonNumericSample(
                f"Column {column} in {csv_path} holds a non-numeric value"
            ) from value_error
        if not np.isfinite(samples[row]).all():
            raise exceptions.NonNumericSample(
                f"Column {column} in {csv_path} holds a non-finite value"
            )

    return EegRecording(
        channels=channels,
        samples=samples,
        sampling_rate=sampling_rate,
        session_id=session_id,
        label=_resolve_label(frame, schema, label, csv_path),
        recording_id=recording_id or csv_path.stem,
        subject=subject,
    )


def _resolve_label(
    frame: pd.DataFrame,
    schema: ColumnSchema,
    label: Optional[Union[str, EmotionLabel]],
    csv_path: pathlib.Path,
) -> EmotionLabel:
    if schema.label_column is None:
        if label is None:
            raise exceptions.InvalidRecording(f"No label declared for {csv_path}")
        return EmotionLabel.parse(label)
    row_labels = {EmotionLabel.parse(value) for value in frame[schema.label_column].unique()}
    if len(row_labels) != 1:
        raise exceptions.InvalidRecording(
            f"Label column {schema.label_column} in {csv_path} holds {len(row_labels)} labels, "
            "one recording must hold one emotional state"
        )
    return row_labels.pop()


def write_recording(
    recording: EegRecording, path: Union[str, pathlib.Path], schema: ColumnSchema
) -> Success:
    """
    Write a recording as CSV in the schema's columns.

    The timestamp column is written as seconds since the first sample.

    Args:
        recording (EegRecording): the recording to write.
        path (str | pathlib.Path): the destination CSV file.
        schema (ColumnSchema): the columns to write.

    Returns:
        Success: A [Success][emowave.utils.Success] with the path of the CSV as the message.
    """
    csv_path = pathlib.Path(path).expanduser()
    csv_path.parent.mkdir(parents=True, exist_ok=True)
    columns: Dict[str, object] = {}
    if schema.timestamp_column:
        columns[schema.timestamp_column] = np.arange(recording.sample_count) / recording.sampling_rate
    for row, channel in enumerate(recording.channels):
        columns[schema.channel_columns[channel]] = recording.samples[row]
    if schema.label_column:
        columns[schema.label_column] = recording.label.display_name
    pd.DataFrame(columns).to_csv(csv_path, index=False)
    return Success(str(csv_path))


def recording_ids(paths: Sequence[pathlib.Path]) -> List[str]:
    """
    Name each recording by its file stem.

    When two files share a stem, e.g. `positive/s3.csv` and `neutral/s3.csv`, every recording is
    named by its path below the deepest common directory instead, e.g. `positive/s3`.
    """
    stems = [pathlib.Path(path).stem for path in paths]
    if len(set(stems)) == len(stems):
        return stems
    absolute = [pathlib.Path(path).expanduser().absolute() for path in paths]
    common = pathlib.Path(os.path.commonpath([str(path.parent) for path in absolute]))
    return [path.relative_to(common).with_suffix("").as_posix() for path in absolute]


def load_recordings(
    sources: Sequence[RecordingSource],
    schema: ColumnSchema,
    *,
    sampling_rate: float = DEFAULT_SAMPLING_RATE_HZ,
    session_map: Optional[Mapping[str, int]] = None,
    workers: int = 4,
) -> List[EegRecording]:
    """
    Load several recordings in parallel, keeping the order of `sources`.

    A session ordinal is taken from the source itself, else from `session_map` (keyed by file
    name), else from the file's position among the files of the same subject and label.
    Recordings are named by [recording_ids()][emowave.signals.recordings.recording_ids].

    Args:
        sources (Sequence[RecordingSource]): the data files of the config.yml.
        schema (ColumnSchema): the columns to read.
        sampling_rate (float, optional): the declared sampling rate. Defaults to 256 Hz.
        session_map (Mapping[str, int] | None, optional): file name to session ordinal.
        workers (int, optional): number of loader threads. Defaults to 4.

    Returns:
        list[EegRecording]: one recording per source.
    """
    session_map = session_map or {}
    identities = recording_ids([source.path for source in sources])
    ordinals: Dict[Tuple[str, Optional[EmotionLabel]], int] = defaultdict(int)
    sessions = []
    for source in sources:
        ordinals[(source.subject, source.label)] += 1
        if source.session is not None:
            sessions.append(int(source.session))
        elif source.path.name in session_map:
            sessions.append(int(session_map[source.path.name]))
        else:
            sessions.append(ordinals[(source.subject, source.label)])

    def _load(indexed_source: Tuple[int, RecordingSource]) -> EegRecording:
        index, source = indexed_source
        logger.debug("Loading %s as session %s", source.path, sessions[index])
        return load_recording(
            source.path,
            schema,
            label=source.label,
            session_id=sessions[index],
            sampling_rate=sampling_rate,
            subject=source.subject,
            recording_id=identities[index],
        )

    with ThreadPoolExecutor(max_workers=max(1, workers)) as executor:
        recordings = list(executor.map(_load, enumerate(sources)))
    logger.info("Loaded %s recordings", len(recordings))
    return recordings


def window_stride(window_length: int, overlap: float) -> int:
    """
    Return the hop between consecutive windows.

    Raises:
        exceptions.InvalidWindow: raised if the overlap is outside [0, 1) or the stride is < 1.
    """
    if not 0.0 <= overlap < 1.0:
        raise exceptions.InvalidWindow(f"Overlap {overlap} is not in [0, 1)")
    stride = int(round(window_length * (1.0 - overlap)))
    if stride < 1:
        raise exceptions.InvalidWindow(
            f"Window length {window_length} with overlap {overlap} gives a stride below 1"
        )
    return stride


def segment_recording(recording: EegRecording, window_length: int, overlap: float = 0.0) -> List[Segment]:
    """
    Cut a recording into fixed-length windows, dropping the trailing partial window.

    Args:
        recording (EegRecording): the recording to cut.
        window_length (int): samples per window.
        overlap (float, optional): fraction of a window shared with the next. Defaults to 0.

    Raises:
        exceptions.WindowTooLarge: raised if the window is longer than the recording.
        exceptions.InvalidWindow: raised if the window length or overlap is invalid.

    Returns:
        list[Segment]: `(N - window_length) // stride + 1` segments.
    """
    if window_length < 1:
        raise exceptions.InvalidWindow(f"Window length {window_length} is not positive")
    if window_length > recording.sample_count:
        raise exceptions.WindowTooLarge(
            f"Window length {window_length} exceeds the {recording.sample_count} samples "
            f"of {recording.recording_id or 'the recording'}"
        )
    stride = window_stride(window_length, overlap)
    count = (recording.sample_count - window_length) // stride + 1
    segments = []
    for index in range(count):
        offset = index * stride
        window = recording.samples[:, offset : offset + window_length]
        segments.append(
            Segment(
                channel_data=window,
                channels=recording.channels,
                window_length=window_length,
                source_session=recording.session_id,
                label=recording.label,
                offset=offset,
                recording_id=recording.recording_id,
                subject=recording.subject,
            )
        )
    return segments


def split_by_session(items: Iterable[SessionTagged]) -> DatasetSplit[SessionTagged]:
    """
    Split segments or feature vectors into train and test partitions by session.

    Per subject and label, items from the latest session go to the test partition and items
    from every earlier session go to the train partition. The result is sorted by subject,
    label, session, recording and offset, so it does not depend on the input order.

    Args:
        items (Iterable): objects with `subject`, `label`, `session`, `recording_id` and
            `offset` attributes, e.g. [Segment][emowave.signals.recordings.Segment].

    Raises:
        exceptions.InsufficientSessions: raised if a subject/label group has fewer than two
            sessions.

    Returns:
        DatasetSplit: the train and test partitions.
    """

    def _sort_key(item) -> tuple:
        return (item.subject, int(item.label), item.session, item.recording_id, item.offset)

    ordered = sorted(items, key=_sort_key)
    groups: Dict[Tuple[str, EmotionLabel], set] = defaultdict(set)
    for item in ordered:
        groups[(item.subject, item.label)].add(item.session)

    latest = {}
    for (subject, label), sessions in groups.items():
        if len(sessions) < 2:
            raise exceptions.InsufficientSessions(f"{subject}/{label.display_name}", len(sessions))
        latest[(subject, label)] = max(sessions)

    train = [item for item in ordered if item.session != latest[(item.subject, item.label)]]
    test = [item for item in ordered if item.session == latest[(item.subject, item.label)]]
    logger.debug("Split %s items into %s train and %s test", len(ordered), len(train), len(test))
    return DatasetSplit(train=train, test=test)
