import pathlib

import numpy as np
import pytest

from emowave import exceptions
from emowave.signals.recordings import (
    CANONICAL_CHANNELS,
    ColumnSchema,
    EegRecording,
    EmotionLabel,
    RecordingSource,
    Segment,
    canonical_order,
    load_recording,
    load_recordings,
    recording_ids,
    segment_recording,
    split_by_session,
    window_stride,
    write_recording,
)

HEADER = "TimeStamp,RAW_TP9,RAW_AF7,RAW_AF8,RAW_TP10"


def _write_csv(path: pathlib.Path, rows, header=HEADER) -> pathlib.Path:
    path.write_text("\n".join([header, *rows]) + "\n", encoding="utf-8")
    return path


def _recording(samples: int, session: int = 1, label=EmotionLabel.POSITIVE, subject="all") -> EegRecording:
    return EegRecording(
        channels=CANONICAL_CHANNELS,
        samples=np.arange(4 * samples, dtype=float).reshape(4, samples),
        sampling_rate=256.0,
        session_id=session,
        label=label,
        recording_id=f"{label.display_name}_{session}",
        subject=subject,
    )


@pytest.mark.parametrize(
    "value, expected",
    [
        ("Positive", EmotionLabel.POSITIVE),
        ("neutral", EmotionLabel.NEUTRAL),
        (" NEGATIVE ", EmotionLabel.NEGATIVE),
        (2, EmotionLabel.NEGATIVE),
        ("0", EmotionLabel.POSITIVE),
        (EmotionLabel.NEUTRAL, EmotionLabel.NEUTRAL),
    ],
)
def test_emotion_label_parse(value, expected):
    # act
    label = EmotionLabel.parse(value)

    # assert
    assert label is expected


@pytest.mark.parametrize("value", ["Happy", 3, "-1", ""])
def test_emotion_label_parse_unknown(value):
    # act
    with pytest.raises(exceptions.UnknownLabel):
        EmotionLabel.parse(value)


def test_emotion_label_encoding():
    # assert
    assert [int(label) for label in EmotionLabel] == [0, 1, 2]
    assert [label.display_name for label in EmotionLabel] == ["Positive", "Neutral", "Negative"]


def test_canonical_order():
    # act
    order = canonical_order(["TP10", "AF8", "TP9"])

    # assert
    assert order == ("TP9", "AF8", "TP10")


def test_load_recording_success(tmpdir):
    # arrange
    rows = [f"{index / 256},{index},{index + 0.5},{-index},{index * 2}" for index in range(100)]
    csv_path = _write_csv(pathlib.Path(tmpdir) / "positive_1.csv", rows)

    # act
    recording = load_recording(csv_path, ColumnSchema(), label="Positive", session_id=2)

    # assert
    assert recording.channels == CANONICAL_CHANNELS
    assert recording.samples.shape == (4, 100)
    assert recording.label is EmotionLabel.POSITIVE
    assert recording.session_id == 2
    assert recording.recording_id == "positive_1"
    np.testing.assert_array_equal(recording.samples[1], np.arange(100) + 0.5)
    np.testing.assert_array_equal(recording.samples[2], -np.arange(100))


def test_load_recording_three_minutes(tmpdir):
    # arrange
    rows = [f"{index / 256},1,2,3,4" for index in range(180 * 256)]
    csv_path = _write_csv(pathlib.Path(tmpdir) / "long.csv", rows)

    # act
    recording = load_recording(csv_path, ColumnSchema(), label="Neutral")

    # assert
    assert recording.sample_count == 46080


def test_load_recording_columns_in_any_order(tmpdir):
    # arrange
    rows = ["4,3,2,1,0.0"]
    header = "RAW_TP10,RAW_AF8,RAW_AF7,RAW_TP9,TimeStamp"
    csv_path = _write_csv(pathlib.Path(tmpdir) / "shuffled.csv", rows, header=header)

    # act
    recording = load_recording(csv_path, ColumnSchema(), label="Negative")

    # assert
    np.testing.assert_array_equal(recording.samples[:, 0], [1.0, 2.0, 3.0, 4.0])


def test_load_recording_label_column(tmpdir):
    # arrange
    rows = ["0.0,1,2,3,4,Negative", "0.1,1,2,3,4,Negative"]
    csv_path = _write_csv(pathlib.Path(tmpdir) / "labelled.csv", rows, header=f"{HEADER},Label")
    schema = ColumnSchema(label_column="Label")

    # act
    recording = load_recording(csv_path, schema)

    # assert
    assert recording.label is EmotionLabel.NEGATIVE


def test_load_recording_label_column_mixed(tmpdir):
    # arrange
    rows = ["0.0,1,2,3,4,Negative", "0.1,1,2,3,4,Positive"]
    csv_path = _write_csv(pathlib.Path(tmpdir) / "mixed.csv", rows, header=f"{HEADER},Label")

    # act
    with pytest.raises(exceptions.InvalidRecording):
        load_recording(csv_path, ColumnSchema(label_column="Label"))


def test_load_recording_nan(tmpdir):
    # arrange
    rows = ["0.0,1,2,3,4", "0.1,1,NaN,3,4"]
    csv_path = _write_csv(pathlib.Path(tmpdir) / "nan.csv", rows)

    # act
    with pytest.raises(exceptions.NonNumericSample) as non_numeric_sample:
        load_recording(csv_path, ColumnSchema(), label="Positive")

    # assert
    assert str(non_numeric_sample.value) == f"Column RAW_AF7 in {csv_path} holds a non-finite value"


def test_load_recording_text_sample(tmpdir):
    # arrange
    csv_path = _write_csv(pathlib.Path(tmpdir) / "text.csv", ["0.0,1,2,abc,4"])

    # act
    with pytest.raises(exceptions.NonNumericSample):
        load_recording(csv_path, ColumnSchema(), label="Positive")


def test_load_recording_missing_column(tmpdir):
    # arrange
    header = "TimeStamp,RAW_TP9,RAW_AF7,RAW_AF8"
    csv_path = _write_csv(pathlib.Path(tmpdir) / "missing.csv", ["0.0,1,2,3"], header=header)

    # act
    with pytest.raises(exceptions.MissingColumn) as missing_column:
        load_recording(csv_path, ColumnSchema(), label="Positive")

    # assert
    assert str(missing_column.value) == f"Column RAW_TP10 not found in {csv_path}"


def test_load_recording_ragged_rows(tmpdir):
    # arrange
    csv_path = _write_csv(pathlib.Path(tmpdir) / "ragged.csv", ["0.0,1,2,3,4", "0.1,1,2,3"])

    # act
    with pytest.raises(exceptions.RaggedRows):
        load_recording(csv_path, ColumnSchema(), label="Positive")


@pytest.mark.parametrize(
    "rows",
    [
        ["0.0,1,2,3,4,5", "0.1,1,2,3,4,5", "0.2,1,2,3,4,5"],
        ["0.0,1,2,3,4,5", "0.1,1,2,3,4", "0.2,1,2,3,4"],
        ["0.0,1,2,3,4", "0.1,1,2,3,4,5"],
    ],
)
def test_load_recording_rows_longer_than_header(rows, tmpdir):
    # arrange
    csv_path = _write_csv(pathlib.Path(tmpdir) / "long_rows.csv", rows)

    # act
    with pytest.raises(exceptions.RaggedRows):
        load_recording(csv_path, ColumnSchema(), label="Positive")


def test_load_recording_not_utf8(tmpdir):
    # arrange
    csv_path = pathlib.Path(tmpdir) / "latin1.csv"
    csv_path.write_bytes(f"{HEADER}\n0.0,1,2,3,4\n".encode("utf-8") + b"0.1,1,2,3,4 \xe9\n")

    # act
    with pytest.raises(exceptions.UnreadableFile) as unreadable_file:
        load_recording(csv_path, ColumnSchema(), label="Positive")

    # assert
    assert str(unreadable_file.value).startswith(f"Data file {csv_path} is not UTF-8: ")


@pytest.mark.parametrize("content", ["", f"{HEADER}\n"])
def test_load_recording_empty_file(content, tmpdir):
    # arrange
    csv_path = pathlib.Path(tmpdir) / "empty.csv"
    csv_path.write_text(content, encoding="utf-8")

    # act
    with pytest.raises(exceptions.EmptyFile):
        load_recording(csv_path, ColumnSchema(), label="Positive")


def test_load_recording_does_not_exist(tmpdir):
    # arrange
    csv_path = pathlib.Path(tmpdir) / "nonexistent.csv"

    # act
    with pytest.raises(exceptions.DataPathDoesNotExist) as data_path_does_not_exist:
        load_recording(csv_path, ColumnSchema(), label="Positive")

    # assert
    assert str(data_path_does_not_exist.value) == f"Data file {csv_path} does not exist."


def test_write_recording_round_trip(tmpdir):
    # arrange
    samples = np.round(np.random.default_rng(0).normal(scale=100.0, size=(4, 300)), 3)
    recording = EegRecording(CANONICAL_CHANNELS, samples, 256.0, 1, EmotionLabel.NEUTRAL)
    csv_path = pathlib.Path(tmpdir) / "round_trip.csv"

    # act
    write_recording(recording, csv_path, ColumnSchema())
    reloaded = load_recording(csv_path, ColumnSchema(), label="Neutral")

    # assert
    np.testing.assert_array_equal(reloaded.samples, recording.samples)


def test_load_recordings_derives_sessions_from_order(tmpdir):
    # arrange
    sources = []
    for index in range(3):
        rows = [f"{row / 256},{index},{index},{index},{index}" for row in range(10)]
        path = _write_csv(pathlib.Path(tmpdir) / f"positive_{index}.csv", rows)
        sources.append(RecordingSource(path=path, label=EmotionLabel.POSITIVE))
    sources.append(RecordingSource(path=sources[0].path, label=EmotionLabel.NEGATIVE, session=7))

    # act
    recordings = load_recordings(sources, ColumnSchema(), session_map={"positive_2.csv": 5})

    # assert
    assert [recording.session_id for recording in recordings] == [1, 2, 5, 7]
    assert [recording.samples[0, 0] for recording in recordings] == [0.0, 1.0, 2.0, 0.0]


@pytest.mark.parametrize(
    "paths, expected",
    [
        (["a/positive_s1.csv", "a/positive_s2.csv"], ["positive_s1", "positive_s2"]),
        (["data/positive/s3.csv", "data/neutral/s3.csv"], ["positive/s3", "neutral/s3"]),
        (["x/positive/s3.csv", "x/neutral/s3.csv", "x/negative/s4.csv"], ["positive/s3", "neutral/s3", "negative/s4"]),
        (["one/a/s1.csv", "two/s1.csv"], ["one/a/s1", "two/s1"]),
    ],
)
def test_recording_ids(paths, expected, tmpdir):
    # act
    identities = recording_ids([pathlib.Path(tmpdir) / path for path in paths])

    # assert
    assert identities == expected


def test_load_recordings_same_file_name_per_label(tmpdir):
    # arrange
    sources = []
    for index, label in enumerate(EmotionLabel):
        folder = pathlib.Path(tmpdir) / label.display_name.lower()
        folder.mkdir()
        rows = [f"{row / 256},{index},{index},{index},{index}" for row in range(10)]
        sources.append(RecordingSource(path=_write_csv(folder / "s3.csv", rows), label=label))

    # act
    recordings = load_recordings(sources, ColumnSchema())

    # assert
    assert [recording.recording_id for recording in recordings] == ["positive/s3", "neutral/s3", "negative/s3"]
    assert [recording.session_id for recording in recordings] == [1, 1, 1]


@pytest.mark.parametrize(
    "samples, channels",
    [
        (np.zeros((3, 10)), CANONICAL_CHANNELS),
        (np.zeros((2, 10)), ("TP9", "TP9")),
        (np.zeros((1, 10)), ("Fz",)),
        (np.zeros((4, 0)), CANONICAL_CHANNELS),
    ],
)
def test_eeg_recording_invalid(samples, channels):
    # act
    with pytest.raises(exceptions.InvalidRecording):
        EegRecording(channels, samples, 256.0, 1, EmotionLabel.POSITIVE)


def test_eeg_recording_invalid_sampling_rate():
    # act
    with pytest.raises(exceptions.InvalidSamplingRate):
        EegRecording(CANONICAL_CHANNELS, np.zeros((4, 10)), 0.0, 1, EmotionLabel.POSITIVE)


@pytest.mark.parametrize(
    "samples, window_length, overlap, expected",
    [
        (1024, 256, 0.0, 4),
        (1024, 256, 0.5, 7),
        (1000, 256, 0.0, 3),
        (256, 256, 0.0, 1),
    ],
)
def test_segment_recording_count(samples, window_length, overlap, expected):
    # act
    segments = segment_recording(_recording(samples), window_length, overlap)

    # assert
    assert len(segments) == expected
    assert all(segment.channel_data.shape == (4, window_length) for segment in segments)


def test_segment_recording_offsets():
    # act
    segments = segment_recording(_recording(1024, session=3), 256, 0.5)

    # assert
    assert [segment.offset for segment in segments] == [0, 128, 256, 384, 512, 640, 768]
    assert all(segment.source_session == 3 for segment in segments)
    assert all(segment.label is EmotionLabel.POSITIVE for segment in segments)
    np.testing.assert_array_equal(segments[1].channel("AF7"), np.arange(1024 + 128, 1024 + 384))


def test_segment_recording_count_formula():
    # arrange
    rng = np.random.default_rng(11)

    for _ in range(50):
        samples = int(rng.integers(64, 2048))
        window_length = int(rng.integers(1, samples + 1))
        overlap = float(rng.uniform(0.0, 0.9))
        stride = int(round(window_length * (1.0 - overlap)))
        if stride < 1:
            continue

        # act
        segments = segment_recording(_recording(samples), window_length, overlap)

        # assert
        assert len(segments) == (samples - window_length) // stride + 1


def test_segment_recording_window_too_large():
    # act
    with pytest.raises(exceptions.WindowTooLarge):
        segment_recording(_recording(100), 256)


@pytest.mark.parametrize("overlap", [1.0, -0.1])
def test_window_stride_invalid_overlap(overlap):
    # act
    with pytest.raises(exceptions.InvalidWindow):
        window_stride(256, overlap)


def _segments(sessions, labels=tuple(EmotionLabel)):
    segments = []
    for label in labels:
        for session in sessions:
            segments.extend(segment_recording(_recording(512, session=session, label=label), 256))
    return segments


def test_split_by_session_three_sessions():
    # act
    split = split_by_session(_segments([1, 2, 3]))

    # assert
    assert {segment.session for segment in split.train} == {1, 2}
    assert {segment.session for segment in split.test} == {3}
    assert {segment.label for segment in split.test} == set(EmotionLabel)
    assert len(split.train) == 12
    assert len(split.test) == 6


def test_split_by_session_two_sessions():
    # act
    split = split_by_session(_segments([1, 2]))

    # assert
    assert {segment.session for segment in split.train} == {1}
    assert {segment.session for segment in split.test} == {2}


def test_split_by_session_is_independent_of_order():
    # arrange
    segments = _segments([1, 2, 3])

    # act
    forward = split_by_session(segments)
    backward = split_by_session(list(reversed(segments)))

    # assert
    assert [(segment.recording_id, segment.offset) for segment in forward.train] == [
        (segment.recording_id, segment.offset) for segment in backward.train
    ]
    assert [(segment.recording_id, segment.offset) for segment in forward.test] == [
        (segment.recording_id, segment.offset) for segment in backward.test
    ]


def test_split_by_session_single_session():
    # arrange
    segments = _segments([1, 2], labels=(EmotionLabel.POSITIVE, EmotionLabel.NEUTRAL))
    segments.extend(_segments([4], labels=(EmotionLabel.NEGATIVE,)))

    # act
    with pytest.raises(exceptions.InsufficientSessions) as insufficient_sessions:
        split_by_session(segments)

    # assert
    assert insufficient_sessions.value.group == "all/Negative"
    assert insufficient_sessions.value.sessions == 1


def test_split_by_session_per_subject():
    # arrange
    segments = [
        Segment(np.zeros((1, 4)), ("TP9",), 4, session, EmotionLabel.POSITIVE, 0, f"{subject}_{session}", subject)
        for subject, sessions in (("a", (1, 2)), ("b", (3, 5, 6)))
        for session in sessions
    ]

    # act
    split = split_by_session(segments)

    # assert
    assert [(segment.subject, segment.session) for segment in split.train] == [("a", 1), ("b", 3), ("b", 5)]
    assert [(segment.subject, segment.session) for segment in split.test] == [("a", 2), ("b", 6)]
