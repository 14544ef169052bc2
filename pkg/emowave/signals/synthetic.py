"""
Submodule generating a synthetic four-channel EEG dataset.

Every class is a sinusoid mixture with its own amplitude and dominant rhythm:

| label    | amplitude (uV) | dominant rhythm |
| -------- | -------------- | --------------- |
| Positive | 20             | 10 Hz (alpha)   |
| Neutral  | 45             | 6 Hz (theta)    |
| Negative | 90             | 22 Hz (beta)    |

The carrier is slowly amplitude modulated, scaled by a per-channel gain and overlaid with
Gaussian noise, so the classes stay separable in wavelet statistics without being constant.
"""

from __future__ import annotations

import logging
import pathlib
from typing import Dict, List, Sequence, Union

import numpy as np
import yaml

from emowave.signals.recordings import (
    CANONICAL_CHANNELS,
    ColumnSchema,
    EegRecording,
    EmotionLabel,
    write_recording,
)
from emowave.utils import Success, derive_seed

logger = logging.getLogger(__name__)

CLASS_AMPLITUDES: Dict[EmotionLabel, float] = {
    EmotionLabel.POSITIVE: 20.0,
    EmotionLabel.NEUTRAL: 45.0,
    EmotionLabel.NEGATIVE: 90.0,
}
CLASS_FREQUENCIES: Dict[EmotionLabel, float] = {
    EmotionLabel.POSITIVE: 10.0,
    EmotionLabel.NEUTRAL: 6.0,
    EmotionLabel.NEGATIVE: 22.0,
}
CHANNEL_GAINS: Dict[str, float] = {"TP9": 1.0, "AF7": 0.8, "AF8": 0.85, "TP10": 1.1}
NOISE_SIGMA = 5.0
MODULATION_HZ = 0.1
DATA_DIRECTORY = "data"


def generate_recording(
    label: EmotionLabel,
    rng: np.random.Generator,
    *,
    seconds: float = 48.0,
    sampling_rate: float = 256.0,
    session_id: int = 1,
    subject: str = "subject_a",
) -> EegRecording:
    """
    Generate one synthetic recording of an emotional state.

    Args:
        label (EmotionLabel): the emotional state.
        rng (np.random.Generator): the source of phases and noise.
        seconds (float, optional): the duration. Defaults to 48 s.
        sampling_rate (float, optional): samples per second. Defaults to 256 Hz.
        session_id (int, optional): the session ordinal. Defaults to 1.
        subject (str, optional): the participant. Defaults to `subject_a`.

    Returns:
        EegRecording: the four canonical channels, rounded to 3 decimals like a headset export.
    """
    time = np.arange(int(round(seconds * sampling_rate))) / sampling_rate
    amplitude = CLASS_AMPLITUDES[label]
    frequency = CLASS_FREQUENCIES[label]
    channels = []
    for channel in CANONICAL_CHANNELS:
        phase, harmonic_phase, modulation_phase = rng.uniform(0.0, 2.0 * np.pi, size=3)
        envelope = 1.0 + 0.2 * np.sin(2.0 * np.pi * MODULATION_HZ * time + modulation_phase)
        carrier = np.sin(2.0 * np.pi * frequency * time + phase)
        harmonic = 0.3 * np.sin(2.0 * np.pi * 2.0 * frequency * time + harmonic_phase)
        noise = rng.normal(0.0, NOISE_SIGMA, size=time.size)
        channels.append(CHANNEL_GAINS[channel] * amplitude * envelope * (carrier + harmonic) + noise)
    return EegRecording(
        channels=CANONICAL_CHANNELS,
        samples=np.round(np.vstack(channels), 3),
        sampling_rate=sampling_rate,
        session_id=session_id,
        label=label,
        recording_id=f"{subject}_{label.display_name.lower()}_s{session_id}",
        subject=subject,
    )


def generate_dataset(
    out_dir: Union[str, pathlib.Path],
    seed: int = 0,
    sessions: int = 3,
    seconds: float = 48.0,
    sampling_rate: float = 256.0,
    subjects: Sequence[str] = ("subject_a",),
) -> Success:
    """
    Write a synthetic dataset and a config.yml that runs the pipeline on it.

    One recording is written per subject, label and session under `<out_dir>/data`. The
    config.yml refers to them by relative path, so the directory can be moved.

    Args:
        out_dir (str | pathlib.Path): the destination directory.
        seed (int, optional): the dataset seed. Defaults to 0.
        sessions (int, optional): sessions per subject and label. Defaults to 3.
        seconds (float, optional): duration of each recording. Defaults to 48 s.
        sampling_rate (float, optional): samples per second. Defaults to 256 Hz.
        subjects (Sequence[str], optional): the participants. Defaults to one subject.

    Returns:
        Success: A [Success][emowave.utils.Success] with the path of the config.yml as the message.
    """
    out_path = pathlib.Path(out_dir).expanduser()
    rng = np.random.default_rng(derive_seed(seed, "synthetic"))
    schema = ColumnSchema()
    files: List[dict] = []
    for subject in subjects:
        for label in EmotionLabel:
            for session in range(1, sessions + 1):
                recording = generate_recording(
                    label,
                    rng,
                    seconds=seconds,
                    sampling_rate=sampling_rate,
                    session_id=session,
                    subject=subject,
                )
                relative_path = pathlib.Path(DATA_DIRECTORY) / f"{recording.recording_id}.csv"
                write_recording(recording, out_path / relative_path, schema)
                files.append(
                    {
                        "path": relative_path.as_posix(),
                        "label": label.display_name,
                        "session": session,
                        "subject": subject,
                    }
                )

    config_path = out_path / "config.yml"
    config = {
        "emowave": {
            "data": {"files": files},
            "sampling_rate_hz": sampling_rate,
            "seed": seed,
            "rnn": {"sequence_length": 4},
        }
    }
    with config_path.open("w", encoding="utf-8") as config_file:
        yaml.safe_dump(config, config_file, sort_keys=False)
    logger.info("Wrote %s synthetic recordings to %s", len(files), out_path)
    return Success(str(config_path))
