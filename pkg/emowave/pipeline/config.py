"""Submodule turning config.yml settings into a validated pipeline configuration."""

from __future__ import annotations

import hashlib
import json
import pathlib
from dataclasses import dataclass, field
from typing import Any, Dict, Mapping, Optional, Tuple, Union

from emowave import exceptions
from emowave.classifiers.rnn import TrainConfig
from emowave.features.statistics import BandPolicy
from emowave.signals.recordings import (
    CANONICAL_CHANNELS,
    DEFAULT_SUBJECT,
    ColumnSchema,
    EmotionLabel,
    RecordingSource,
    canonical_order,
)
from emowave.wavelets.transform import ExtensionMode

EVALUATION_MODES = ("session", "fivefold")

CONFIG_DEFAULTS: Dict[str, Any] = {
    "data.files": None,
    "data.timestamp_column": "TimeStamp",
    "data.channel_columns": {channel: f"RAW_{channel}" for channel in CANONICAL_CHANNELS},
    "data.label_column": None,
    "session_map": {},
    "channels": list(CANONICAL_CHANNELS),
    "sampling_rate_hz": 256,
    "window_length": 256,
    "overlap": 0.0,
    "wavelet": "db4",
    "levels": 5,
    "extension_mode": "symmetric",
    "band_policy": "all",
    "standardize": True,
    "channel_selection.top_n": None,
    "knn.candidates": [1, 3, 5, 7],
    "knn.c": 2.0,
    "knn.folds": 5,
    "knn.per_subject": False,
    "rnn.hidden_size": 16,
    "rnn.learning_rate": 0.05,
    "rnn.epochs": 200,
    "rnn.batch_size": 16,
    "rnn.grad_clip": 5.0,
    "rnn.sequence_length": 8,
    "rnn.evaluation": "session",
    "output_dir": "./emowave-out",
    "seed": 0,
    "logging.level": "INFO",
    "logging.path": None,
}


@dataclass(frozen=True)
class PipelineConfig:
    """
    Everything one pipeline run depends on.

    Attributes:
        data_files (tuple[RecordingSource, ...]): the recordings to load.
        schema (ColumnSchema): the CSV columns to read.
        session_map (Mapping[str, int]): file name to session ordinal.
        channels (tuple[str, ...]): the channels to fuse.
        sampling_rate_hz (float): the declared sampling rate.
        window_length (int): samples per segment.
        overlap (float): fraction of a segment shared with the next.
        wavelet (str): the wavelet family.
        levels (int): the decomposition depth.
        extension_mode (ExtensionMode): the boundary handling.
        band_policy (BandPolicy): all coefficient sets or theta only.
        standardize (bool): z-score features with training statistics.
        channel_top_n (int | None): keep the best `n` channels, `None` keeps all.
        knn_candidates (tuple[int, ...]): the k values to cross-validate.
        knn_c (float): the Minkowski exponent.
        knn_folds (int): number of cross-validation folds.
        knn_per_subject (bool): select k and fit a model per subject.
        rnn (TrainConfig): the RNN hyperparameters.
        rnn_evaluation (str): `session` or `fivefold`.
        output_dir (pathlib.Path): where artifacts are written.
        seed (int): the run seed every sub-seed is derived from.
    """

    data_files: Tuple[RecordingSource, ...]
    schema: ColumnSchema = field(default_factory=ColumnSchema)
    session_map: Mapping[str, int] = field(default_factory=dict)
    channels: Tuple[str, ...] = CANONICAL_CHANNELS
    sampling_rate_hz: float = 256.0
    window_length: int = 256
    overlap: float = 0.0
    wavelet: str = "db4"
    levels: int = 5
    extension_mode: ExtensionMode = ExtensionMode.SYMMETRIC
    band_policy: BandPolicy = BandPolicy.ALL
    standardize: bool = True
    channel_top_n: Optional[int] = None
    knn_candidates: Tuple[int, ...] = (1, 3, 5, 7)
    knn_c: float = 2.0
    knn_folds: int = 5
    knn_per_subject: bool = False
    rnn: TrainConfig = field(default_factory=TrainConfig)
    rnn_evaluation: str = "session"
    output_dir: pathlib.Path = pathlib.Path("./emowave-out")
    seed: int = 0

    def __post_init__(self) -> None:
        if not self.data_files:
            raise exceptions.MandatoryKeyNotFound("Key data.files not found in config.yml")
        unknown = [channel for channel in self.channels if channel not in CANONICAL_CHANNELS]
        if unknown or not self.channels:
            raise exceptions.InvalidConfigValue(f"channels must be a subset of {CANONICAL_CHANNELS}, got {self.channels}")
        if self.window_length < 1 or self.levels < 1:
            raise exceptions.InvalidConfigValue("window_length and levels must be positive")
        if self.window_length % 2**self.levels:
            raise exceptions.InvalidConfigValue(
                f"window_length {self.window_length} is not divisible by 2**levels = {2**self.levels}"
            )
        if self.sampling_rate_hz <= 0:
            raise exceptions.InvalidSamplingRate(f"Sampling rate {self.sampling_rate_hz} is not > 0")
        if self.channel_top_n is not None and not 1 <= self.channel_top_n <= len(self.channels):
            raise exceptions.InvalidConfigValue(
                f"channel_selection.top_n must be between 1 and {len(self.channels)}, got {self.channel_top_n}"
            )
        if not self.knn_candidates or min(self.knn_candidates) < 1:
            raise exceptions.InvalidConfigValue(f"knn.candidates must be positive, got {self.knn_candidates}")
        if self.knn_c < 1:
            raise exceptions.InvalidExponent(f"Minkowski exponent {self.knn_c} is below 1")
        if self.rnn_evaluation not in EVALUATION_MODES:
            raise exceptions.InvalidConfigValue(
                f"rnn.evaluation must be one of {EVALUATION_MODES}, got {self.rnn_evaluation}"
            )
        object.__setattr__(self, "channels", canonical_order(self.channels))

    def as_dict(self) -> dict:
        """Return the configuration as a JSON-ready echo."""
        return {
            "data": {
                "files": [
                    {
                        "path": str(source.path),
                        "label": source.label.display_name if source.label is not None else None,
                        "session": source.session,
                        "subject": source.subject,
                    }
                    for source in self.data_files
                ],
                "timestamp_column": self.schema.timestamp_column,
                "channel_columns": dict(self.schema.channel_columns),
                "label_column": self.schema.label_column,
            },
            "session_map": dict(self.session_map),
            "channels": list(self.channels),
            "sampling_rate_hz": self.sampling_rate_hz,
            "window_length": self.window_length,
            "overlap": self.overlap,
            "wavelet": self.wavelet,
            "levels": self.levels,
            "extension_mode": self.extension_mode.value,
            "band_policy": self.band_policy.value,
            "standardize": self.standardize,
            "channel_selection": {"top_n": self.channel_top_n},
            "knn": {
                "candidates": list(self.knn_candidates),
                "c": self.knn_c,
                "folds": self.knn_folds,
                "per_subject": self.knn_per_subject,
            },
            "rnn": {
                "hidden_size": self.rnn.hidden_size,
                "learning_rate": self.rnn.learning_rate,
                "epochs": self.rnn.epochs,
                "batch_size": self.rnn.batch_size,
                "grad_clip": self.rnn.grad_clip,
                "sequence_length": self.rnn.sequence_length,
                "evaluation": self.rnn_evaluation,
            },
            "seed": self.seed,
        }

    @property
    def config_hash(self) -> str:
        """The sha256 of the canonical JSON echo, embedded in every artifact."""
        canonical = json.dumps(self.as_dict(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(canonical.encode("utf-8")).hexdigest()

    @classmethod
    def from_settings(
        cls,
        settings: Mapping[str, Any],
        base_path: Union[str, pathlib.Path] = ".",
        output_dir: Optional[Union[str, pathlib.Path]] = None,
        seed: Optional[int] = None,
    ) -> PipelineConfig:
        """
        Build a configuration from dotted config.yml keys.

        Missing keys take the value in `CONFIG_DEFAULTS`.

        Args:
            settings (Mapping[str, Any]): dotted keys such as `knn.candidates`.
            base_path (str | pathlib.Path, optional): relative data paths resolve against it,
                usually the directory of the config.yml.
            output_dir (str | pathlib.Path | None, optional): overrides `output_dir`.
            seed (int | None, optional): overrides `seed`.

        Raises:
            exceptions.MandatoryKeyNotFound: raised if `data.files` or a file `path` is missing.
            exceptions.InvalidConfigValue: raised if a value is outside its range.

        Returns:
            PipelineConfig: the validated configuration.
        """

        def _get(key: str) -> Any:
            value = settings.get(key)
            return CONFIG_DEFAULTS[key] if value is None else value

        unknown = [channel for channel in _get("channels") if channel not in CANONICAL_CHANNELS]
        if unknown:
            raise exceptions.InvalidConfigValue(f"channels must be a subset of {CANONICAL_CHANNELS}, got {unknown}")
        channels = canonical_order(_get("channels"))
        channel_columns = _get("data.channel_columns")
        missing = [channel for channel in channels if channel not in channel_columns]
        if missing:
            raise exceptions.MandatoryKeyNotFound(f"Key data.channel_columns.{missing[0]} not found in config.yml")
        schema = ColumnSchema(
            channel_columns={channel: str(channel_columns[channel]) for channel in channels},
            timestamp_column=_get("data.timestamp_column") or None,
            label_column=_get("data.label_column"),
        )
        try:
            rnn = TrainConfig(
                learning_rate=float(_get("rnn.learning_rate")),
                epochs=int(_get("rnn.epochs")),
                batch_size=int(_get("rnn.batch_size")),
                grad_clip=float(_get("rnn.grad_clip")),
                sequence_length=int(_get("rnn.sequence_length")),
                hidden_size=int(_get("rnn.hidden_size")),
            )
            extension_mode = ExtensionMode(str(_get("extension_mode")).lower())
            band_policy = BandPolicy(str(_get("band_policy")).lower())
            top_n = _get("channel_selection.top_n")
            return cls(
                data_files=_data_files(_get("data.files") or [], pathlib.Path(base_path).expanduser()),
                schema=schema,
                session_map={str(name): int(session) for name, session in _get("session_map").items()},
                channels=channels,
                sampling_rate_hz=float(_get("sampling_rate_hz")),
                window_length=int(_get("window_length")),
                overlap=float(_get("overlap")),
                wavelet=str(_get("wavelet")),
                levels=int(_get("levels")),
                extension_mode=extension_mode,
                band_policy=band_policy,
                standardize=bool(_get("standardize")),
                channel_top_n=None if top_n is None else int(top_n),
                knn_candidates=tuple(int(k) for k in _get("knn.candidates")),
                knn_c=float(_get("knn.c")),
                knn_folds=int(_get("knn.folds")),
                knn_per_subject=bool(_get("knn.per_subject")),
                rnn=rnn,
                rnn_evaluation=str(_get("rnn.evaluation")).lower(),
                output_dir=pathlib.Path(output_dir if output_dir is not None else _get("output_dir")).expanduser(),
                seed=int(seed if seed is not None else _get("seed")),
            )
        except (TypeError, ValueError) as value_error:
            raise exceptions.InvalidConfigValue(f"Invalid value in config.yml: {value_error}") from value_error


def _data_files(entries: Any, base_path: pathlib.Path) -> Tuple[RecordingSource, ...]:
    sources = []
    for entry in entries:
        if "path" not in entry:
            raise exceptions.MandatoryKeyNotFound("Key path not found in a data.files entry of config.yml")
        path = pathlib.Path(str(entry["path"])).expanduser()
        label = entry.get("label")
        session = entry.get("session")
        sources.append(
            RecordingSource(
                path=path if path.is_absolute() else base_path / path,
                label=None if label is None else EmotionLabel.parse(label),
                session=None if session is None else int(session),
                subject=str(entry.get("subject") or DEFAULT_SUBJECT),
            )
        )
    return tuple(sources)
