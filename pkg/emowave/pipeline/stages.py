"""
Submodule containing the pipeline stages.

Every stage reads the artifacts of the stages before it from the output directory and writes
its own, so the CLI subcommands and `run` share one code path:

| stage      | reads                                  | writes                                         |
| ---------- | -------------------------------------- | ---------------------------------------------- |
| features   | data files                             | features.csv, run_manifest.json                |
| train-knn  | features.csv                           | knn_model.json, knn_predictions.csv            |
| train-rnn  | features.csv                           | rnn_params.json, rnn_predictions.csv,          |
|            |                                        | rnn_loss_history.csv                           |
| evaluate   | knn/rnn predictions                    | knn/rnn_report.json + .txt, confusion_knn.csv, |
|            |                                        | confusion_rnn.csv, comparison.csv              |
| plot       | comparison.csv                         | comparison.svg                                 |

The config hash of the invocation is embedded in every JSON artifact and checked by the
stages that consume it.
"""

from __future__ import annotations

import contextlib
import hashlib
import logging
import pathlib
import platform
import shutil
from dataclasses import dataclass, replace
from typing import Dict, Iterator, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd
import pendulum

from emowave import exceptions
from emowave._version import __version__
from emowave.classifiers import knn, rnn
from emowave.classifiers.validation import stratified_folds
from emowave.evaluation import metrics, reporting
from emowave.features import statistics
from emowave.features.statistics import LabeledDataset, ScalingParams
from emowave.pipeline.config import PipelineConfig
from emowave.signals import recordings
from emowave.signals.recordings import EmotionLabel
from emowave.utils import Success, derive_seed, read_json, write_json
from emowave.wavelets.filters import load_filters

logger = logging.getLogger(__name__)

FEATURES_CSV = "features.csv"
MANIFEST_JSON = "run_manifest.json"
KNN_MODEL_JSON = "knn_model.json"
KNN_PREDICTIONS_CSV = "knn_predictions.csv"
RNN_PARAMS_JSON = "rnn_params.json"
RNN_PREDICTIONS_CSV = "rnn_predictions.csv"
RNN_LOSS_HISTORY_CSV = "rnn_loss_history.csv"
COMPARISON_CSV = "comparison.csv"
COMPARISON_SVG = "comparison.svg"
POOLED_MODEL = "pooled"
RNN_FOLDS = 5

CLASSIFIERS: Dict[str, Tuple[str, str, str]] = {
    "knn": ("kNN", KNN_MODEL_JSON, KNN_PREDICTIONS_CSV),
    "rnn": ("RNN", RNN_PARAMS_JSON, RNN_PREDICTIONS_CSV),
}
PREDICTION_COLUMNS = ("fold", "subject", "recording_id", "session", "offset", "true", "predicted")


@dataclass(frozen=True)
class PreparedData:
    """
    The session split of the feature vectors, ready for training.

    Attributes:
        train (LabeledDataset): vectors from the earlier sessions.
        test (LabeledDataset): vectors from the latest session of each subject and label.
        channels (tuple[str, ...]): the fused channels after channel selection.
        scaling (ScalingParams | None): the z-score parameters, `None` when not standardising.
        channel_scores (list[knn.ChannelScore]): the channel ranking, empty when not selecting.
    """

    train: LabeledDataset
    test: LabeledDataset
    channels: Tuple[str, ...]
    scaling: Optional[ScalingParams]
    channel_scores: List[knn.ChannelScore]


def file_sha256(path: pathlib.Path) -> str:
    """Return the sha256 of a file's bytes."""
    return hashlib.sha256(pathlib.Path(path).read_bytes()).hexdigest()


@contextlib.contextmanager
def artifact_guard(output_dir: pathlib.Path) -> Iterator[None]:
    """
    Remove every file a failing block created under `output_dir`.

    The output directory itself is removed as well if the block created it.
    """
    output_dir = pathlib.Path(output_dir)
    existed = output_dir.exists()
    before = {path for path in output_dir.rglob("*")} if existed else set()
    try:
        yield
    except Exception:
        if not existed:
            shutil.rmtree(output_dir, ignore_errors=True)
        elif output_dir.exists():
            for path in sorted(set(output_dir.rglob("*")) - before, reverse=True):
                if path.is_dir():
                    shutil.rmtree(path, ignore_errors=True)
                else:
                    path.unlink()
        raise


def check_data_paths(config: PipelineConfig) -> None:
    """
    Check that every data file exists before anything is written.

    Raises:
        exceptions.DataPathDoesNotExist: raised for the first missing file.
    """
    for source in config.data_files:
        if not source.path.is_file():
            raise exceptions.DataPathDoesNotExist(f"Data file {source.path} does not exist.")


def _read_manifest(config: PipelineConfig) -> dict:
    manifest_path = config.output_dir / MANIFEST_JSON
    if not manifest_path.is_file():
        raise exceptions.MissingArtifact(f"{manifest_path} not found, run the features stage first")
    manifest = read_json(manifest_path)
    _check_hash(MANIFEST_JSON, config.config_hash, manifest.get("config_hash", ""))
    return manifest


def _check_hash(artifact: str, expected: str, given: str) -> None:
    if given != expected:
        raise exceptions.StageMismatch(artifact, expected, given)


def _load_features(config: PipelineConfig) -> LabeledDataset:
    manifest = _read_manifest(config)
    features_path = config.output_dir / FEATURES_CSV
    if not features_path.is_file():
        raise exceptions.MissingArtifact(f"{features_path} not found, run the features stage first")
    _check_hash(FEATURES_CSV, manifest["artifacts"][FEATURES_CSV], file_sha256(features_path))
    return statistics.import_csv(features_path)


def _versions() -> Dict[str, str]:
    return {
        "emowave": __version__,
        "numpy": np.__version__,
        "pandas": pd.__version__,
        "python": platform.python_version(),
    }


def extract_stage(config: PipelineConfig) -> Success:
    """
    Load, segment and decompose the recordings and write the feature matrix.

    Args:
        config (PipelineConfig): the run configuration.

    Raises:
        exceptions.DataPathDoesNotExist: raised if a data file is missing.

    Returns:
        Success: A [Success][emowave.utils.Success] with the path of features.csv as the message.
    """
    check_data_paths(config)
    loaded = recordings.load_recordings(
        config.data_files,
        config.schema,
        sampling_rate=config.sampling_rate_hz,
        session_map=config.session_map,
    )
    segments = [
        segment
        for recording in loaded
        for segment in recordings.segment_recording(recording, config.window_length, config.overlap)
    ]
    dataset = statistics.extract_features(
        segments,
        load_filters(config.wavelet),
        config.levels,
        config.extension_mode,
        config.band_policy,
        config.sampling_rate_hz,
        config.channels,
    )
    features_path = config.output_dir / FEATURES_CSV
    result = statistics.export_csv(dataset, features_path)
    write_json(
        config.output_dir / MANIFEST_JSON,
        {
            "artifacts": {FEATURES_CSV: file_sha256(features_path)},
            "config": config.as_dict(),
            "config_hash": config.config_hash,
            "created_at": pendulum.now("UTC").to_iso8601_string(),
            "seed": config.seed,
            "versions": _versions(),
        },
    )
    logger.info("Wrote %s feature vectors from %s segments", len(dataset), len(segments))
    return result


def _select_channels(config: PipelineConfig, train: LabeledDataset) -> Tuple[Tuple[str, ...], List[knn.ChannelScore]]:
    if config.channel_top_n is None:
        return train.channel_order, []
    scores = knn.rank_channels(
        train,
        config.knn_candidates,
        config.knn_folds,
        derive_seed(config.seed, "channels.folds"),
        config.knn_c,
    )
    channels = knn.top_channels(scores, config.channel_top_n)
    logger.info("Selected channels %s", ", ".join(channels))
    return channels, scores


def prepare_data(config: PipelineConfig, dataset: LabeledDataset) -> PreparedData:
    """
    Split the vectors by session, select channels on the training set and standardise.

    Args:
        config (PipelineConfig): the run configuration.
        dataset (LabeledDataset): every feature vector.

    Raises:
        exceptions.InsufficientSessions: raised if a subject and label have a single session.

    Returns:
        PreparedData: the train and test sets.
    """
    split = recordings.split_by_session(dataset.vectors)
    train, test = LabeledDataset(tuple(split.train)), LabeledDataset(tuple(split.test))
    channels, scores = _select_channels(config, train)
    train, test = train.select_channels(channels), test.select_channels(channels)
    scaling = None
    if config.standardize:
        train, test, scaling = statistics.standardize(train, test)
    return PreparedData(train=train, test=test, channels=channels, scaling=scaling, channel_scores=scores)


def _prediction_frame(fold: str, items: Sequence, truth: Sequence[int], predicted: Sequence[int]) -> pd.DataFrame:
    return pd.DataFrame(
        {
            "fold": [fold] * len(items),
            "subject": [item.subject for item in items],
            "recording_id": [item.recording_id for item in items],
            "session": [item.session for item in items],
            "offset": [item.offset for item in items],
            "true": [EmotionLabel(int(label)).display_name for label in truth],
            "predicted": [EmotionLabel(int(label)).display_name for label in predicted],
        },
        columns=list(PREDICTION_COLUMNS),
    )


def _write_predictions(frames: Sequence[pd.DataFrame], path: pathlib.Path) -> Success:
    frame = pd.concat(frames, ignore_index=True) if frames else pd.DataFrame(columns=list(PREDICTION_COLUMNS))
    frame.to_csv(path, index=False)
    return Success(str(path))


def knn_stage(config: PipelineConfig) -> Success:
    """
    Select k by cross-validation, fit the kNN models and classify the test session.

    With `knn.per_subject` a model is fitted per subject and each test vector is classified by
    its subject's model, otherwise one pooled model serves every subject.

    Args:
        config (PipelineConfig): the run configuration.

    Raises:
        exceptions.MissingArtifact: raised if the features stage has not run.
        exceptions.StageMismatch: raised if the features were extracted under another config.

    Returns:
        Success: A [Success][emowave.utils.Success] with the path of knn_model.json as the message.
    """
    prepared = prepare_data(config, _load_features(config))
    if config.knn_per_subject:
        subjects = sorted({vector.subject for vector in prepared.train.vectors})
        groups = {
            subject: [index for index, vector in enumerate(prepared.train.vectors) if vector.subject == subject]
            for subject in subjects
        }
    else:
        groups = {POOLED_MODEL: list(range(len(prepared.train)))}

    models: Dict[str, dict] = {}
    frames = []
    for name, indices in groups.items():
        train = prepared.train.subset(indices)
        best_k, k_scores = knn.select_k(
            train,
            config.knn_candidates,
            config.knn_folds,
            derive_seed(config.seed, "knn.folds"),
            config.knn_c,
        )
        model = knn.KnnModel.from_dataset(train, k=min(best_k, len(train)), minkowski_c=config.knn_c)
        models[name] = {**model.as_dict(), "k_scores": {str(k): score for k, score in k_scores.items()}}
        logger.info("kNN model %s uses k=%s on %s vectors", name, model.k, len(train))

        test_indices = [
            index
            for index, vector in enumerate(prepared.test.vectors)
            if name == POOLED_MODEL or vector.subject == name
        ]
        test = prepared.test.subset(test_indices)
        predicted = knn.predict(model, test.matrix()) if len(test) else np.empty(0, dtype=np.int64)
        frames.append(_prediction_frame(name, test.vectors, test.labels(), predicted))

    model_path = config.output_dir / KNN_MODEL_JSON
    write_json(
        model_path,
        {
            "channel_scores": [
                {"channel": score.channel, "accuracy": score.accuracy, "k": score.k}
                for score in prepared.channel_scores
            ],
            "channels": list(prepared.channels),
            "config_hash": config.config_hash,
            "models": models,
            "scaling": prepared.scaling.as_dict() if prepared.scaling is not None else None,
        },
    )
    _write_predictions(frames, config.output_dir / KNN_PREDICTIONS_CSV)
    return Success(str(model_path))


def _scale_sequences(
    train: Sequence[rnn.FeatureSequence], test: Sequence[rnn.FeatureSequence]
) -> Tuple[List[rnn.FeatureSequence], List[rnn.FeatureSequence], ScalingParams]:
    steps = np.vstack([seq.steps for seq in train])
    scaling = ScalingParams(mean=steps.mean(axis=0), scale=steps.std(axis=0))
    return (
        [replace(seq, steps=scaling.transform(seq.steps)) for seq in train],
        [replace(seq, steps=scaling.transform(seq.steps)) for seq in test],
        scaling,
    )


def rnn_stage(config: PipelineConfig) -> Success:
    """
    Train the RNN and classify held-out sequences.

    In `session` mode the network is trained on sequences from the earlier sessions and tested
    on the latest session. In `fivefold` mode every sequence is classified once by a network
    trained on the other four folds. Channel selection in `fivefold` mode ranks channels on the earlier
    sessions, so only then is more than one session needed.

    Args:
        config (PipelineConfig): the run configuration.

    Raises:
        exceptions.MissingArtifact: raised if the features stage has not run.
        exceptions.StageMismatch: raised if the features were extracted under another config.
        exceptions.EmptyDataset: raised if no training sequence can be built.

    Returns:
        Success: A [Success][emowave.utils.Success] with the path of rnn_params.json as the message.
    """
    dataset = _load_features(config)
    train_config = replace(config.rnn, seed=derive_seed(config.seed, "rnn.train"))
    length = config.rnn.sequence_length
    models: Dict[str, dict] = {}
    histories: Dict[str, List[float]] = {}
    frames = []

    if config.rnn_evaluation == "session":
        prepared = prepare_data(config, dataset)
        channels = prepared.channels
        train_sequences = rnn.build_sequences(prepared.train, length)
        test_sequences = rnn.build_sequences(prepared.test, length)
        params, histories["session"] = rnn.train(train_sequences, train_config)
        models["session"] = {
            **params.as_dict(),
            "scaling": prepared.scaling.as_dict() if prepared.scaling is not None else None,
        }
        predicted = rnn.predict_many(params, test_sequences)
        frames.append(
            _prediction_frame("session", test_sequences, [int(seq.label) for seq in test_sequences], predicted)
        )
    else:
        channels = dataset.channel_order
        if config.channel_top_n is not None:
            split = recordings.split_by_session(dataset.vectors)
            channels, _ = _select_channels(config, LabeledDataset(tuple(split.train)))
        sequences = rnn.build_sequences(dataset.select_channels(channels), length)
        if not sequences:
            raise exceptions.EmptyDataset(f"No recording yields a sequence of {length} feature vectors")
        labels = np.array([int(seq.label) for seq in sequences])
        for number, held_out in enumerate(
            stratified_folds(labels, RNN_FOLDS, derive_seed(config.seed, "rnn.folds")), start=1
        ):
            fold = f"fold_{number}"
            held = set(held_out.tolist())
            train_sequences = [seq for index, seq in enumerate(sequences) if index not in held]
            test_sequences = [sequences[index] for index in held_out]
            scaling = None
            if config.standardize:
                train_sequences, test_sequences, scaling = _scale_sequences(train_sequences, test_sequences)
            params, histories[fold] = rnn.train(train_sequences, train_config)
            models[fold] = {**params.as_dict(), "scaling": scaling.as_dict() if scaling is not None else None}
            predicted = rnn.predict_many(params, test_sequences)
            frames.append(
                _prediction_frame(fold, test_sequences, [int(seq.label) for seq in test_sequences], predicted)
            )
            logger.debug("RNN %s classified %s sequences", fold, len(test_sequences))

    params_path = config.output_dir / RNN_PARAMS_JSON
    write_json(
        params_path,
        {
            "channels": list(channels),
            "config_hash": config.config_hash,
            "evaluation": config.rnn_evaluation,
            "models": models,
            "sequence_length": length,
        },
    )
    rnn.save_loss_history(histories, config.output_dir / RNN_LOSS_HISTORY_CSV)
    _write_predictions(frames, config.output_dir / RNN_PREDICTIONS_CSV)
    return Success(str(params_path))


def _load_predictions(config: PipelineConfig, key: str) -> pd.DataFrame:
    _, model_file, predictions_file = CLASSIFIERS[key]
    model_path = config.output_dir / model_file
    predictions_path = config.output_dir / predictions_file
    for path in (model_path, predictions_path):
        if not path.is_file():
            raise exceptions.MissingArtifact(f"{path} not found, run the train-{key} stage first")
    _check_hash(model_file, config.config_hash, read_json(model_path).get("config_hash", ""))
    return pd.read_csv(predictions_path, dtype={"true": str, "predicted": str}, keep_default_na=False)


def evaluate_stage(config: PipelineConfig) -> Success:
    """
    Score the predictions of both classifiers and write their reports and comparison.

    Args:
        config (PipelineConfig): the run configuration.

    Raises:
        exceptions.MissingArtifact: raised if a training stage has not run.
        exceptions.StageMismatch: raised if a model was trained under another config.
        exceptions.EmptyMatrix: raised if a classifier has no test predictions.

    Returns:
        Success: A [Success][emowave.utils.Success] with the path of comparison.csv as the message.
    """
    manifest = _read_manifest(config)
    reports: Dict[str, metrics.EvalReport] = {}
    for key, (display_name, _, _) in CLASSIFIERS.items():
        predictions = _load_predictions(config, key)
        cm = metrics.confusion(predictions["true"].tolist(), predictions["predicted"].tolist())
        reports[display_name] = metrics.report(cm)
        reporting.write_report_json(
            reports[display_name],
            config.output_dir / f"{key}_report.json",
            classifier=display_name,
            config_hash=config.config_hash,
        )
        reporting.write_report_table(reports[display_name], display_name, config.output_dir / f"{key}_report.txt")
        reporting.write_confusion_csv(cm, config.output_dir / f"confusion_{key}.csv")
        logger.info("%s accuracy %.5f on %s test samples", display_name, cm.correct / cm.total, cm.total)

    comparison_path = config.output_dir / COMPARISON_CSV
    result = reporting.write_comparison_csv(reporting.comparison_frame(reports), comparison_path)
    manifest["accuracy"] = reporting.accuracy_summary(reports)
    write_json(config.output_dir / MANIFEST_JSON, manifest)
    return result


def plot_stage(output_dir: pathlib.Path, comparison_path: Optional[pathlib.Path] = None) -> Success:
    """
    Render comparison.svg from a comparison CSV.

    Args:
        output_dir (pathlib.Path): where comparison.svg is written.
        comparison_path (pathlib.Path | None, optional): the CSV to plot. Defaults to the
            comparison.csv in `output_dir`.

    Raises:
        exceptions.MissingArtifact: raised if the CSV does not exist.

    Returns:
        Success: A [Success][emowave.utils.Success] with the path of comparison.svg as the message.
    """
    csv_path = pathlib.Path(comparison_path) if comparison_path is not None else pathlib.Path(output_dir) / COMPARISON_CSV
    if not csv_path.is_file():
        raise exceptions.MissingArtifact(f"{csv_path} not found, run the evaluate stage first")
    return reporting.write_comparison_svg(reporting.read_comparison_csv(csv_path), pathlib.Path(output_dir) / COMPARISON_SVG)


def run_pipeline(config: PipelineConfig) -> Success:
    """
    Run every stage in order and record the wall time in the manifest.

    Args:
        config (PipelineConfig): the run configuration.

    Returns:
        Success: A [Success][emowave.utils.Success] with the output directory as the message.
    """
    started = pendulum.now("UTC")
    check_data_paths(config)
    extract_stage(config)
    knn_stage(config)
    rnn_stage(config)
    evaluate_stage(config)
    plot_stage(config.output_dir)
    manifest_path = config.output_dir / MANIFEST_JSON
    manifest = read_json(manifest_path)
    manifest["wall_time_seconds"] = round((pendulum.now("UTC") - started).total_seconds(), 3)
    write_json(manifest_path, manifest)
    logger.info("Pipeline finished in %ss", manifest["wall_time_seconds"])
    return Success(str(config.output_dir))
