import pathlib

import pandas as pd
import pytest
import yaml

from emowave import exceptions
from emowave.pipeline import stages
from emowave.pipeline.config import PipelineConfig
from emowave.signals import synthetic
from emowave.utils import read_json

SMALL_SETTINGS = {
    "knn.candidates": [1, 3],
    "rnn.hidden_size": 8,
    "rnn.learning_rate": 0.1,
    "rnn.epochs": 150,
    "rnn.batch_size": 8,
}


def _config(root: pathlib.Path, output_dir: pathlib.Path, **overrides) -> PipelineConfig:
    with (root / "config.yml").open("r", encoding="utf-8") as config_file:
        document = yaml.safe_load(config_file)["emowave"]
    settings = {
        "data.files": document["data"]["files"],
        "sampling_rate_hz": document["sampling_rate_hz"],
        "seed": document["seed"],
        "rnn.sequence_length": document["rnn"]["sequence_length"],
        **SMALL_SETTINGS,
    }
    settings.update({key.replace("__", "."): value for key, value in overrides.items()})
    return PipelineConfig.from_settings(settings, base_path=root, output_dir=output_dir)


def _artifacts(output_dir: pathlib.Path) -> dict:
    return {path.name: path.read_bytes() for path in sorted(output_dir.iterdir()) if path.name != stages.MANIFEST_JSON}


@pytest.fixture(scope="module")
def dataset_root(tmp_path_factory):
    root = tmp_path_factory.mktemp("synthetic")
    synthetic.generate_dataset(root, seed=0, sessions=3, seconds=16.0)
    return root


@pytest.fixture(scope="module")
def pipeline_output(dataset_root, tmp_path_factory):
    output_dir = tmp_path_factory.mktemp("run") / "out"
    stages.run_pipeline(_config(dataset_root, output_dir))
    return output_dir


def test_run_pipeline_writes_every_artifact(pipeline_output):
    # assert
    assert sorted(path.name for path in pipeline_output.iterdir()) == sorted(
        [
            "comparison.csv",
            "comparison.svg",
            "confusion_knn.csv",
            "confusion_rnn.csv",
            "features.csv",
            "knn_model.json",
            "knn_predictions.csv",
            "knn_report.json",
            "knn_report.txt",
            "rnn_loss_history.csv",
            "rnn_params.json",
            "rnn_predictions.csv",
            "rnn_report.json",
            "rnn_report.txt",
            "run_manifest.json",
        ]
    )


def test_run_pipeline_classifies_synthetic_data(pipeline_output):
    # act
    manifest = read_json(pipeline_output / stages.MANIFEST_JSON)

    # assert
    assert manifest["accuracy"]["kNN"] >= 0.95
    assert manifest["accuracy"]["RNN"] >= 0.95
    assert manifest["seed"] == 0
    assert manifest["wall_time_seconds"] >= 0.0
    assert set(manifest["versions"]) == {"emowave", "numpy", "pandas", "python"}


def test_run_pipeline_predicts_the_latest_session(pipeline_output):
    # act
    knn_predictions = pd.read_csv(pipeline_output / stages.KNN_PREDICTIONS_CSV)
    rnn_predictions = pd.read_csv(pipeline_output / stages.RNN_PREDICTIONS_CSV)

    # assert
    assert list(knn_predictions.columns) == list(stages.PREDICTION_COLUMNS)
    assert set(knn_predictions["session"]) == {3}
    assert len(knn_predictions) == 3 * 16
    assert set(rnn_predictions["session"]) == {3}
    assert len(rnn_predictions) == 3 * 4


def test_run_pipeline_loss_decreases(pipeline_output):
    # act
    history = pd.read_csv(pipeline_output / stages.RNN_LOSS_HISTORY_CSV)

    # assert
    assert len(history) == 150
    assert history["loss"].iloc[-1] < history["loss"].iloc[0]


def test_stages_match_run_pipeline(dataset_root, pipeline_output, tmpdir):
    # arrange
    output_dir = pathlib.Path(tmpdir) / "out"
    config = _config(dataset_root, output_dir)

    # act
    stages.extract_stage(config)
    stages.knn_stage(config)
    stages.rnn_stage(config)
    stages.evaluate_stage(config)
    stages.plot_stage(output_dir)

    # assert
    assert _artifacts(output_dir) == _artifacts(pipeline_output)
    manifest = read_json(output_dir / stages.MANIFEST_JSON)
    expected = read_json(pipeline_output / stages.MANIFEST_JSON)
    for payload in (manifest, expected):
        payload.pop("created_at")
        payload.pop("wall_time_seconds", None)
    assert manifest == expected


def test_knn_stage_rejects_another_config(dataset_root, tmpdir):
    # arrange
    output_dir = pathlib.Path(tmpdir) / "out"
    stages.extract_stage(_config(dataset_root, output_dir))

    # act
    with pytest.raises(exceptions.StageMismatch):
        stages.knn_stage(_config(dataset_root, output_dir, seed=1))


def test_knn_stage_per_subject(tmpdir):
    # arrange
    root = pathlib.Path(tmpdir) / "two_subjects"
    synthetic.generate_dataset(root, seed=2, sessions=2, seconds=8.0, subjects=("subject_a", "subject_b"))
    config = _config(root, root / "out", knn__per_subject=True)
    stages.extract_stage(config)

    # act
    stages.knn_stage(config)

    # assert
    model = read_json(root / "out" / stages.KNN_MODEL_JSON)
    assert sorted(model["models"]) == ["subject_a", "subject_b"]
    predictions = pd.read_csv(root / "out" / stages.KNN_PREDICTIONS_CSV)
    assert (predictions["fold"] == predictions["subject"]).all()
    assert len(predictions) == 2 * 3 * 8


def test_knn_stage_channel_selection(dataset_root, tmpdir):
    # arrange
    output_dir = pathlib.Path(tmpdir) / "out"
    config = _config(dataset_root, output_dir, channel_selection__top_n=2)
    stages.extract_stage(config)

    # act
    stages.knn_stage(config)

    # assert
    model = read_json(output_dir / stages.KNN_MODEL_JSON)
    assert len(model["channels"]) == 2
    assert len(model["channel_scores"]) == 4
    assert model["scaling"] is not None


def test_rnn_stage_fivefold(dataset_root, tmpdir):
    # arrange
    output_dir = pathlib.Path(tmpdir) / "out"
    config = _config(dataset_root, output_dir, rnn__evaluation="fivefold", rnn__epochs=10)
    stages.extract_stage(config)

    # act
    stages.rnn_stage(config)

    # assert
    params = read_json(output_dir / stages.RNN_PARAMS_JSON)
    assert params["evaluation"] == "fivefold"
    assert sorted(params["models"]) == [f"fold_{number}" for number in range(1, 6)]
    predictions = pd.read_csv(output_dir / stages.RNN_PREDICTIONS_CSV)
    assert len(predictions) == 3 * 3 * 4
    assert predictions.duplicated(["recording_id", "offset"]).sum() == 0


def test_rnn_stage_fivefold_single_session(tmpdir):
    # arrange
    root = pathlib.Path(tmpdir) / "single_session"
    synthetic.generate_dataset(root, seed=2, sessions=1, seconds=32.0)
    output_dir = pathlib.Path(tmpdir) / "out"
    config = _config(root, output_dir, rnn__evaluation="fivefold", rnn__epochs=5)
    stages.extract_stage(config)

    # act
    stages.rnn_stage(config)

    # assert
    params = read_json(output_dir / stages.RNN_PARAMS_JSON)
    assert params["channels"] == ["TP9", "AF7", "AF8", "TP10"]
    assert sorted(params["models"]) == [f"fold_{number}" for number in range(1, 6)]


def test_rnn_stage_fivefold_channel_selection_single_session(tmpdir):
    # arrange
    root = pathlib.Path(tmpdir) / "single_session"
    synthetic.generate_dataset(root, seed=2, sessions=1, seconds=32.0)
    output_dir = pathlib.Path(tmpdir) / "out"
    config = _config(root, output_dir, rnn__evaluation="fivefold", rnn__epochs=5, channel_selection__top_n=2)
    stages.extract_stage(config)

    # act
    with pytest.raises(exceptions.InsufficientSessions):
        stages.rnn_stage(config)


def test_evaluate_stage_missing_predictions(dataset_root, tmpdir):
    # arrange
    output_dir = pathlib.Path(tmpdir) / "out"
    config = _config(dataset_root, output_dir)
    stages.extract_stage(config)

    # act
    with pytest.raises(exceptions.MissingArtifact):
        stages.evaluate_stage(config)


def test_knn_stage_without_features(dataset_root, tmpdir):
    # act
    with pytest.raises(exceptions.MissingArtifact):
        stages.knn_stage(_config(dataset_root, pathlib.Path(tmpdir) / "empty"))


def test_plot_stage_missing_comparison(tmpdir):
    # act
    with pytest.raises(exceptions.MissingArtifact):
        stages.plot_stage(pathlib.Path(tmpdir))


def test_run_pipeline_missing_data_file(dataset_root, tmpdir):
    # arrange
    output_dir = pathlib.Path(tmpdir) / "out"
    (dataset_root / "data" / "subject_a_neutral_s2.csv").rename(dataset_root / "moved.csv")
    config = _config(dataset_root, output_dir)

    # act
    try:
        with pytest.raises(exceptions.DataPathDoesNotExist):
            with stages.artifact_guard(output_dir):
                stages.run_pipeline(config)
    finally:
        (dataset_root / "moved.csv").rename(dataset_root / "data" / "subject_a_neutral_s2.csv")

    # assert
    assert not output_dir.exists()


def test_artifact_guard_removes_new_files(tmpdir):
    # arrange
    output_dir = pathlib.Path(tmpdir)
    kept = output_dir / "kept.txt"
    kept.write_text("kept", encoding="utf-8")

    # act
    with pytest.raises(exceptions.EmptyDataset):
        with stages.artifact_guard(output_dir):
            (output_dir / "nested").mkdir()
            (output_dir / "nested" / "partial.csv").write_text("a,b\n", encoding="utf-8")
            (output_dir / "partial.json").write_text("{}", encoding="utf-8")
            raise exceptions.EmptyDataset("no sequences")

    # assert
    assert sorted(path.name for path in output_dir.iterdir()) == ["kept.txt"]
