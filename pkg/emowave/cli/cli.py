"""Submodule which contains the CLI implementation using Click."""

from __future__ import annotations

import pathlib
from typing import Callable, Optional, Tuple

import click

import emowave.cli
from emowave._version import __version__
from emowave.pipeline import stages
from emowave.pipeline.config import PipelineConfig
from emowave.signals import synthetic
from emowave.utils import Success

CONTEXT_SETTINGS = dict(help_option_names=["-h", "--help"])


@click.group(context_settings=CONTEXT_SETTINGS, options_metavar="<options>")
@click.version_option(
    __version__,
    "-v",
    "--version",
    prog_name="emowave",
    message=f"emowave v{__version__} 🧠",
)
def main():
    """emowave - classify emotions from EEG with wavelet features, kNN and an RNN."""


def pipeline_options(command: Callable) -> Callable:
    """Add the `--config`, `--out` and `--seed` options shared by the pipeline commands."""
    command = click.option(
        "--seed", type=int, default=None, metavar="<n>", help="Overrides seed in the config.yml."
    )(command)
    command = click.option(
        "--out",
        "output_dir",
        metavar="<dir>",
        default=None,
        envvar="EMOWAVE_OUTPUT_DIR",
        help="Output directory, overrides output_dir in the config.yml.",
    )(command)
    return click.option(
        "--config",
        "config_path",
        metavar="<dir>",
        default=None,
        help="Directory holding the config.yml. Defaults to $EMOWAVE_CONFIG or ~/emowave/.config.",
    )(command)


def _load_pipeline_config(config_path: Optional[str], output_dir: Optional[str], seed: Optional[int]) -> PipelineConfig:
    config = emowave.cli.load_config(config_path)
    emowave.cli.configure_logger(config)
    return PipelineConfig.from_settings(
        emowave.cli.settings(config),
        base_path=emowave.cli.config_directory(config),
        output_dir=output_dir,
        seed=seed,
    )


def _run_stage(
    stage: Callable[[PipelineConfig], Success],
    config_path: Optional[str],
    output_dir: Optional[str],
    seed: Optional[int],
) -> None:
    try:
        pipeline_config = _load_pipeline_config(config_path, output_dir, seed)
        with stages.artifact_guard(pipeline_config.output_dir):
            result = stage(pipeline_config)
    except Exception as error:
        cli_error(error)
        raise SystemExit(1) from error
    cli_message(f"Saved {result.message}")
    raise SystemExit(0)


@click.command(options_metavar="<options>")
@pipeline_options
def run(config_path: Optional[str], output_dir: Optional[str], seed: Optional[int]):
    """
    Run the whole pipeline.

    \b
    Writes features, both classifiers' models, predictions and reports, comparison.csv,
    comparison.svg and run_manifest.json to the output directory.

    \b
    Example:
        `emowave run --config ~/emowave/.config --out ./emowave-out --seed 0`
    """
    _run_stage(stages.run_pipeline, config_path, output_dir, seed)


@click.command(options_metavar="<options>")
@pipeline_options
def features(config_path: Optional[str], output_dir: Optional[str], seed: Optional[int]):
    """Extract the feature matrix and stop."""
    _run_stage(stages.extract_stage, config_path, output_dir, seed)


@click.command(options_metavar="<options>", name="train-knn")
@pipeline_options
def train_knn(config_path: Optional[str], output_dir: Optional[str], seed: Optional[int]):
    """Train and apply the kNN classifier on an extracted feature matrix."""
    _run_stage(stages.knn_stage, config_path, output_dir, seed)


@click.command(options_metavar="<options>", name="train-rnn")
@pipeline_options
def train_rnn(config_path: Optional[str], output_dir: Optional[str], seed: Optional[int]):
    """Train and apply the RNN classifier on an extracted feature matrix."""
    _run_stage(stages.rnn_stage, config_path, output_dir, seed)


@click.command(options_metavar="<options>")
@pipeline_options
def evaluate(config_path: Optional[str], output_dir: Optional[str], seed: Optional[int]):
    """Write the reports, confusion matrices and comparison of both classifiers."""
    _run_stage(stages.evaluate_stage, config_path, output_dir, seed)


@click.command(options_metavar="<options>")
@click.option(
    "--comparison",
    "comparison_path",
    metavar="<csv>",
    default=None,
    help="Comparison CSV to plot. Defaults to comparison.csv in the output directory.",
)
@pipeline_options
def plot(
    comparison_path: Optional[str],
    config_path: Optional[str],
    output_dir: Optional[str],
    seed: Optional[int],  # noqa
):
    """Render comparison.svg from comparison.csv."""
    try:
        config = emowave.cli.load_config(config_path)
        emowave.cli.configure_logger(config)
        target = pathlib.Path(output_dir or config.output_dir).expanduser()
        with stages.artifact_guard(target):
            result = stages.plot_stage(target, pathlib.Path(comparison_path) if comparison_path else None)
    except Exception as error:
        cli_error(error)
        raise SystemExit(1) from error
    cli_message(f"Saved {result.message}")
    raise SystemExit(0)


@click.command(options_metavar="<options>")
@click.option("--out", "output_dir", metavar="<dir>", required=True, help="Directory to write the dataset to.")
@click.option("--seed", type=int, default=0, show_default=True, metavar="<n>", help="Dataset seed.")
@click.option("--sessions", type=int, default=3, show_default=True, metavar="<n>", help="Sessions per label.")
@click.option("--seconds", type=float, default=48.0, show_default=True, metavar="<s>", help="Recording length.")
@click.option(
    "--subject",
    "subjects",
    multiple=True,
    default=("subject_a",),
    show_default=True,
    metavar="<name>",
    help="A participant, repeat for several.",
)
def synthesize(output_dir: str, seed: int, sessions: int, seconds: float, subjects: Tuple[str, ...]):
    """
    Write a separable synthetic dataset and a config.yml for it.

    \b
    Example:
        `emowave synthesize --out ./synthetic && emowave run --config ./synthetic`
    """
    try:
        result = synthetic.generate_dataset(
            output_dir, seed=seed, sessions=sessions, seconds=seconds, subjects=subjects
        )
    except Exception as error:
        cli_error(error)
        raise SystemExit(1) from error
    cli_message(f"Saved {result.message}")
    raise SystemExit(0)


def cli_message(message: str) -> None:
    """
    Relay a message to the user using the CLI.

    Args:
        message (str): The message to be displayed.
    """
    click.echo(f"[EMOWAVE] {message} 🧠")


def cli_error(error: Exception) -> None:
    """
    Report an error on a single machine-parseable line.

    Args:
        error (Exception): The error to report.
    """
    message = " ".join(str(error).split())
    click.echo(f"[EMOWAVE] error={type(error).__name__} message={message}")


main.add_command(run)
main.add_command(features)
main.add_command(train_knn)
main.add_command(train_rnn)
main.add_command(evaluate)
main.add_command(plot)
main.add_command(synthesize)
