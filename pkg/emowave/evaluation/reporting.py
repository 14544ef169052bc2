"""Submodule writing evaluation reports as JSON, CSV, text tables and SVG charts."""

from __future__ import annotations

import pathlib
from typing import Dict, Mapping, Union

import jinja2
import numpy as np
import pandas as pd

from emowave import exceptions
from emowave.evaluation.metrics import RATE_NAMES, ConfusionMatrix, EvalReport
from emowave.utils import Success, write_json

TEMPLATE_PATH = pathlib.Path(__file__).parents[1] / "templates"
COMPARISON_METRICS = ("accuracy", "specificity", "sensitivity", "precision", "recall")
CLASSIFIER_COLUMN = "classifier"
BAR_COLOURS = ("#4c72b0", "#dd8452", "#55a868", "#c44e52", "#8172b3")

PathLike = Union[str, pathlib.Path]


def _environment() -> jinja2.Environment:
    file_loader = jinja2.FileSystemLoader(TEMPLATE_PATH)
    return jinja2.Environment(loader=file_loader, autoescape=jinja2.select_autoescape(("svg.j2",)))


def _write_text(path: PathLike, text: str) -> Success:
    text_path = pathlib.Path(path)
    text_path.parent.mkdir(parents=True, exist_ok=True)
    with text_path.open("w", encoding="utf-8") as text_file:
        text_file.write(text)
    return Success(str(text_path))


def write_confusion_csv(cm: ConfusionMatrix, path: PathLike) -> Success:
    """Write the matrix with true classes as rows and predicted classes as columns."""
    csv_path = pathlib.Path(path)
    csv_path.parent.mkdir(parents=True, exist_ok=True)
    frame = pd.DataFrame(cm.counts, index=list(cm.class_names), columns=list(cm.class_names))
    frame.to_csv(csv_path, index_label="true")
    return Success(str(csv_path))


def read_confusion_csv(path: PathLike) -> ConfusionMatrix:
    """Read a matrix written by [write_confusion_csv()][emowave.evaluation.reporting.write_confusion_csv]."""
    frame = pd.read_csv(pathlib.Path(path), index_col="true")
    return ConfusionMatrix(frame.to_numpy(dtype=np.int64), class_names=tuple(frame.columns))


def write_report_json(report: EvalReport, path: PathLike, **metadata: object) -> Success:
    """Write a classification report as JSON, with any extra top level `metadata`."""
    return write_json(pathlib.Path(path), {**report.as_dict(), **metadata})


def render_report_table(report: EvalReport, classifier: str) -> str:
    """
    Render a report as an aligned text table.

    Rates whose denominator was zero are marked with `*`.

    Args:
        report (EvalReport): the report to render.
        classifier (str): the heading, e.g. `kNN`.

    Returns:
        str: the table.
    """
    degenerate = any(getattr(entry, name).degenerate for entry in report.per_class for name in RATE_NAMES)
    template = _environment().get_template("report.txt.j2")
    return template.render(classifier=classifier, report=report, degenerate=degenerate) + "\n"


def write_report_table(report: EvalReport, classifier: str, path: PathLike) -> Success:
    """Write [render_report_table()][emowave.evaluation.reporting.render_report_table] to `path`."""
    return _write_text(path, render_report_table(report, classifier))


def comparison_frame(reports: Mapping[str, EvalReport]) -> pd.DataFrame:
    """Collect the overall accuracy and macro rates of each classifier, one row per classifier."""
    rows = [{CLASSIFIER_COLUMN: name, **report.macro()} for name, report in reports.items()]
    return pd.DataFrame(rows, columns=[CLASSIFIER_COLUMN, *COMPARISON_METRICS])


def write_comparison_csv(frame: pd.DataFrame, path: PathLike) -> Success:
    """Write the classifier comparison as CSV."""
    csv_path = pathlib.Path(path)
    csv_path.parent.mkdir(parents=True, exist_ok=True)
    frame.to_csv(csv_path, index=False, float_format="%.17g")
    return Success(str(csv_path))


def read_comparison_csv(path: PathLike) -> pd.DataFrame:
    """
    Read a classifier comparison.

    Every column except `classifier` is a metric and must hold numbers in [0, 1].

    Raises:
        exceptions.MissingColumn: raised if there is no `classifier` column or no metric column.
        exceptions.NonNumericSample: raised if a metric value is not a number in [0, 1].
    """
    csv_path = pathlib.Path(path)
    frame = pd.read_csv(csv_path, dtype={CLASSIFIER_COLUMN: str})
    metrics = [column for column in frame.columns if column != CLASSIFIER_COLUMN]
    if CLASSIFIER_COLUMN not in frame.columns or not metrics:
        raise exceptions.MissingColumn(f"{csv_path} needs a classifier column and at least one metric")
    try:
        values = frame[metrics].to_numpy(dtype=np.float64)
    except ValueError as value_error:
        raise exceptions.NonNumericSample(f"{csv_path} holds a metric that is not a number") from value_error
    if not np.isfinite(values).all() or (values < 0).any() or (values > 1).any():
        raise exceptions.NonNumericSample(f"{csv_path} holds a metric outside [0, 1]")
    return frame


def render_comparison_svg(frame: pd.DataFrame, title: str = "Classifier comparison") -> str:
    """
    Render a grouped bar chart with one group per metric and one bar per classifier.

    Args:
        frame (pd.DataFrame): a comparison as read by
            [read_comparison_csv()][emowave.evaluation.reporting.read_comparison_csv].
        title (str, optional): the chart title.

    Returns:
        str: the SVG document.
    """
    width, height = 640, 360
    plot = {"left": 48, "right": width - 16, "top": 40, "bottom": height - 40}
    plot_height = plot["bottom"] - plot["top"]
    metrics = [column for column in frame.columns if column != CLASSIFIER_COLUMN]
    classifiers = [str(name) for name in frame[CLASSIFIER_COLUMN]]
    group_width = (plot["right"] - plot["left"]) / len(metrics)
    bar_width = group_width * 0.8 / max(len(classifiers), 1)

    groups = []
    for group_index, metric in enumerate(metrics):
        group_left = plot["left"] + group_index * group_width + group_width * 0.1
        bars = []
        for bar_index, classifier in enumerate(classifiers):
            value = float(frame[metric].iloc[bar_index])
            bar_height = value * plot_height
            bars.append(
                {
                    "classifier": classifier,
                    "value": value,
                    "x": round(group_left + bar_index * bar_width, 2),
                    "y": round(plot["bottom"] - bar_height, 2),
                    "width": round(bar_width, 2),
                    "height": round(bar_height, 2),
                    "colour": BAR_COLOURS[bar_index % len(BAR_COLOURS)],
                }
            )
        groups.append({"name": metric, "centre": round(group_left + group_width * 0.4, 2), "bars": bars})

    ticks = [
        {"y": round(plot["bottom"] - fraction * plot_height, 2), "label": f"{fraction:.2f}"}
        for fraction in np.linspace(0.0, 1.0, 5)
    ]
    legend = [
        {"classifier": classifier, "x": plot["left"] + index * 110, "colour": BAR_COLOURS[index % len(BAR_COLOURS)]}
        for index, classifier in enumerate(classifiers)
    ]
    template = _environment().get_template("comparison.svg.j2")
    return (
        template.render(
            title=title, width=width, height=height, plot=plot, groups=groups, ticks=ticks, legend=legend
        )
        + "\n"
    )


def write_comparison_svg(frame: pd.DataFrame, path: PathLike) -> Success:
    """Write [render_comparison_svg()][emowave.evaluation.reporting.render_comparison_svg] to `path`."""
    return _write_text(path, render_comparison_svg(frame))


def accuracy_summary(reports: Mapping[str, EvalReport]) -> Dict[str, float]:
    """Return the overall accuracy of each classifier."""
    return {name: report.accuracy for name, report in reports.items()}
