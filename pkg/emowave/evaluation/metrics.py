"""
Submodule containing confusion matrices and the evaluation rates.

The three-class matrix is reduced one-vs-rest to a binary tally per class. The rates keep the
names under which the accuracy, specificity and sensitivity of emotion classifiers are usually
reported in this line of work:

- `accuracy = (TN + TP) / (TN + FN + TP + FP)`
- `specificity = TP / (TP + FP)`, which is the conventional *precision*
- `sensitivity = TN / (TN + FN)`, which is the conventional *negative predictive value*

The conventional `precision` and `recall` are computed beside them so that reports are readable
either way.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Dict, Sequence, Tuple, Union

import numpy as np

from emowave import exceptions
from emowave.features.statistics import CLASS_COUNT
from emowave.signals.recordings import EmotionLabel

CLASS_NAMES: Tuple[str, ...] = tuple(label.display_name for label in EmotionLabel)
RATE_NAMES: Tuple[str, ...] = ("specificity", "sensitivity", "precision", "recall")

LabelLike = Union[EmotionLabel, int, str]


@dataclass(frozen=True)
class ConfusionMatrix:
    """
    Counts of true class (rows) against predicted class (columns).

    Attributes:
        counts (np.ndarray): the `3x3` counts in Positive, Neutral, Negative order.
        class_names (tuple[str, ...]): the row and column names.
    """

    counts: np.ndarray
    class_names: Tuple[str, ...] = CLASS_NAMES

    def __post_init__(self) -> None:
        counts = np.array(self.counts, dtype=np.int64)
        if counts.shape != (CLASS_COUNT, CLASS_COUNT):
            raise exceptions.DimensionMismatch(CLASS_COUNT * CLASS_COUNT, counts.size)
        if (counts < 0).any():
            raise exceptions.InvalidConfigValue("Confusion counts cannot be negative")
        counts.setflags(write=False)
        object.__setattr__(self, "counts", counts)
        object.__setattr__(self, "class_names", tuple(self.class_names))

    @property
    def total(self) -> int:
        """Number of evaluated samples."""
        return int(self.counts.sum())

    @property
    def correct(self) -> int:
        """Number of samples on the diagonal."""
        return int(np.trace(self.counts))

    def support(self, label: LabelLike) -> int:
        """Number of samples whose true class is `label`."""
        return int(self.counts[int(EmotionLabel.parse(label))].sum())


@dataclass(frozen=True)
class BinaryTally:
    """One-vs-rest counts for a single positive class."""

    tp: int
    tn: int
    fp: int
    fn: int

    def __post_init__(self) -> None:
        if min(self.tp, self.tn, self.fp, self.fn) < 0:
            raise exceptions.InvalidConfigValue("Tally counts cannot be negative")

    @property
    def total(self) -> int:
        """Number of samples in the tally."""
        return self.tp + self.tn + self.fp + self.fn


@dataclass(frozen=True)
class Rate:
    """
    A ratio that is 0 and flagged degenerate when its denominator is 0.

    Attributes:
        value (float): the ratio in [0, 1].
        degenerate (bool): True if the denominator was 0.
    """

    value: float
    degenerate: bool = False

    def __float__(self) -> float:
        return self.value

    def as_dict(self) -> dict:
        """Return the rate as a JSON-ready mapping."""
        return {"value": self.value, "degenerate": self.degenerate}


@dataclass(frozen=True)
class ClassReport:
    """The one-vs-rest rates of one class."""

    name: str
    accuracy: float
    specificity: Rate
    sensitivity: Rate
    precision: Rate
    recall: Rate
    support: int

    def as_dict(self) -> dict:
        """Return the entry as a JSON-ready mapping."""
        return {
            "accuracy": self.accuracy,
            "support": self.support,
            **{name: getattr(self, name).as_dict() for name in RATE_NAMES},
        }


@dataclass(frozen=True)
class EvalReport:
    """
    The classification report of one classifier.

    Attributes:
        per_class (tuple[ClassReport, ...]): one entry per class in label order.
        accuracy (float): the overall accuracy `trace / total`.
        macro_specificity (float): the unweighted mean of the per-class specificity.
        macro_sensitivity (float): the unweighted mean of the per-class sensitivity.
        macro_precision (float): the unweighted mean of the per-class precision.
        macro_recall (float): the unweighted mean of the per-class recall.
        total (int): number of evaluated samples.
    """

    per_class: Tuple[ClassReport, ...]
    accuracy: float
    macro_specificity: float
    macro_sensitivity: float
    macro_precision: float
    macro_recall: float
    total: int

    def macro(self) -> Dict[str, float]:
        """Return the overall accuracy and the macro averages keyed by rate name."""
        return {
            "accuracy": self.accuracy,
            **{name: getattr(self, f"macro_{name}") for name in RATE_NAMES},
        }

    def as_dict(self) -> dict:
        """Return the report as a JSON-ready mapping."""
        return {
            "accuracy": self.accuracy,
            "macro": {name: getattr(self, f"macro_{name}") for name in RATE_NAMES},
            "per_class": {entry.name: entry.as_dict() for entry in self.per_class},
            "total": self.total,
        }


def _label_indices(labels: Sequence[LabelLike]) -> np.ndarray:
    return np.array([int(EmotionLabel.parse(label)) for label in labels], dtype=np.int64)


def confusion(true_labels: Sequence[LabelLike], predicted_labels: Sequence[LabelLike]) -> ConfusionMatrix:
    """
    Tally true against predicted labels.

    Args:
        true_labels (Sequence[LabelLike]): the true labels.
        predicted_labels (Sequence[LabelLike]): the predictions, aligned with `true_labels`.

    Raises:
        exceptions.LengthMismatch: raised if the sequences differ in length.
        exceptions.UnknownLabel: raised if a label is not one of the three classes.

    Returns:
        ConfusionMatrix: the counts, all zero for empty inputs.
    """
    if len(true_labels) != len(predicted_labels):
        raise exceptions.LengthMismatch(
            f"{len(true_labels)} true labels but {len(predicted_labels)} predictions"
        )
    counts = np.zeros((CLASS_COUNT, CLASS_COUNT), dtype=np.int64)
    np.add.at(counts, (_label_indices(true_labels), _label_indices(predicted_labels)), 1)
    return ConfusionMatrix(counts)


def binarize(cm: ConfusionMatrix, positive_class: LabelLike) -> BinaryTally:
    """Reduce the matrix to a one-vs-rest tally for `positive_class`."""
    index = int(EmotionLabel.parse(positive_class))
    counts = cm.counts
    tp = int(counts[index, index])
    fn = int(counts[index].sum()) - tp
    fp = int(counts[:, index].sum()) - tp
    return BinaryTally(tp=tp, tn=cm.total - tp - fn - fp, fp=fp, fn=fn)


def _ratio(numerator: int, denominator: int) -> Rate:
    if denominator == 0:
        return Rate(0.0, degenerate=True)
    return Rate(numerator / denominator)


def accuracy(t: BinaryTally) -> float:
    """
    Return `(TN + TP) / (TN + FN + TP + FP)`.

    Raises:
        exceptions.EmptyTally: raised if the tally has no samples.
    """
    if t.total == 0:
        raise exceptions.EmptyTally("Accuracy of an empty tally is undefined")
    return (t.tn + t.tp) / (t.tn + t.fn + t.tp + t.fp)


def specificity(t: BinaryTally) -> Rate:
    """Return `TP / (TP + FP)`, the conventional precision."""
    return _ratio(t.tp, t.tp + t.fp)


def sensitivity(t: BinaryTally) -> Rate:
    """Return `TN / (TN + FN)`, the conventional negative predictive value."""
    return _ratio(t.tn, t.tn + t.fn)


def precision(t: BinaryTally) -> Rate:
    """Return the conventional precision `TP / (TP + FP)`."""
    return _ratio(t.tp, t.tp + t.fp)


def recall(t: BinaryTally) -> Rate:
    """Return the conventional recall `TP / (TP + FN)`."""
    return _ratio(t.tp, t.tp + t.fn)


def overall_accuracy(cm: ConfusionMatrix) -> float:
    """
    Return the share of samples on the diagonal.

    Raises:
        exceptions.EmptyMatrix: raised if the matrix has no samples.
    """
    if cm.total == 0:
        raise exceptions.EmptyMatrix("Accuracy of an empty confusion matrix is undefined")
    return cm.correct / cm.total


def report(cm: ConfusionMatrix) -> EvalReport:
    """
    Assemble the per-class rates and their macro averages.

    Args:
        cm (ConfusionMatrix): the confusion matrix of one classifier.

    Raises:
        exceptions.EmptyMatrix: raised if the matrix has no samples.

    Returns:
        EvalReport: the classification report.
    """
    overall = overall_accuracy(cm)
    entries = []
    for label in EmotionLabel:
        tally = binarize(cm, label)
        entries.append(
            ClassReport(
                name=cm.class_names[int(label)],
                accuracy=accuracy(tally),
                specificity=specificity(tally),
                sensitivity=sensitivity(tally),
                precision=precision(tally),
                recall=recall(tally),
                support=cm.support(label),
            )
        )
    macro = {
        name: float(np.mean([getattr(entry, name).value for entry in entries])) for name in RATE_NAMES
    }
    return EvalReport(
        per_class=tuple(entries),
        accuracy=overall,
        macro_specificity=macro["specificity"],
        macro_sensitivity=macro["sensitivity"],
        macro_precision=macro["precision"],
        macro_recall=macro["recall"],
        total=cm.total,
    )
