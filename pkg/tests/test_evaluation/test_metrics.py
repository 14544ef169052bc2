import numpy as np
import pytest

from emowave import exceptions
from emowave.evaluation.metrics import (
    BinaryTally,
    ConfusionMatrix,
    Rate,
    accuracy,
    binarize,
    confusion,
    overall_accuracy,
    precision,
    recall,
    report,
    sensitivity,
    specificity,
)
from emowave.signals.recordings import EmotionLabel


@pytest.mark.parametrize(
    "true_labels, predicted_labels, expected",
    [
        ([0, 1, 2], [0, 1, 2], np.eye(3)),
        ([0, 0, 1], [1, 0, 1], [[1, 1, 0], [0, 1, 0], [0, 0, 0]]),
        ([], [], np.zeros((3, 3))),
        (["Negative", EmotionLabel.POSITIVE], [2, "positive"], [[1, 0, 0], [0, 0, 0], [0, 0, 1]]),
    ],
)
def test_confusion(true_labels, predicted_labels, expected):
    # act
    cm = confusion(true_labels, predicted_labels)

    # assert
    np.testing.assert_array_equal(cm.counts, expected)
    assert cm.class_names == ("Positive", "Neutral", "Negative")


def test_confusion_length_mismatch():
    # act
    with pytest.raises(exceptions.LengthMismatch) as length_mismatch:
        confusion([0, 1], [0])

    # assert
    assert str(length_mismatch.value) == "2 true labels but 1 predictions"


def test_confusion_unknown_label():
    # act
    with pytest.raises(exceptions.UnknownLabel):
        confusion([0, 3], [0, 1])


@pytest.mark.parametrize(
    "counts, positive_class, expected",
    [
        (np.diag([5, 5, 5]), 0, BinaryTally(tp=5, tn=10, fp=0, fn=0)),
        (np.ones((3, 3)), 1, BinaryTally(tp=1, tn=4, fp=2, fn=2)),
        (np.zeros((3, 3)), 2, BinaryTally(tp=0, tn=0, fp=0, fn=0)),
    ],
)
def test_binarize(counts, positive_class, expected):
    # act
    tally = binarize(ConfusionMatrix(counts), positive_class)

    # assert
    assert tally == expected


def test_binarize_each_sample_is_tp_or_fn_once():
    # arrange
    cm = ConfusionMatrix(np.random.default_rng(0).integers(0, 20, size=(3, 3)))

    # act
    tallies = [binarize(cm, label) for label in EmotionLabel]

    # assert
    assert sum(tally.tp + tally.fn for tally in tallies) == cm.total
    assert all(tally.total == cm.total for tally in tallies)


@pytest.mark.parametrize(
    "tally, expected",
    [
        (BinaryTally(tp=9, tn=9, fp=1, fn=1), 0.9),
        (BinaryTally(tp=3, tn=7, fp=0, fn=0), 1.0),
    ],
)
def test_accuracy(tally, expected):
    # act
    value = accuracy(tally)

    # assert
    assert value == pytest.approx(expected)


def test_accuracy_empty_tally():
    # act
    with pytest.raises(exceptions.EmptyTally):
        accuracy(BinaryTally(0, 0, 0, 0))


def test_specificity():
    # act
    value = specificity(BinaryTally(tp=8, tn=0, fp=2, fn=0))

    # assert
    assert value == Rate(0.8)


def test_specificity_degenerate():
    # act
    value = specificity(BinaryTally(tp=0, tn=5, fp=0, fn=3))

    # assert
    assert value == Rate(0.0, degenerate=True)


def test_sensitivity():
    # act
    value = sensitivity(BinaryTally(tp=0, tn=6, fp=0, fn=2))

    # assert
    assert float(value) == pytest.approx(0.75)
    assert not value.degenerate


def test_rates_of_all_ones_matrix():
    # arrange
    tally = binarize(ConfusionMatrix(np.ones((3, 3))), 1)

    # act
    rates = [specificity(tally), sensitivity(tally), precision(tally), recall(tally)]

    # assert
    assert [float(rate) for rate in rates] == pytest.approx([1 / 3, 4 / 6, 1 / 3, 1 / 3])


def test_overall_accuracy_empty_matrix():
    # act
    with pytest.raises(exceptions.EmptyMatrix):
        overall_accuracy(ConfusionMatrix(np.zeros((3, 3))))


def test_report_perfect():
    # act
    result = report(ConfusionMatrix(np.diag([10, 10, 10])))

    # assert
    assert result.accuracy == 1.0
    assert result.macro() == {
        "accuracy": 1.0,
        "specificity": 1.0,
        "sensitivity": 1.0,
        "precision": 1.0,
        "recall": 1.0,
    }
    assert [entry.support for entry in result.per_class] == [10, 10, 10]


def test_report_all_ones():
    # act
    result = report(ConfusionMatrix(np.ones((3, 3))))

    # assert
    assert result.accuracy == pytest.approx(1 / 3)
    assert result.macro_specificity == pytest.approx(1 / 3)
    assert result.macro_sensitivity == pytest.approx(2 / 3)
    assert result.total == 9


def test_report_single_class_predictions():
    # arrange
    cm = confusion([0, 0, 1, 2], [0, 0, 0, 0])

    # act
    result = report(cm)

    # assert
    positive, neutral, negative = result.per_class
    assert positive.specificity == Rate(0.5)
    assert neutral.specificity.degenerate
    assert negative.precision.degenerate
    assert neutral.recall == Rate(0.0)
    assert result.accuracy == pytest.approx(0.5)


def test_report_rates_and_macro_averages():
    # arrange
    rng = np.random.default_rng(1)

    for _ in range(25):
        cm = ConfusionMatrix(rng.integers(0, 15, size=(3, 3)) + np.eye(3, dtype=int))

        # act
        result = report(cm)

        # assert
        assert 0.0 <= result.accuracy <= 1.0
        assert sum(entry.support for entry in result.per_class) == cm.total
        for name in ("specificity", "sensitivity", "precision", "recall"):
            values = [getattr(entry, name).value for entry in result.per_class]
            assert all(0.0 <= value <= 1.0 for value in values)
            assert getattr(result, f"macro_{name}") == pytest.approx(np.mean(values), abs=1e-12)


def test_report_label_permutation():
    # arrange
    counts = np.array([[7, 2, 1], [3, 5, 2], [0, 4, 6]])
    permutation = [2, 0, 1]
    permuted = counts[np.ix_(permutation, permutation)]

    # act
    original = report(ConfusionMatrix(counts))
    shuffled = report(ConfusionMatrix(permuted))

    # assert
    assert shuffled.accuracy == pytest.approx(original.accuracy)
    for new_index, old_index in enumerate(permutation):
        assert shuffled.per_class[new_index].specificity == original.per_class[old_index].specificity
        assert shuffled.per_class[new_index].sensitivity == original.per_class[old_index].sensitivity


def test_report_as_dict():
    # act
    payload = report(ConfusionMatrix(np.diag([1, 2, 3]))).as_dict()

    # assert
    assert set(payload) == {"accuracy", "macro", "per_class", "total"}
    assert list(payload["per_class"]) == ["Positive", "Neutral", "Negative"]
    assert payload["per_class"]["Negative"]["specificity"] == {"value": 1.0, "degenerate": False}


@pytest.mark.parametrize("counts", [np.zeros((2, 2)), -np.ones((3, 3))])
def test_confusion_matrix_invalid(counts):
    # act
    with pytest.raises((exceptions.DimensionMismatch, exceptions.InvalidConfigValue)):
        ConfusionMatrix(counts)
