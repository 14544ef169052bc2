"""
Submodule containing the Minkowski-distance k-nearest-neighbour classifier.

Distances are `(sum |x_i - y_i|^c)^(1/c)` for an exponent c >= 1. Ties are broken
deterministically:

- neighbours at equal distance are ranked by their index in the training set
- classes with equal votes are ranked by the sum of their neighbours' distances, then by index
"""

from __future__ import annotations

import logging
import pathlib
from dataclasses import dataclass
from typing import Dict, List, Sequence, Tuple, Union

import numpy as np

from emowave import exceptions
from emowave.classifiers.validation import stratified_folds
from emowave.features.statistics import LabeledDataset, standardize
from emowave.signals.recordings import CANONICAL_CHANNELS, EmotionLabel, canonical_order
from emowave.utils import Success, read_json, write_json

logger = logging.getLogger(__name__)

DEFAULT_EXPONENT = 2.0
DEFAULT_CANDIDATES = (1, 3, 5, 7)


@dataclass(frozen=True)
class KnnModel:
    """
    A fitted kNN classifier.

    Attributes:
        features (np.ndarray): the `(n, d)` training matrix.
        labels (np.ndarray): the integer label of each training row.
        k (int): number of neighbours that vote.
        minkowski_c (float): the Minkowski exponent.
    """

    features: np.ndarray
    labels: np.ndarray
    k: int
    minkowski_c: float = DEFAULT_EXPONENT

    def __post_init__(self) -> None:
        features = np.array(self.features, dtype=np.float64, ndmin=2)
        labels = np.array(self.labels, dtype=np.int64).ravel()
        if features.shape[0] != labels.size:
            raise exceptions.DimensionMismatch(features.shape[0], labels.size)
        if self.minkowski_c < 1:
            raise exceptions.InvalidExponent(f"Minkowski exponent {self.minkowski_c} is below 1")
        if self.k < 1 or (labels.size and self.k > labels.size):
            raise exceptions.TooFewSamples(f"k={self.k} needs 1..{labels.size} training vectors")
        features.setflags(write=False)
        labels.setflags(write=False)
        object.__setattr__(self, "features", features)
        object.__setattr__(self, "labels", labels)

    @classmethod
    def from_dataset(cls, dataset: LabeledDataset, k: int, minkowski_c: float = DEFAULT_EXPONENT) -> KnnModel:
        """Fit a model on a labelled dataset."""
        return cls(features=dataset.matrix(), labels=dataset.labels(), k=k, minkowski_c=minkowski_c)

    @property
    def dimension(self) -> int:
        """Dimension of the training vectors."""
        return int(self.features.shape[1])

    def as_dict(self) -> dict:
        """Return the model as a JSON-ready document."""
        return {
            "k": self.k,
            "minkowski_c": self.minkowski_c,
            "features": self.features.tolist(),
            "labels": self.labels.tolist(),
        }

    @classmethod
    def from_dict(cls, payload: dict) -> KnnModel:
        """Rebuild a model from [as_dict()][emowave.classifiers.knn.KnnModel.as_dict]."""
        return cls(
            features=np.asarray(payload["features"], dtype=np.float64),
            labels=np.asarray(payload["labels"], dtype=np.int64),
            k=int(payload["k"]),
            minkowski_c=float(payload["minkowski_c"]),
        )


@dataclass(frozen=True)
class ChannelScore:
    """The cross-validated accuracy of one channel on its own."""

    channel: str
    accuracy: float
    k: int


def _minkowski_rows(matrix: np.ndarray, query: np.ndarray, c: float) -> np.ndarray:
    differences = np.abs(matrix - query)
    if c == 1:
        return differences.sum(axis=1)
    return np.sum(differences**c, axis=1) ** (1.0 / c)


def minkowski_distance(x: Sequence[float], y: Sequence[float], c: float = DEFAULT_EXPONENT) -> float:
    """
    Return the Minkowski distance of order `c` between two vectors.

    Args:
        x (Sequence[float]): the first vector.
        y (Sequence[float]): the second vector.
        c (float, optional): the exponent, 1 for Manhattan and 2 for Euclidean. Defaults to 2.

    Raises:
        exceptions.DimensionMismatch: raised if the vectors differ in length.
        exceptions.InvalidExponent: raised if `c` is below 1.

    Returns:
        float: the distance.
    """
    first = np.asarray(x, dtype=np.float64).ravel()
    second = np.asarray(y, dtype=np.float64).ravel()
    if first.size != second.size:
        raise exceptions.DimensionMismatch(first.size, second.size)
    if c < 1:
        raise exceptions.InvalidExponent(f"Minkowski exponent {c} is below 1")
    return float(_minkowski_rows(first[None, :], second, c)[0])


def _vote(labels: np.ndarray, distances: np.ndarray) -> EmotionLabel:
    counts = np.bincount(labels, minlength=len(EmotionLabel))
    summed = np.bincount(labels, weights=distances, minlength=len(EmotionLabel))
    tied = np.flatnonzero(counts == counts.max())
    return EmotionLabel(int(min(tied, key=lambda label: (summed[label], label))))


def _ranked_neighbours(model: KnnModel, query: Sequence[float]) -> Tuple[np.ndarray, np.ndarray]:
    if model.labels.size == 0:
        raise exceptions.EmptyModel("The kNN model has no training vectors")
    point = np.asarray(query, dtype=np.float64).ravel()
    if point.size != model.dimension:
        raise exceptions.DimensionMismatch(model.dimension, point.size)
    distances = _minkowski_rows(model.features, point, model.minkowski_c)
    order = np.argsort(distances, kind="stable")
    return order, distances[order]


def classify(model: KnnModel, query: Sequence[float]) -> Tuple[EmotionLabel, Tuple[int, ...]]:
    """
    Classify one vector by majority vote of its k nearest training vectors.

    Args:
        model (KnnModel): the fitted model.
        query (Sequence[float]): the vector to classify.

    Raises:
        exceptions.EmptyModel: raised if the model has no training vectors.
        exceptions.DimensionMismatch: raised if the query dimension differs from the model's.

    Returns:
        tuple[EmotionLabel, tuple[int, ...]]: the label and the training indices of the
            neighbours, nearest first.
    """
    order, distances = _ranked_neighbours(model, query)
    neighbours = order[: model.k]
    return _vote(model.labels[neighbours], distances[: model.k]), tuple(int(index) for index in neighbours)


def predict(model: KnnModel, queries: np.ndarray) -> np.ndarray:
    """Classify every row of `queries`, returning integer labels."""
    return np.array([int(classify(model, query)[0]) for query in np.atleast_2d(queries)], dtype=np.int64)


def select_k(
    data: LabeledDataset,
    candidates: Sequence[int] = DEFAULT_CANDIDATES,
    folds: int = 5,
    seed: int = 0,
    minkowski_c: float = DEFAULT_EXPONENT,
) -> Tuple[int, Dict[int, float]]:
    """
    Pick k by stratified cross-validation.

    A candidate larger than a fold's training set votes with every training vector.

    Args:
        data (LabeledDataset): the training vectors.
        candidates (Sequence[int], optional): the k values to try. Defaults to 1, 3, 5, 7.
        folds (int, optional): number of folds. Defaults to 5.
        seed (int, optional): the fold shuffle seed. Defaults to 0.
        minkowski_c (float, optional): the Minkowski exponent. Defaults to 2.

    Raises:
        exceptions.TooFewSamples: raised if there are fewer vectors than folds.
        exceptions.EmptyInput: raised if `candidates` is empty.

    Returns:
        tuple[int, dict[int, float]]: the best k, smallest on ties, and the mean validation
            accuracy of every candidate.
    """
    ks = sorted({int(k) for k in candidates})
    if not ks:
        raise exceptions.EmptyInput("No k candidates given")
    matrix, labels = data.matrix(), data.labels()
    fold_accuracies: Dict[int, List[float]] = {k: [] for k in ks}
    for validation in stratified_folds(labels, folds, seed):
        training = np.setdiff1d(np.arange(labels.size), validation)
        model = KnnModel(matrix[training], labels[training], k=1, minkowski_c=minkowski_c)
        for k in ks:
            fold_accuracies[k].append(0.0)
        for row in validation:
            order, distances = _ranked_neighbours(model, matrix[row])
            for k in ks:
                effective = min(k, training.size)
                predicted = _vote(model.labels[order[:effective]], distances[:effective])
                if int(predicted) == labels[row]:
                    fold_accuracies[k][-1] += 1.0 / validation.size
    accuracy = {k: float(np.mean(values)) for k, values in fold_accuracies.items()}
    best_k = min(ks, key=lambda k: (-accuracy[k], k))
    logger.debug("Cross-validated accuracy per k: %s, best k=%s", accuracy, best_k)
    return best_k, accuracy


def rank_channels(
    train: LabeledDataset,
    candidates: Sequence[int] = DEFAULT_CANDIDATES,
    folds: int = 5,
    seed: int = 0,
    minkowski_c: float = DEFAULT_EXPONENT,
) -> List[ChannelScore]:
    """
    Score every channel on its own by cross-validated kNN accuracy.

    Each channel's five statistics are z-scored and passed to
    [select_k()][emowave.classifiers.knn.select_k]; the channel scores the accuracy of its best k.

    Args:
        train (LabeledDataset): the training vectors holding every candidate channel.
        candidates (Sequence[int], optional): the k values to try. Defaults to 1, 3, 5, 7.
        folds (int, optional): number of folds. Defaults to 5.
        seed (int, optional): the fold shuffle seed. Defaults to 0.
        minkowski_c (float, optional): the Minkowski exponent. Defaults to 2.

    Returns:
        list[ChannelScore]: best channel first, ties in TP9, AF7, AF8, TP10 order.
    """
    scores = []
    for channel in train.channel_order:
        single = train.select_channels([channel])
        scaled, _, _ = standardize(single, single)
        best_k, accuracy = select_k(scaled, candidates, folds, seed, minkowski_c)
        scores.append(ChannelScore(channel=channel, accuracy=accuracy[best_k], k=best_k))
        logger.info("Channel %s scores %.4f with k=%s", channel, accuracy[best_k], best_k)
    return sorted(scores, key=lambda score: (-score.accuracy, CANONICAL_CHANNELS.index(score.channel)))


def top_channels(scores: Sequence[ChannelScore], top_n: int) -> Tuple[str, ...]:
    """Return the `top_n` best channels in fusion order."""
    if top_n < 1:
        raise exceptions.EmptyInput(f"Cannot keep {top_n} channels")
    return canonical_order(score.channel for score in scores[:top_n])


def save_model(model: KnnModel, path: Union[str, pathlib.Path], **metadata: object) -> Success:
    """Write a model as JSON, with any extra top level `metadata`."""
    return write_json(pathlib.Path(path), {**model.as_dict(), **metadata})


def load_model(path: Union[str, pathlib.Path]) -> KnnModel:
    """Read a model written by [save_model()][emowave.classifiers.knn.save_model]."""
    return KnnModel.from_dict(read_json(pathlib.Path(path)))
