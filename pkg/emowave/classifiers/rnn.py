"""
Submodule containing the single-layer recurrent classifier and its training loop.

The network reads a sequence of feature vectors `x_1 .. x_T`:

    h_t = tanh(W_in x_t + W_rec h_(t-1) + b_h),  h_0 = 0
    logits = W_out h_T + b_out

and is trained on the cross-entropy of `softmax(logits)` with gradients from
backpropagation through time and plain mini-batch gradient descent.
"""

from __future__ import annotations

import logging
import math
import pathlib
from collections import defaultdict
from dataclasses import dataclass
from typing import Dict, List, NamedTuple, Optional, Sequence, Tuple, Union

import numpy as np
import pandas as pd

from emowave import exceptions
from emowave.features.statistics import CLASS_COUNT, LabeledDataset
from emowave.signals.recordings import DEFAULT_SUBJECT, EmotionLabel
from emowave.utils import Success, read_json, write_json

logger = logging.getLogger(__name__)

PARAMETER_NAMES: Tuple[str, ...] = ("w_in", "w_rec", "b_h", "w_out", "b_out")
PROBABILITY_FLOOR = 1e-12


@dataclass(frozen=True)
class RnnParameters:
    """
    Weights of the network, also used to carry their gradients.

    Attributes:
        w_in (np.ndarray): the `(hidden, input)` input weights.
        w_rec (np.ndarray): the `(hidden, hidden)` recurrent weights.
        b_h (np.ndarray): the hidden bias.
        w_out (np.ndarray): the `(3, hidden)` readout weights.
        b_out (np.ndarray): the class bias.
    """

    w_in: np.ndarray
    w_rec: np.ndarray
    b_h: np.ndarray
    w_out: np.ndarray
    b_out: np.ndarray

    def __post_init__(self) -> None:
        for name in PARAMETER_NAMES:
            object.__setattr__(self, name, np.array(getattr(self, name), dtype=np.float64))
        hidden, inputs = self.w_in.shape if self.w_in.ndim == 2 else (0, 0)
        expected = {
            "w_in": (hidden, inputs),
            "w_rec": (hidden, hidden),
            "b_h": (hidden,),
            "w_out": (CLASS_COUNT, hidden),
            "b_out": (CLASS_COUNT,),
        }
        for name, shape in expected.items():
            array = getattr(self, name)
            if hidden == 0 or array.shape != shape:
                raise exceptions.DimensionMismatch(int(np.prod(shape)), array.size)
            if not np.isfinite(array).all():
                raise exceptions.NonNumericSample(f"RNN parameter {name} is not finite")

    @property
    def hidden_size(self) -> int:
        """Width of the recurrent layer."""
        return int(self.w_in.shape[0])

    @property
    def input_size(self) -> int:
        """Dimension of each sequence step."""
        return int(self.w_in.shape[1])

    def arrays(self) -> Tuple[np.ndarray, ...]:
        """Return the arrays in `PARAMETER_NAMES` order."""
        return tuple(getattr(self, name) for name in PARAMETER_NAMES)

    def as_dict(self) -> dict:
        """Return the shapes and row-major values of every array."""
        return {
            "hidden_size": self.hidden_size,
            "input_size": self.input_size,
            "parameters": {
                name: {"shape": list(array.shape), "values": array.ravel().tolist()}
                for name, array in zip(PARAMETER_NAMES, self.arrays())
            },
        }

    @classmethod
    def from_dict(cls, payload: dict) -> RnnParameters:
        """Rebuild the parameters from [as_dict()][emowave.classifiers.rnn.RnnParameters.as_dict]."""
        arrays = {
            name: np.asarray(entry["values"], dtype=np.float64).reshape(entry["shape"])
            for name, entry in payload["parameters"].items()
        }
        return cls(**arrays)


@dataclass(frozen=True)
class TrainConfig:
    """
    Hyperparameters of [train()][emowave.classifiers.rnn.train].

    Attributes:
        learning_rate (float): the gradient descent step size.
        epochs (int): passes over the training sequences, 0 returns the initialisation.
        batch_size (int): sequences per gradient step.
        grad_clip (float): the global gradient norm limit.
        seed (int): seeds initialisation and batch order.
        sequence_length (int): feature vectors per sequence.
        hidden_size (int): width of the recurrent layer.
    """

    learning_rate: float = 0.05
    epochs: int = 200
    batch_size: int = 16
    grad_clip: float = 5.0
    seed: int = 0
    sequence_length: int = 8
    hidden_size: int = 16

    def __post_init__(self) -> None:
        positive = {
            "learning_rate": self.learning_rate,
            "batch_size": self.batch_size,
            "grad_clip": self.grad_clip,
            "sequence_length": self.sequence_length,
            "hidden_size": self.hidden_size,
        }
        for name, value in positive.items():
            if value <= 0:
                raise exceptions.InvalidConfigValue(f"rnn.{name} must be positive, got {value}")
        if self.epochs < 0:
            raise exceptions.InvalidConfigValue(f"rnn.epochs must not be negative, got {self.epochs}")


@dataclass(frozen=True)
class FeatureSequence:
    """
    Consecutive feature vectors of one recording with a single supervision label.

    Attributes:
        steps (np.ndarray): the `(T, d)` sequence.
        label (EmotionLabel): the label of the recording.
        recording_id (str): the source recording.
        subject (str): the participant.
        session (int): the session of the recording.
        offset (int): the window offset of the first step.
    """

    steps: np.ndarray
    label: EmotionLabel
    recording_id: str = ""
    subject: str = DEFAULT_SUBJECT
    session: int = 1
    offset: int = 0

    def __post_init__(self) -> None:
        steps = np.array(self.steps, dtype=np.float64)
        if steps.ndim == 1:
            steps = steps[None, :]
        if steps.ndim != 2 or steps.shape[0] == 0 or steps.shape[1] == 0:
            raise exceptions.EmptyInput("A feature sequence needs at least one non-empty step")
        if not np.isfinite(steps).all():
            raise exceptions.NonNumericSample("Feature sequences must be finite")
        steps.setflags(write=False)
        object.__setattr__(self, "steps", steps)
        object.__setattr__(self, "label", EmotionLabel.parse(self.label))

    @property
    def length(self) -> int:
        """Number of steps."""
        return int(self.steps.shape[0])

    @property
    def dimension(self) -> int:
        """Dimension of each step."""
        return int(self.steps.shape[1])


class ForwardPass(NamedTuple):
    """The hidden states `h_1 .. h_T`, logits and class probabilities of one sequence."""

    hidden_states: np.ndarray
    logits: np.ndarray
    probabilities: np.ndarray


def softmax(logits: np.ndarray) -> np.ndarray:
    """Map logits to probabilities along the last axis, shifted by the maximum for stability."""
    logits = np.asarray(logits, dtype=np.float64)
    exponentials = np.exp(logits - logits.max(axis=-1, keepdims=True))
    return exponentials / exponentials.sum(axis=-1, keepdims=True)


def _check_dimension(params: RnnParameters, dimension: int) -> None:
    if dimension != params.input_size:
        raise exceptions.DimensionMismatch(params.input_size, dimension)


def _forward_batch(params: RnnParameters, inputs: np.ndarray) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    batch, steps, _ = inputs.shape
    hidden = np.zeros((batch, steps + 1, params.hidden_size))
    for step in range(steps):
        hidden[:, step + 1] = np.tanh(
            inputs[:, step] @ params.w_in.T + hidden[:, step] @ params.w_rec.T + params.b_h
        )
    logits = hidden[:, steps] @ params.w_out.T + params.b_out
    return hidden, logits, softmax(logits)


def _backward_batch(
    params: RnnParameters, inputs: np.ndarray, labels: np.ndarray
) -> Tuple[RnnParameters, float]:
    batch, steps, _ = inputs.shape
    hidden, _, probabilities = _forward_batch(params, inputs)
    rows = np.arange(batch)
    picked = probabilities[rows, labels]
    losses = -np.log(np.maximum(picked, PROBABILITY_FLOOR))

    grad_logits = probabilities.copy()
    grad_logits[rows, labels] -= 1.0
    # the clamped loss is flat below the floor
    grad_logits[picked < PROBABILITY_FLOOR] = 0.0
    grad_logits /= batch

    grad_w_in = np.zeros_like(params.w_in)
    grad_w_rec = np.zeros_like(params.w_rec)
    grad_b_h = np.zeros_like(params.b_h)
    grad_hidden = grad_logits @ params.w_out
    for step in reversed(range(steps)):
        grad_pre = grad_hidden * (1.0 - hidden[:, step + 1] ** 2)
        grad_w_in += grad_pre.T @ inputs[:, step]
        grad_w_rec += grad_pre.T @ hidden[:, step]
        grad_b_h += grad_pre.sum(axis=0)
        grad_hidden = grad_pre @ params.w_rec

    gradients = RnnParameters(
        w_in=grad_w_in,
        w_rec=grad_w_rec,
        b_h=grad_b_h,
        w_out=grad_logits.T @ hidden[:, steps],
        b_out=grad_logits.sum(axis=0),
    )
    return gradients, float(losses.mean())


def forward(params: RnnParameters, seq: FeatureSequence) -> ForwardPass:
    """
    Run the recurrence over one sequence.

    Args:
        params (RnnParameters): the network.
        seq (FeatureSequence): the input sequence.

    Raises:
        exceptions.DimensionMismatch: raised if the step dimension is not the network's input size.

    Returns:
        ForwardPass: the `(T, hidden)` states, the logits and the probabilities.
    """
    _check_dimension(params, seq.dimension)
    hidden, logits, probabilities = _forward_batch(params, seq.steps[None, :, :])
    return ForwardPass(hidden_states=hidden[0, 1:], logits=logits[0], probabilities=probabilities[0])


def loss(probabilities: Sequence[float], label: Union[EmotionLabel, int]) -> float:
    """Return the cross-entropy `-log p_label`, with p floored at 1e-12."""
    probability = float(np.asarray(probabilities, dtype=np.float64)[int(label)])
    return -math.log(max(probability, PROBABILITY_FLOOR))


def backward(
    params: RnnParameters, seq: FeatureSequence, label: Optional[Union[EmotionLabel, int]] = None
) -> RnnParameters:
    """
    Return the gradient of the loss of one sequence by backpropagation through time.

    Args:
        params (RnnParameters): the network.
        seq (FeatureSequence): the input sequence.
        label (EmotionLabel | int | None, optional): the target. Defaults to the sequence label.

    Raises:
        exceptions.DimensionMismatch: raised if the step dimension is not the network's input size.

    Returns:
        RnnParameters: the gradient of every parameter array.
    """
    _check_dimension(params, seq.dimension)
    target = seq.label if label is None else EmotionLabel.parse(label)
    gradients, _ = _backward_batch(params, seq.steps[None, :, :], np.array([int(target)]))
    return gradients


def initialize(input_size: int, hidden_size: int, rng: np.random.Generator) -> RnnParameters:
    """Draw weights uniformly in `+-1/sqrt(fan_in)` with zero biases."""
    input_bound = 1.0 / math.sqrt(input_size)
    hidden_bound = 1.0 / math.sqrt(hidden_size)
    return RnnParameters(
        w_in=rng.uniform(-input_bound, input_bound, size=(hidden_size, input_size)),
        w_rec=rng.uniform(-hidden_bound, hidden_bound, size=(hidden_size, hidden_size)),
        b_h=np.zeros(hidden_size),
        w_out=rng.uniform(-hidden_bound, hidden_bound, size=(CLASS_COUNT, hidden_size)),
        b_out=np.zeros(CLASS_COUNT),
    )


def _clip(gradients: RnnParameters, limit: float) -> RnnParameters:
    norm = math.sqrt(sum(float(np.sum(array * array)) for array in gradients.arrays()))
    if norm <= limit:
        return gradients
    return RnnParameters(*(array * (limit / norm) for array in gradients.arrays()))


def _batch_gradient(
    params: RnnParameters, batch: Sequence[FeatureSequence]
) -> Tuple[RnnParameters, float]:
    by_length: Dict[int, List[FeatureSequence]] = defaultdict(list)
    for seq in batch:
        by_length[seq.length].append(seq)
    total = [np.zeros_like(array) for array in params.arrays()]
    batch_loss = 0.0
    for length in sorted(by_length):
        group = by_length[length]
        inputs = np.stack([seq.steps for seq in group])
        labels = np.array([int(seq.label) for seq in group])
        gradients, group_loss = _backward_batch(params, inputs, labels)
        weight = len(group) / len(batch)
        total = [accumulated + weight * array for accumulated, array in zip(total, gradients.arrays())]
        batch_loss += weight * group_loss
    return RnnParameters(*total), batch_loss


def train(dataset: Sequence[FeatureSequence], cfg: TrainConfig) -> Tuple[RnnParameters, List[float]]:
    """
    Train a network from a seeded initialisation with mini-batch gradient descent.

    Each epoch visits the sequences in a seeded random order. Gradients are clipped to a global
    norm of `cfg.grad_clip` before every step.

    Args:
        dataset (Sequence[FeatureSequence]): the training sequences.
        cfg (TrainConfig): the hyperparameters.

    Raises:
        exceptions.EmptyDataset: raised if `dataset` is empty.
        exceptions.DimensionMismatch: raised if the sequences differ in step dimension.

    Returns:
        tuple[RnnParameters, list[float]]: the trained network and the mean loss of every epoch.
    """
    if not dataset:
        raise exceptions.EmptyDataset("Cannot train the RNN without sequences")
    dimension = dataset[0].dimension
    for seq in dataset:
        if seq.dimension != dimension:
            raise exceptions.DimensionMismatch(dimension, seq.dimension)

    rng = np.random.default_rng(cfg.seed)
    params = initialize(dimension, cfg.hidden_size, rng)
    history: List[float] = []
    for epoch in range(cfg.epochs):
        order = rng.permutation(len(dataset))
        epoch_loss = 0.0
        for start in range(0, len(order), cfg.batch_size):
            batch = [dataset[index] for index in order[start : start + cfg.batch_size]]
            gradients, batch_loss = _batch_gradient(params, batch)
            gradients = _clip(gradients, cfg.grad_clip)
            params = RnnParameters(
                *(array - cfg.learning_rate * gradient for array, gradient in zip(params.arrays(), gradients.arrays()))
            )
            epoch_loss += batch_loss * len(batch)
        history.append(epoch_loss / len(dataset))
        logger.debug("Epoch %s mean loss %.6f", epoch + 1, history[-1])
    if history:
        logger.info("Trained RNN for %s epochs, final loss %.6f", cfg.epochs, history[-1])
    return params, history


def label_from_probabilities(probabilities: Sequence[float]) -> EmotionLabel:
    """Return the most probable label, the smallest index on ties."""
    return EmotionLabel(int(np.argmax(np.asarray(probabilities, dtype=np.float64))))


def predict(params: RnnParameters, seq: FeatureSequence) -> EmotionLabel:
    """Classify one sequence by the argmax of its probabilities."""
    return label_from_probabilities(forward(params, seq).probabilities)


def predict_many(params: RnnParameters, sequences: Sequence[FeatureSequence]) -> np.ndarray:
    """Classify many sequences, returning integer labels."""
    return np.array([int(predict(params, seq)) for seq in sequences], dtype=np.int64)


def build_sequences(dataset: LabeledDataset, length: int) -> List[FeatureSequence]:
    """
    Cut every recording's feature vectors into consecutive sequences.

    Vectors are grouped by subject, label, session and recording, ordered by window offset and cut with a
    stride of `length`. A tail shorter than `length` is dropped.

    Args:
        dataset (LabeledDataset): the feature vectors.
        length (int): steps per sequence.

    Raises:
        exceptions.InvalidConfigValue: raised if `length` is not positive.

    Returns:
        list[FeatureSequence]: sequences ordered by subject, label, session then recording.
    """
    if length < 1:
        raise exceptions.InvalidConfigValue(f"rnn.sequence_length must be positive, got {length}")
    recordings: Dict[Tuple[str, int, int, str], list] = defaultdict(list)
    for vector in dataset.vectors:
        recordings[(vector.subject, int(vector.label), vector.session, vector.recording_id)].append(vector)
    sequences = []
    for (subject, _, _, recording_id), vectors in sorted(recordings.items()):
        vectors.sort(key=lambda vector: vector.offset)
        for start in range(0, len(vectors) - length + 1, length):
            window = vectors[start : start + length]
            sequences.append(
                FeatureSequence(
                    steps=np.vstack([vector.values for vector in window]),
                    label=window[-1].label,
                    recording_id=recording_id,
                    subject=subject,
                    session=window[-1].session,
                    offset=window[0].offset,
                )
            )
    logger.debug("Built %s sequences of length %s", len(sequences), length)
    return sequences


def save_params(params: RnnParameters, path: Union[str, pathlib.Path], **metadata: object) -> Success:
    """Write the network as JSON, with any extra top level `metadata`."""
    return write_json(pathlib.Path(path), {**params.as_dict(), **metadata})


def load_params(path: Union[str, pathlib.Path]) -> RnnParameters:
    """Read a network written by [save_params()][emowave.classifiers.rnn.save_params]."""
    return RnnParameters.from_dict(read_json(pathlib.Path(path)))


def save_loss_history(histories: Dict[str, Sequence[float]], path: Union[str, pathlib.Path]) -> Success:
    """
    Write the loss curves of one or more trainings as CSV.

    Args:
        histories (dict[str, Sequence[float]]): loss per epoch, keyed by training run, e.g. `session`
            or `fold_1`.
        path (str | pathlib.Path): the destination file.

    Returns:
        Success: A [Success][emowave.utils.Success] with the path of the CSV as the message.
    """
    csv_path = pathlib.Path(path)
    csv_path.parent.mkdir(parents=True, exist_ok=True)
    frame = pd.DataFrame(
        [
            {"fold": fold, "epoch": epoch, "loss": value}
            for fold, history in histories.items()
            for epoch, value in enumerate(history, start=1)
        ],
        columns=["fold", "epoch", "loss"],
    )
    frame.to_csv(csv_path, index=False, float_format="%.17g")
    return Success(str(csv_path))
