"""Submodule containing the seeded stratified k-fold split."""

from __future__ import annotations

from typing import List

import numpy as np

from emowave import exceptions


def stratified_folds(labels: np.ndarray, folds: int, seed: int) -> List[np.ndarray]:
    """
    Assign every sample to one of `folds` validation folds, class by class.

    Each class is shuffled with a generator seeded by `seed` and dealt round-robin over the
    folds, continuing where the previous class stopped, so fold sizes differ by at most one.

    Args:
        labels (np.ndarray): the integer labels.
        folds (int): number of folds.
        seed (int): the shuffle seed.

    Raises:
        exceptions.TooFewSamples: raised if there are fewer samples than folds.

    Returns:
        list[np.ndarray]: sorted sample indices of each validation fold.
    """
    labels = np.asarray(labels)
    if folds < 2:
        raise exceptions.TooFewSamples(f"Cross-validation needs at least 2 folds, got {folds}")
    if labels.size < folds:
        raise exceptions.TooFewSamples(f"{labels.size} samples cannot fill {folds} folds")
    rng = np.random.default_rng(seed)
    assignment = np.empty(labels.size, dtype=np.int64)
    position = 0
    for label in np.unique(labels):
        members = rng.permutation(np.flatnonzero(labels == label))
        assignment[members] = (position + np.arange(members.size)) % folds
        position += members.size
    return [np.flatnonzero(assignment == fold) for fold in range(folds)]
