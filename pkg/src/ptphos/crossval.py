"""k-fold model fitting shared by tuning and the report pipeline."""

from __future__ import annotations

from typing import Sequence

import numpy as np

from ._threads import ordered_map
from .dataset import DesignMatrix
from .learners import LearnerSpec, TrainedRegressor, fit, predict


def fold_models(
    spec: LearnerSpec,
    matrix: DesignMatrix,
    y: np.ndarray,
    folds: Sequence[Sequence[int]],
) -> list[TrainedRegressor]:
    """One model per fold, each trained on the complement of its fold."""
    y = np.asarray(y, dtype=float)
    n = matrix.n_rows

    def fit_one(fold: Sequence[int]) -> TrainedRegressor:
        held = np.asarray(sorted(fold), dtype=int)
        train_rows = np.setdiff1d(np.arange(n), held)
        return fit(spec, matrix.take(train_rows), y[train_rows])

    return ordered_map(fit_one, list(folds))


def holdout_pairs(
    models: Sequence[TrainedRegressor],
    matrix: DesignMatrix,
    y: np.ndarray,
    folds: Sequence[Sequence[int]],
) -> list[tuple[np.ndarray, np.ndarray]]:
    """Per fold: (true, predicted) on that fold's held-out rows."""
    y = np.asarray(y, dtype=float)
    pairs = []
    for model, fold in zip(models, folds):
        held = np.asarray(sorted(fold), dtype=int)
        pairs.append((y[held], predict(model, matrix.take(held))))
    return pairs


def testset_pairs(
    models: Sequence[TrainedRegressor],
    test_matrix: DesignMatrix,
    y_test: np.ndarray,
) -> list[tuple[np.ndarray, np.ndarray]]:
    """Per fold model: (true, predicted) on a fixed independent test set."""
    y_test = np.asarray(y_test, dtype=float)
    return [(y_test, predict(model, test_matrix)) for model in models]
