"""Joint X-Y max-min sample-set partitioning (SPXY) and deterministic k-fold assignment."""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Mapping

import numpy as np

from .dataset import DesignMatrix, ScalerStats
from .errors import BadParamError, BadValueError, KTooLargeError, TooFewSamplesError


@dataclass(frozen=True)
class SplitPlan:
    """Train/test row indices plus optional fold assignment.

    `train_indices` is kept in selection order. `folds` holds positions into
    `train_indices` (0..len(train)-1), not dataset row indices.
    """

    train_indices: tuple[int, ...]
    test_indices: tuple[int, ...]
    folds: tuple[tuple[int, ...], ...] = ()

    def __post_init__(self) -> None:
        train, test = set(self.train_indices), set(self.test_indices)
        if len(train) != len(self.train_indices) or len(test) != len(self.test_indices):
            raise BadValueError("duplicate indices in split plan")
        if train & test:
            raise BadValueError("train and test indices overlap")
        n = len(train) + len(test)
        if train | test != set(range(n)):
            raise BadValueError("train and test do not cover 0..N-1")
        if self.folds:
            positions = [p for fold in self.folds for p in fold]
            if sorted(positions) != list(range(len(self.train_indices))):
                raise BadValueError("folds do not partition the training set")
            sizes = [len(f) for f in self.folds]
            if max(sizes) - min(sizes) > 1:
                raise BadValueError(f"fold sizes unbalanced: {sizes}")

    @property
    def k(self) -> int:
        return len(self.folds)

    def fold_train_rows(self, fold_id: int) -> tuple[int, ...]:
        """Dataset rows used to train the model held out of `fold_id`."""
        held = set(self.folds[fold_id])
        return tuple(self.train_indices[p] for p in range(len(self.train_indices)) if p not in held)

    def fold_heldout_rows(self, fold_id: int) -> tuple[int, ...]:
        return tuple(self.train_indices[p] for p in self.folds[fold_id])

    def to_dict(self) -> dict:
        return {
            "train_indices": list(self.train_indices),
            "test_indices": list(self.test_indices),
            "folds": [list(f) for f in self.folds],
        }

    @classmethod
    def from_dict(cls, d: Mapping) -> "SplitPlan":
        return cls(
            tuple(d["train_indices"]),
            tuple(d["test_indices"]),
            tuple(tuple(f) for f in d.get("folds", [])),
        )


def combined_xy_distances(X: np.ndarray, y: np.ndarray) -> np.ndarray:
    """Pairwise d_xy(p,q) = d_x(p,q)/max(d_x) + d_y(p,q)/max(d_y).

    d_x is the Euclidean distance between feature rows and d_y the absolute
    target difference; each term is normalized by its maximum over all pairs
    (a zero maximum drops that term).
    """
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float)
    diff = X[:, None, :] - X[None, :, :]
    dx = np.sqrt((diff * diff).sum(axis=2))
    dy = np.abs(y[:, None] - y[None, :])
    dx_max = dx.max()
    dy_max = dy.max()
    combined = np.zeros_like(dx)
    if dx_max > 0:
        combined += dx / dx_max
    if dy_max > 0:
        combined += dy / dy_max
    return combined


def _as_array(X) -> np.ndarray:
    if isinstance(X, DesignMatrix):
        return X.data
    return np.asarray(X, dtype=float)


def spxy_split(X, y, train_fraction: float, standardize: bool = True) -> SplitPlan:
    """Kennard-Stone selection under the combined X-Y metric.

    The first two training samples are the pair with the largest combined
    distance (ties: lexicographically smallest pair); every further sample
    maximizes its minimum combined distance to the already-selected set
    (ties: lowest index). round(train_fraction * N) samples are selected;
    the rest form the test set. With `standardize`, feature columns are
    z-scored (population std) before distances.
    """
    data = _as_array(X)
    y = np.asarray(y, dtype=float)
    n = data.shape[0]
    if n < 2:
        raise TooFewSamplesError(f"need >= 2 samples, got {n}")
    if y.shape != (n,):
        raise BadValueError(f"y shape {y.shape} does not match {n} rows")
    if not 0.0 < train_fraction < 1.0:
        raise BadParamError(f"train_fraction must be in (0, 1), got {train_fraction}")
    n_train = min(max(round(train_fraction * n), 1), n)

    if standardize:
        data = ScalerStats.from_array(data).transform_array(data)
    d = combined_xy_distances(data, y)

    # seed pair: first row-major occurrence of the maximum over p < q
    upper = np.where(np.triu(np.ones((n, n), dtype=bool), k=1), d, -np.inf)
    p, q = np.unravel_index(int(np.argmax(upper)), upper.shape)

    order = [int(p)]
    if n_train >= 2:
        order.append(int(q))
    min_dist = np.minimum(d[p], d[q]) if n_train >= 2 else d[p].copy()
    min_dist[order] = -np.inf
    while len(order) < n_train:
        nxt = int(np.argmax(min_dist))  # first occurrence wins ties
        order.append(nxt)
        min_dist = np.minimum(min_dist, d[nxt])
        min_dist[nxt] = -np.inf

    chosen = set(order)
    test = tuple(i for i in range(n) if i not in chosen)
    return SplitPlan(tuple(order), test)


def kfold_assign(plan: SplitPlan, k: int, seed: int) -> SplitPlan:
    """Shuffle training positions (PCG64 seeded with `seed`) and deal them
    round-robin into k folds of near-equal size."""
    n_train = len(plan.train_indices)
    if k < 1:
        raise BadParamError(f"k must be >= 1, got {k}")
    if k > n_train:
        raise KTooLargeError(f"k={k} exceeds training size {n_train}")
    perm = np.random.default_rng(seed).permutation(n_train)
    folds = tuple(tuple(int(p) for p in perm[i::k]) for i in range(k))
    return replace(plan, folds=folds)
