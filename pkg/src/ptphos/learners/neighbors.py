"""k-nearest-neighbor regression on internally standardized features."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

DISTANCE_EPS = 1e-12  # distance-weight floor: w = 1 / (d + eps)


@dataclass
class KnnState:
    X: np.ndarray  # standardized training rows
    y: np.ndarray
    k: int
    weighting: str  # "uniform" | "distance"

    def to_dict(self) -> dict:
        return {"X": self.X.tolist(), "y": self.y.tolist(),
                "k": self.k, "weighting": self.weighting}

    @classmethod
    def from_dict(cls, d: dict) -> "KnnState":
        return cls(np.asarray(d["X"], dtype=float), np.asarray(d["y"], dtype=float),
                   int(d["k"]), d["weighting"])


def fit_knn(params: dict, X: np.ndarray, y: np.ndarray, weighting: str) -> KnnState:
    return KnnState(X.copy(), np.asarray(y, dtype=float).copy(), params["k"], weighting)


def predict_knn(state: KnnState, X: np.ndarray) -> np.ndarray:
    if X.shape[0] == 0:
        return np.empty(0)
    diff = X[:, None, :] - state.X[None, :, :]
    dist = np.sqrt((diff * diff).sum(axis=2))
    nearest = np.argsort(dist, axis=1, kind="stable")[:, : state.k]
    targets = state.y[nearest]
    if state.weighting == "uniform":
        return targets.sum(axis=1) / state.k
    w = 1.0 / (np.take_along_axis(dist, nearest, axis=1) + DISTANCE_EPS)
    return (w * targets).sum(axis=1) / w.sum(axis=1)
