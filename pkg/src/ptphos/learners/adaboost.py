"""AdaBoost.R2: reweighted-sampling boosting with weighted-median aggregation.

Each round draws a bootstrap sample proportional to the current weights,
fits a shallow tree, converts absolute errors into a loss in [0, 1]
(linear, square or exponential), and reweights. Training stops early when
the weighted average loss reaches 0.5 or drops to 0. Prediction is the
weighted median of the estimators, weighted by log(1/beta).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .cart import Tree, grow_tree, tree_predict

LOSSES = ("linear", "square", "exponential")


@dataclass
class AdaBoostState:
    trees: list[Tree]
    weights: list[float]

    def to_dict(self) -> dict:
        return {"trees": [t.to_dict() for t in self.trees], "weights": list(self.weights)}

    @classmethod
    def from_dict(cls, d: dict) -> "AdaBoostState":
        return cls([Tree.from_dict(t) for t in d["trees"]], [float(w) for w in d["weights"]])


def fit_adaboost(params: dict, seed: int, X: np.ndarray, y: np.ndarray) -> AdaBoostState:
    n = X.shape[0]
    loss_kind = params["loss"]
    sample_weight = np.full(n, 1.0 / n)
    trees: list[Tree] = []
    weights: list[float] = []
    for t in range(params["n_estimators"]):
        rng = np.random.default_rng([seed, t])
        rows = rng.choice(n, size=n, replace=True, p=sample_weight)
        tree = grow_tree(
            X, y, rows,
            max_depth=params["max_depth"],
            min_leaf=params["min_samples_leaf"],
        )
        error = np.abs(y - tree_predict(tree, X))
        error_max = float(error.max())
        if error_max == 0.0:
            trees.append(tree)
            weights.append(1.0)
            break
        loss = error / error_max
        if loss_kind == "square":
            loss = loss**2
        elif loss_kind == "exponential":
            loss = 1.0 - np.exp(-loss)
        avg_loss = float(np.sum(sample_weight * loss))
        if avg_loss >= 0.5:
            if not trees:  # keep something usable from a degenerate first round
                trees.append(tree)
                weights.append(1.0)
            break
        beta = avg_loss / (1.0 - avg_loss)
        trees.append(tree)
        weights.append(float(np.log(1.0 / beta)))
        sample_weight = sample_weight * beta ** (1.0 - loss)
        sample_weight = sample_weight / sample_weight.sum()
    return AdaBoostState(trees, weights)


def predict_adaboost(state: AdaBoostState, X: np.ndarray) -> np.ndarray:
    if X.shape[0] == 0:
        return np.empty(0)
    preds = np.stack([tree_predict(t, X) for t in state.trees], axis=1)
    weights = np.asarray(state.weights)
    order = np.argsort(preds, axis=1, kind="stable")
    cdf = np.cumsum(weights[order], axis=1)
    median_pos = np.argmax(cdf >= 0.5 * cdf[:, -1][:, None], axis=1)
    picked = order[np.arange(X.shape[0]), median_pos]
    return preds[np.arange(X.shape[0]), picked]
