"""Stagewise least-squares gradient boosting with two tree-growth policies.

Each round fits a regression tree to the current residuals and the model
advances by learning_rate times the tree's prediction. Leaf values are
sum(residuals) / (count + l2_leaf_reg). The leaf-wise policy grows the
best-gain leaf up to max_leaves; the level-wise policy grows full levels
to max_depth.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .cart import Tree, grow_tree, grow_tree_leafwise, tree_predict

LEAFWISE = "leafwise"
LEVELWISE = "levelwise"


@dataclass
class GbmState:
    policy: str
    base_score: float
    learning_rate: float
    trees: list[Tree]

    def to_dict(self) -> dict:
        return {
            "policy": self.policy,
            "base_score": self.base_score,
            "learning_rate": self.learning_rate,
            "trees": [t.to_dict() for t in self.trees],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "GbmState":
        return cls(d["policy"], d["base_score"], d["learning_rate"],
                   [Tree.from_dict(t) for t in d["trees"]])


def fit_gbm(params: dict, seed: int, X: np.ndarray, y: np.ndarray, policy: str) -> GbmState:
    n = X.shape[0]
    lr = params["learning_rate"]
    l2 = params["l2_leaf_reg"]
    subsample = params["subsample_fraction"]
    base = float(y.mean())
    current = np.full(n, base)
    trees: list[Tree] = []
    for t in range(params["n_rounds"]):
        residual = y - current
        if subsample < 1.0:
            rng = np.random.default_rng([seed, t])
            rows = np.sort(rng.choice(n, size=max(1, round(subsample * n)), replace=False))
        else:
            rows = np.arange(n)
        if policy == LEAFWISE:
            tree = grow_tree_leafwise(
                X, residual, rows,
                max_leaves=params["max_leaves"],
                min_leaf=params["min_samples_leaf"],
                l2=l2,
            )
        else:
            tree = grow_tree(
                X, residual, rows,
                max_depth=params["max_depth"],
                min_leaf=params["min_samples_leaf"],
                l2=l2,
            )
        current += lr * tree_predict(tree, X)
        trees.append(tree)
    return GbmState(policy, base, lr, trees)


def predict_gbm(state: GbmState, X: np.ndarray) -> np.ndarray:
    out = np.full(X.shape[0], state.base_score)
    for tree in state.trees:
        out += state.learning_rate * tree_predict(tree, X)
    return out
