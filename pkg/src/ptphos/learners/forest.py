"""Bagged regression trees with per-split feature subsampling."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .cart import Tree, grow_tree, tree_predict


@dataclass
class ForestState:
    trees: list[Tree]

    def to_dict(self) -> dict:
        return {"trees": [t.to_dict() for t in self.trees]}

    @classmethod
    def from_dict(cls, d: dict) -> "ForestState":
        return cls([Tree.from_dict(t) for t in d["trees"]])


def fit_forest(params: dict, seed: int, X: np.ndarray, y: np.ndarray) -> ForestState:
    n, d = X.shape
    n_subset = max(1, round(params["max_features_fraction"] * d))

    def make_sampler(rng):
        return lambda: np.sort(rng.choice(d, size=n_subset, replace=False))

    trees = []
    for t in range(params["n_trees"]):
        # per-tree generator keyed by (seed, tree index): schedule-independent
        rng = np.random.default_rng([seed, t])
        rows = rng.integers(0, n, size=n) if params["bootstrap"] else np.arange(n)
        sampler = make_sampler(rng) if n_subset < d else None
        trees.append(
            grow_tree(
                X, y, rows,
                max_depth=params["max_depth"],
                min_leaf=params["min_samples_leaf"],
                feature_sampler=sampler,
            )
        )
    return ForestState(trees)


def predict_forest(state: ForestState, X: np.ndarray) -> np.ndarray:
    preds = np.stack([tree_predict(t, X) for t in state.trees])
    return preds.mean(axis=0)
