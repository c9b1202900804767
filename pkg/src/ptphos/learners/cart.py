"""Binary regression trees grown by greedy variance reduction.

One engine serves plain CART (depth-wise growth), random-forest members
(depth-wise with per-split feature subsampling) and boosted trees
(depth-wise = level-wise policy, or best-first leaf-wise policy with an
optional l2 penalty on leaf values). Nodes are stored as flat arrays so a
tree round-trips losslessly through (feature, threshold, left, right,
value) tuples.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

LEAF = -1


@dataclass
class Tree:
    feature: np.ndarray    # int, LEAF for leaves
    threshold: np.ndarray  # float
    left: np.ndarray       # int, child node index
    right: np.ndarray      # int
    value: np.ndarray      # float, prediction at the node
    importance: np.ndarray  # raw squared-error decrease per column

    @property
    def n_splits(self) -> int:
        return int(np.count_nonzero(self.feature != LEAF))

    def to_dict(self) -> dict:
        nodes = [
            [int(f), float(t), int(l), int(r), float(v)]
            for f, t, l, r, v in zip(self.feature, self.threshold, self.left, self.right, self.value)
        ]
        return {"nodes": nodes, "importance": self.importance.tolist()}

    @classmethod
    def from_dict(cls, d: dict) -> "Tree":
        nodes = d["nodes"]
        return cls(
            feature=np.array([n[0] for n in nodes], dtype=int),
            threshold=np.array([n[1] for n in nodes], dtype=float),
            left=np.array([n[2] for n in nodes], dtype=int),
            right=np.array([n[3] for n in nodes], dtype=int),
            value=np.array([n[4] for n in nodes], dtype=float),
            importance=np.asarray(d["importance"], dtype=float),
        )


def _best_split(
    X: np.ndarray,
    y: np.ndarray,
    rows: np.ndarray,
    features: np.ndarray,
    min_leaf: int,
    l2: float,
) -> tuple[float, float, int, float] | None:
    """Best axis-aligned split over `features` for the node holding `rows`.

    Maximizes G_L^2/(n_L + l2) + G_R^2/(n_R + l2) - G^2/(n + l2) where G are
    target sums; with l2 = 0 this is exactly the squared-error decrease.
    Returns (score, sse_decrease, feature, threshold) or None when no split
    strictly improves. Ties resolve to the lowest feature index, then the
    lowest threshold.
    """
    n = len(rows)
    sub = X[np.ix_(rows, features)]
    ys = y[rows]
    order = np.argsort(sub, axis=0, kind="stable")
    xs = np.take_along_axis(sub, order, axis=0)
    ysort = ys[order]
    csum = np.cumsum(ysort, axis=0)
    total = csum[-1]

    n_left = np.arange(1, n, dtype=float)[:, None]
    n_right = n - n_left
    g_left = csum[:-1]
    g_right = total - g_left
    score = (
        g_left**2 / (n_left + l2)
        + g_right**2 / (n_right + l2)
        - total**2 / (n + l2)
    )
    valid = xs[1:] > xs[:-1]
    if min_leaf > 1:
        counts = np.arange(1, n)[:, None]
        valid &= (counts >= min_leaf) & (n - counts >= min_leaf)
    score = np.where(valid, score, -np.inf)

    # feature-major flattening: first max = lowest feature, then lowest threshold
    flat = np.argmax(score.T)
    fpos, pos = divmod(int(flat), n - 1)
    best = float(score[pos, fpos])
    if not best > 0.0:
        return None
    lo, hi = xs[pos, fpos], xs[pos + 1, fpos]
    threshold = (lo + hi) / 2.0
    if threshold >= hi:  # rounding guard: keep the right side strictly above
        threshold = lo
    gl, gr = float(g_left[pos, fpos]), float(g_right[pos, fpos])
    nl = pos + 1
    sse_decrease = gl**2 / nl + gr**2 / (n - nl) - float(total[fpos]) ** 2 / n
    return best, sse_decrease, int(features[fpos]), float(threshold)


def grow_tree(
    X: np.ndarray,
    y: np.ndarray,
    rows: np.ndarray,
    *,
    max_depth: int | None,
    min_leaf: int,
    l2: float = 0.0,
    feature_sampler: Callable[[], np.ndarray] | None = None,
) -> Tree:
    """Depth-wise greedy growth (every eligible node splits until the depth cap).

    `rows` may contain duplicates (bootstrap samples). `feature_sampler`, when
    given, supplies the sorted candidate-feature subset for each split attempt;
    it is consumed in preorder (parent, left subtree, right subtree).
    """
    d = X.shape[1]
    all_features = np.arange(d)
    sampler = feature_sampler or (lambda: all_features)

    feature: list[int] = []
    threshold: list[float] = []
    left: list[int] = []
    right: list[int] = []
    value: list[float] = []
    importance = np.zeros(d)

    # entries: (rows, depth, parent index, is_left); LIFO pop -> preorder
    stack: list[tuple[np.ndarray, int, int, bool]] = [(np.asarray(rows), 0, -1, False)]
    while stack:
        node_rows, depth, parent, is_left = stack.pop()
        idx = len(feature)
        if parent >= 0:
            if is_left:
                left[parent] = idx
            else:
                right[parent] = idx
        count = len(node_rows)
        node_value = float(y[node_rows].sum() / (count + l2))

        split = None
        if count >= max(2, 2 * min_leaf) and (max_depth is None or depth < max_depth):
            split = _best_split(X, y, node_rows, sampler(), min_leaf, l2)
        if split is None:
            feature.append(LEAF)
            threshold.append(0.0)
            left.append(LEAF)
            right.append(LEAF)
            value.append(node_value)
            continue
        _, sse_decrease, feat, thr = split
        importance[feat] += sse_decrease
        feature.append(feat)
        threshold.append(thr)
        left.append(LEAF)
        right.append(LEAF)
        value.append(node_value)
        go_left = X[node_rows, feat] <= thr
        stack.append((node_rows[~go_left], depth + 1, idx, False))
        stack.append((node_rows[go_left], depth + 1, idx, True))

    return Tree(
        feature=np.asarray(feature, dtype=int),
        threshold=np.asarray(threshold, dtype=float),
        left=np.asarray(left, dtype=int),
        right=np.asarray(right, dtype=int),
        value=np.asarray(value, dtype=float),
        importance=importance,
    )


def grow_tree_leafwise(
    X: np.ndarray,
    y: np.ndarray,
    rows: np.ndarray,
    *,
    max_leaves: int | None,
    min_leaf: int,
    l2: float = 0.0,
) -> Tree:
    """Best-first growth: repeatedly split the leaf with the highest gain.

    Stops at `max_leaves` leaves (None = no cap) or when no leaf has a
    strictly positive gain. Gain ties resolve to the earliest-created leaf.
    """
    d = X.shape[1]
    all_features = np.arange(d)

    feature = [LEAF]
    threshold = [0.0]
    left = [LEAF]
    right = [LEAF]
    rows0 = np.asarray(rows)
    value = [float(y[rows0].sum() / (len(rows0) + l2))]
    importance = np.zeros(d)

    def propose(node_rows: np.ndarray):
        if len(node_rows) < max(2, 2 * min_leaf):
            return None
        return _best_split(X, y, node_rows, all_features, min_leaf, l2)

    # open leaves in creation order: (node index, rows, proposed split or None)
    open_leaves: list[tuple[int, np.ndarray, tuple | None]] = [(0, rows0, propose(rows0))]
    n_leaves = 1
    while max_leaves is None or n_leaves < max_leaves:
        best_pos = -1
        best_score = 0.0
        for pos, (_, _, split) in enumerate(open_leaves):
            if split is not None and split[0] > best_score:
                best_score = split[0]
                best_pos = pos
        if best_pos < 0:
            break
        node, node_rows, split = open_leaves.pop(best_pos)
        _, sse_decrease, feat, thr = split
        importance[feat] += sse_decrease
        feature[node] = feat
        threshold[node] = thr
        go_left = X[node_rows, feat] <= thr
        for child_rows, side in ((node_rows[go_left], "left"), (node_rows[~go_left], "right")):
            child = len(feature)
            feature.append(LEAF)
            threshold.append(0.0)
            left.append(LEAF)
            right.append(LEAF)
            value.append(float(y[child_rows].sum() / (len(child_rows) + l2)))
            if side == "left":
                left[node] = child
            else:
                right[node] = child
            open_leaves.append((child, child_rows, propose(child_rows)))
        n_leaves += 1

    return Tree(
        feature=np.asarray(feature, dtype=int),
        threshold=np.asarray(threshold, dtype=float),
        left=np.asarray(left, dtype=int),
        right=np.asarray(right, dtype=int),
        value=np.asarray(value, dtype=float),
        importance=importance,
    )


def tree_predict(tree: Tree, X: np.ndarray) -> np.ndarray:
    out = np.empty(X.shape[0])
    if X.shape[0] == 0:
        return out
    stack: list[tuple[int, np.ndarray]] = [(0, np.arange(X.shape[0]))]
    while stack:
        node, idx = stack.pop()
        if tree.feature[node] == LEAF:
            out[idx] = tree.value[node]
            continue
        go_left = X[idx, tree.feature[node]] <= tree.threshold[node]
        left_idx = idx[go_left]
        right_idx = idx[~go_left]
        if len(left_idx):
            stack.append((int(tree.left[node]), left_idx))
        if len(right_idx):
            stack.append((int(tree.right[node]), right_idx))
    return out
