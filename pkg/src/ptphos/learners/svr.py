"""Epsilon-insensitive support vector regression trained by pairwise dual ascent.

The epsilon-SVR dual is posed over 2n box-constrained variables
(alpha, alpha*) with one equality constraint. Each iteration picks the
maximal-KKT-violating pair (ties by index), solves the two-variable
subproblem in closed form, and updates the gradient; the loop stops when
the violation gap falls below `tol` or after `max_iter` updates. Features
arrive standardized from the dispatcher; targets are standardized
internally, so `c` and `epsilon` act in standardized target units.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .krr import kernel_matrix, resolve_gamma


@dataclass
class SvrState:
    support_X: np.ndarray   # standardized rows with nonzero dual coefficient
    coef: np.ndarray        # beta = alpha - alpha* at the support rows
    support_idx: np.ndarray  # training-row index of each support vector
    bias: float
    gamma: float
    y_mean: float
    y_scale: float

    def to_dict(self) -> dict:
        return {
            "support_X": self.support_X.tolist(),
            "coef": self.coef.tolist(),
            "support_idx": self.support_idx.tolist(),
            "bias": self.bias,
            "gamma": self.gamma,
            "y_mean": self.y_mean,
            "y_scale": self.y_scale,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "SvrState":
        return cls(
            np.asarray(d["support_X"], dtype=float),
            np.asarray(d["coef"], dtype=float),
            np.asarray(d["support_idx"], dtype=int),
            float(d["bias"]),
            float(d["gamma"]),
            float(d["y_mean"]),
            float(d["y_scale"]),
        )


def fit_svr(params: dict, X: np.ndarray, y: np.ndarray) -> SvrState:
    n = X.shape[0]
    c = float(params["c"])
    epsilon = float(params["epsilon"])
    tol = float(params["tol"])
    max_iter = int(params["max_iter"])
    gamma = resolve_gamma(params["gamma"], X.shape[1])

    y = np.asarray(y, dtype=float)
    y_mean = float(y.mean())
    y_std = float(y.std())
    y_scale = y_std if y_std > 0 else 1.0
    t = (y - y_mean) / y_scale

    K = kernel_matrix(X, X, "rbf", gamma)
    diag = np.diag(K)

    sign = np.concatenate([np.ones(n), -np.ones(n)])
    alpha = np.zeros(2 * n)
    grad = np.concatenate([epsilon - t, epsilon + t])

    for _ in range(max_iter):
        yg = -sign * grad
        up = ((sign > 0) & (alpha < c)) | ((sign < 0) & (alpha > 0))
        low = ((sign < 0) & (alpha < c)) | ((sign > 0) & (alpha > 0))
        up_vals = np.where(up, yg, -np.inf)
        low_vals = np.where(low, yg, np.inf)
        i = int(np.argmax(up_vals))
        j = int(np.argmin(low_vals))
        gap = up_vals[i] - low_vals[j]
        if not np.isfinite(gap) or gap <= tol:
            break

        im, jm = i % n, j % n
        eta = diag[im] + diag[jm] - 2.0 * sign[i] * sign[j] * K[im, jm]
        if eta <= 0:
            eta = 1e-12
        delta = gap / eta
        delta = min(delta,
                    c - alpha[i] if sign[i] > 0 else alpha[i],
                    alpha[j] if sign[j] > 0 else c - alpha[j])
        if delta <= 0:
            break
        alpha[i] = min(max(alpha[i] + sign[i] * delta, 0.0), c)
        alpha[j] = min(max(alpha[j] - sign[j] * delta, 0.0), c)
        kcol = np.concatenate([K[:, im], K[:, im]]) - np.concatenate([K[:, jm], K[:, jm]])
        grad += sign * kcol * delta

    yg = -sign * grad
    free = (alpha > 0) & (alpha < c)
    if free.any():
        bias = float(yg[free].mean())
    else:
        up = ((sign > 0) & (alpha < c)) | ((sign < 0) & (alpha > 0))
        low = ((sign < 0) & (alpha < c)) | ((sign > 0) & (alpha > 0))
        hi = np.where(up, yg, -np.inf).max()
        lo = np.where(low, yg, np.inf).min()
        bias = float((hi + lo) / 2.0)

    beta = alpha[:n] - alpha[n:]
    support = np.nonzero(beta != 0.0)[0]
    return SvrState(
        support_X=X[support].copy(),
        coef=beta[support],
        support_idx=support,
        bias=bias,
        gamma=gamma,
        y_mean=y_mean,
        y_scale=y_scale,
    )


def predict_svr(state: SvrState, X: np.ndarray) -> np.ndarray:
    if X.shape[0] == 0:
        return np.empty(0)
    if len(state.coef):
        scaled = kernel_matrix(X, state.support_X, "rbf", state.gamma) @ state.coef + state.bias
    else:
        scaled = np.full(X.shape[0], state.bias)
    return scaled * state.y_scale + state.y_mean
