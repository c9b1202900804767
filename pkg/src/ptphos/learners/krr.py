"""Kernel ridge regression: solve (K + alpha*I) a = y, predict sum_i a_i k(x, x_i)."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import SingularKernelError


def squared_distances(A: np.ndarray, B: np.ndarray) -> np.ndarray:
    diff = A[:, None, :] - B[None, :, :]
    return (diff * diff).sum(axis=2)


def kernel_matrix(A: np.ndarray, B: np.ndarray, kernel: str, gamma: float) -> np.ndarray:
    if kernel == "linear":
        return A @ B.T
    return np.exp(-gamma * squared_distances(A, B))


def resolve_gamma(gamma, n_columns: int) -> float:
    return float(gamma) if gamma is not None else 1.0 / n_columns


@dataclass
class KrrState:
    X: np.ndarray  # standardized training rows
    dual_coef: np.ndarray
    kernel: str
    gamma: float

    def to_dict(self) -> dict:
        return {"X": self.X.tolist(), "dual_coef": self.dual_coef.tolist(),
                "kernel": self.kernel, "gamma": self.gamma}

    @classmethod
    def from_dict(cls, d: dict) -> "KrrState":
        return cls(np.asarray(d["X"], dtype=float), np.asarray(d["dual_coef"], dtype=float),
                   d["kernel"], float(d["gamma"]))


def fit_krr(params: dict, X: np.ndarray, y: np.ndarray) -> KrrState:
    gamma = resolve_gamma(params["gamma"], X.shape[1])
    K = kernel_matrix(X, X, params["kernel"], gamma)
    A = K + params["alpha"] * np.eye(X.shape[0])
    try:
        dual = np.linalg.solve(A, np.asarray(y, dtype=float))
    except np.linalg.LinAlgError as exc:
        raise SingularKernelError(f"kernel system is singular: {exc}") from exc
    if not np.isfinite(dual).all():
        raise SingularKernelError("kernel solve produced non-finite coefficients")
    return KrrState(X.copy(), dual, params["kernel"], gamma)


def predict_krr(state: KrrState, X: np.ndarray) -> np.ndarray:
    if X.shape[0] == 0:
        return np.empty(0)
    return kernel_matrix(X, state.X, state.kernel, state.gamma) @ state.dual_coef
