"""Matplotlib renderings written next to the delimited report files."""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402


def save_parity_figure(
    path: str | Path,
    y_true: np.ndarray,
    y_pred: np.ndarray,
    axis_label: str,
    title: str,
    annotation: str = "",
    stamp: str = "",
) -> None:
    """True-vs-predicted scatter with the identity diagonal."""
    y_true = np.asarray(y_true, dtype=float)
    y_pred = np.asarray(y_pred, dtype=float)
    fig, ax = plt.subplots(figsize=(5.0, 5.0))
    ax.scatter(y_true, y_pred, s=22, alpha=0.75, edgecolors="none", color="#2a6f97")
    lo = float(min(y_true.min(), y_pred.min()))
    hi = float(max(y_true.max(), y_pred.max()))
    pad = 0.05 * max(hi - lo, 1e-9)
    lo, hi = lo - pad, hi + pad
    ax.plot([lo, hi], [lo, hi], "k--", linewidth=1.0)
    ax.set_xlim(lo, hi)
    ax.set_ylim(lo, hi)
    ax.set_aspect("equal", adjustable="box")
    ax.set_xlabel(f"experimental {axis_label}".strip())
    ax.set_ylabel(f"predicted {axis_label}".strip())
    ax.set_title(title)
    if annotation:
        ax.text(0.04, 0.96, annotation, transform=ax.transAxes, va="top", ha="left",
                fontsize=9, bbox={"boxstyle": "round,pad=0.3", "facecolor": "white",
                                  "edgecolor": "#888888", "alpha": 0.9})
    fig.tight_layout()
    fig.savefig(path, dpi=150, metadata={"Description": stamp} if stamp else None)
    plt.close(fig)


def save_importance_figure(
    path: str | Path,
    names: list[str],
    weights: list[float],
    title: str,
    stamp: str = "",
) -> None:
    """Horizontal bars, largest weight at the top."""
    order = np.arange(len(names))[::-1]
    fig, ax = plt.subplots(figsize=(6.0, 0.42 * max(len(names), 4) + 1.2))
    ax.barh(order, weights, color="#52796f")
    ax.set_yticks(order)
    ax.set_yticklabels(names, fontsize=9)
    ax.set_xlabel("importance weight")
    ax.set_title(title)
    fig.tight_layout()
    fig.savefig(path, dpi=150, metadata={"Description": stamp} if stamp else None)
    plt.close(fig)
