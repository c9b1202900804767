"""Regression scoring (R^2, MAE, RMSE) and cross-validated report tables."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import ConstantTruthError, LengthMismatchError, NonFiniteError, PtphosError


def _check_pair(y_true, y_pred) -> tuple[np.ndarray, np.ndarray]:
    yt = np.asarray(y_true, dtype=float)
    yp = np.asarray(y_pred, dtype=float)
    if yt.shape != yp.shape or yt.ndim != 1:
        raise LengthMismatchError(f"shape mismatch: {yt.shape} vs {yp.shape}")
    if yt.size == 0:
        raise LengthMismatchError("empty vectors")
    if not (np.isfinite(yt).all() and np.isfinite(yp).all()):
        raise NonFiniteError("non-finite values in metric inputs")
    return yt, yp


def mae(y_true, y_pred) -> float:
    yt, yp = _check_pair(y_true, y_pred)
    return float(np.mean(np.abs(yt - yp)))


def rmse(y_true, y_pred) -> float:
    yt, yp = _check_pair(y_true, y_pred)
    return float(np.sqrt(np.mean((yt - yp) ** 2)))


def r2(y_true, y_pred) -> float:
    """Coefficient of determination, 1 - SS_res/SS_tot. May be negative."""
    yt, yp = _check_pair(y_true, y_pred)
    ss_tot = float(np.sum((yt - yt.mean()) ** 2))
    if ss_tot == 0.0:
        raise ConstantTruthError("r2 undefined for constant y_true")
    ss_res = float(np.sum((yt - yp) ** 2))
    return 1.0 - ss_res / ss_tot


def pearson_r2(y_true, y_pred) -> float:
    """Squared Pearson correlation; alternative reading of a 'squared correlation coefficient'."""
    yt, yp = _check_pair(y_true, y_pred)
    st = float(np.std(yt))
    sp = float(np.std(yp))
    if st == 0.0:
        raise ConstantTruthError("pearson r2 undefined for constant y_true")
    if sp == 0.0:
        return 0.0
    c = float(np.mean((yt - yt.mean()) * (yp - yp.mean())))
    return (c / (st * sp)) ** 2


def format_mean_std(mean: float, std: float | None, decimals: int = 2) -> str:
    if std is None:
        return f"{mean:.{decimals}f}"
    return f"{mean:.{decimals}f}±{std:.{decimals}f}"


R2_COD = "coefficient_of_determination"
R2_PEARSON = "squared_pearson_correlation"
_R2_FUNCTIONS = {R2_COD: r2, R2_PEARSON: pearson_r2}


def r2_function(definition: str):
    if definition not in _R2_FUNCTIONS:
        raise PtphosError(f"unknown r2 definition '{definition}'")
    return _R2_FUNCTIONS[definition]


@dataclass(frozen=True)
class ReportRow:
    """Per-model score row: MAE/RMSE/R^2 as mean +/- population std over folds."""

    name: str
    n_folds: int
    mae_mean: float
    rmse_mean: float
    r2_mean: float | None
    mae_std: float | None = None
    rmse_std: float | None = None
    r2_std: float | None = None
    flags: tuple[str, ...] = ()

    def formatted(self, decimals: int = 2) -> tuple[str, str, str]:
        r2_text = "n/a" if self.r2_mean is None else format_mean_std(self.r2_mean, self.r2_std, decimals)
        return (
            format_mean_std(self.mae_mean, self.mae_std, decimals),
            format_mean_std(self.rmse_mean, self.rmse_std, decimals),
            r2_text,
        )


def cv_report(name: str, fold_pairs: Sequence[tuple[np.ndarray, np.ndarray]],
              r2_definition: str = R2_COD) -> ReportRow:
    """Aggregate per-fold (y_true, y_pred) pairs into one report row.

    Each fold is scored on its own samples; the row carries the mean and the
    population std across folds. Folds with fewer than 2 samples (or a
    constant truth) are skipped for R^2 and flagged.
    """
    if len(fold_pairs) < 2:
        raise PtphosError("cv_report needs at least 2 folds")
    score_r2 = r2_function(r2_definition)
    maes, rmses, r2s = [], [], []
    flags: list[str] = []
    for i, (yt, yp) in enumerate(fold_pairs):
        maes.append(mae(yt, yp))
        rmses.append(rmse(yt, yp))
        if len(np.asarray(yt)) < 2:
            flags.append(f"fold {i}: r2 skipped (fold too small)")
            continue
        try:
            r2s.append(score_r2(yt, yp))
        except ConstantTruthError:
            flags.append(f"fold {i}: r2 skipped (constant truth)")
    return ReportRow(
        name=name,
        n_folds=len(fold_pairs),
        mae_mean=float(np.mean(maes)),
        mae_std=float(np.std(maes)),
        rmse_mean=float(np.mean(rmses)),
        rmse_std=float(np.std(rmses)),
        r2_mean=float(np.mean(r2s)) if r2s else None,
        r2_std=float(np.std(r2s)) if r2s else None,
        flags=tuple(flags),
    )


def single_report(name: str, y_true, y_pred, r2_definition: str = R2_COD) -> ReportRow:
    """One-shot score row (no fold spread), used for external test sets."""
    yt, yp = _check_pair(y_true, y_pred)
    try:
        r2_value: float | None = r2_function(r2_definition)(yt, yp)
    except ConstantTruthError:
        r2_value = None
    return ReportRow(
        name=name,
        n_folds=1,
        mae_mean=mae(yt, yp),
        rmse_mean=rmse(yt, yp),
        r2_mean=r2_value,
        flags=("r2 skipped (constant truth)",) if r2_value is None else (),
    )


@dataclass(frozen=True)
class EvalReport:
    """Score table for one target, one row per model, columns MAE | RMSE | R^2."""

    target_kind: str
    unit: str
    rows: tuple[ReportRow, ...] = ()
    r2_definition: str = R2_COD

    def with_row(self, row: ReportRow) -> "EvalReport":
        return EvalReport(self.target_kind, self.unit, self.rows + (row,), self.r2_definition)

    def to_text(self, title: str = "") -> str:
        unit_suffix = f" ({self.unit})" if self.unit else ""
        header = ["model", f"MAE{unit_suffix}", f"RMSE{unit_suffix}", "R2"]
        body = [[row.name, *row.formatted()] for row in self.rows]
        widths = [max(len(r[c]) for r in [header] + body) for c in range(4)]
        lines = []
        if title:
            lines.append(title)
        lines.append("  ".join(h.ljust(w) for h, w in zip(header, widths)))
        lines.append("  ".join("-" * w for w in widths))
        for r in body:
            lines.append("  ".join(v.ljust(w) for v, w in zip(r, widths)))
        flagged = [f"  [{row.name}] {f}" for row in self.rows for f in row.flags]
        if flagged:
            lines.append("notes:")
            lines.extend(flagged)
        lines.append(f"(folds: {self.rows[0].n_folds if self.rows else 0}; "
                     f"r2: {self.r2_definition})")
        return "\n".join(lines) + "\n"

    def to_csv_rows(self) -> list[list[str]]:
        rows = [["model", "mae_mean", "mae_std", "rmse_mean", "rmse_std",
                 "r2_mean", "r2_std", "n_folds", "flags"]]
        for row in self.rows:
            rows.append([
                row.name,
                repr(row.mae_mean), "" if row.mae_std is None else repr(row.mae_std),
                repr(row.rmse_mean), "" if row.rmse_std is None else repr(row.rmse_std),
                "" if row.r2_mean is None else repr(row.r2_mean),
                "" if row.r2_std is None else repr(row.r2_std),
                str(row.n_folds),
                "; ".join(row.flags),
            ])
        return rows
