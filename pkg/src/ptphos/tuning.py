"""Seeded random-search hyperparameter optimization scored by k-fold CV.

Each trial draws one parameter sample from a generator keyed by
(seed, trial index), so a longer budget with the same seed extends the
trial sequence without changing its prefix. The best trial has the lowest
mean RMSE, with ties broken by lower mean MAE and then by trial order.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np

from ._threads import ordered_map
from .crossval import fold_models, holdout_pairs
from .dataset import DesignMatrix
from .errors import BadParamError, ConstantTruthError, PtphosError
from .learners import (
    ADABOOST,
    CART,
    GBM_LEAFWISE,
    GBM_LEVELWISE,
    KNN_DISTANCE,
    KNN_UNIFORM,
    KRR,
    RF,
    SVR,
    LearnerSpec,
)
from .metrics import mae as mae_score
from .metrics import r2 as r2_score
from .metrics import rmse as rmse_score


@dataclass(frozen=True)
class Uniform:
    lo: float
    hi: float

    def __post_init__(self) -> None:
        if not self.lo < self.hi:
            raise BadParamError(f"uniform needs lo < hi, got [{self.lo}, {self.hi}]")

    def sample(self, rng: np.random.Generator):
        return float(rng.uniform(self.lo, self.hi))


@dataclass(frozen=True)
class LogUniform:
    lo: float
    hi: float

    def __post_init__(self) -> None:
        if not 0 < self.lo < self.hi:
            raise BadParamError(f"log_uniform needs 0 < lo < hi, got [{self.lo}, {self.hi}]")

    def sample(self, rng: np.random.Generator):
        return float(math.exp(rng.uniform(math.log(self.lo), math.log(self.hi))))


@dataclass(frozen=True)
class IntUniform:
    lo: int
    hi: int

    def __post_init__(self) -> None:
        if not self.lo < self.hi:
            raise BadParamError(f"int_uniform needs lo < hi, got [{self.lo}, {self.hi}]")

    def sample(self, rng: np.random.Generator):
        return int(rng.integers(self.lo, self.hi + 1))


@dataclass(frozen=True)
class Choice:
    values: tuple

    def __post_init__(self) -> None:
        if not self.values:
            raise BadParamError("choice needs at least one value")
        object.__setattr__(self, "values", tuple(self.values))

    def sample(self, rng: np.random.Generator):
        return self.values[int(rng.integers(len(self.values)))]


SearchSpace = Mapping[str, Uniform | LogUniform | IntUniform | Choice]


def sample_params(space: SearchSpace, rng: np.random.Generator) -> dict:
    return {name: space[name].sample(rng) for name in sorted(space)}


# Project-default search spaces: broad, not calibrated to any dataset.
def default_space(kind: str) -> dict:
    if kind == CART:
        return {"max_depth": IntUniform(2, 16), "min_samples_leaf": IntUniform(1, 8)}
    if kind == RF:
        return {
            "n_trees": IntUniform(60, 300),
            "max_features_fraction": Uniform(0.3, 1.0),
            "max_depth": IntUniform(4, 24),
            "min_samples_leaf": IntUniform(1, 5),
        }
    if kind == GBM_LEAFWISE:
        return {
            "n_rounds": IntUniform(50, 300),
            "learning_rate": LogUniform(0.02, 0.3),
            "max_leaves": IntUniform(7, 63),
            "l2_leaf_reg": LogUniform(1e-3, 10.0),
            "subsample_fraction": Uniform(0.6, 1.0),
            "min_samples_leaf": IntUniform(1, 8),
        }
    if kind == GBM_LEVELWISE:
        return {
            "n_rounds": IntUniform(50, 300),
            "learning_rate": LogUniform(0.02, 0.3),
            "max_depth": IntUniform(2, 8),
            "l2_leaf_reg": LogUniform(1e-2, 10.0),
            "subsample_fraction": Uniform(0.6, 1.0),
            "min_samples_leaf": IntUniform(1, 8),
        }
    if kind == ADABOOST:
        return {
            "n_estimators": IntUniform(20, 100),
            "loss": Choice(("linear", "square", "exponential")),
            "max_depth": IntUniform(2, 6),
        }
    if kind in (KNN_UNIFORM, KNN_DISTANCE):
        return {"k": IntUniform(1, 15)}
    if kind == KRR:
        return {"alpha": LogUniform(1e-4, 10.0), "gamma": LogUniform(1e-3, 10.0)}
    if kind == SVR:
        return {
            "c": LogUniform(0.1, 100.0),
            "epsilon": LogUniform(0.01, 0.5),
            "gamma": LogUniform(1e-3, 10.0),
        }
    raise BadParamError(f"no default search space for kind '{kind}'")


@dataclass
class TrialRecord:
    index: int
    params: dict
    fold_mae: tuple[float, ...] = ()
    fold_rmse: tuple[float, ...] = ()
    fold_r2: tuple[float, ...] = ()
    error: str | None = None
    rank: int | None = None

    @property
    def ok(self) -> bool:
        return self.error is None

    @property
    def mae_mean(self) -> float:
        return float(np.mean(self.fold_mae))

    @property
    def mae_std(self) -> float:
        return float(np.std(self.fold_mae))

    @property
    def rmse_mean(self) -> float:
        return float(np.mean(self.fold_rmse))

    @property
    def rmse_std(self) -> float:
        return float(np.std(self.fold_rmse))

    @property
    def r2_mean(self) -> float:
        return float(np.mean(self.fold_r2))

    @property
    def r2_std(self) -> float:
        return float(np.std(self.fold_r2))


def evaluate_spec(
    spec: LearnerSpec,
    matrix: DesignMatrix,
    y: np.ndarray,
    folds: Sequence[Sequence[int]],
) -> tuple[tuple[float, ...], tuple[float, ...], tuple[float, ...]]:
    """Per-fold (MAE, RMSE, R^2) scored on each fold's held-out rows."""
    models = fold_models(spec, matrix, y, folds)
    pairs = holdout_pairs(models, matrix, y, folds)
    maes, rmses, r2s = [], [], []
    for yt, yp in pairs:
        maes.append(mae_score(yt, yp))
        rmses.append(rmse_score(yt, yp))
        try:
            r2s.append(r2_score(yt, yp) if len(yt) >= 2 else float("nan"))
        except ConstantTruthError:
            r2s.append(float("nan"))
    return tuple(maes), tuple(rmses), tuple(r2s)


def random_search(
    kind: str,
    space: SearchSpace,
    budget: int,
    matrix: DesignMatrix,
    y: np.ndarray,
    folds: Sequence[Sequence[int]],
    seed: int,
    base_params: Mapping | None = None,
) -> tuple[TrialRecord, list[TrialRecord]]:
    """Evaluate `budget` random parameter draws; return (best, all trials).

    Failed trials are recorded with their error and excluded from ranking
    rather than aborting the search.
    """
    if budget < 1:
        raise BadParamError(f"budget must be >= 1, got {budget}")
    sampled = [
        sample_params(space, np.random.default_rng([seed, t])) for t in range(budget)
    ]

    def run_trial(t: int) -> TrialRecord:
        params = dict(base_params or {})
        params.update(sampled[t])
        try:
            spec = LearnerSpec(kind, params, seed=seed)
            fold_mae, fold_rmse, fold_r2 = evaluate_spec(spec, matrix, y, folds)
            return TrialRecord(t, params, fold_mae, fold_rmse, fold_r2)
        except PtphosError as exc:
            return TrialRecord(t, params, error=f"{type(exc).__name__}: {exc}")

    trials = ordered_map(run_trial, list(range(budget)))

    successful = [t for t in trials if t.ok]
    if not successful:
        raise PtphosError(f"all {budget} trials failed; last error: {trials[-1].error}")
    order = sorted(successful, key=lambda t: (t.rmse_mean, t.mae_mean, t.index))
    for rank, trial in enumerate(order, start=1):
        trial.rank = rank
    return order[0], trials


def trials_to_csv(trials: Sequence[TrialRecord], path: str | Path,
                  header_comment: str | None = None) -> None:
    """One row per trial: flattened params, per-fold scores, means and stds."""
    param_names = sorted({name for t in trials for name in t.params})
    n_folds = max((len(t.fold_mae) for t in trials if t.ok), default=0)
    columns = ["trial", "status", "rank"]
    columns += [f"param.{p}" for p in param_names]
    for metric in ("mae", "rmse", "r2"):
        columns += [f"{metric}_fold{i}" for i in range(n_folds)]
        columns += [f"{metric}_mean", f"{metric}_std"]
    columns.append("error")

    with Path(path).open("w", newline="", encoding="utf-8") as handle:
        if header_comment:
            handle.write(f"# {header_comment}\n")
        writer = csv.writer(handle)
        writer.writerow(columns)
        for t in trials:
            row: list[str] = [str(t.index), "ok" if t.ok else "failed",
                              "" if t.rank is None else str(t.rank)]
            row += [repr(t.params.get(p, "")) for p in param_names]
            for values, mean, std in (
                (t.fold_mae, t.mae_mean if t.ok else None, t.mae_std if t.ok else None),
                (t.fold_rmse, t.rmse_mean if t.ok else None, t.rmse_std if t.ok else None),
                (t.fold_r2, t.r2_mean if t.ok else None, t.r2_std if t.ok else None),
            ):
                padded = list(values) + [""] * (n_folds - len(values))
                row += [repr(v) if v != "" else "" for v in padded]
                row += ["" if mean is None else repr(mean), "" if std is None else repr(std)]
            row.append(t.error or "")
            writer.writerow(row)
