"""Two-layer stacked generalization with leakage-free out-of-fold meta features.

Presets mirror the three shipped architectures: emission wavelength (one
boosted-tree base, SVR meta, base prediction concatenated with all
features), radiative rate constant (four ensemble bases, distance-weighted
KNN meta, base predictions only), and quantum yield (random-forest base
and meta, features plus base prediction).
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Mapping, Sequence

import numpy as np

from .dataset import (
    TARGET_KR,
    TARGET_PLQY,
    TARGET_WAVELENGTH,
    DesignMatrix,
)
from .errors import BadValueError, EmptyFoldError, FormatVersionError
from .learners import (
    ADABOOST,
    GBM_LEAFWISE,
    GBM_LEVELWISE,
    KNN_DISTANCE,
    RF,
    SVR,
    LearnerSpec,
    TrainedRegressor,
    fit,
    predict,
)
from .learners.persist import regressor_from_dict, regressor_to_dict

META_BASE_ONLY = "base_predictions_only"
META_WITH_FEATURES = "features_plus_base_predictions"
OUT_OF_FOLD = "out_of_fold"
IN_SAMPLE = "in_sample"

STACK_FORMAT_VERSION = 1


@dataclass(frozen=True)
class StackArchitecture:
    base_specs: tuple[LearnerSpec, ...]
    meta_spec: LearnerSpec
    meta_features: str = META_WITH_FEATURES
    oof_mode: str = OUT_OF_FOLD

    def __post_init__(self) -> None:
        if not self.base_specs:
            raise BadValueError("stack needs at least one base learner")
        if self.meta_features not in (META_BASE_ONLY, META_WITH_FEATURES):
            raise BadValueError(f"unknown meta_features mode '{self.meta_features}'")
        if self.oof_mode not in (OUT_OF_FOLD, IN_SAMPLE):
            raise BadValueError(f"unknown oof mode '{self.oof_mode}'")
        object.__setattr__(self, "base_specs", tuple(self.base_specs))

    @property
    def base_column_names(self) -> tuple[str, ...]:
        return tuple(f"base{i}_{s.kind}" for i, s in enumerate(self.base_specs))

    def meta_column_names(self, feature_columns: Sequence[str]) -> tuple[str, ...]:
        if self.meta_features == META_BASE_ONLY:
            return self.base_column_names
        return tuple(feature_columns) + self.base_column_names

    @classmethod
    def preset(cls, target_kind: str, seed: int = 0,
               oof_mode: str = OUT_OF_FOLD) -> "StackArchitecture":
        if target_kind == TARGET_WAVELENGTH:
            return cls(
                base_specs=(LearnerSpec(GBM_LEAFWISE, seed=seed),),
                meta_spec=LearnerSpec(SVR, seed=seed),
                meta_features=META_WITH_FEATURES,
                oof_mode=oof_mode,
            )
        if target_kind == TARGET_KR:
            return cls(
                base_specs=(
                    LearnerSpec(ADABOOST, seed=seed),
                    LearnerSpec(GBM_LEAFWISE, seed=seed),
                    LearnerSpec(RF, seed=seed),
                    LearnerSpec(GBM_LEVELWISE, seed=seed),
                ),
                meta_spec=LearnerSpec(KNN_DISTANCE, seed=seed),
                meta_features=META_BASE_ONLY,
                oof_mode=oof_mode,
            )
        if target_kind == TARGET_PLQY:
            return cls(
                base_specs=(LearnerSpec(RF, seed=seed),),
                meta_spec=LearnerSpec(RF, seed=seed),
                meta_features=META_WITH_FEATURES,
                oof_mode=oof_mode,
            )
        raise BadValueError(f"no stack preset for target '{target_kind}'")

    def to_dict(self) -> dict:
        return {
            "base_specs": [s.to_dict() for s in self.base_specs],
            "meta_spec": self.meta_spec.to_dict(),
            "meta_features": self.meta_features,
            "oof_mode": self.oof_mode,
        }

    @classmethod
    def from_dict(cls, d: Mapping) -> "StackArchitecture":
        return cls(
            tuple(LearnerSpec.from_dict(s) for s in d["base_specs"]),
            LearnerSpec.from_dict(d["meta_spec"]),
            d.get("meta_features", META_WITH_FEATURES),
            d.get("oof_mode", OUT_OF_FOLD),
        )


@dataclass
class OofBookkeeping:
    """Records which rows trained the model behind each row's meta features."""

    fold_of_row: np.ndarray
    trained_rows: tuple[tuple[int, ...], ...]  # per fold
    fold_base_models: tuple[tuple[TrainedRegressor, ...], ...]  # per fold, per base

    def training_rows_for(self, row: int) -> tuple[int, ...]:
        return self.trained_rows[int(self.fold_of_row[row])]


def _check_folds(folds: Sequence[Sequence[int]], n: int) -> None:
    if not folds:
        raise EmptyFoldError("no folds given")
    for i, fold in enumerate(folds):
        if len(fold) == 0:
            raise EmptyFoldError(f"fold {i} is empty")
    positions = sorted(p for fold in folds for p in fold)
    if positions != list(range(n)):
        raise BadValueError("folds do not partition the training rows")


def assemble_meta_matrix(arch: StackArchitecture, matrix: DesignMatrix,
                         base_predictions: np.ndarray) -> DesignMatrix:
    """Meta-feature matrix from original features and per-base prediction columns."""
    base_predictions = np.asarray(base_predictions, dtype=float)
    if base_predictions.shape != (matrix.n_rows, len(arch.base_specs)):
        raise BadValueError(
            f"base prediction block has shape {base_predictions.shape}, "
            f"expected {(matrix.n_rows, len(arch.base_specs))}"
        )
    base_cols = arch.base_column_names
    if arch.meta_features == META_BASE_ONLY:
        provenance = {c: c for c in base_cols}
        return DesignMatrix(base_cols, base_predictions, provenance)
    columns = tuple(matrix.columns) + base_cols
    provenance = dict(matrix.column_provenance)
    provenance.update({c: c for c in base_cols})
    data = np.hstack([matrix.data, base_predictions])
    return DesignMatrix(columns, data, provenance)


def build_oof_matrix(
    arch: StackArchitecture,
    matrix: DesignMatrix,
    y: np.ndarray,
    folds: Sequence[Sequence[int]],
) -> tuple[DesignMatrix, OofBookkeeping]:
    """Base-prediction meta features over the training rows.

    In out-of-fold mode, the entry for row i and base b comes from a model
    trained on every fold except the one holding i, so no base prediction is
    produced by a model that saw its own row. In-sample mode trains each
    base once on all rows (kept for protocol-literal replication).
    """
    n = matrix.n_rows
    y = np.asarray(y, dtype=float)
    preds = np.empty((n, len(arch.base_specs)))

    if arch.oof_mode == IN_SAMPLE:
        models = tuple(fit(spec, matrix, y) for spec in arch.base_specs)
        for b, model in enumerate(models):
            preds[:, b] = predict(model, matrix)
        everything = tuple(range(n))
        bookkeeping = OofBookkeeping(
            fold_of_row=np.zeros(n, dtype=int),
            trained_rows=(everything,),
            fold_base_models=(models,),
        )
        return assemble_meta_matrix(arch, matrix, preds), bookkeeping

    _check_folds(folds, n)
    fold_of_row = np.empty(n, dtype=int)
    trained_rows: list[tuple[int, ...]] = []
    fold_models: list[tuple[TrainedRegressor, ...]] = []
    for f, fold in enumerate(folds):
        held = np.asarray(sorted(fold), dtype=int)
        fold_of_row[held] = f
        train_positions = np.setdiff1d(np.arange(n), held)
        trained_rows.append(tuple(int(p) for p in train_positions))
        train_matrix = matrix.take(train_positions)
        held_matrix = matrix.take(held)
        models = tuple(fit(spec, train_matrix, y[train_positions]) for spec in arch.base_specs)
        for b, model in enumerate(models):
            preds[held, b] = predict(model, held_matrix)
        fold_models.append(models)
    bookkeeping = OofBookkeeping(fold_of_row, tuple(trained_rows), tuple(fold_models))
    return assemble_meta_matrix(arch, matrix, preds), bookkeeping


@dataclass
class StackModel:
    architecture: StackArchitecture
    base_models: tuple[TrainedRegressor, ...]
    meta_model: TrainedRegressor

    @property
    def columns(self) -> tuple[str, ...]:
        return self.base_models[0].columns


def train_stack(
    arch: StackArchitecture,
    matrix: DesignMatrix,
    y: np.ndarray,
    folds: Sequence[Sequence[int]],
) -> StackModel:
    """Fit the meta learner on the OOF matrix, then refit bases on all rows."""
    y = np.asarray(y, dtype=float)
    meta_matrix, _ = build_oof_matrix(arch, matrix, y, folds)
    meta_model = fit(arch.meta_spec, meta_matrix, y)
    base_models = tuple(fit(spec, matrix, y) for spec in arch.base_specs)
    return StackModel(arch, base_models, meta_model)


def stack_base_predictions(model: StackModel, matrix: DesignMatrix) -> np.ndarray:
    return np.column_stack([predict(m, matrix) for m in model.base_models]) \
        if matrix.n_rows else np.empty((0, len(model.base_models)))


def predict_stack(model: StackModel, matrix: DesignMatrix) -> np.ndarray:
    preds = stack_base_predictions(model, matrix)
    meta_matrix = assemble_meta_matrix(model.architecture, matrix, preds)
    return predict(model.meta_model, meta_matrix)


def stack_to_dict(model: StackModel, metadata: dict[str, Any] | None = None) -> dict:
    return {
        "format_version": STACK_FORMAT_VERSION,
        "kind": "stack",
        "metadata": dict(metadata or {}),
        "architecture": model.architecture.to_dict(),
        "bases": [regressor_to_dict(m) for m in model.base_models],
        "meta": regressor_to_dict(model.meta_model),
    }


def stack_from_dict(doc: Mapping) -> StackModel:
    version = doc.get("format_version")
    if version != STACK_FORMAT_VERSION:
        raise FormatVersionError(
            f"unsupported stack format_version {version!r}, expected {STACK_FORMAT_VERSION}"
        )
    if doc.get("kind") != "stack":
        raise BadValueError(f"not a stack document (kind={doc.get('kind')!r})")
    return StackModel(
        architecture=StackArchitecture.from_dict(doc["architecture"]),
        base_models=tuple(regressor_from_dict(d) for d in doc["bases"]),
        meta_model=regressor_from_dict(doc["meta"]),
    )


def save_stack(model: StackModel, path: str | Path,
               metadata: dict[str, Any] | None = None) -> None:
    Path(path).write_text(json.dumps(stack_to_dict(model, metadata), indent=1),
                          encoding="utf-8")


def load_stack(path: str | Path) -> StackModel:
    return stack_from_dict(json.loads(Path(path).read_text(encoding="utf-8")))
