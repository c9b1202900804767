"""Uniform fit/predict/importance contract over the regression learner suite.

Supported kinds: cart, rf, gbm_leafwise, gbm_levelwise, adaboost,
knn_uniform, knn_distance, krr, svr. Distance-based learners (knn, krr,
svr) standardize features internally with training-set statistics; tree
learners split on raw encodings. All learners are deterministic given
(kind, params, seed).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any, Mapping

import numpy as np

from ..dataset import DesignMatrix, ScalerStats
from ..errors import (
    BadParamError,
    ColumnMismatchError,
    KTooLargeError,
    NonFiniteError,
    TooFewSamplesError,
    UnsupportedImportanceError,
)
from . import adaboost as _ada
from . import forest as _forest
from . import gbm as _gbm
from . import krr as _krr
from . import neighbors as _knn
from . import svr as _svr
from .cart import grow_tree, tree_predict

CART = "cart"
RF = "rf"
GBM_LEAFWISE = "gbm_leafwise"
GBM_LEVELWISE = "gbm_levelwise"
ADABOOST = "adaboost"
KNN_UNIFORM = "knn_uniform"
KNN_DISTANCE = "knn_distance"
KRR = "krr"
SVR = "svr"

KINDS = (CART, RF, GBM_LEAFWISE, GBM_LEVELWISE, ADABOOST,
         KNN_UNIFORM, KNN_DISTANCE, KRR, SVR)

TREE_KINDS = (CART, RF, GBM_LEAFWISE, GBM_LEVELWISE, ADABOOST)
STANDARDIZED_KINDS = (KNN_UNIFORM, KNN_DISTANCE, KRR, SVR)

DISPLAY_NAMES = {
    CART: "CART",
    RF: "RF",
    GBM_LEAFWISE: "GBM-LeafWise",
    GBM_LEVELWISE: "GBM-LevelWise",
    ADABOOST: "AdaBoost",
    KNN_UNIFORM: "KNN-Uniform",
    KNN_DISTANCE: "KNN-Distance",
    KRR: "KRR",
    SVR: "SVR",
}


@dataclass(frozen=True)
class ParamRule:
    default: Any
    type: str  # "int" | "float" | "bool" | "choice"
    lo: float | None = None
    hi: float | None = None
    lo_open: bool = False
    choices: tuple = ()
    optional: bool = False  # None allowed


_TREE_RULES = {
    "max_depth": ParamRule(None, "int", lo=1, optional=True),
    "min_samples_leaf": ParamRule(1, "int", lo=1),
}

_GBM_COMMON = {
    "n_rounds": ParamRule(100, "int", lo=1),
    "learning_rate": ParamRule(0.1, "float", lo=0.0, hi=1.0, lo_open=True),
    "subsample_fraction": ParamRule(1.0, "float", lo=0.0, hi=1.0, lo_open=True),
    "min_samples_leaf": ParamRule(1, "int", lo=1),
}

PARAM_TABLES: dict[str, dict[str, ParamRule]] = {
    CART: dict(_TREE_RULES),
    RF: {
        **_TREE_RULES,
        "n_trees": ParamRule(100, "int", lo=1),
        "bootstrap": ParamRule(True, "bool"),
        "max_features_fraction": ParamRule(1.0, "float", lo=0.0, hi=1.0, lo_open=True),
    },
    GBM_LEAFWISE: {
        **_GBM_COMMON,
        "max_leaves": ParamRule(31, "int", lo=1, optional=True),
        "l2_leaf_reg": ParamRule(0.0, "float", lo=0.0),
    },
    GBM_LEVELWISE: {
        **_GBM_COMMON,
        "max_depth": ParamRule(6, "int", lo=1, optional=True),
        "l2_leaf_reg": ParamRule(1.0, "float", lo=0.0),
    },
    ADABOOST: {
        "n_estimators": ParamRule(50, "int", lo=1),
        "loss": ParamRule("linear", "choice", choices=_ada.LOSSES),
        "max_depth": ParamRule(3, "int", lo=1, optional=True),
        "min_samples_leaf": ParamRule(1, "int", lo=1),
    },
    KNN_UNIFORM: {"k": ParamRule(5, "int", lo=1)},
    KNN_DISTANCE: {"k": ParamRule(5, "int", lo=1)},
    KRR: {
        "alpha": ParamRule(1e-3, "float", lo=0.0),
        "kernel": ParamRule("rbf", "choice", choices=("rbf", "linear")),
        "gamma": ParamRule(None, "float", lo=0.0, lo_open=True, optional=True),
    },
    SVR: {
        "c": ParamRule(1.0, "float", lo=0.0, lo_open=True),
        "epsilon": ParamRule(0.1, "float", lo=0.0),
        "gamma": ParamRule(None, "float", lo=0.0, lo_open=True, optional=True),
        "tol": ParamRule(1e-3, "float", lo=0.0, lo_open=True),
        "max_iter": ParamRule(100_000, "int", lo=1),
    },
}


def validate_params(kind: str, params: Mapping[str, Any]) -> dict[str, Any]:
    """Fill defaults and range-check against the kind's declared space."""
    if kind not in PARAM_TABLES:
        raise BadParamError(f"unknown learner kind '{kind}'")
    table = PARAM_TABLES[kind]
    unknown = sorted(set(params) - set(table))
    if unknown:
        raise BadParamError(f"{kind}: unknown params {unknown}")
    out: dict[str, Any] = {}
    for name, rule in table.items():
        v = params.get(name, rule.default)
        if v is None:
            if not rule.optional:
                raise BadParamError(f"{kind}: param '{name}' may not be None")
            out[name] = None
            continue
        if rule.type == "bool":
            if not isinstance(v, bool):
                raise BadParamError(f"{kind}: param '{name}' must be a bool, got {v!r}")
        elif rule.type == "choice":
            if v not in rule.choices:
                raise BadParamError(
                    f"{kind}: param '{name}' must be one of {list(rule.choices)}, got {v!r}"
                )
        elif rule.type == "int":
            if isinstance(v, bool) or not isinstance(v, int):
                raise BadParamError(f"{kind}: param '{name}' must be an int, got {v!r}")
        else:
            if isinstance(v, bool) or not isinstance(v, (int, float)) or not math.isfinite(v):
                raise BadParamError(f"{kind}: param '{name}' must be a finite number, got {v!r}")
            v = float(v)
        if rule.type in ("int", "float"):
            if rule.lo is not None and (v < rule.lo or (rule.lo_open and v == rule.lo)):
                raise BadParamError(f"{kind}: param '{name}'={v} below allowed range")
            if rule.hi is not None and v > rule.hi:
                raise BadParamError(f"{kind}: param '{name}'={v} above allowed range")
        out[name] = v
    return out


@dataclass(frozen=True)
class LearnerSpec:
    kind: str
    params: dict[str, Any] = field(default_factory=dict)
    seed: int = 0

    def __post_init__(self) -> None:
        object.__setattr__(self, "params", validate_params(self.kind, self.params))
        if not isinstance(self.seed, int) or isinstance(self.seed, bool):
            raise BadParamError(f"seed must be an int, got {self.seed!r}")

    @property
    def display_name(self) -> str:
        return DISPLAY_NAMES[self.kind]

    def with_params(self, **updates: Any) -> "LearnerSpec":
        return LearnerSpec(self.kind, {**self.params, **updates}, self.seed)

    def to_dict(self) -> dict:
        return {"kind": self.kind, "params": dict(self.params), "seed": self.seed}

    @classmethod
    def from_dict(cls, d: Mapping) -> "LearnerSpec":
        return cls(d["kind"], dict(d.get("params", {})), int(d.get("seed", 0)))


@dataclass
class TrainedRegressor:
    spec: LearnerSpec
    columns: tuple[str, ...]
    column_provenance: dict[str, str]
    scaler: ScalerStats | None
    state: Any


def fit(spec: LearnerSpec, matrix: DesignMatrix, y: np.ndarray) -> TrainedRegressor:
    X = matrix.data
    y = np.asarray(y, dtype=float)
    n = X.shape[0]
    if y.shape != (n,):
        raise ColumnMismatchError(f"y shape {y.shape} does not match {n} rows")
    if not (np.isfinite(X).all() and np.isfinite(y).all()):
        raise NonFiniteError("training data contains non-finite values")
    minimum = 2 if spec.kind in (KRR, SVR) else 1
    if n < minimum:
        raise TooFewSamplesError(f"{spec.kind} needs >= {minimum} samples, got {n}")
    if spec.kind in (KNN_UNIFORM, KNN_DISTANCE) and spec.params["k"] > n:
        raise KTooLargeError(f"k={spec.params['k']} exceeds {n} training samples")

    scaler = None
    if spec.kind in STANDARDIZED_KINDS:
        if n == 1:
            scaler = ScalerStats(X[0].copy(), np.ones(X.shape[1]))
        else:
            scaler = ScalerStats.from_array(X)
        X = scaler.transform_array(X)

    p, seed = spec.params, spec.seed
    if spec.kind == CART:
        state = grow_tree(X, y, np.arange(n), max_depth=p["max_depth"],
                          min_leaf=p["min_samples_leaf"])
    elif spec.kind == RF:
        state = _forest.fit_forest(p, seed, X, y)
    elif spec.kind == GBM_LEAFWISE:
        state = _gbm.fit_gbm(p, seed, X, y, _gbm.LEAFWISE)
    elif spec.kind == GBM_LEVELWISE:
        state = _gbm.fit_gbm(p, seed, X, y, _gbm.LEVELWISE)
    elif spec.kind == ADABOOST:
        state = _ada.fit_adaboost(p, seed, X, y)
    elif spec.kind == KNN_UNIFORM:
        state = _knn.fit_knn(p, X, y, "uniform")
    elif spec.kind == KNN_DISTANCE:
        state = _knn.fit_knn(p, X, y, "distance")
    elif spec.kind == KRR:
        state = _krr.fit_krr(p, X, y)
    else:
        state = _svr.fit_svr(p, X, y)
    return TrainedRegressor(spec, matrix.columns, matrix.column_provenance, scaler, state)


def predict(model: TrainedRegressor, matrix: DesignMatrix) -> np.ndarray:
    if tuple(matrix.columns) != tuple(model.columns):
        raise ColumnMismatchError(
            f"matrix columns do not match the model "
            f"({len(matrix.columns)} vs {len(model.columns)} columns)"
        )
    X = matrix.data
    if model.scaler is not None:
        X = model.scaler.transform_array(X)
    kind = model.spec.kind
    if kind == CART:
        out = tree_predict(model.state, X)
    elif kind == RF:
        out = _forest.predict_forest(model.state, X)
    elif kind in (GBM_LEAFWISE, GBM_LEVELWISE):
        out = _gbm.predict_gbm(model.state, X)
    elif kind == ADABOOST:
        out = _ada.predict_adaboost(model.state, X)
    elif kind in (KNN_UNIFORM, KNN_DISTANCE):
        out = _knn.predict_knn(model.state, X)
    elif kind == KRR:
        out = _krr.predict_krr(model.state, X)
    else:
        out = _svr.predict_svr(model.state, X)
    if len(out) and not np.isfinite(out).all():
        raise NonFiniteError(f"{kind} produced non-finite predictions")
    return out


@dataclass(frozen=True)
class ImportanceReport:
    """Normalized split-importance weights, per encoded column and per source feature."""

    by_column: dict[str, float]
    by_feature: dict[str, float]


def feature_importance(model: TrainedRegressor) -> ImportanceReport:
    """Impurity-decrease importances aggregated over trees, normalized to sum 1.

    AdaBoost trees are weighted by their estimator weight. All-zero when the
    model never split. Raises for learners without split structure.
    """
    kind = model.spec.kind
    if kind not in TREE_KINDS:
        raise UnsupportedImportanceError(f"feature importance unavailable for '{kind}'")
    if kind == CART:
        trees, weights = [model.state], [1.0]
    elif kind == ADABOOST:
        trees, weights = model.state.trees, model.state.weights
    else:
        trees, weights = model.state.trees, [1.0] * len(model.state.trees)
    total = np.zeros(len(model.columns))
    for tree, w in zip(trees, weights):
        total += w * tree.importance
    s = total.sum()
    if s > 0:
        total = total / s
    by_column = {col: float(v) for col, v in zip(model.columns, total)}
    by_feature: dict[str, float] = {}
    for col, v in by_column.items():
        source = model.column_provenance.get(col, col)
        by_feature[source] = by_feature.get(source, 0.0) + v
    return ImportanceReport(by_column, by_feature)
