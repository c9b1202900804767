"""Versioned JSON persistence for trained regressors.

Documents carry {format_version, spec, columns, scaler stats} plus the
learner-specific parameter arrays. JSON float serialization uses repr, so
a load/predict round trip is bit-identical.
"""

from __future__ import annotations

import json
from pathlib import Path
from typing import Any

from ..dataset import ScalerStats
from ..errors import BadValueError, FormatVersionError
from . import (
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
    TrainedRegressor,
)
from .adaboost import AdaBoostState
from .cart import Tree
from .forest import ForestState
from .gbm import GbmState
from .krr import KrrState
from .neighbors import KnnState
from .svr import SvrState

REGRESSOR_FORMAT_VERSION = 1

_STATE_TYPES = {
    CART: Tree,
    RF: ForestState,
    GBM_LEAFWISE: GbmState,
    GBM_LEVELWISE: GbmState,
    ADABOOST: AdaBoostState,
    KNN_UNIFORM: KnnState,
    KNN_DISTANCE: KnnState,
    KRR: KrrState,
    SVR: SvrState,
}


def regressor_to_dict(model: TrainedRegressor, metadata: dict[str, Any] | None = None) -> dict:
    doc = {
        "format_version": REGRESSOR_FORMAT_VERSION,
        "kind": "regressor",
        "metadata": dict(metadata or {}),
        "spec": model.spec.to_dict(),
        "columns": list(model.columns),
        "column_provenance": dict(model.column_provenance),
        "scaler": None if model.scaler is None else model.scaler.to_dict(),
        "state": model.state.to_dict(),
    }
    return doc


def regressor_from_dict(doc: dict) -> TrainedRegressor:
    version = doc.get("format_version")
    if version != REGRESSOR_FORMAT_VERSION:
        raise FormatVersionError(
            f"unsupported regressor format_version {version!r}, expected {REGRESSOR_FORMAT_VERSION}"
        )
    if doc.get("kind") != "regressor":
        raise BadValueError(f"not a regressor document (kind={doc.get('kind')!r})")
    spec = LearnerSpec.from_dict(doc["spec"])
    scaler = None if doc["scaler"] is None else ScalerStats.from_dict(doc["scaler"])
    state = _STATE_TYPES[spec.kind].from_dict(doc["state"])
    return TrainedRegressor(
        spec=spec,
        columns=tuple(doc["columns"]),
        column_provenance=dict(doc["column_provenance"]),
        scaler=scaler,
        state=state,
    )


def save_regressor(model: TrainedRegressor, path: str | Path,
                   metadata: dict[str, Any] | None = None) -> None:
    Path(path).write_text(json.dumps(regressor_to_dict(model, metadata), indent=1),
                          encoding="utf-8")


def load_regressor(path: str | Path) -> TrainedRegressor:
    return regressor_from_dict(json.loads(Path(path).read_text(encoding="utf-8")))
