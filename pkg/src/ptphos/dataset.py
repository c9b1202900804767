"""Descriptor schema, tabular ingestion, design-matrix encoding and target transforms.

The default schema describes one row per Pt(II) emitter: emission energy,
coordination geometry and bond types, electron densities, spin-orbit
couplings, charge-transfer descriptors per excited state, frontier-orbital
energies, dipole moment, oscillator strength, calculated wavelength and
rate constant, and the medium's refractive index. Targets (emission
wavelength in nm, radiative rate constant in 1/s, PL quantum yield) are
optional per sample.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping

import numpy as np

from .errors import (
    BadLevelError,
    BadValueError,
    DuplicateIdError,
    EmptyMatrixError,
    MissingColumnError,
    MissingTargetError,
    MissingValueError,
    OutOfRangeError,
    UnknownColumnError,
)

NUMERIC = "numeric"
CATEGORICAL = "categorical"

TARGET_WAVELENGTH = "wavelength"
TARGET_KR = "kr"
TARGET_PLQY = "plqy"
TARGET_KINDS = (TARGET_WAVELENGTH, TARGET_KR, TARGET_PLQY)

# dataset column per target kind
TARGET_COLUMNS = {
    TARGET_WAVELENGTH: "wavelength_nm",
    TARGET_KR: "kr_per_s",
    TARGET_PLQY: "plqy",
}

BOND_TYPE_LEVELS = ("Pt-C", "Pt-N", "Pt-O", "Pt-Cl")
DEFAULT_STATE_LABELS = ("S1", "T1", "T2", "T3")

CALC_WAVELENGTH = "Calc_lambda"
CALC_KR = "Calc_kr"


@dataclass(frozen=True)
class Feature:
    """One descriptor column: numeric, or categorical with a fixed level order."""

    name: str
    kind: str = NUMERIC
    levels: tuple[str, ...] = ()
    unit: str = ""
    required: bool = True

    def __post_init__(self) -> None:
        if self.kind not in (NUMERIC, CATEGORICAL):
            raise BadValueError(f"feature '{self.name}': unknown kind '{self.kind}'")
        if self.kind == CATEGORICAL:
            if not self.levels:
                raise BadValueError(f"feature '{self.name}': categorical needs levels")
            if len(set(self.levels)) != len(self.levels):
                raise BadValueError(f"feature '{self.name}': duplicate levels")
        elif self.levels:
            raise BadValueError(f"feature '{self.name}': numeric feature has levels")


@dataclass(frozen=True)
class FeatureSchema:
    features: tuple[Feature, ...]
    excited_state_labels: tuple[str, ...] = DEFAULT_STATE_LABELS

    def __post_init__(self) -> None:
        names = [f.name for f in self.features]
        if len(set(names)) != len(names):
            dupes = sorted({n for n in names if names.count(n) > 1})
            raise BadValueError(f"duplicate feature names: {dupes}")

    @property
    def feature_names(self) -> tuple[str, ...]:
        return tuple(f.name for f in self.features)

    def feature(self, name: str) -> Feature:
        for f in self.features:
            if f.name == name:
                return f
        raise UnknownColumnError(f"no feature named '{name}'")

    def encoded_layout(self, mask: frozenset[str] = frozenset()) -> tuple[tuple[str, ...], dict[str, str]]:
        """Column names and column->source-feature map after one-hot encoding.

        The order is a pure function of the schema (and mask): features in
        declaration order, categorical levels in declared order.
        """
        columns: list[str] = []
        provenance: dict[str, str] = {}
        for f in self.features:
            if f.name in mask:
                continue
            if f.kind == NUMERIC:
                columns.append(f.name)
                provenance[f.name] = f.name
            else:
                for level in f.levels:
                    col = f"{f.name}={level}"
                    columns.append(col)
                    provenance[col] = f.name
        return tuple(columns), provenance


def default_schema(state_labels: tuple[str, ...] = DEFAULT_STATE_LABELS) -> FeatureSchema:
    """Full Pt(II)-emitter descriptor table (51 encoded columns with 4 states)."""
    features: list[Feature] = [Feature("nu", unit="cm^-1")]
    for i in range(1, 5):
        features.append(Feature(f"coor_bond_length{i}", unit="angstrom"))
    for i in range(1, 5):
        features.append(Feature(f"coor_bond_type{i}", kind=CATEGORICAL, levels=BOND_TYPE_LEVELS))
    features.append(Feature("rho_Pt", unit="a.u."))
    for i in range(1, 5):
        features.append(Feature(f"rho_coor{i}", unit="a.u."))
    features.append(Feature("H_T1_S0", unit="cm^-1"))
    features.append(Feature("H_T1_S1", unit="cm^-1"))
    for state in state_labels:
        features.append(Feature(f"R_EH_{state}_a", unit="angstrom"))
        features.append(Feature(f"R_EH_{state}_b", unit="angstrom"))
    for state in state_labels:
        features.append(Feature(f"LAMBDA_{state}"))
    for state in state_labels:
        features.append(Feature(f"CT_{state}"))
    features.append(Feature("HOMO", unit="eV"))
    features.append(Feature("LUMO", unit="eV"))
    features.append(Feature("mu", unit="debye"))
    features.append(Feature("f"))
    features.append(Feature(CALC_WAVELENGTH, unit="nm"))
    features.append(Feature(CALC_KR, unit="s^-1"))
    features.append(Feature("refractive_index"))
    return FeatureSchema(tuple(features), tuple(state_labels))


@dataclass(frozen=True)
class Sample:
    id: str
    values: Mapping[str, float | str]
    targets: Mapping[str, float] = field(default_factory=dict)


def validate_sample(schema: FeatureSchema, sample: Sample) -> None:
    known = set(schema.feature_names)
    for key in sample.values:
        if key not in known:
            raise UnknownColumnError(f"sample '{sample.id}': unknown feature '{key}'")
    for f in schema.features:
        if f.name not in sample.values:
            if f.required:
                raise MissingValueError(f"sample '{sample.id}': missing value for '{f.name}'")
            continue
        v = sample.values[f.name]
        if f.kind == CATEGORICAL:
            if v not in f.levels:
                raise BadLevelError(
                    f"sample '{sample.id}': '{f.name}' has level '{v}', expected one of {list(f.levels)}"
                )
        else:
            if not isinstance(v, (int, float)) or isinstance(v, bool) or not math.isfinite(float(v)):
                raise BadValueError(f"sample '{sample.id}': '{f.name}' is not a finite number: {v!r}")
    for key, v in sample.targets.items():
        if key not in TARGET_COLUMNS.values():
            raise UnknownColumnError(f"sample '{sample.id}': unknown target '{key}'")
        if not isinstance(v, (int, float)) or not math.isfinite(float(v)):
            raise BadValueError(f"sample '{sample.id}': target '{key}' is not finite: {v!r}")
        if key == "wavelength_nm" and not v > 0:
            raise OutOfRangeError(f"sample '{sample.id}': wavelength_nm must be > 0, got {v}")
        if key == "kr_per_s" and not v > 0:
            raise OutOfRangeError(f"sample '{sample.id}': kr_per_s must be > 0, got {v}")
        if key == "plqy" and not (0.0 <= v <= 1.0):
            raise OutOfRangeError(f"sample '{sample.id}': plqy must be in [0, 1], got {v}")


@dataclass(frozen=True)
class Dataset:
    schema: FeatureSchema
    samples: tuple[Sample, ...]

    def __post_init__(self) -> None:
        seen: set[str] = set()
        for s in self.samples:
            if s.id in seen:
                raise DuplicateIdError(f"duplicate sample id '{s.id}'")
            seen.add(s.id)
            validate_sample(self.schema, s)

    def __len__(self) -> int:
        return len(self.samples)

    @property
    def ids(self) -> tuple[str, ...]:
        return tuple(s.id for s in self.samples)


@dataclass(frozen=True)
class TargetSpec:
    """Which property to model, in which space, and which descriptors to withhold."""

    kind: str
    transform: str = "identity"
    feature_mask: frozenset[str] = frozenset()

    def __post_init__(self) -> None:
        if self.kind not in TARGET_KINDS:
            raise BadValueError(f"unknown target kind '{self.kind}'")
        if self.transform not in ("identity", "log10"):
            raise BadValueError(f"unknown transform '{self.transform}'")
        if self.kind == TARGET_KR and self.transform != "log10":
            raise BadValueError("kr target must use the log10 transform")
        if self.kind == TARGET_PLQY and not {CALC_WAVELENGTH, CALC_KR} <= self.feature_mask:
            raise BadValueError(
                f"plqy target must mask {CALC_WAVELENGTH} and {CALC_KR}"
            )
        object.__setattr__(self, "feature_mask", frozenset(self.feature_mask))

    @classmethod
    def for_kind(cls, kind: str) -> "TargetSpec":
        if kind == TARGET_KR:
            return cls(kind, transform="log10")
        if kind == TARGET_PLQY:
            return cls(kind, feature_mask=frozenset({CALC_WAVELENGTH, CALC_KR}))
        return cls(kind)

    @property
    def target_column(self) -> str:
        return TARGET_COLUMNS[self.kind]

    def transform_value(self, v: float) -> float:
        return math.log10(v) if self.transform == "log10" else float(v)

    def inverse_transform(self, values: np.ndarray) -> np.ndarray:
        values = np.asarray(values, dtype=float)
        return np.power(10.0, values) if self.transform == "log10" else values

    def clip_for_report(self, values: np.ndarray) -> np.ndarray:
        """Output-side clipping; never applied during training."""
        values = np.asarray(values, dtype=float)
        if self.kind == TARGET_PLQY:
            return np.clip(values, 0.0, 1.0)
        return values

    @property
    def report_unit(self) -> str:
        if self.kind == TARGET_WAVELENGTH:
            return "nm"
        if self.kind == TARGET_KR:
            return "log10 s^-1"
        return ""

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "transform": self.transform,
            "feature_mask": sorted(self.feature_mask),
        }

    @classmethod
    def from_dict(cls, d: Mapping) -> "TargetSpec":
        return cls(d["kind"], d.get("transform", "identity"),
                   frozenset(d.get("feature_mask", ())))


@dataclass(frozen=True)
class DesignMatrix:
    """Numeric encoding of a dataset: ordered columns plus their source features."""

    columns: tuple[str, ...]
    data: np.ndarray
    column_provenance: dict[str, str]

    def __post_init__(self) -> None:
        data = np.array(self.data, dtype=float, order="C")  # own copy; caller's array untouched
        if data.ndim != 2 or data.shape[1] != len(self.columns):
            raise BadValueError(
                f"data shape {data.shape} does not match {len(self.columns)} columns"
            )
        data.flags.writeable = False
        object.__setattr__(self, "data", data)

    @property
    def n_rows(self) -> int:
        return self.data.shape[0]

    @property
    def n_columns(self) -> int:
        return self.data.shape[1]

    def take(self, rows: Iterable[int]) -> "DesignMatrix":
        idx = np.asarray(list(rows), dtype=int)
        return DesignMatrix(self.columns, self.data[idx], self.column_provenance)

    def with_data(self, data: np.ndarray) -> "DesignMatrix":
        return DesignMatrix(self.columns, data, self.column_provenance)


def load_dataset(path: str | Path, schema: FeatureSchema) -> Dataset:
    """Read a UTF-8 comma-separated file into a validated Dataset.

    First row is the header; required columns are `id` and every schema
    feature; targets (`wavelength_nm`, `kr_per_s`, `plqy`) are optional.
    Empty cells mean missing. Row order is preserved.
    """
    path = Path(path)
    with path.open(newline="", encoding="utf-8") as handle:
        reader = csv.reader(handle)
        try:
            header = next(reader)
        except StopIteration:
            raise MissingColumnError(f"{path}: empty file") from None
        header = [h.strip() for h in header]
        if len(set(header)) != len(header):
            dupes = sorted({h for h in header if header.count(h) > 1})
            raise UnknownColumnError(f"{path}: duplicate columns {dupes}")
        if "id" not in header:
            raise MissingColumnError(f"{path}: missing 'id' column")
        missing = [n for n in schema.feature_names if n not in header]
        if missing:
            raise MissingColumnError(f"{path}: missing feature columns {missing}")
        allowed = {"id", *schema.feature_names, *TARGET_COLUMNS.values()}
        unknown = [h for h in header if h not in allowed]
        if unknown:
            raise UnknownColumnError(f"{path}: unknown columns {unknown}")
        col_index = {name: i for i, name in enumerate(header)}

        samples: list[Sample] = []
        for row_number, row in enumerate(reader, start=2):
            if not row or all(not cell.strip() for cell in row):
                continue
            if len(row) != len(header):
                raise BadValueError(
                    f"{path}: line {row_number} has {len(row)} cells, expected {len(header)}"
                )
            sample_id = row[col_index["id"]].strip()
            if not sample_id:
                raise BadValueError(f"{path}: line {row_number} has an empty id")
            values: dict[str, float | str] = {}
            for f in schema.features:
                cell = row[col_index[f.name]].strip()
                if cell == "":
                    continue
                if f.kind == CATEGORICAL:
                    values[f.name] = cell
                else:
                    try:
                        values[f.name] = float(cell)
                    except ValueError:
                        raise BadValueError(
                            f"sample '{sample_id}': cannot parse '{f.name}' value '{cell}'"
                        ) from None
            targets: dict[str, float] = {}
            for col in TARGET_COLUMNS.values():
                if col not in col_index:
                    continue
                cell = row[col_index[col]].strip()
                if cell == "":
                    continue
                try:
                    targets[col] = float(cell)
                except ValueError:
                    raise BadValueError(
                        f"sample '{sample_id}': cannot parse '{col}' value '{cell}'"
                    ) from None
            samples.append(Sample(sample_id, values, targets))
    return Dataset(schema, tuple(samples))


def encode(dataset: Dataset, target: TargetSpec) -> tuple[DesignMatrix, np.ndarray]:
    """Encode samples into a numeric matrix and the transformed target vector.

    Categorical features become one-hot groups in declared level order;
    masked features are omitted entirely.
    """
    columns, provenance = dataset.schema.encoded_layout(target.feature_mask)
    col_pos = {c: i for i, c in enumerate(columns)}
    n, d = len(dataset.samples), len(columns)
    data = np.zeros((n, d))
    y = np.empty(n)
    for i, sample in enumerate(dataset.samples):
        if target.target_column not in sample.targets:
            raise MissingTargetError(
                f"sample '{sample.id}' has no '{target.target_column}' target"
            )
        y[i] = target.transform_value(sample.targets[target.target_column])
        for f in dataset.schema.features:
            if f.name in target.feature_mask or f.name not in sample.values:
                continue
            v = sample.values[f.name]
            if f.kind == CATEGORICAL:
                data[i, col_pos[f"{f.name}={v}"]] = 1.0
            else:
                data[i, col_pos[f.name]] = float(v)
    return DesignMatrix(columns, data, provenance), y


def encode_features(dataset: Dataset, target: TargetSpec) -> DesignMatrix:
    """Encode features only (targets may be absent), e.g. for prediction."""
    columns, provenance = dataset.schema.encoded_layout(target.feature_mask)
    col_pos = {c: i for i, c in enumerate(columns)}
    data = np.zeros((len(dataset.samples), len(columns)))
    for i, sample in enumerate(dataset.samples):
        for f in dataset.schema.features:
            if f.name in target.feature_mask or f.name not in sample.values:
                continue
            v = sample.values[f.name]
            if f.kind == CATEGORICAL:
                data[i, col_pos[f"{f.name}={v}"]] = 1.0
            else:
                data[i, col_pos[f.name]] = float(v)
    return DesignMatrix(columns, data, provenance)


@dataclass(frozen=True)
class ScalerStats:
    """Per-column mean and scale; zero-variance columns keep scale 1."""

    mean: np.ndarray
    scale: np.ndarray

    @classmethod
    def from_array(cls, data: np.ndarray) -> "ScalerStats":
        data = np.asarray(data, dtype=float)
        if data.ndim != 2 or data.shape[0] < 2:
            raise EmptyMatrixError(f"scaler fit needs >= 2 rows, got shape {data.shape}")
        mean = data.mean(axis=0)
        std = data.std(axis=0)  # population (1/n) std
        scale = np.where(std == 0.0, 1.0, std)
        return cls(mean, scale)

    def transform_array(self, data: np.ndarray) -> np.ndarray:
        return (np.asarray(data, dtype=float) - self.mean) / self.scale

    def to_dict(self) -> dict:
        return {"mean": self.mean.tolist(), "scale": self.scale.tolist()}

    @classmethod
    def from_dict(cls, d: Mapping) -> "ScalerStats":
        return cls(np.asarray(d["mean"], dtype=float), np.asarray(d["scale"], dtype=float))


def fit_scaler(matrix: DesignMatrix) -> ScalerStats:
    return ScalerStats.from_array(matrix.data)


def apply_scaler(matrix: DesignMatrix, stats: ScalerStats) -> DesignMatrix:
    return matrix.with_data(stats.transform_array(matrix.data))
