"""Pipeline configuration: one self-describing JSON file, flags may override keys.

Defaults: SPXY 80/20 split on standardized features, 10-fold
cross-validation, the per-target learner roster, and the per-target
stacking preset.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Mapping

from .dataset import TARGET_KR, TARGET_PLQY, TARGET_WAVELENGTH, TargetSpec
from .errors import ConfigError
from .learners import (
    ADABOOST,
    GBM_LEAFWISE,
    GBM_LEVELWISE,
    KNN_DISTANCE,
    KNN_UNIFORM,
    KRR,
    RF,
    SVR,
    LearnerSpec,
)
from .stacking import OUT_OF_FOLD, StackArchitecture
from .tuning import Choice, IntUniform, LogUniform, Uniform

# single-learner roster per target (the wavelength table has no second
# boosted-tree row; the other two targets carry both growth policies)
DEFAULT_ROSTERS = {
    TARGET_WAVELENGTH: (KNN_UNIFORM, KNN_DISTANCE, SVR, KRR, RF, GBM_LEAFWISE, ADABOOST),
    TARGET_KR: (KNN_UNIFORM, KNN_DISTANCE, SVR, KRR, RF, GBM_LEAFWISE, ADABOOST, GBM_LEVELWISE),
    TARGET_PLQY: (KNN_UNIFORM, KNN_DISTANCE, SVR, KRR, RF, GBM_LEAFWISE, ADABOOST, GBM_LEVELWISE),
}

# meta-learner comparison roster per target
DEFAULT_META_CANDIDATES = {
    TARGET_WAVELENGTH: (KRR, SVR, GBM_LEAFWISE, KNN_DISTANCE),
    TARGET_KR: (KRR, SVR, GBM_LEAFWISE, KNN_DISTANCE),
    TARGET_PLQY: (KRR, SVR, RF, KNN_DISTANCE),
}

_DIST_TYPES = {"uniform": Uniform, "log_uniform": LogUniform,
               "int_uniform": IntUniform, "choice": Choice}


def space_from_dict(d: Mapping) -> dict:
    """Parse {"param": {"type": "...", ...}} into distribution objects."""
    space = {}
    for name, entry in d.items():
        kind = entry.get("type")
        if kind not in _DIST_TYPES:
            raise ConfigError(f"search space '{name}': unknown distribution type {kind!r}")
        if kind == "choice":
            space[name] = Choice(tuple(entry["values"]))
        else:
            space[name] = _DIST_TYPES[kind](entry["lo"], entry["hi"])
    return space


def space_to_dict(space: Mapping) -> dict:
    out = {}
    for name, dist in space.items():
        if isinstance(dist, Choice):
            out[name] = {"type": "choice", "values": list(dist.values)}
        elif isinstance(dist, Uniform):
            out[name] = {"type": "uniform", "lo": dist.lo, "hi": dist.hi}
        elif isinstance(dist, LogUniform):
            out[name] = {"type": "log_uniform", "lo": dist.lo, "hi": dist.hi}
        else:
            out[name] = {"type": "int_uniform", "lo": dist.lo, "hi": dist.hi}
    return out


@dataclass(frozen=True)
class PipelineConfig:
    dataset: str
    target: TargetSpec
    output_dir: str
    seed: int = 0
    train_fraction: float = 0.8
    spxy_on_standardized: bool = True
    k: int = 10
    learners: tuple[LearnerSpec, ...] = ()
    stack: StackArchitecture | None = None
    meta_candidates: tuple[str, ...] = ()
    tuning_budget: int = 0
    tuning_learners: tuple[str, ...] = ()
    tuning_spaces: dict = field(default_factory=dict)

    def __post_init__(self) -> None:
        if not self.learners:
            roster = tuple(
                LearnerSpec(kind, seed=self.seed) for kind in DEFAULT_ROSTERS[self.target.kind]
            )
            object.__setattr__(self, "learners", roster)
        if self.stack is None:
            object.__setattr__(self, "stack", StackArchitecture.preset(self.target.kind, self.seed))
        if not self.meta_candidates:
            object.__setattr__(self, "meta_candidates", DEFAULT_META_CANDIDATES[self.target.kind])
        if self.tuning_budget and not self.tuning_learners:
            object.__setattr__(self, "tuning_learners",
                               tuple(s.kind for s in self.learners))

    def to_dict(self) -> dict:
        return {
            "dataset": self.dataset,
            "target": self.target.to_dict(),
            "output_dir": self.output_dir,
            "seed": self.seed,
            "split": {
                "train_fraction": self.train_fraction,
                "spxy_on_standardized": self.spxy_on_standardized,
                "k": self.k,
            },
            "learners": [s.to_dict() for s in self.learners],
            "stack": self.stack.to_dict(),
            "meta_candidates": list(self.meta_candidates),
            "tuning": {
                "budget": self.tuning_budget,
                "learners": list(self.tuning_learners),
                "spaces": {k: space_to_dict(v) for k, v in self.tuning_spaces.items()},
            },
        }

    @classmethod
    def from_dict(cls, d: Mapping) -> "PipelineConfig":
        try:
            dataset_path = d["dataset"]
            output_dir = d["output_dir"]
            raw_target = d["target"]
        except KeyError as exc:
            raise ConfigError(f"config is missing required key {exc}") from None
        target = (TargetSpec.for_kind(raw_target) if isinstance(raw_target, str)
                  else TargetSpec.from_dict(raw_target))
        split = d.get("split", {})
        seed = int(d.get("seed", 0))

        learners: tuple[LearnerSpec, ...] = ()
        if d.get("learners"):
            parsed = []
            for entry in d["learners"]:
                if isinstance(entry, str):
                    parsed.append(LearnerSpec(entry, seed=seed))
                else:
                    entry = dict(entry)
                    entry.setdefault("seed", seed)
                    parsed.append(LearnerSpec.from_dict(entry))
            learners = tuple(parsed)

        stack = None
        raw_stack = d.get("stack")
        if raw_stack:
            if "base_specs" in raw_stack:
                stack = StackArchitecture.from_dict(raw_stack)
            else:
                stack = StackArchitecture.preset(
                    target.kind, seed, oof_mode=raw_stack.get("oof_mode", OUT_OF_FOLD)
                )

        tuning = d.get("tuning", {})
        spaces = {k: space_from_dict(v) for k, v in tuning.get("spaces", {}).items()}
        return cls(
            dataset=dataset_path,
            target=target,
            output_dir=output_dir,
            seed=seed,
            train_fraction=float(split.get("train_fraction", 0.8)),
            spxy_on_standardized=bool(split.get("spxy_on_standardized", True)),
            k=int(split.get("k", 10)),
            learners=learners,
            stack=stack,
            meta_candidates=tuple(d.get("meta_candidates", ())),
            tuning_budget=int(tuning.get("budget", 0)),
            tuning_learners=tuple(tuning.get("learners", ())),
            tuning_spaces=spaces,
        )

    @classmethod
    def load(cls, path: str | Path, overrides: Mapping[str, Any] | None = None) -> "PipelineConfig":
        try:
            raw = json.loads(Path(path).read_text(encoding="utf-8"))
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{path}: invalid JSON ({exc})") from exc
        except OSError as exc:
            raise ConfigError(f"{path}: {exc}") from exc
        if overrides:
            for key, value in overrides.items():
                if value is None:
                    continue
                if key in ("train_fraction", "k", "spxy_on_standardized"):
                    raw.setdefault("split", {})[key] = value
                elif key == "budget":
                    raw.setdefault("tuning", {})["budget"] = value
                else:
                    raw[key] = value
        return cls.from_dict(raw)

    def save(self, path: str | Path) -> None:
        Path(path).write_text(json.dumps(self.to_dict(), indent=1), encoding="utf-8")

    @property
    def config_hash(self) -> str:
        canonical = json.dumps(self.to_dict(), sort_keys=True)
        return hashlib.sha256(canonical.encode("utf-8")).hexdigest()
