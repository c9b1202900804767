"""End-to-end orchestration: ingest, split, tune, cross-validate, stack, report.

Every artifact embeds the config hash and seed; two runs with the same
config produce byte-identical files.
"""

from __future__ import annotations

import csv
import json
from contextlib import contextmanager
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Mapping, Sequence

import numpy as np

from .config import PipelineConfig
from .crossval import fold_models, holdout_pairs, testset_pairs
from .dataset import (
    Dataset,
    DesignMatrix,
    TargetSpec,
    default_schema,
    encode,
    encode_features,
    load_dataset,
)
from .errors import (
    ColumnMismatchError,
    ConfigError,
    PtphosError,
    StageError,
    UnsupportedImportanceError,
)
from .learners import (
    DISPLAY_NAMES,
    TREE_KINDS,
    LearnerSpec,
    TrainedRegressor,
    feature_importance,
    fit,
    predict,
)
from .learners.persist import regressor_from_dict, save_regressor
from .metrics import EvalReport, ReportRow, cv_report, mae, r2, rmse, single_report
from .split import SplitPlan, kfold_assign, spxy_split
from .stacking import (
    StackArchitecture,
    StackModel,
    assemble_meta_matrix,
    build_oof_matrix,
    predict_stack,
    save_stack,
    stack_from_dict,
    train_stack,
)
from .tuning import default_space, random_search, trials_to_csv


@contextmanager
def _stage(name: str):
    try:
        yield
    except StageError:
        raise
    except (PtphosError, OSError) as exc:
        raise StageError(name, exc) from exc


def _stamp(config: PipelineConfig) -> str:
    return f"config_sha256={config.config_hash} seed={config.seed}"


def _write_csv(path: Path, rows: Sequence[Sequence[str]], stamp: str) -> None:
    with path.open("w", newline="", encoding="utf-8") as handle:
        handle.write(f"# {stamp}\n")
        csv.writer(handle).writerows(rows)


def _write_report(out_dir: Path, name: str, report: EvalReport, stamp: str, title: str) -> None:
    (out_dir / f"{name}.txt").write_text(
        f"# {stamp}\n{report.to_text(title)}", encoding="utf-8"
    )
    _write_csv(out_dir / f"{name}.csv", report.to_csv_rows(), stamp)


def _write_json(path: Path, payload: dict) -> None:
    path.write_text(json.dumps(payload, indent=1), encoding="utf-8")


@dataclass
class PreparedData:
    dataset: Dataset
    matrix: DesignMatrix
    y: np.ndarray
    plan: SplitPlan

    @property
    def train_matrix(self) -> DesignMatrix:
        return self.matrix.take(self.plan.train_indices)

    @property
    def test_matrix(self) -> DesignMatrix:
        return self.matrix.take(self.plan.test_indices)

    @property
    def y_train(self) -> np.ndarray:
        return self.y[list(self.plan.train_indices)]

    @property
    def y_test(self) -> np.ndarray:
        return self.y[list(self.plan.test_indices)]


def prepare(config: PipelineConfig) -> PreparedData:
    with _stage("load"):
        dataset = load_dataset(config.dataset, default_schema())
    with _stage("encode"):
        matrix, y = encode(dataset, config.target)
    with _stage("split"):
        plan = spxy_split(matrix, y, config.train_fraction,
                          standardize=config.spxy_on_standardized)
        plan = kfold_assign(plan, config.k, config.seed)
    return PreparedData(dataset, matrix, y, plan)


def write_split(config: PipelineConfig, plan: SplitPlan, out_dir: Path) -> Path:
    payload = {
        "config_sha256": config.config_hash,
        "seed": config.seed,
        "fold_index_semantics": "positions into train_indices",
        **plan.to_dict(),
    }
    path = out_dir / "split.json"
    _write_json(path, payload)
    return path


def run_tuning(config: PipelineConfig, prep: PreparedData,
               out_dir: Path) -> dict[str, dict]:
    """Random-search each configured learner kind; returns best params per kind."""
    tuned: dict[str, dict] = {}
    X_tr, y_tr = prep.train_matrix, prep.y_train
    for kind in config.tuning_learners:
        space = config.tuning_spaces.get(kind) or default_space(kind)
        best, trials = random_search(
            kind, space, config.tuning_budget, X_tr, y_tr, prep.plan.folds, config.seed
        )
        trials_to_csv(trials, out_dir / f"trials_{kind}.csv", header_comment=_stamp(config))
        tuned[kind] = dict(best.params)
    return tuned


def _apply_tuned(config: PipelineConfig, tuned: Mapping[str, dict]):
    """Tuned params replace defaults in the roster and the stack architecture."""
    roster = tuple(
        LearnerSpec(s.kind, tuned[s.kind], s.seed) if s.kind in tuned else s
        for s in config.learners
    )
    arch = config.stack
    if tuned:
        bases = tuple(
            LearnerSpec(s.kind, tuned[s.kind], s.seed) if s.kind in tuned else s
            for s in arch.base_specs
        )
        meta = arch.meta_spec
        if meta.kind in tuned:
            meta = LearnerSpec(meta.kind, tuned[meta.kind], meta.seed)
        arch = StackArchitecture(bases, meta, arch.meta_features, arch.oof_mode)
    return roster, arch


def _model_metadata(config: PipelineConfig) -> dict:
    return {
        "target": config.target.to_dict(),
        "config_sha256": config.config_hash,
        "seed": config.seed,
    }


def run_pipeline(config: PipelineConfig) -> dict:
    """Full protocol; returns the run summary (also written to run_summary.json)."""
    out_dir = Path(config.output_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    fig_dir = out_dir / "figures"
    fig_dir.mkdir(exist_ok=True)
    stamp = _stamp(config)
    target = config.target
    unit = target.report_unit

    prep = prepare(config)
    write_split(config, prep.plan, out_dir)

    tuned: dict[str, dict] = {}
    if config.tuning_budget > 0:
        with _stage("tune"):
            tuned = run_tuning(config, prep, out_dir)
    roster, arch = _apply_tuned(config, tuned)

    X_tr, y_tr = prep.train_matrix, prep.y_train
    X_te, y_te = prep.test_matrix, prep.y_test
    folds = prep.plan.folds

    cv_table = EvalReport(target.kind, unit)
    test_table = EvalReport(target.kind, unit)
    full_models: dict[str, TrainedRegressor] = {}
    with _stage("cross-validate"):
        for spec in roster:
            models = fold_models(spec, X_tr, y_tr, folds)
            name = spec.display_name
            cv_table = cv_table.with_row(cv_report(name, holdout_pairs(models, X_tr, y_tr, folds)))
            test_table = test_table.with_row(cv_report(name, testset_pairs(models, X_te, y_te)))
            full_models[spec.kind] = fit(spec, X_tr, y_tr)
        _write_report(out_dir, "cv_report", cv_table, stamp,
                      f"{target.kind}: {config.k}-fold CV (fold holdouts)")
        _write_report(out_dir, "test_report", test_table, stamp,
                      f"{target.kind}: independent test set (per-fold models)")

    with _stage("stack"):
        meta_matrix, bookkeeping = build_oof_matrix(arch, X_tr, y_tr, folds)

        meta_table = EvalReport(target.kind, unit)
        for kind in config.meta_candidates:
            meta_spec = LearnerSpec(kind, tuned.get(kind, {}), config.seed)
            pairs = []
            for f, fold in enumerate(folds):
                held = sorted(fold)
                train_pos = np.setdiff1d(np.arange(X_tr.n_rows), np.asarray(held, dtype=int))
                meta_model_f = fit(meta_spec, meta_matrix.take(train_pos), y_tr[train_pos])
                base_models_f = bookkeeping.fold_base_models[
                    f if len(bookkeeping.fold_base_models) > 1 else 0
                ]
                base_preds_te = np.column_stack([predict(m, X_te) for m in base_models_f])
                meta_te = assemble_meta_matrix(arch, X_te, base_preds_te)
                pairs.append((y_te, predict(meta_model_f, meta_te)))
            meta_table = meta_table.with_row(cv_report(DISPLAY_NAMES[kind], pairs))
        _write_report(out_dir, "meta_report", meta_table, stamp,
                      f"{target.kind}: meta-learner comparison (stack on test set)")

        meta_model = fit(arch.meta_spec, meta_matrix, y_tr)
        base_models = tuple(fit(spec, X_tr, y_tr) for spec in arch.base_specs)
        stack_model = StackModel(arch, base_models, meta_model)
        save_stack(stack_model, out_dir / "stack_model.json", metadata=_model_metadata(config))
        stack_pred_te = predict_stack(stack_model, X_te)

    with _stage("importance"):
        importance_rows: list[list[str]] = [["scope", "name", "weight"]]
        top10: list[tuple[str, float]] = []
        source_kind = None
        tree_rows = [row for row, spec in zip(cv_table.rows, roster) if spec.kind in TREE_KINDS]
        tree_specs = [spec for spec in roster if spec.kind in TREE_KINDS]
        if tree_specs:
            best_idx = min(range(len(tree_specs)), key=lambda i: tree_rows[i].rmse_mean)
            source_kind = tree_specs[best_idx].kind
            imp = feature_importance(full_models[source_kind])
            for name, weight in imp.by_column.items():
                importance_rows.append(["column", name, repr(weight)])
            for name, weight in imp.by_feature.items():
                importance_rows.append(["feature", name, repr(weight)])
            top10 = sorted(imp.by_feature.items(), key=lambda kv: (-kv[1], kv[0]))[:10]
        _write_csv(out_dir / "importance.csv", importance_rows, stamp)
        _write_csv(
            out_dir / "importance_top10.csv",
            [["name", "weight"]] + [[n, repr(w)] for n, w in top10],
            stamp,
        )

    with _stage("report"):
        test_ids = [prep.dataset.samples[i].id for i in prep.plan.test_indices]
        scatter_rows = [["id", "true", "stack"] + [s.kind for s in roster]]
        per_learner_te = {
            s.kind: target.clip_for_report(predict(full_models[s.kind], X_te)) for s in roster
        }
        stack_te_clipped = target.clip_for_report(stack_pred_te)
        for i, sid in enumerate(test_ids):
            scatter_rows.append(
                [sid, repr(float(y_te[i])), repr(float(stack_te_clipped[i]))]
                + [repr(float(per_learner_te[s.kind][i])) for s in roster]
            )
        _write_csv(out_dir / "scatter_test.csv", scatter_rows, stamp)

        stack_metrics = {
            "mae": mae(y_te, stack_pred_te),
            "rmse": rmse(y_te, stack_pred_te),
            "r2": r2(y_te, stack_pred_te),
        }
        single_r2 = {s.kind: r2(y_te, predict(full_models[s.kind], X_te)) for s in roster}
        best_single_kind = max(single_r2, key=lambda kind: (single_r2[kind],))
        axis_label = f"{target.kind} ({unit})" if unit else target.kind
        from .figures import save_importance_figure, save_parity_figure  # defers matplotlib

        save_parity_figure(
            fig_dir / "parity_stack.png",
            y_te, stack_pred_te, axis_label,
            f"stacked model: {target.kind} test set",
            annotation=(f"MAE={stack_metrics['mae']:.2f}\n"
                        f"RMSE={stack_metrics['rmse']:.2f}\nR2={stack_metrics['r2']:.2f}"),
            stamp=stamp,
        )
        if top10:
            save_importance_figure(
                fig_dir / "importance_top10.png",
                [n for n, _ in top10], [w for _, w in top10],
                f"top features ({DISPLAY_NAMES[source_kind]})",
                stamp=stamp,
            )

        summary = {
            "config_sha256": config.config_hash,
            "seed": config.seed,
            "config": config.to_dict(),
            "n_samples": len(prep.dataset),
            "n_train": len(prep.plan.train_indices),
            "n_test": len(prep.plan.test_indices),
            "tuned_params": tuned,
            "stack_test": stack_metrics,
            "single_test_r2": single_r2,
            "best_single": {"kind": best_single_kind, "r2": single_r2[best_single_kind]},
            "importance_source": source_kind,
            "artifacts": sorted(
                str(p.relative_to(out_dir))
                for p in out_dir.rglob("*")
                if p.is_file() and p.name != "run_summary.json"
            ) + ["run_summary.json"],
        }
        _write_json(out_dir / "run_summary.json", summary)
    return summary


# --- single-model commands -------------------------------------------------


def train_single(config: PipelineConfig, kind: str) -> Path:
    """Fit one roster learner on the SPXY training set and persist it."""
    prep = prepare(config)
    spec = next((s for s in config.learners if s.kind == kind), None)
    if spec is None:
        spec = LearnerSpec(kind, seed=config.seed)
    with _stage("train"):
        model = fit(spec, prep.train_matrix, prep.y_train)
    out_dir = Path(config.output_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    path = out_dir / f"learner_{kind}.json"
    save_regressor(model, path, metadata=_model_metadata(config))
    return path


def train_stack_only(config: PipelineConfig) -> Path:
    prep = prepare(config)
    with _stage("stack"):
        model = train_stack(config.stack, prep.train_matrix, prep.y_train, prep.plan.folds)
    out_dir = Path(config.output_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    path = out_dir / "stack_model.json"
    save_stack(model, path, metadata=_model_metadata(config))
    return path


@dataclass
class LoadedModel:
    """A persisted single learner or stack, plus its target metadata."""

    doc_kind: str
    target: TargetSpec
    metadata: dict
    _single: TrainedRegressor | None = None
    _stack: StackModel | None = None

    @property
    def columns(self) -> tuple[str, ...]:
        return self._single.columns if self._single is not None else self._stack.columns

    def predict_matrix(self, matrix: DesignMatrix) -> np.ndarray:
        if self._single is not None:
            return predict(self._single, matrix)
        return predict_stack(self._stack, matrix)


def load_model(path: str | Path) -> LoadedModel:
    doc = json.loads(Path(path).read_text(encoding="utf-8"))
    metadata = doc.get("metadata", {})
    if "target" not in metadata:
        raise ConfigError(f"{path}: model document has no target metadata")
    target = TargetSpec.from_dict(metadata["target"])
    kind = doc.get("kind")
    if kind == "regressor":
        return LoadedModel(kind, target, metadata, _single=regressor_from_dict(doc))
    if kind == "stack":
        return LoadedModel(kind, target, metadata, _stack=stack_from_dict(doc))
    raise ConfigError(f"{path}: unknown model document kind {kind!r}")


def predict_to_file(model_path: str | Path, dataset_path: str | Path,
                    out_path: str | Path) -> ReportRow | None:
    """Per-sample predictions in natural units; scores appended when targets exist."""
    model = load_model(model_path)
    target = model.target
    with _stage("predict"):
        dataset = load_dataset(dataset_path, default_schema())
        matrix = encode_features(dataset, target)
        if tuple(matrix.columns) != tuple(model.columns):
            raise ColumnMismatchError(
                f"dataset encodes to {len(matrix.columns)} columns, "
                f"model expects {len(model.columns)}"
            )
        raw = model.predict_matrix(matrix)
        reported = target.clip_for_report(raw)

        if target.kind == "kr":
            header = ["id", "pred_log10_kr", "pred_kr_per_s"]
            rows = [[s.id, repr(float(v)), repr(float(10.0**v))]
                    for s, v in zip(dataset.samples, reported)]
        elif target.kind == "wavelength":
            header = ["id", "pred_wavelength_nm"]
            rows = [[s.id, repr(float(v))] for s, v in zip(dataset.samples, reported)]
        else:
            header = ["id", "pred_plqy"]
            rows = [[s.id, repr(float(v))] for s, v in zip(dataset.samples, reported)]

        row: ReportRow | None = None
        have_targets = all(target.target_column in s.targets for s in dataset.samples)
        if have_targets:
            y_true = np.array([target.transform_value(s.targets[target.target_column])
                               for s in dataset.samples])
            row = single_report("external-test", y_true, reported)

        with Path(out_path).open("w", newline="", encoding="utf-8") as handle:
            stamp = metadata_stamp(model.metadata)
            if stamp:
                handle.write(f"# {stamp}\n")
            writer = csv.writer(handle)
            writer.writerow(header)
            writer.writerows(rows)
            if row is not None:
                mae_text, rmse_text, r2_text = row.formatted()
                handle.write(f"# external-test n={len(dataset)} unit={target.report_unit}\n")
                handle.write(f"# MAE={mae_text} RMSE={rmse_text} R2={r2_text}\n")
    return row


def evaluate_model(model_path: str | Path, dataset_path: str | Path) -> EvalReport:
    """External-test mode: score a persisted model on a labelled dataset."""
    model = load_model(model_path)
    target = model.target
    with _stage("evaluate"):
        dataset = load_dataset(dataset_path, default_schema())
        matrix, y_true = encode(dataset, target)
        pred = target.clip_for_report(model.predict_matrix(matrix))
        report = EvalReport(target.kind, target.report_unit).with_row(
            single_report("external-test", y_true, pred)
        )
    return report


def importance_to_file(model_path: str | Path, out_path: str | Path, top: int = 10) -> None:
    model = load_model(model_path)
    if model._single is None:
        raise UnsupportedImportanceError("feature importance requires a single tree-based model")
    with _stage("importance"):
        imp = feature_importance(model._single)
        rows: list[list[str]] = [["scope", "name", "weight"]]
        for name, weight in imp.by_column.items():
            rows.append(["column", name, repr(weight)])
        ranked = sorted(imp.by_feature.items(), key=lambda kv: (-kv[1], kv[0]))
        for name, weight in ranked[: top if top else None]:
            rows.append(["feature", name, repr(weight)])
        _write_csv(Path(out_path), rows, metadata_stamp(model.metadata) or "ptphos importance")


def metadata_stamp(metadata: Mapping[str, Any]) -> str:
    parts = []
    if "config_sha256" in metadata:
        parts.append(f"config_sha256={metadata['config_sha256']}")
    if "seed" in metadata:
        parts.append(f"seed={metadata['seed']}")
    return " ".join(parts)
