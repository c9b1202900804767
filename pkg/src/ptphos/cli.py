"""Command-line interface: run | split | tune | train | stack | evaluate | predict | importance."""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .config import PipelineConfig
from .errors import ConfigError, PtphosError, StageError
from .learners import KINDS


def _add_config_arg(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", required=True, help="pipeline config JSON")
    parser.add_argument("--dataset", help="override: dataset CSV path")
    parser.add_argument("--output-dir", dest="output_dir", help="override: output directory")
    parser.add_argument("--target", choices=["wavelength", "kr", "plqy"],
                        help="override: target property")
    parser.add_argument("--seed", type=int, help="override: run seed")
    parser.add_argument("--train-fraction", dest="train_fraction", type=float,
                        help="override: SPXY training fraction")
    parser.add_argument("--k", type=int, help="override: number of CV folds")


def _load_config(args: argparse.Namespace) -> PipelineConfig:
    overrides = {
        "dataset": getattr(args, "dataset", None),
        "output_dir": getattr(args, "output_dir", None),
        "target": getattr(args, "target", None),
        "seed": getattr(args, "seed", None),
        "train_fraction": getattr(args, "train_fraction", None),
        "k": getattr(args, "k", None),
        "budget": getattr(args, "budget", None),
    }
    return PipelineConfig.load(args.config, overrides)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ptphos",
        description="Predict photophysical properties of Pt(II) emitters "
                    "from quantum-chemistry descriptors.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="full pipeline: split, CV, stack, report")
    _add_config_arg(p_run)

    p_split = sub.add_parser("split", help="write the SPXY split plan only")
    _add_config_arg(p_split)

    p_tune = sub.add_parser("tune", help="random-search hyperparameters")
    _add_config_arg(p_tune)
    p_tune.add_argument("--learner", choices=KINDS, action="append",
                        help="kind to tune (repeatable; default: configured list)")
    p_tune.add_argument("--budget", type=int, help="override: trials per learner")

    p_train = sub.add_parser("train", help="fit one learner on the SPXY training set")
    _add_config_arg(p_train)
    p_train.add_argument("--learner", choices=KINDS, required=True)

    p_stack = sub.add_parser("stack", help="train and persist the stacked model only")
    _add_config_arg(p_stack)

    p_eval = sub.add_parser("evaluate", help="score a persisted model on a labelled dataset")
    p_eval.add_argument("--model", required=True)
    p_eval.add_argument("--data", required=True, help="labelled dataset CSV")
    p_eval.add_argument("--out", help="also write the report to this text file")

    p_pred = sub.add_parser("predict", help="predict a dataset with a persisted model")
    p_pred.add_argument("--model", required=True)
    p_pred.add_argument("--data", required=True, help="dataset CSV (targets optional)")
    p_pred.add_argument("--out", required=True, help="predictions CSV path")

    p_imp = sub.add_parser("importance", help="feature-importance table for a persisted model")
    p_imp.add_argument("--model", required=True)
    p_imp.add_argument("--out", required=True, help="importance CSV path")
    p_imp.add_argument("--top", type=int, default=10, help="top-N source features (0 = all)")
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    from . import pipeline

    try:
        if args.command == "run":
            config = _load_config(args)
            summary = pipeline.run_pipeline(config)
            best = summary["best_single"]
            print(f"run complete: artifacts in {config.output_dir}")
            print(f"stack test R2 = {summary['stack_test']['r2']:.4f} "
                  f"(best single: {best['kind']} R2 = {best['r2']:.4f})")
        elif args.command == "split":
            config = _load_config(args)
            prep = pipeline.prepare(config)
            out_dir = Path(config.output_dir)
            out_dir.mkdir(parents=True, exist_ok=True)
            path = pipeline.write_split(config, prep.plan, out_dir)
            print(f"wrote {path} ({len(prep.plan.train_indices)} train / "
                  f"{len(prep.plan.test_indices)} test, k={prep.plan.k})")
        elif args.command == "tune":
            config = _load_config(args)
            if args.learner:
                config = PipelineConfig.from_dict(
                    {**config.to_dict(), "tuning": {
                        "budget": config.tuning_budget or 20,
                        "learners": args.learner,
                    }}
                )
            if config.tuning_budget < 1:
                raise ConfigError("tuning budget must be >= 1 (set tuning.budget or --budget)")
            prep = pipeline.prepare(config)
            out_dir = Path(config.output_dir)
            out_dir.mkdir(parents=True, exist_ok=True)
            tuned = pipeline.run_tuning(config, prep, out_dir)
            for kind, params in tuned.items():
                print(f"{kind}: best params {params}")
        elif args.command == "train":
            config = _load_config(args)
            path = pipeline.train_single(config, args.learner)
            print(f"wrote {path}")
        elif args.command == "stack":
            config = _load_config(args)
            path = pipeline.train_stack_only(config)
            print(f"wrote {path}")
        elif args.command == "evaluate":
            report = pipeline.evaluate_model(args.model, args.data)
            text = report.to_text("external-test evaluation")
            if args.out:
                Path(args.out).write_text(text, encoding="utf-8")
            print(text, end="")
        elif args.command == "predict":
            row = pipeline.predict_to_file(args.model, args.data, args.out)
            print(f"wrote {args.out}")
            if row is not None:
                mae_s, rmse_s, r2_s = row.formatted()
                print(f"external-test: MAE={mae_s} RMSE={rmse_s} R2={r2_s}")
        elif args.command == "importance":
            pipeline.importance_to_file(args.model, args.out, args.top)
            print(f"wrote {args.out}")
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1
    except StageError as exc:
        print(f"error in {exc}", file=sys.stderr)
        return 2
    except (PtphosError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
