"""Acceptance suite: one test per criterion, each printing a pass line.

Run with `pytest tests/test_acceptance.py -v -s` to see the per-criterion
lines alongside pytest's own pass/fail report.
"""

import hashlib
import math
import re
import time

import numpy as np
import pytest

from conftest import make_matrix
from oracles import knn_predict, krr_predict, spxy_select
from ptphos import metrics, physics, pipeline
from ptphos.config import PipelineConfig
from ptphos.dataset import TargetSpec, default_schema, encode
from ptphos.learners import LearnerSpec, fit, predict
from ptphos.learners.cart import tree_predict
from ptphos.split import SplitPlan, kfold_assign, spxy_split
from ptphos.stacking import IN_SAMPLE, META_BASE_ONLY, StackArchitecture, build_oof_matrix
from ptphos.synth import synthetic_dataset, write_dataset_csv


@pytest.fixture(scope="module")
def desk_scale_run(tmp_path_factory):
    """One full wavelength-preset run on a 206-row synthetic table (criteria 8, 9)."""
    tmp = tmp_path_factory.mktemp("desk")
    data_path = tmp / "emitters.csv"
    write_dataset_csv(synthetic_dataset(206, seed=7), data_path)
    out_dir = tmp / "out"
    config = PipelineConfig.from_dict({
        "dataset": str(data_path),
        "target": "wavelength",
        "output_dir": str(out_dir),
        "seed": 42,
    })
    start = time.perf_counter()
    summary = pipeline.run_pipeline(config)
    elapsed = time.perf_counter() - start
    return config, summary, elapsed, out_dir


def test_criterion_1_knn_oracle_equivalence(rng):
    start = time.perf_counter()
    X = rng.normal(size=(50, 5))
    y = rng.normal(size=50)
    queries = np.vstack([rng.normal(size=(30, 5)), X[:10]])
    matrix, qmatrix = make_matrix(X), make_matrix(queries)
    for k in (1, 3, 7):
        uniform = predict(fit(LearnerSpec("knn_uniform", {"k": k}), matrix, y), qmatrix)
        assert np.array_equal(
            uniform, np.asarray(knn_predict(X, y, queries, k, "uniform"))
        ), f"uniform knn mismatch at k={k}"
        distance = predict(fit(LearnerSpec("knn_distance", {"k": k}), matrix, y), qmatrix)
        want = np.asarray(knn_predict(X, y, queries, k, "distance"))
        assert np.allclose(distance, want, rtol=1e-10, atol=0.0), f"distance knn k={k}"
    elapsed = time.perf_counter() - start
    assert elapsed < 1.0, f"knn oracle check took {elapsed:.2f}s"
    print(f"\n[PASS] criterion 1: knn matches brute-force oracle ({elapsed*1e3:.0f} ms)")


def test_criterion_2_krr_oracle_equivalence(rng):
    for n in (4, 7, 10):
        X = rng.normal(size=(n, 3))
        y = rng.normal(size=n)
        queries = rng.normal(size=(6, 3))
        gamma = 0.5
        for alpha in (1e-6, 1e-2, 1.0):
            model = fit(LearnerSpec("krr", {"alpha": alpha, "gamma": gamma}),
                        make_matrix(X), y)
            got = predict(model, make_matrix(queries))
            want = np.asarray(krr_predict(X, y, queries, alpha, gamma))
            assert np.allclose(got, want, atol=1e-8), f"krr mismatch n={n} alpha={alpha}"
    print("[PASS] criterion 2: krr matches dense linear-solve oracle at 1e-8")


def test_criterion_3_degenerate_forest_identity(rng):
    for case in range(10):
        n = int(rng.integers(15, 45))
        d = int(rng.integers(2, 7))
        X = rng.normal(size=(n, d))
        y = rng.normal(size=n) + X[:, 0]
        matrix = make_matrix(X)
        params = {
            "max_depth": [None, 3, 5][case % 3],
            "min_samples_leaf": int(rng.integers(1, 4)),
        }
        forest = fit(LearnerSpec("rf", {"n_trees": 1, "bootstrap": False,
                                        "max_features_fraction": 1.0, **params},
                                 seed=case), matrix, y)
        cart = fit(LearnerSpec("cart", params, seed=case), matrix, y)
        queries = make_matrix(rng.normal(size=(20, d)))
        got, want = predict(forest, queries), predict(cart, queries)
        assert np.array_equal(got, want), f"bitwise mismatch in case {case}"
    print("[PASS] criterion 3: single-tree forest is bit-identical to cart (10 datasets)")


@pytest.mark.parametrize("kind", ["gbm_leafwise", "gbm_levelwise"])
def test_criterion_4_gbm_monotone_training_mse(kind, rng):
    X = rng.normal(size=(200, 10))
    y = X[:, 0] + np.sin(X[:, 1] * 2.0) + 0.5 * X[:, 2] * X[:, 3] + 0.1 * rng.normal(size=200)
    matrix = make_matrix(X)
    spec = LearnerSpec(kind, {"n_rounds": 200, "learning_rate": 0.1,
                              "subsample_fraction": 1.0}, seed=0)
    model = fit(spec, matrix, y)
    state = model.state
    current = np.full(200, state.base_score)
    last = float(np.mean((y - current) ** 2))
    violations = 0
    for tree in state.trees:
        current = current + state.learning_rate * tree_predict(tree, matrix.data)
        mse = float(np.mean((y - current) ** 2))
        if mse > last + 1e-12:
            violations += 1
        last = mse
    assert violations == 0
    print(f"[PASS] criterion 4: {kind} training MSE non-increasing over 200 rounds")


def test_criterion_5_spxy_exhaustive_vs_bruteforce(rng):
    checked = 0
    for _ in range(1000):
        n = int(rng.integers(2, 8))
        d = int(rng.integers(1, 4))
        X = rng.normal(size=(n, d))
        y = rng.normal(size=n)
        fraction = float(rng.uniform(0.2, 0.95))
        n_train = min(max(round(fraction * n), 1), n)
        plan = spxy_split(X, y, fraction)
        want = spxy_select(X, y, n_train)
        assert list(plan.train_indices) == want, f"mismatch on n={n} d={d}"
        # invariances of the normalized combined metric
        assert spxy_split(X, 7.5 * y, fraction).train_indices == plan.train_indices
        assert spxy_split(0.2 * X, y, fraction).train_indices == plan.train_indices
        checked += 1
    assert checked == 1000
    print("[PASS] criterion 5: spxy matches brute force on 1000 cases incl. rescaling")


def test_criterion_6_rate_equation_against_codata_oracle():
    sc = pytest.importorskip("scipy.constants")
    nu = sc.c / 500e-9
    oracle = 2 * math.pi * nu**2 * sc.e**2 / (sc.epsilon_0 * sc.m_e * sc.c**3) * 1e-3
    got = physics.kr_from_transition(physics.TransitionRecord.from_wavelength(500.0, 1e-3))
    assert abs(got - oracle) / oracle < 1e-3, f"{got} vs oracle {oracle}"
    assert got == pytest.approx(2.67e5, rel=5e-3)

    base = physics.TransitionRecord(frequency_hz=4.2e14, oscillator_strength=3e-3)
    kr = physics.kr_from_transition(base)
    for scale in (2.0, 5.0, 10.0):
        ratio_f = physics.kr_from_transition(
            physics.TransitionRecord(4.2e14, 3e-3 * scale)) / kr
        assert ratio_f == pytest.approx(scale, rel=1e-12)
        ratio_nu = physics.kr_from_transition(
            physics.TransitionRecord(4.2e14 * scale, 3e-3)) / kr
        assert ratio_nu == pytest.approx(scale**2, rel=1e-12)
    print(f"[PASS] criterion 6: rate law matches CODATA oracle ({got:.4g} 1/s at 500 nm)")


def test_criterion_7_stacking_leakage_bookkeeping(rng):
    X = rng.normal(size=(40, 5))
    y = X[:, 0] + rng.normal(size=40)
    matrix = make_matrix(X)
    plan = kfold_assign(SplitPlan(tuple(range(40)), ()), 8, seed=1)
    arch = StackArchitecture(
        (LearnerSpec("cart", {"max_depth": 3}), LearnerSpec("cart", {"max_depth": 5})),
        LearnerSpec("knn_distance", {"k": 3}),
        META_BASE_ONLY,
    )
    _, bookkeeping = build_oof_matrix(arch, matrix, y, plan.folds)
    for row in range(40):
        trained = bookkeeping.training_rows_for(row)
        assert row not in trained, f"row {row} leaked into its own base model"
        assert len(trained) == 40 - len(plan.folds[bookkeeping.fold_of_row[row]])

    insample_arch = StackArchitecture(arch.base_specs, arch.meta_spec,
                                      META_BASE_ONLY, IN_SAMPLE)
    _, insample = build_oof_matrix(insample_arch, matrix, y, plan.folds)
    for row in range(40):
        assert row in insample.training_rows_for(row)
    print("[PASS] criterion 7: out-of-fold bookkeeping excludes each row; in-sample flips it")


def test_criterion_8_desk_scale_protocol(desk_scale_run):
    config, summary, elapsed, out_dir = desk_scale_run
    assert elapsed < 120.0, f"pipeline took {elapsed:.1f}s"
    assert summary["n_samples"] == 206
    assert summary["n_train"] == 165 and summary["n_test"] == 41
    assert len(config.learners) == 7
    assert config.k == 10

    # encoded width covers the full descriptor table (40+ columns)
    schema_columns, _ = default_schema().encoded_layout()
    assert len(schema_columns) == 51

    stack_r2 = summary["stack_test"]["r2"]
    best_single = summary["best_single"]["r2"]
    assert stack_r2 >= best_single - 0.05, (
        f"stack r2 {stack_r2:.3f} vs best single {best_single:.3f}"
    )

    report_text = (out_dir / "test_report.txt").read_text().splitlines()
    header = report_text[2]
    assert header.index("MAE") < header.index("RMSE") < header.index("R2")
    cell = re.compile(r"\d+\.\d{2}±\d+\.\d{2}")
    data_lines = report_text[4:4 + 7]
    assert len(data_lines) == 7
    for line in data_lines:
        assert len(cell.findall(line)) >= 2, f"row not in m±s format: {line}"
    print(f"\n[PASS] criterion 8: wavelength protocol at desk scale in {elapsed:.1f}s "
          f"(stack R2 {stack_r2:.3f} vs best single {best_single:.3f})")


def test_criterion_9_end_to_end_determinism(desk_scale_run):
    config, _, _, out_dir = desk_scale_run

    def digest():
        return {
            str(p.relative_to(out_dir)): hashlib.sha256(p.read_bytes()).hexdigest()
            for p in sorted(out_dir.rglob("*")) if p.is_file()
        }

    first = digest()
    pipeline.run_pipeline(config)
    second = digest()
    assert first == second, "rerun changed artifact bytes"
    assert any(name.endswith("stack_model.json") for name in first)
    print(f"[PASS] criterion 9: rerun byte-identical across {len(first)} artifacts")


def test_criterion_10_metrics_suite(rng):
    for _ in range(1000):
        n = int(rng.integers(2, 30))
        yt = rng.normal(size=n) * float(rng.uniform(0.1, 50))
        yp = rng.normal(size=n) * float(rng.uniform(0.1, 50))
        assert metrics.rmse(yt, yp) >= metrics.mae(yt, yp) - 1e-15

    # frozen hand-computed cases
    assert metrics.r2([0.0, 1.0], [1.0, 0.0]) == -3.0
    assert metrics.mae([1.0, 2.0, 3.0], [2.0, 2.0, 2.0]) == pytest.approx(2.0 / 3.0)
    assert metrics.rmse([1.0, 2.0, 3.0], [2.0, 2.0, 2.0]) == pytest.approx(
        math.sqrt(2.0 / 3.0)
    )
    assert metrics.r2([1.0, 2.0, 3.0], [2.0, 2.0, 2.0]) == pytest.approx(0.0, abs=1e-15)

    # rate-constant metrics live in log10 space end to end: a 10x error in
    # natural units moves MAE by exactly one log unit
    data = synthetic_dataset(30, seed=21)
    _, y_log = encode(data, TargetSpec.for_kind("kr"))
    assert metrics.mae(y_log, y_log) == 0.0
    assert metrics.mae(y_log, y_log + 1.0) == 1.0  # exact in log space
    kr_natural = np.power(10.0, y_log)
    tenfold = np.log10(10.0 * kr_natural)
    assert metrics.mae(y_log, tenfold) == pytest.approx(1.0, rel=1e-12)
    assert metrics.mae(y_log, tenfold) < 2.0  # nowhere near natural-unit scale
    print("[PASS] criterion 10: metrics suite (RMSE>=MAE x1000, hand cases, log-space kr)")
