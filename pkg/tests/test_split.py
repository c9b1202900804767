import numpy as np
import pytest

from oracles import spxy_select
from ptphos.errors import BadValueError, KTooLargeError, TooFewSamplesError
from ptphos.split import SplitPlan, combined_xy_distances, kfold_assign, spxy_split


def test_hand_worked_selection():
    X = np.array([[0.0], [1.0], [2.0], [10.0]])
    y = np.array([0.0, 1.0, 2.0, 10.0])
    plan = spxy_split(X, y, 0.75)
    assert plan.train_indices == (0, 3, 2)  # selection order
    assert plan.test_indices == (1,)


def test_two_samples_lowest_index_seed():
    plan = spxy_split(np.array([[0.0], [5.0]]), np.array([1.0, 2.0]), 0.5)
    assert plan.train_indices == (0,)
    assert plan.test_indices == (1,)


def test_duplicates_selected_last():
    # exact duplicate of row 0; the duplicate has min-distance 0 once its twin
    # is selected, so all distinct points enter first
    X = np.array([[0.0], [0.0], [3.0], [7.0], [10.0]])
    y = np.array([1.0, 1.0, 2.0, 3.0, 4.0])
    plan = spxy_split(X, y, 0.8)  # 4 of 5
    assert set(plan.train_indices) >= {2, 3}
    assert not {0, 1} <= set(plan.train_indices)
    assert plan.train_indices == tuple(spxy_select(X, y, 4))


def test_matches_bruteforce_oracle(rng):
    for _ in range(150):
        n = int(rng.integers(2, 8))
        d = int(rng.integers(1, 4))
        X = rng.normal(size=(n, d))
        y = rng.normal(size=n)
        fraction = float(rng.uniform(0.25, 0.9))
        n_train = min(max(round(fraction * n), 1), n)
        plan = spxy_split(X, y, fraction)
        assert list(plan.train_indices) == spxy_select(X, y, n_train)


def test_all_identical_rows_fall_back_to_index_order():
    X = np.zeros((4, 2))
    y = np.zeros(4)
    plan = spxy_split(X, y, 0.5)
    assert plan.train_indices == (0, 1)
    assert plan.test_indices == (2, 3)


def test_scale_invariances(rng):
    X = rng.normal(size=(12, 3))
    y = rng.normal(size=12)
    base = spxy_split(X, y, 0.75)
    assert spxy_split(X, 10.0 * y, 0.75).train_indices == base.train_indices
    assert spxy_split(3.5 * X, y, 0.75).train_indices == base.train_indices
    # also without standardization (the combined metric normalizes each term)
    raw = spxy_split(X, y, 0.75, standardize=False)
    assert spxy_split(7.0 * X, 2.0 * y, 0.75, standardize=False).train_indices == raw.train_indices


def test_permutation_invariance_up_to_relabeling(rng):
    X = rng.normal(size=(10, 2))
    y = rng.normal(size=10)
    base = set(spxy_split(X, y, 0.7).train_indices)
    perm = rng.permutation(10)
    permuted = spxy_split(X[perm], y[perm], 0.7)
    assert {int(perm[i]) for i in permuted.train_indices} == base


def test_max_pair_in_training(rng):
    for _ in range(25):
        X = rng.normal(size=(9, 3))
        y = rng.normal(size=9)
        d = combined_xy_distances(
            (X - X.mean(0)) / X.std(0), y
        )
        p, q = np.unravel_index(np.argmax(np.triu(d, 1)), d.shape)
        plan = spxy_split(X, y, 0.5)  # fraction >= 2/N
        assert {int(p), int(q)} <= set(plan.train_indices)


def test_too_few_samples():
    with pytest.raises(TooFewSamplesError):
        spxy_split(np.array([[1.0]]), np.array([1.0]), 0.8)


def test_kfold_round_robin_and_determinism():
    plan = SplitPlan(tuple(range(10)), ())
    folded = kfold_assign(plan, 10, seed=42)
    assert all(len(f) == 1 for f in folded.folds)
    again = kfold_assign(plan, 10, seed=42)
    assert folded.folds == again.folds
    other = kfold_assign(plan, 10, seed=43)
    assert folded.folds != other.folds


def test_kfold_sizes_165_by_10():
    plan = SplitPlan(tuple(range(165)), ())
    folded = kfold_assign(plan, 10, seed=0)
    sizes = sorted(len(f) for f in folded.folds)
    assert sizes == [16] * 5 + [17] * 5
    positions = sorted(p for f in folded.folds for p in f)
    assert positions == list(range(165))


def test_kfold_k_too_large():
    plan = SplitPlan((0, 1, 2), (3,))
    with pytest.raises(KTooLargeError):
        kfold_assign(plan, 4, seed=0)


def test_plan_validation_and_serialization():
    with pytest.raises(BadValueError):
        SplitPlan((0, 1), (1, 2))  # overlap
    with pytest.raises(BadValueError):
        SplitPlan((0, 2), (3,))  # not covering 0..N-1
    plan = kfold_assign(SplitPlan((4, 0, 2), (1, 3)), 3, seed=1)
    clone = SplitPlan.from_dict(plan.to_dict())
    assert clone == plan
    held = plan.fold_heldout_rows(0)
    trained = plan.fold_train_rows(0)
    assert set(held) | set(trained) == {4, 0, 2}
    assert not set(held) & set(trained)
