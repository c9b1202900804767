import numpy as np
import pytest

from conftest import make_matrix
from oracles import knn_predict, krr_predict
from ptphos.errors import (
    BadParamError,
    ColumnMismatchError,
    KTooLargeError,
    NonFiniteError,
    SingularKernelError,
    TooFewSamplesError,
    UnsupportedImportanceError,
)
from ptphos.learners import (
    KINDS,
    LearnerSpec,
    feature_importance,
    fit,
    predict,
)
from ptphos.learners.cart import tree_predict


def _toy(rng, n=60, d=6):
    X = rng.normal(size=(n, d))
    y = 2.0 * X[:, 0] + np.sin(2.0 * X[:, 1]) + 0.05 * rng.normal(size=n)
    return make_matrix(X), y


# --- spec validation ---------------------------------------------------------

def test_unknown_kind_and_params_rejected():
    with pytest.raises(BadParamError):
        LearnerSpec("boosted_stumps")
    with pytest.raises(BadParamError):
        LearnerSpec("rf", {"trees": 10})
    with pytest.raises(BadParamError):
        LearnerSpec("rf", {"n_trees": 0})
    with pytest.raises(BadParamError):
        LearnerSpec("gbm_leafwise", {"subsample_fraction": 0.0})
    with pytest.raises(BadParamError):
        LearnerSpec("svr", {"c": -1.0})
    with pytest.raises(BadParamError):
        LearnerSpec("adaboost", {"loss": "huber"})


def test_defaults_filled():
    spec = LearnerSpec("rf")
    assert spec.params["n_trees"] == 100
    assert spec.params["bootstrap"] is True
    assert spec.params["max_features_fraction"] == 1.0


# --- generic contracts -------------------------------------------------------

@pytest.mark.parametrize("kind", KINDS)
def test_deterministic_and_finite(kind, rng):
    matrix, y = _toy(rng, n=30)
    spec = LearnerSpec(kind, seed=3)
    p1 = predict(fit(spec, matrix, y), matrix)
    p2 = predict(fit(spec, matrix, y), matrix)
    assert np.array_equal(p1, p2)
    assert np.isfinite(p1).all()
    assert len(p1) == 30


@pytest.mark.parametrize("kind", KINDS)
def test_empty_query_and_column_mismatch(kind, rng):
    matrix, y = _toy(rng, n=20)
    model = fit(LearnerSpec(kind, seed=1), matrix, y)
    empty = matrix.take([])
    assert predict(model, empty).shape == (0,)
    other = make_matrix(np.zeros((2, 3)))
    with pytest.raises(ColumnMismatchError):
        predict(model, other)


def test_nonfinite_rejected(rng):
    matrix, y = _toy(rng, n=10)
    bad = y.copy()
    bad[0] = np.nan
    with pytest.raises(NonFiniteError):
        fit(LearnerSpec("cart"), matrix, bad)


# resampling ensembles change only through their seeded draws; the
# resampling-free learners must be invariant to training-row order
@pytest.mark.parametrize("kind", ["cart", "knn_uniform", "knn_distance", "krr", "svr"])
def test_row_permutation_invariance(kind, rng):
    matrix, y = _toy(rng, n=25)
    perm = rng.permutation(25)
    model_a = fit(LearnerSpec(kind, seed=0), matrix, y)
    model_b = fit(LearnerSpec(kind, seed=0), matrix.take(perm), y[perm])
    query = make_matrix(rng.normal(size=(8, 6)))
    assert np.allclose(predict(model_a, query), predict(model_b, query), atol=1e-8)


# --- CART --------------------------------------------------------------------

def test_cart_constant_target_single_leaf():
    matrix = make_matrix(np.arange(6.0).reshape(3, 2))
    model = fit(LearnerSpec("cart"), matrix, np.array([3.0, 3.0, 3.0]))
    assert model.state.n_splits == 0
    assert np.array_equal(predict(model, matrix), np.full(3, 3.0))


def test_cart_memorizes_distinct_rows(rng):
    matrix, y = _toy(rng, n=40)
    model = fit(LearnerSpec("cart"), matrix, y)
    assert np.allclose(predict(model, matrix), y, atol=1e-12)


def test_cart_respects_depth_and_leaf_size(rng):
    matrix, y = _toy(rng, n=50)
    shallow = fit(LearnerSpec("cart", {"max_depth": 1}), matrix, y)
    assert shallow.state.n_splits <= 1
    chunky = fit(LearnerSpec("cart", {"min_samples_leaf": 20}), matrix, y)
    leaf_values = predict(chunky, matrix)
    _, counts = np.unique(leaf_values, return_counts=True)
    assert counts.min() >= 20


def test_cart_split_tiebreak_lowest_feature():
    # duplicated informative column: equal gains, the lower index must win
    X = np.array([[0.0, 0.0], [0.0, 0.0], [1.0, 1.0], [1.0, 1.0]])
    y = np.array([0.0, 0.0, 1.0, 1.0])
    model = fit(LearnerSpec("cart", {"max_depth": 1}), make_matrix(X), y)
    assert model.state.feature[0] == 0


# --- RandomForest ------------------------------------------------------------

def test_forest_mean_of_trees(rng):
    matrix, y = _toy(rng, n=30)
    model = fit(LearnerSpec("rf", {"n_trees": 7}, seed=5), matrix, y)
    per_tree = np.stack([tree_predict(t, matrix.data) for t in model.state.trees])
    assert np.array_equal(predict(model, matrix), per_tree.mean(axis=0))


def test_forest_degenerate_equals_cart(rng):
    for trial in range(3):
        matrix, y = _toy(rng, n=25)
        params = {"max_depth": 4, "min_samples_leaf": 2}
        forest = fit(
            LearnerSpec("rf", {"n_trees": 1, "bootstrap": False,
                               "max_features_fraction": 1.0, **params}, seed=trial),
            matrix, y,
        )
        cart = fit(LearnerSpec("cart", params, seed=trial), matrix, y)
        query = make_matrix(rng.normal(size=(12, 6)))
        assert np.array_equal(predict(forest, query), predict(cart, query))


def test_forest_training_mse_not_worse_than_worst_tree(rng):
    # Jensen: squared error of the average <= average (<= max) over trees
    for seed in range(4):
        matrix, y = _toy(rng, n=40)
        model = fit(LearnerSpec("rf", {"n_trees": 12, "max_depth": 3}, seed=seed), matrix, y)
        tree_mses = [
            float(np.mean((tree_predict(t, matrix.data) - y) ** 2))
            for t in model.state.trees
        ]
        forest_mse = float(np.mean((predict(model, matrix) - y) ** 2))
        assert forest_mse <= max(tree_mses) + 1e-12


def test_forest_seed_changes_trees(rng):
    matrix, y = _toy(rng, n=30)
    a = fit(LearnerSpec("rf", {"n_trees": 5}, seed=0), matrix, y)
    b = fit(LearnerSpec("rf", {"n_trees": 5}, seed=1), matrix, y)
    assert not np.array_equal(predict(a, matrix), predict(b, matrix))


# --- GBM ---------------------------------------------------------------------

@pytest.mark.parametrize("kind", ["gbm_leafwise", "gbm_levelwise"])
def test_gbm_one_round_exact_fit(kind, rng):
    matrix, y = _toy(rng, n=30)
    params = {"n_rounds": 1, "learning_rate": 1.0, "l2_leaf_reg": 0.0}
    if kind == "gbm_leafwise":
        params["max_leaves"] = None
    else:
        params["max_depth"] = None
    model = fit(LearnerSpec(kind, params), matrix, y)
    assert np.allclose(predict(model, matrix), y, rtol=1e-10, atol=1e-10)


def test_gbm_training_mse_non_increasing(rng):
    matrix, y = _toy(rng, n=80)
    spec = LearnerSpec("gbm_leafwise",
                       {"n_rounds": 60, "learning_rate": 0.1, "max_leaves": 15})
    model = fit(spec, matrix, y)
    current = np.full(80, model.state.base_score)
    last = float(np.mean((y - current) ** 2))
    for tree in model.state.trees:
        current = current + model.state.learning_rate * tree_predict(tree, matrix.data)
        mse = float(np.mean((y - current) ** 2))
        assert mse <= last + 1e-12
        last = mse


def test_gbm_l2_shrinks_leaf_values():
    X = make_matrix(np.array([[0.0], [1.0]]))
    y = np.array([0.0, 10.0])
    plain = fit(LearnerSpec("gbm_levelwise",
                            {"n_rounds": 1, "learning_rate": 1.0, "l2_leaf_reg": 0.0,
                             "max_depth": 1}), X, y)
    damped = fit(LearnerSpec("gbm_levelwise",
                             {"n_rounds": 1, "learning_rate": 1.0, "l2_leaf_reg": 1.0,
                              "max_depth": 1}), X, y)
    # leaf value = sum(residual) / (count + l2): residuals are +-5, count 1
    assert np.allclose(predict(plain, X), [0.0, 10.0])
    assert np.allclose(predict(damped, X), [2.5, 7.5])


def test_gbm_subsample_deterministic(rng):
    matrix, y = _toy(rng, n=50)
    spec = LearnerSpec("gbm_leafwise", {"n_rounds": 10, "subsample_fraction": 0.6}, seed=9)
    assert np.array_equal(predict(fit(spec, matrix, y), matrix),
                          predict(fit(spec, matrix, y), matrix))


# --- AdaBoost.R2 -------------------------------------------------------------

def test_adaboost_prediction_is_one_of_the_trees(rng):
    matrix, y = _toy(rng, n=30)
    model = fit(LearnerSpec("adaboost", {"n_estimators": 11}, seed=2), matrix, y)
    tree_preds = np.stack([tree_predict(t, matrix.data) for t in model.state.trees], axis=1)
    out = predict(model, matrix)
    for i in range(len(out)):
        assert out[i] in tree_preds[i]


def test_adaboost_perfect_fit_stops_early():
    X = make_matrix(np.arange(8.0).reshape(8, 1))
    y = (np.arange(8.0) >= 4).astype(float)
    model = fit(LearnerSpec("adaboost", {"n_estimators": 50, "max_depth": None}), X, y)
    assert len(model.state.trees) == 1  # first tree is exact, loop stops
    assert np.allclose(predict(model, X), y)


def test_adaboost_weighted_median_definition(rng):
    matrix, y = _toy(rng, n=25)
    model = fit(LearnerSpec("adaboost", {"n_estimators": 9}, seed=4), matrix, y)
    weights = np.asarray(model.state.weights)
    tree_preds = np.stack([tree_predict(t, matrix.data) for t in model.state.trees], axis=1)
    out = predict(model, matrix)
    for i in range(len(out)):
        order = np.argsort(tree_preds[i], kind="stable")
        cdf = np.cumsum(weights[order])
        expected = tree_preds[i][order[np.argmax(cdf >= 0.5 * cdf[-1])]]
        assert out[i] == expected


# --- KNN ---------------------------------------------------------------------

def test_knn_exact_training_point(rng):
    matrix, y = _toy(rng, n=20)
    model = fit(LearnerSpec("knn_uniform", {"k": 1}), matrix, y)
    assert np.array_equal(predict(model, matrix), y)
    model_d = fit(LearnerSpec("knn_distance", {"k": 5}), matrix, y)
    # zero distance dominates the 1/(d+eps) weights
    assert np.allclose(predict(model_d, matrix), y, atol=1e-9)


def test_knn_matches_bruteforce_oracle(rng):
    X = rng.normal(size=(50, 5))
    y = rng.normal(size=50)
    queries = rng.normal(size=(20, 5))
    matrix, qmatrix = make_matrix(X), make_matrix(queries)
    for weighting, kind in (("uniform", "knn_uniform"), ("distance", "knn_distance")):
        model = fit(LearnerSpec(kind, {"k": 7}), matrix, y)
        got = predict(model, qmatrix)
        want = np.asarray(knn_predict(X, y, queries, 7, weighting))
        if weighting == "uniform":
            assert np.array_equal(got, want)
        else:
            assert np.allclose(got, want, rtol=1e-10)


def test_knn_prediction_bounded_by_neighbor_targets(rng):
    X = rng.normal(size=(30, 4))
    y = rng.normal(size=30)
    model = fit(LearnerSpec("knn_distance", {"k": 6}), make_matrix(X), y)
    out = predict(model, make_matrix(rng.normal(size=(40, 4))))
    assert out.min() >= y.min() - 1e-12
    assert out.max() <= y.max() + 1e-12


def test_knn_k_too_large(rng):
    matrix, y = _toy(rng, n=4)
    with pytest.raises(KTooLargeError):
        fit(LearnerSpec("knn_uniform", {"k": 5}), matrix, y)


# --- KRR ---------------------------------------------------------------------

def test_krr_interpolates_at_tiny_alpha():
    X = make_matrix(np.array([[0.0, 0.0], [1.0, 0.5], [0.2, 2.0]]))
    y = np.array([1.0, -2.0, 0.5])
    model = fit(LearnerSpec("krr", {"alpha": 1e-12}), X, y)
    assert np.allclose(predict(model, X), y, atol=1e-6)


def test_krr_matches_dense_solve_oracle(rng):
    X = rng.normal(size=(9, 3))
    y = rng.normal(size=9)
    queries = rng.normal(size=(5, 3))
    gamma = 0.4
    for alpha in (1e-6, 1e-2, 1.0):
        model = fit(LearnerSpec("krr", {"alpha": alpha, "gamma": gamma}),
                    make_matrix(X), y)
        got = predict(model, make_matrix(queries))
        want = np.asarray(krr_predict(X, y, queries, alpha, gamma))
        assert np.allclose(got, want, atol=1e-8)


def test_krr_dual_norm_non_increasing_in_alpha(rng):
    X, y = _toy(rng, n=25)
    norms = []
    for alpha in (1e-4, 1e-2, 1.0, 10.0):
        model = fit(LearnerSpec("krr", {"alpha": alpha}), X, y)
        norms.append(float(np.linalg.norm(model.state.dual_coef)))
    assert all(a >= b - 1e-12 for a, b in zip(norms, norms[1:]))


def test_krr_singular_with_duplicates():
    X = make_matrix(np.array([[1.0, 2.0], [1.0, 2.0], [3.0, 1.0]]))
    y = np.array([0.0, 1.0, 2.0])
    with pytest.raises(SingularKernelError):
        fit(LearnerSpec("krr", {"alpha": 0.0}), X, y)


def test_krr_needs_two_samples():
    with pytest.raises(TooFewSamplesError):
        fit(LearnerSpec("krr"), make_matrix(np.array([[1.0]])), np.array([2.0]))


# --- SVR ---------------------------------------------------------------------

def test_svr_constant_targets():
    X = make_matrix(np.arange(12.0).reshape(6, 2))
    for eps in (0.0, 0.1, 10.0):
        model = fit(LearnerSpec("svr", {"epsilon": eps}), X, np.full(6, 4.2))
        assert np.allclose(predict(model, X), 4.2, atol=1e-12)


def test_svr_fits_smooth_function(rng):
    X = rng.uniform(-2, 2, size=(60, 2))
    y = np.sin(X[:, 0]) + 0.5 * X[:, 1]
    matrix = make_matrix(X)
    model = fit(LearnerSpec("svr", {"c": 10.0, "epsilon": 0.01}), matrix, y)
    pred = predict(model, matrix)
    assert float(np.mean((pred - y) ** 2)) < 0.01


def test_svr_kkt_conditions(rng):
    X = rng.normal(size=(40, 3))
    y = np.cos(X[:, 0]) + 0.3 * rng.normal(size=40)
    matrix = make_matrix(X)
    params = {"c": 1.0, "epsilon": 0.2, "tol": 1e-4}
    model = fit(LearnerSpec("svr", params), matrix, y)
    state = model.state

    # reconstruct scaled-space residuals at the training points
    scaled_X = model.scaler.transform_array(matrix.data)
    t = (y - state.y_mean) / state.y_scale
    from ptphos.learners.krr import kernel_matrix

    if len(state.coef):
        f = kernel_matrix(scaled_X, state.support_X, "rbf", state.gamma) @ state.coef + state.bias
    else:
        f = np.full(len(t), state.bias)
    residual = t - f
    beta = np.zeros(len(t))
    beta[state.support_idx] = state.coef
    eps, c, tol = params["epsilon"], params["c"], 1e-3

    for i in range(len(t)):
        if beta[i] == 0.0:
            assert abs(residual[i]) <= eps + tol
        elif 0.0 < beta[i] < c:
            assert residual[i] == pytest.approx(eps, abs=tol)
        elif -c < beta[i] < 0.0:
            assert residual[i] == pytest.approx(-eps, abs=tol)
        elif beta[i] >= c:
            assert residual[i] >= eps - tol
        else:
            assert residual[i] <= -eps + tol
    # equality constraint of the dual
    assert float(beta.sum()) == pytest.approx(0.0, abs=1e-9)


# --- feature importance ------------------------------------------------------

def test_importance_unsplit_model_all_zero():
    matrix = make_matrix(np.arange(4.0).reshape(2, 2))
    model = fit(LearnerSpec("cart"), matrix, np.array([1.0, 1.0]))
    report = feature_importance(model)
    assert all(v == 0.0 for v in report.by_column.values())


def test_importance_single_informative_column(rng):
    X = rng.normal(size=(60, 5))
    y = X[:, 3].copy()
    X[:, [0, 1, 2, 4]] += 0.0  # other columns are pure noise at tiny amplitude
    noise = 1e-9 * rng.normal(size=(60, 5))
    noise[:, 3] = 0.0
    model = fit(LearnerSpec("cart", {"max_depth": 1}), make_matrix(X + noise), y)
    report = feature_importance(model)
    assert report.by_column["x3"] >= 0.99


def test_importance_sums_to_one(rng):
    matrix, y = _toy(rng, n=40)
    for kind in ("cart", "rf", "gbm_leafwise", "gbm_levelwise", "adaboost"):
        model = fit(LearnerSpec(kind, seed=1), matrix, y)
        report = feature_importance(model)
        assert sum(report.by_column.values()) == pytest.approx(1.0, abs=1e-9)
        assert sum(report.by_feature.values()) == pytest.approx(1.0, abs=1e-9)


def test_importance_unsupported_kinds(rng):
    matrix, y = _toy(rng, n=20)
    for kind in ("knn_uniform", "krr", "svr"):
        model = fit(LearnerSpec(kind), matrix, y)
        with pytest.raises(UnsupportedImportanceError):
            feature_importance(model)


def test_importance_aggregates_one_hot_groups(rng):
    from ptphos.dataset import DesignMatrix

    X = np.zeros((40, 3))
    X[:, 0] = rng.normal(size=40)
    levels = rng.integers(0, 2, size=40)
    X[np.arange(40), 1 + levels] = 1.0
    y = np.where(levels == 1, 5.0, -5.0) + 0.01 * rng.normal(size=40)
    matrix = DesignMatrix(
        ("num", "cat=a", "cat=b"),
        X,
        {"num": "num", "cat=a": "cat", "cat=b": "cat"},
    )
    model = fit(LearnerSpec("cart", {"max_depth": 2}), matrix, y)
    report = feature_importance(model)
    assert report.by_feature["cat"] >= 0.99
    assert set(report.by_feature) == {"num", "cat"}
