from __future__ import annotations

import json
import warnings

import jsonschema
import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from oracles import ensemble_margin, fisher_direction_by_regression, kkt_gap, logistic_mle
from stressdetect.cli import load_schema
from stressdetect.models import (
    FAMILIES,
    ConvergenceWarning,
    DegenerateFitError,
    ModelError,
    ModelSpec,
    load_model,
    model_from_dict,
    save_model,
    train,
)
from stressdetect.models.gbt import train_gbt
from stressdetect.models.knn import train_knn
from stressdetect.models.linear import train_glm, train_lda
from stressdetect.models.svm import kkt_violations, rbf_kernel, train_svm_rbf
from stressdetect.models.forest import train_random_forest

FAST = {
    "gbt": {"n_estimators": 15, "max_depth": 3},
    "random_forest": {"n_trees": 15, "max_depth": 6},
    "glm": {},
    "lda": {},
    "svm_rbf": {},
    "knn": {"k": 5},
}


def separable_1d(n=200, seed=0):
    rng = np.random.default_rng(seed)
    X = rng.uniform(0, 20, size=(n, 10))
    y = (X[:, 3] > 10).astype(int)  # column 3 is std_hr
    return X, y


# -- gbt ---------------------------------------------------------------------


def test_gbt_separable_training_accuracy():
    X, y = separable_1d()
    m = train_gbt(X, y, max_depth=3, n_estimators=50)
    assert (m.predict(X) == y).all()


@pytest.mark.parametrize("loss", ["deviance", "exponential"])
def test_gbt_single_label_is_degenerate(loss):
    with pytest.raises(DegenerateFitError):
        train_gbt(np.zeros((5, 10)), np.zeros(5, dtype=int), loss=loss)


def test_gbt_accepts_off_grid_estimator_count(toy_xy):
    X, y = toy_xy
    m = train(ModelSpec("gbt", {"loss": "deviance", "criterion": "mse", "n_estimators": 20, "max_depth": 7}), X, y)
    assert len(m.trees) == 20 and max(t.max_depth for t in m.trees) <= 7


@pytest.mark.parametrize("criterion", ["mse", "friedman_mse"])
def test_gbt_deviance_loss_non_increasing(toy_xy, criterion):
    X, y = toy_xy
    m = train_gbt(X, y, criterion=criterion, n_estimators=40, max_depth=3)
    loss = np.array(m.train_loss)
    assert len(loss) == 41
    assert (np.diff(loss) <= 1e-12).all()


def test_gbt_exponential_learns(toy_xy):
    X, y = toy_xy
    m = train_gbt(X, y, loss="exponential", n_estimators=40)
    assert (m.predict(X) == y).mean() > 0.9


def test_hyperparameter_validation():
    for hp in ({"learning_rate": 0.0}, {"learning_rate": 1.5}, {"max_depth": 0}, {"loss": "hinge"}, {"bogus": 1}):
        with pytest.raises(ModelError):
            ModelSpec("gbt", hp).resolved()
    with pytest.raises(ModelError):
        ModelSpec("xgboost").resolved()
    assert ModelSpec("gbt", {"learning_rate": 1.0}).resolved()["learning_rate"] == 1.0


# -- forest ------------------------------------------------------------------


def test_forest_single_tree_constant_data():
    X = np.ones((10, 10))
    y = np.array([1, 1, 1] + [0] * 7)
    m = train_random_forest(X, y, n_trees=1, bootstrap=False)
    assert m.score(np.zeros((1, 10)))[0] == pytest.approx(0.3)


def test_forest_overfits_separable(toy_xy):
    X, y = toy_xy
    m = train(ModelSpec("random_forest", {"n_trees": 30}, seed=1), X, y)
    assert (m.predict(X) == y).mean() >= 0.99


def test_forest_same_seed_identical(toy_xy):
    X, y = toy_xy
    a = train(ModelSpec("random_forest", {"n_trees": 5}, seed=9), X, y)
    b = train(ModelSpec("random_forest", {"n_trees": 5}, seed=9), X, y)
    assert a.to_dict() == b.to_dict()


@pytest.mark.parametrize("family", ["gbt", "random_forest"])
def test_tree_walk_oracle(family, toy_xy):
    X, y = toy_xy
    m = train(ModelSpec(family, FAST[family], seed=3), X, y)
    d = m.to_dict()
    Q = np.random.default_rng(0).normal(size=(1000, 10)) * 2
    expected = np.array([ensemble_margin(d, q) for q in Q])
    assert np.allclose(m.margin(Q), expected, rtol=0, atol=1e-12)


@pytest.mark.parametrize("family", ["gbt", "random_forest"])
def test_cover_is_additive(family, toy_xy):
    X, y = toy_xy
    m = train(ModelSpec(family, FAST[family], seed=3), X, y)

    def check(node):
        if node["leaf"]:
            return
        assert node["cover"] == node["left"]["cover"] + node["right"]["cover"]
        check(node["left"])
        check(node["right"])

    for t in m.to_dict()["state"]["trees"]:
        check(t)


# -- glm ---------------------------------------------------------------------


def test_glm_mirror_symmetry_intercept():
    rng = np.random.default_rng(1)
    A = rng.normal(size=(300, 10))
    ya = (rng.uniform(size=300) < 1 / (1 + np.exp(-A[:, 0]))).astype(int)
    X = np.vstack([A, -A])
    y = np.r_[ya, 1 - ya]
    m = train_glm(X, y)
    assert abs(m.intercept_) < 1e-6


@pytest.mark.slow
def test_glm_recovers_logit_slope():
    rng = np.random.default_rng(2024)
    n = 100_000
    x = rng.normal(size=n)
    y = (rng.uniform(size=n) < 1 / (1 + np.exp(-2 * x))).astype(int)
    X = np.zeros((n, 10))
    X[:, 0] = x
    m = train_glm(X, y)
    slope = m.coef_[0]
    assert 1.9 <= slope <= 2.1
    b0, b1 = logistic_mle(x, y)
    assert slope == pytest.approx(b1, abs=1e-5)
    assert m.intercept_ == pytest.approx(b0, abs=1e-5)


def test_glm_separable_warns():
    X, y = separable_1d(60)
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        m = train_glm(X, y, max_iter=25)
    assert any(issubclass(w.category, ConvergenceWarning) for w in caught)
    assert np.isfinite(m.score(X)).all()


# -- lda ---------------------------------------------------------------------


def test_lda_bisector():
    rng = np.random.default_rng(4)
    mu = np.r_[1.0, -0.5, 0.25, np.zeros(7)]
    n = 4000
    Z = rng.normal(size=(n, 10))
    # exact moment matching so pooled covariance is the identity and priors equal
    Z -= Z.mean(0)
    Z = Z @ np.linalg.inv(np.linalg.cholesky(np.cov(Z.T, bias=True)).T)
    X = np.vstack([Z + mu, Z - mu])
    y = np.r_[np.ones(n, int), np.zeros(n, int)]
    m = train_lda(X, y)
    v = rng.normal(size=(50, 10))
    boundary = v - np.outer(v @ mu / (mu @ mu), mu)
    assert np.abs(m.score(boundary) - 0.5).max() < 1e-6


def test_lda_constant_and_duplicate_columns(toy_xy):
    X, y = toy_xy
    X = X.copy()
    X[:, 5] = 3.0
    X[:, 6] = X[:, 0]
    m = train_lda(X, y)
    assert np.isfinite(m.score(X)).all()


def test_lda_direction_matches_regression_oracle():
    rng = np.random.default_rng(8)
    n = 300
    y = (rng.uniform(size=n) < 0.4).astype(int)
    B = rng.normal(size=(n, 3)) @ np.array([[1, 0.3, 0], [0, 1, 0.5], [0, 0, 1]]) + np.outer(y, [1.0, -0.5, 0.7])
    X = np.zeros((n, 10))
    X[:, :3] = B
    X[:, 3:] = rng.normal(size=(n, 7))
    m = train_lda(X, y)
    w = m.coef_ / np.linalg.norm(m.coef_)
    assert np.allclose(w, fisher_direction_by_regression(X, y), atol=1e-5)


# -- svm ---------------------------------------------------------------------


def test_svm_xor():
    X = np.zeros((4, 10))
    X[:, :2] = [[0, 0], [1, 1], [0, 1], [1, 0]]
    y = np.array([0, 0, 1, 1])
    m = train_svm_rbf(X, y, C=10.0, gamma=1.0)
    assert (np.sign(m.decision(X)) == 2 * y - 1).all()


def test_svm_kkt_at_termination(toy_xy):
    X, y = toy_xy
    m = train_svm_rbf(X, y, C=1.0, tol=1e-3)
    assert m.info["converged"]
    # the oracle rebuilds the kernel over the training rows in canonical order
    alpha, ys = m.train_alpha, m.train_labels
    Ztrain = _train_matrix(m, X, y)
    Kfull = rbf_kernel(Ztrain, Ztrain, m.gamma)
    assert kkt_gap(alpha, ys, Kfull, 1.0, m.bias) <= 1e-3 + 1e-9
    assert kkt_violations(alpha, ys, m.train_decision, 1.0, 1e-3).size == 0


def _train_matrix(model, X, y):
    from stressdetect.models.base import prepare

    Xs, _ = prepare(X, y)
    return model.standardizer.transform(Xs)


def test_svm_conflicting_duplicate():
    X = np.zeros((6, 10))
    X[:, 0] = [0, 0, 1, 2, 3, 4]
    y = np.array([0, 1, 0, 1, 1, 1])
    m = train_svm_rbf(X, y, C=0.5)
    assert np.all(m.train_alpha <= 0.5 + 1e-12)
    order_dupes = np.isclose(_train_matrix(m, X, y)[:, 0], _train_matrix(m, X, y)[:, 0].min())
    assert np.allclose(m.train_alpha[order_dupes], 0.5)
    assert np.isfinite(m.score(X)).all()


# -- knn ---------------------------------------------------------------------


def test_knn_k1_returns_own_label(toy_xy):
    X, y = toy_xy
    m = train_knn(X, y, k=1)
    assert (m.score(X) == y).all()


def test_knn_k_equals_n(toy_xy):
    X, y = toy_xy
    m = train_knn(X, y, k=len(y))
    assert np.allclose(m.score(X[:7]), y.mean())


def test_knn_k_too_large():
    with pytest.raises(ModelError):
        train_knn(np.zeros((3, 10)), [0, 1, 0], k=4)


def test_knn_equidistant_tie_break():
    # after standardization the three training rows sit at -1.2247, 0, +1.2247
    # on column 0; a query at 0 has neighbours 0 (d=0) then a tie at 1.2247
    X = np.zeros((3, 10))
    X[:, 0] = [-1.0, 0.0, 1.0]
    y = np.array([1, 0, 0])
    m = train_knn(X, y, k=2)
    q = np.zeros((1, 10))
    # canonical order sorts rows by (label, features): (0,x=0), (0,x=1), (1,x=-1)
    assert list(m.neighbors(q)[0]) == [0, 1]
    assert m.score(q)[0] == 0.0
    assert train_knn(X, y, k=3).score(q)[0] == pytest.approx(1 / 3)


# -- all families ------------------------------------------------------------


@pytest.mark.parametrize("family", FAMILIES)
def test_scores_in_unit_interval_and_order_invariant(family, toy_xy):
    X, y = toy_xy
    spec = ModelSpec(family, FAST[family], seed=5)
    m = train(spec, X, y)
    Q = np.random.default_rng(1).normal(size=(200, 10)) * 3
    s = m.score(Q)
    assert ((s >= 0) & (s <= 1)).all()
    perm = np.random.default_rng(2).permutation(len(y))
    m2 = train(spec, X[perm], y[perm])
    assert np.array_equal(m2.score(Q), s)
    assert m2.to_dict() == m.to_dict()


@pytest.mark.parametrize("family", ["glm", "lda", "svm_rbf", "knn"])
def test_affine_rescaling_invariance(family, toy_xy):
    X, y = toy_xy
    a = np.linspace(0.5, 40, 10)
    b = np.linspace(-100, 100, 10)
    Q = np.random.default_rng(1).normal(size=(100, 10))
    s = train(ModelSpec(family, FAST[family]), X, y).score(Q)
    s2 = train(ModelSpec(family, FAST[family]), X * a + b, y).score(Q * a + b)
    assert np.allclose(s, s2, rtol=0, atol=1e-9)


@pytest.mark.parametrize("family", FAMILIES)
def test_json_round_trip(family, toy_xy, tmp_path):
    X, y = toy_xy
    m = train(ModelSpec(family, FAST[family], seed=2), X, y)
    doc = json.loads(json.dumps(m.to_dict()))
    jsonschema.validate(doc, load_schema("model"))
    assert doc["format_version"] == 1 and doc["family"] == family
    again = model_from_dict(doc)
    assert np.array_equal(again.score(X), m.score(X))
    save_model(m, tmp_path / "m.json")
    assert np.array_equal(load_model(tmp_path / "m.json").score(X), m.score(X))


def test_unknown_format_version(toy_xy):
    X, y = toy_xy
    d = train(ModelSpec("knn"), X, y).to_dict()
    d["format_version"] = 99
    with pytest.raises(ModelError):
        model_from_dict(d)


@given(st.integers(0, 2**31))
def test_gbt_leaf_values_finite_on_random_labels(seed):
    rng = np.random.default_rng(seed)
    X = rng.normal(size=(40, 10))
    y = rng.integers(0, 2, size=40)
    y[:2] = [0, 1]
    m = train_gbt(X, y, n_estimators=5, max_depth=2)
    assert np.isfinite(m.margin(X)).all()
