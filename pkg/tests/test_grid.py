from __future__ import annotations

import warnings

import numpy as np
import pytest

from stressdetect.dataset import participant_split
from stressdetect.features import FeatureTable
from stressdetect.models.grid import (
    GBT_TUNING_GRID,
    LeakageWarning,
    expand_grid,
    grid_search,
    tie_key,
)


@pytest.fixture(scope="module")
def split():
    rng = np.random.default_rng(0)
    n = 240
    y = (np.arange(n) % 3 == 0).astype(int)
    X = rng.normal(size=(n, 10)) + 2.0 * y[:, None] * (np.arange(10) < 3)
    pids = [f"P{i % 6}" for i in range(n)]
    return participant_split(FeatureTable(X, y, pids), 0.67, seed=0)


def test_tuning_grid_has_24_combinations():
    combos = expand_grid(GBT_TUNING_GRID)
    assert len(combos) == 2 * 2 * 2 * 3 == 24
    assert len({tuple(sorted(c.items())) for c in combos}) == 24


def test_single_combination(split):
    with pytest.warns(LeakageWarning):
        res = grid_search("knn", {"k": [3]}, split)
    assert res.n_combinations == 1 and len(res.leaderboard) == 1
    assert res.best.hyperparameters == {"k": 3}


def test_tie_key_orders_numbers_then_strings():
    assert tie_key({"k": 2}) < tie_key({"k": 10}) < tie_key({"k": "x"})
    # names are compared in sorted order, so dict insertion order is irrelevant
    assert tie_key({"b": 1, "a": 2}) == tie_key({"a": 2, "b": 1})
    assert tie_key({"a": 1, "b": 9}) < tie_key({"a": 2, "b": 0})


def test_equal_scores_order_by_values(split):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", LeakageWarning)
        res = grid_search("random_forest", {"n_trees": [4], "max_depth": [1], "min_samples_leaf": [500, 400]}, split)
    # leaves larger than the data turn every tree into one leaf, so scores tie
    assert res.leaderboard[0].score == res.leaderboard[1].score
    assert [e.hyperparameters["min_samples_leaf"] for e in res.leaderboard] == [400, 500]
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", LeakageWarning)
        again = grid_search("random_forest", {"n_trees": [4], "max_depth": [1], "min_samples_leaf": [400, 500]}, split)
    assert again.best == res.best


def test_failed_entries_are_recorded(split):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", LeakageWarning)
        res = grid_search("knn", {"k": [5, 100000]}, split)
    assert res.n_combinations == 2
    assert [e.failed for e in res.leaderboard] == [False, True]
    assert "ModelError" in res.leaderboard[1].error
    assert res.to_dict()["leaderboard"][1]["status"] == "failed"


def test_all_failed_gives_no_best(split):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", LeakageWarning)
        res = grid_search("knn", {"k": [100000]}, split)
    assert res.best is None and res.to_dict()["best"] is None


def test_validation_objective_does_not_warn(split):
    with warnings.catch_warnings():
        warnings.simplefilter("error", LeakageWarning)
        res = grid_search("knn", {"k": [1, 3]}, split, objective="validation_accuracy")
    assert res.objective == "validation_accuracy"


def test_bad_arguments(split):
    with pytest.raises(ValueError):
        grid_search("knn", {}, split)
    with pytest.raises(ValueError):
        grid_search("knn", {"k": []}, split)
    with pytest.raises(ValueError):
        grid_search("knn", {"k": [1]}, split, objective="train_accuracy")


def test_small_gbt_grid_deterministic(split):
    grid = {"loss": ["deviance", "exponential"], "n_estimators": [5], "max_depth": [1, 2]}
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", LeakageWarning)
        a = grid_search("gbt", grid, split, seed=4)
        b = grid_search("gbt", grid, split, seed=4)
    assert a.to_dict() == b.to_dict()
    scores = [e.score for e in a.leaderboard]
    assert scores == sorted(scores, reverse=True)
