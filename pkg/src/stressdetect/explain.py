"""Exact path-dependent TreeSHAP for the boosted and bagged tree models.

Attributions decompose the model margin (log-odds for boosting, the mean
leaf stress fraction for the forest). A feature outside the coalition is
marginalized by descending both children in proportion to training cover.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from itertools import combinations

import numpy as np

from .models.tree import LEAF, Tree


class UnsupportedModelError(TypeError):
    pass


@dataclass
class ShapRow:
    values: np.ndarray
    base_value: float
    features: np.ndarray

    @property
    def margin(self) -> float:
        return float(self.base_value + self.values.sum())


def _tree_parts(model):
    trees = getattr(model, "trees", None)
    if trees is None or model.family not in ("gbt", "random_forest"):
        raise UnsupportedModelError(
            f"TreeSHAP supports gbt and random_forest models, not {getattr(model, 'family', type(model).__name__)!r}"
        )
    return trees, float(model.tree_scale), float(model.base_score)


def expected_value(tree: Tree) -> float:
    """Cover-weighted mean of the leaf values (the empty-coalition value)."""
    leaves = tree.feature == LEAF
    return float(np.sum(tree.value[leaves] * tree.cover[leaves]) / tree.cover[0])


# ------------------------------------------------------------------ TreeSHAP
#
# The path is a list of entries (feature, zero_fraction, one_fraction, weight)
# where zero_fraction is a scalar cover ratio and one_fraction / weight hold
# one value per explained row. The recursion shape depends only on the tree,
# so all rows are processed together.


def _extend(path, zero, one, feature):
    feats, zeros, ones, weights = path
    feats, zeros, ones = feats + [feature], zeros + [zero], ones + [one]
    weights = [w.copy() for w in weights]
    depth = len(weights)
    weights.append(np.ones_like(one) if depth == 0 else np.zeros_like(one))
    for i in range(depth - 1, -1, -1):
        weights[i + 1] += one * weights[i] * (i + 1) / (depth + 1)
        weights[i] = zero * weights[i] * (depth - i) / (depth + 1)
    return feats, zeros, ones, weights


def _unwind(path, index):
    feats, zeros, ones, weights = path
    depth = len(weights) - 1
    one, zero = ones[index], zeros[index]
    hot = one != 0
    one_safe = np.where(hot, one, 1.0)
    zero_safe = zero if zero != 0 else 1.0
    weights = [w.copy() for w in weights]
    next_one = weights[depth]
    for i in range(depth - 1, -1, -1):
        with_one = next_one * (depth + 1) / ((i + 1) * one_safe)
        without = weights[i] * (depth + 1) / (zero_safe * (depth - i))
        new = np.where(hot, with_one, without)
        next_one = weights[i] - new * zero * (depth - i) / (depth + 1)
        weights[i] = new
    del weights[depth]
    return (
        feats[:index] + feats[index + 1 :],
        zeros[:index] + zeros[index + 1 :],
        ones[:index] + ones[index + 1 :],
        weights,
    )


def _unwound_sum(path, index):
    feats, zeros, ones, weights = path
    depth = len(weights) - 1
    one, zero = ones[index], zeros[index]
    hot = one != 0
    one_safe = np.where(hot, one, 1.0)
    total = np.zeros_like(one)
    next_one = weights[depth]
    for i in range(depth - 1, -1, -1):
        tmp = next_one * (depth + 1) / ((i + 1) * one_safe)
        cold = (weights[i] / zero) * (depth + 1) / (depth - i) if zero != 0 else np.zeros_like(one)
        total += np.where(hot, tmp, cold)
        next_one = weights[i] - tmp * zero * (depth - i) / (depth + 1)
    return total


def tree_shap_values(tree: Tree, X: np.ndarray, n_features: int | None = None) -> np.ndarray:
    """SHAP values of one tree's output for every row of ``X`` (n x d)."""
    X = np.atleast_2d(np.asarray(X, dtype=float))
    n, d = X.shape
    phi = np.zeros((n, n_features or d))
    cover = tree.cover

    def recurse(node, path, zero, one, feature):
        path = _extend(path, zero, one, feature)
        if tree.feature[node] == LEAF:
            v = tree.value[node]
            feats, zeros, ones, _ = path
            for i in range(1, len(feats)):
                w = _unwound_sum(path, i)
                phi[:, feats[i]] += w * (ones[i] - zeros[i]) * v
            return
        f = int(tree.feature[node])
        left, right = int(tree.left[node]), int(tree.right[node])
        goes_left = (X[:, f] <= tree.threshold[node]).astype(float)
        in_zero, in_one = 1.0, np.ones(n)
        feats = path[0]
        if f in feats:
            k = feats.index(f)
            in_zero, in_one = path[1][k], path[2][k]
            path = _unwind(path, k)
        recurse(left, path, in_zero * cover[left] / cover[node], in_one * goes_left, f)
        recurse(right, path, in_zero * cover[right] / cover[node], in_one * (1.0 - goes_left), f)

    recurse(0, ([], [], [], []), 1.0, np.ones(n), -1)
    return phi


def tree_shap_matrix(model, X) -> tuple[np.ndarray, float]:
    """``(phi, base)`` with ``base + phi.sum(1) == model.margin(X)``."""
    trees, scale, base = _tree_parts(model)
    X = np.atleast_2d(np.asarray(X, dtype=float))
    phi = np.zeros(X.shape)
    expected = 0.0
    for tree in trees:
        phi += tree_shap_values(tree, X, X.shape[1])
        expected += expected_value(tree)
    return scale * phi, base + scale * expected


def tree_shap(model, x) -> ShapRow:
    x = np.asarray(x.values() if hasattr(x, "values") and callable(x.values) else x, dtype=float)
    phi, base = tree_shap_matrix(model, x[None, :])
    return ShapRow(phi[0], base, x)


# ------------------------------------------------------------------ oracle

MAX_BRUTE_FORCE_FEATURES = 16


def _conditional_expectation(tree: Tree, x: np.ndarray, known: frozenset, node: int = 0) -> float:
    if tree.feature[node] == LEAF:
        return float(tree.value[node])
    f = int(tree.feature[node])
    left, right = int(tree.left[node]), int(tree.right[node])
    if f in known:
        nxt = left if x[f] <= tree.threshold[node] else right
        return _conditional_expectation(tree, x, known, nxt)
    return (
        tree.cover[left] * _conditional_expectation(tree, x, known, left)
        + tree.cover[right] * _conditional_expectation(tree, x, known, right)
    ) / tree.cover[node]


def brute_force_shapley(tree: Tree, x, n_features: int | None = None) -> np.ndarray:
    """Shapley values by enumerating all coalitions of the ``d`` features."""
    x = np.asarray(x, dtype=float)
    d = n_features or len(x)
    if d > MAX_BRUTE_FORCE_FEATURES:
        raise ValueError(f"brute-force Shapley refuses d={d} > {MAX_BRUTE_FORCE_FEATURES}")
    value = {}
    for size in range(d + 1):
        for subset in combinations(range(d), size):
            key = frozenset(subset)
            value[key] = _conditional_expectation(tree, x, key)
    phi = np.zeros(d)
    fact = [math.factorial(k) for k in range(d + 1)]
    for i in range(d):
        others = [j for j in range(d) if j != i]
        for size in range(d):
            weight = fact[size] * fact[d - size - 1] / fact[d]
            for subset in combinations(others, size):
                s = frozenset(subset)
                phi[i] += weight * (value[s | {i}] - value[s])
    return phi


def brute_force_ensemble(model, x) -> np.ndarray:
    trees, scale, _ = _tree_parts(model)
    x = np.asarray(x, dtype=float)
    return scale * sum(brute_force_shapley(t, x) for t in trees)


# ------------------------------------------------------------------ summaries


@dataclass
class ShapSummary:
    feature_names: tuple[str, ...]
    shap: np.ndarray  # n x d
    X: np.ndarray
    base_value: float
    importance: np.ndarray  # mean |shap| per feature

    @property
    def ranking(self) -> list[str]:
        order = sorted(range(len(self.feature_names)), key=lambda j: (-self.importance[j], j))
        return [self.feature_names[j] for j in order]

    def top(self, k: int) -> list[str]:
        return self.ranking[:k]

    def summary_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["feature", "mean_abs_shap", "rank"])
        for rank, name in enumerate(self.ranking, start=1):
            w.writerow([name, repr(float(self.importance[self.feature_names.index(name)])), rank])
        return buf.getvalue()

    def shap_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["row_id", "feature", "feature_value", "shap_value", "base_value"])
        base = repr(float(self.base_value))
        for i in range(len(self.shap)):
            for j, name in enumerate(self.feature_names):
                w.writerow([i, name, repr(float(self.X[i, j])), repr(float(self.shap[i, j])), base])
        return buf.getvalue()


def shap_summary(model, X) -> ShapSummary:
    X = np.atleast_2d(np.asarray(X, dtype=float))
    if len(X) == 0:
        raise ValueError("shap_summary needs at least one row")
    phi, base = tree_shap_matrix(model, X)
    return ShapSummary(tuple(model.feature_names), phi, X, base, np.abs(phi).mean(axis=0))


def shap_dependence(feature: str, summary: ShapSummary) -> list[tuple[float, float]]:
    """(feature value, shap value) pairs sorted by feature value."""
    if feature not in summary.feature_names:
        raise KeyError(f"unknown feature {feature!r}")
    j = summary.feature_names.index(feature)
    order = np.argsort(summary.X[:, j], kind="stable")
    return [(float(summary.X[i, j]), float(summary.shap[i, j])) for i in order]


def dependence_csv(feature: str, pairs) -> str:
    lines = [f"{feature},shap_value"]
    lines += [f"{v!r},{s!r}" for v, s in pairs]
    return "\n".join(lines) + "\n"
