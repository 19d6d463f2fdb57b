from __future__ import annotations

import math

import numpy as np

from .base import ModelSpec, Standardizer, TrainedModel, prepare
from .tree import Tree, build_tree


class RandomForest(TrainedModel):
    """Bagged Gini trees; the score is the mean leaf stress fraction.

    The forest output is already a probability, so its "margin" (the
    quantity TreeSHAP decomposes) is that mean with a zero base score.
    """

    family = "random_forest"
    base_score = 0.0

    def __init__(self, spec, trees, n_features=10):
        super().__init__(spec, Standardizer.identity(n_features))
        self.trees: list[Tree] = trees

    @property
    def tree_scale(self) -> float:
        return 1.0 / len(self.trees)

    def margin(self, X) -> np.ndarray:
        X = np.atleast_2d(np.asarray(X, dtype=float))
        total = np.zeros(len(X))
        for tree in self.trees:
            total += tree.predict(X)
        return total / len(self.trees)

    def score(self, X) -> np.ndarray:
        return np.clip(self.margin(X), 0.0, 1.0)

    def _state(self) -> dict:
        return {"trees": [t.to_dict() for t in self.trees]}

    @classmethod
    def from_state(cls, spec, state, standardizer):
        return cls(spec, [Tree.from_dict(t) for t in state["trees"]], n_features=len(standardizer.mean))


def train_random_forest(X, y, spec: ModelSpec | None = None, **hyperparameters) -> RandomForest:
    spec = spec or ModelSpec("random_forest", hyperparameters)
    hp = spec.resolved()
    X, y = prepare(X, y)
    n, d = X.shape
    m = hp["features_per_split"] or max(1, math.floor(math.sqrt(d)))
    m = min(m, d)
    target = y.astype(float)
    rng = np.random.default_rng(spec.seed)
    trees = []
    for _ in range(hp["n_trees"]):
        tree_rng = np.random.default_rng(rng.integers(0, 2**63))
        rows = tree_rng.integers(0, n, size=n) if hp["bootstrap"] else np.arange(n)
        trees.append(
            build_tree(
                X,
                target,
                criterion="gini",
                leaf_value=lambda idx: float(target[idx].mean()),
                max_depth=hp["max_depth"],
                min_samples_leaf=hp["min_samples_leaf"],
                max_features=m,
                rng=tree_rng,
                rows=rows,
            )
        )
    return RandomForest(spec, trees, n_features=d)
