"""Stagewise gradient tree boosting for binary labels.

Margins are kept in log-odds units for both losses so that
``score = sigmoid(base_score + learning_rate * sum(leaf values))`` and
TreeSHAP attributions read as log-odds. The exponential (AdaBoost) loss is
naturally fit on half log-odds; its leaf values are doubled on storage.
"""

from __future__ import annotations

import numpy as np

from .base import (
    DegenerateFitError,
    ModelSpec,
    Standardizer,
    TrainedModel,
    floats,
    prepare,
    sigmoid,
)
from .tree import Tree, build_tree

_TINY = 1e-150


def log_loss(y: np.ndarray, margin: np.ndarray) -> float:
    """Mean negative Bernoulli log-likelihood at log-odds ``margin``."""
    return float(np.mean(np.logaddexp(0.0, margin) - y * margin))


class GradientBoostedTrees(TrainedModel):
    family = "gbt"

    def __init__(self, spec, trees, base_score, learning_rate, train_loss=None, n_features=10):
        super().__init__(spec, Standardizer.identity(n_features))
        self.trees: list[Tree] = trees
        self.base_score = float(base_score)
        self.learning_rate = float(learning_rate)
        self.train_loss = list(train_loss or [])

    @property
    def tree_scale(self) -> float:
        return self.learning_rate

    def margin(self, X) -> np.ndarray:
        X = np.atleast_2d(np.asarray(X, dtype=float))
        total = np.zeros(len(X))
        for tree in self.trees:
            total += tree.predict(X)
        return self.base_score + self.learning_rate * total

    def score(self, X) -> np.ndarray:
        return sigmoid(self.margin(X))

    def _state(self) -> dict:
        return {
            "base_score": self.base_score,
            "learning_rate": self.learning_rate,
            "trees": [t.to_dict() for t in self.trees],
        }

    @classmethod
    def from_state(cls, spec, state, standardizer):
        return cls(
            spec,
            [Tree.from_dict(t) for t in state["trees"]],
            state["base_score"],
            state["learning_rate"],
            n_features=len(standardizer.mean),
        )


def train_gbt(X, y, spec: ModelSpec | None = None, **hyperparameters) -> GradientBoostedTrees:
    """Fit boosted regression trees to the negative gradient of the loss.

    deviance: residuals ``y - p``, one Newton step per leaf
    (``sum(residual) / sum(p(1-p))``).
    exponential: labels in {-1, +1}, gradient ``y exp(-y F)``, leaf step
    ``sum(y w) / sum(w)`` with ``w = exp(-y F)``.
    """
    spec = spec or ModelSpec("gbt", hyperparameters)
    hp = spec.resolved()
    X, y = prepare(X, y)
    p = y.mean()
    if p <= 0.0 or p >= 1.0:
        raise DegenerateFitError(f"{hp['loss']} loss needs both labels in training data")
    base = float(np.log(p / (1.0 - p)))
    lr = float(hp["learning_rate"])
    margin = np.full(len(y), base)
    trees, losses = [], [log_loss(y, margin)]
    signed = 2.0 * y - 1.0

    for _ in range(hp["n_estimators"]):
        if hp["loss"] == "deviance":
            prob = sigmoid(margin)
            residual = y - prob
            hess = prob * (1.0 - prob)

            def leaf(idx, residual=residual, hess=hess):
                den = hess[idx].sum()
                return residual[idx].sum() / den if abs(den) > _TINY else 0.0

        else:
            w = np.exp(-signed * 0.5 * margin)
            residual = signed * w

            def leaf(idx, residual=residual, w=w):
                den = w[idx].sum()
                # half log-odds step, stored as log-odds
                return 2.0 * residual[idx].sum() / den if abs(den) > _TINY else 0.0

        tree = build_tree(
            X,
            residual,
            criterion=hp["criterion"],
            leaf_value=leaf,
            max_depth=hp["max_depth"],
            min_samples_leaf=hp["min_samples_leaf"],
        )
        trees.append(tree)
        margin = margin + lr * tree.predict(X)
        losses.append(log_loss(y, margin))

    return GradientBoostedTrees(spec, trees, base, lr, losses, n_features=X.shape[1])
