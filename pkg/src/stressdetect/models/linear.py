"""Linear-score families: IRLS logistic regression (GLM) and two-class LDA."""

from __future__ import annotations

import warnings

import numpy as np

from .base import (
    ConvergenceWarning,
    ModelSpec,
    Standardizer,
    TrainedModel,
    floats,
    prepare,
    sigmoid,
)
from .gbt import log_loss


class LinearScoreModel(TrainedModel):
    """``score = sigmoid(intercept + standardized(x) @ weights)``."""

    def __init__(self, spec, standardizer, weights, intercept, **info):
        super().__init__(spec, standardizer)
        self.weights = np.asarray(weights, dtype=float)
        self.intercept = float(intercept)
        self.info = info

    def decision(self, X) -> np.ndarray:
        return self.intercept + self.standardizer.transform(np.atleast_2d(X)) @ self.weights

    def score(self, X) -> np.ndarray:
        return sigmoid(self.decision(X))

    @property
    def coef_(self) -> np.ndarray:
        """Weights in raw feature units."""
        return self.weights / self.standardizer.scale

    @property
    def intercept_(self) -> float:
        return float(self.intercept - np.sum(self.weights * self.standardizer.mean / self.standardizer.scale))

    def _state(self) -> dict:
        return {"weights": floats(self.weights), "intercept": self.intercept, **self.info}

    @classmethod
    def from_state(cls, spec, state, standardizer):
        info = {k: v for k, v in state.items() if k not in ("weights", "intercept")}
        return cls(spec, standardizer, state["weights"], state["intercept"], **info)


class LogisticGLM(LinearScoreModel):
    family = "glm"


class LinearDiscriminant(LinearScoreModel):
    family = "lda"


def _penalized_nll(y, eta, beta, l2):
    return len(y) * log_loss(y, eta) + 0.5 * l2 * float(beta[1:] @ beta[1:])


def train_glm(X, y, spec: ModelSpec | None = None, **hyperparameters) -> LogisticGLM:
    """Logistic regression by iteratively reweighted least squares.

    Each step solves ``(A'WA + l2 P) delta = A'(y - p) - l2 P beta`` on the
    standardized design ``A = [1, Z]``; the intercept is never penalized.
    Stops when ``max |delta| < tol``. Without convergence (e.g. separable
    data) a :class:`ConvergenceWarning` is issued and the iterate with the
    lowest penalized loss is returned.
    """
    spec = spec or ModelSpec("glm", hyperparameters)
    hp = spec.resolved()
    X, y = prepare(X, y)
    std = Standardizer.fit(X)
    A = np.column_stack([np.ones(len(X)), std.transform(X)])
    penalty = np.full(A.shape[1], float(hp["l2"]))
    penalty[0] = 0.0
    beta = np.zeros(A.shape[1])
    best_beta, best_loss = beta.copy(), _penalized_nll(y, A @ beta, beta, hp["l2"])
    converged, n_iter = False, 0
    for n_iter in range(1, hp["max_iter"] + 1):
        eta = A @ beta
        p = sigmoid(eta)
        w = p * (1.0 - p)
        grad = A.T @ (y - p) - penalty * beta
        hess = (A * w[:, None]).T @ A + np.diag(penalty)
        try:
            delta = np.linalg.solve(hess, grad)
        except np.linalg.LinAlgError:
            delta = np.linalg.lstsq(hess, grad, rcond=None)[0]
        if not np.all(np.isfinite(delta)):
            break
        beta = beta + delta
        loss = _penalized_nll(y, A @ beta, beta, hp["l2"])
        if loss <= best_loss:
            best_beta, best_loss = beta.copy(), loss
        if np.max(np.abs(delta)) < hp["tol"]:
            converged = True
            break
    if not converged:
        warnings.warn(
            f"IRLS did not converge in {hp['max_iter']} iterations; returning best iterate",
            ConvergenceWarning,
            stacklevel=2,
        )
    return LogisticGLM(
        spec, std, best_beta[1:], best_beta[0], converged=converged, n_iter=n_iter
    )


def train_lda(X, y, spec: ModelSpec | None = None, **hyperparameters) -> LinearDiscriminant:
    """Two-class LDA with pooled covariance plus ``shrinkage * I``.

    With class means m0, m1 and pooled covariance S on standardized features,
    ``w = S^-1 (m1 - m0)`` and ``b = -w.(m0 + m1)/2 + log(n1/n0)``; the
    posterior P(stress | x) is then ``sigmoid(w.z + b)``.
    """
    spec = spec or ModelSpec("lda", hyperparameters)
    hp = spec.resolved()
    X, y = prepare(X, y)
    std = Standardizer.fit(X)
    Z = std.transform(X)
    n1 = int(y.sum())
    n0 = len(y) - n1
    if n0 == 0 or n1 == 0:
        raise ValueError("LDA needs both labels in training data")
    m0, m1 = Z[y == 0].mean(axis=0), Z[y == 1].mean(axis=0)
    centered = np.where(y[:, None] == 1, Z - m1, Z - m0)
    dof = max(len(y) - 2, 1)
    cov = centered.T @ centered / dof + hp["shrinkage"] * np.eye(Z.shape[1])
    w = np.linalg.lstsq(cov, m1 - m0, rcond=None)[0]
    b = -0.5 * float(w @ (m0 + m1)) + float(np.log(n1 / n0))
    return LinearDiscriminant(spec, std, w, b)
