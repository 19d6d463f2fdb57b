"""Shared model plumbing: specs, hyperparameter validation, standardization."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any, Callable

import numpy as np

from ..features import FEATURE_NAMES

FAMILIES = ("gbt", "random_forest", "glm", "lda", "svm_rbf", "knn")
FORMAT_VERSION = 1


class ModelError(ValueError):
    pass


class DegenerateFitError(ModelError):
    """Training labels are all one class where the loss needs both."""


class ConvergenceWarning(UserWarning):
    pass


def sigmoid(z):
    # tanh form never overflows
    return 0.5 * (1.0 + np.tanh(0.5 * np.asarray(z, dtype=float)))


def _is_int(v) -> bool:
    return isinstance(v, (int, np.integer)) and not isinstance(v, bool)


def _is_real(v) -> bool:
    return (_is_int(v) or isinstance(v, (float, np.floating))) and math.isfinite(float(v))


def _choice(*options):
    return lambda v: v in options, f"one of {options}"


def _int_ge(lo):
    return lambda v: _is_int(v) and v >= lo, f"integer >= {lo}"


def _opt_int_ge(lo):
    return lambda v: v is None or (_is_int(v) and v >= lo), f"null or integer >= {lo}"


def _real_in(lo, hi, lo_open=True, hi_open=False):
    def ok(v):
        if not _is_real(v):
            return False
        v = float(v)
        return (v > lo if lo_open else v >= lo) and (v < hi if hi_open else v <= hi)

    return ok, f"real in {'(' if lo_open else '['}{lo}, {hi}{')' if hi_open else ']'}"


def _opt_real_pos():
    return lambda v: v is None or (_is_real(v) and v > 0), "null or positive real"


def _bool():
    return lambda v: isinstance(v, bool), "boolean"


# family -> name -> (default, (validator, description))
HYPERPARAMETERS: dict[str, dict[str, tuple[Any, tuple[Callable, str]]]] = {
    "gbt": {
        "loss": ("deviance", _choice("deviance", "exponential")),
        "criterion": ("friedman_mse", _choice("friedman_mse", "mse")),
        "n_estimators": (100, _int_ge(1)),
        "max_depth": (3, _int_ge(1)),
        "learning_rate": (0.1, _real_in(0.0, 1.0)),
        "min_samples_leaf": (1, _int_ge(1)),
    },
    "random_forest": {
        "n_trees": (100, _int_ge(1)),
        "max_depth": (None, _opt_int_ge(1)),
        "features_per_split": (None, _opt_int_ge(1)),
        "min_samples_leaf": (1, _int_ge(1)),
        "bootstrap": (True, _bool()),
    },
    "glm": {
        "l2": (0.0, _real_in(0.0, math.inf, lo_open=False, hi_open=True)),
        "max_iter": (100, _int_ge(1)),
        "tol": (1e-8, _real_in(0.0, math.inf, hi_open=True)),
    },
    "lda": {
        "shrinkage": (1e-6, _real_in(0.0, math.inf, lo_open=False, hi_open=True)),
    },
    "svm_rbf": {
        "C": (1.0, _real_in(0.0, math.inf, hi_open=True)),
        "gamma": (None, _opt_real_pos()),
        "tol": (1e-3, _real_in(0.0, math.inf, hi_open=True)),
        "max_passes": (200, _int_ge(1)),
    },
    "knn": {
        "k": (5, _int_ge(1)),
    },
}


@dataclass(frozen=True)
class ModelSpec:
    family: str
    hyperparameters: dict = field(default_factory=dict)
    seed: int = 0

    def resolved(self) -> dict:
        """Hyperparameters with defaults filled in, after validation."""
        if self.family not in HYPERPARAMETERS:
            raise ModelError(f"unknown model family {self.family!r}; expected one of {FAMILIES}")
        table = HYPERPARAMETERS[self.family]
        unknown = sorted(set(self.hyperparameters) - set(table))
        if unknown:
            raise ModelError(f"unknown hyperparameters for {self.family}: {unknown}")
        out = {}
        for name, (default, (ok, desc)) in table.items():
            value = self.hyperparameters.get(name, default)
            if not ok(value):
                raise ModelError(f"{self.family}.{name}={value!r} invalid: expected {desc}")
            out[name] = value
        return out

    def to_dict(self) -> dict:
        return {"family": self.family, "hyperparameters": dict(self.hyperparameters), "seed": int(self.seed)}

    @classmethod
    def from_dict(cls, d: dict) -> "ModelSpec":
        return cls(d["family"], dict(d.get("hyperparameters", {})), int(d.get("seed", 0)))


@dataclass
class Standardizer:
    mean: np.ndarray
    scale: np.ndarray

    @classmethod
    def fit(cls, X: np.ndarray) -> "Standardizer":
        mean = X.mean(axis=0)
        scale = X.std(axis=0)
        scale = np.where(scale > 0, scale, 1.0)
        return cls(mean, scale)

    @classmethod
    def identity(cls, d: int) -> "Standardizer":
        return cls(np.zeros(d), np.ones(d))

    def transform(self, X: np.ndarray) -> np.ndarray:
        return (np.asarray(X, dtype=float) - self.mean) / self.scale

    def to_dict(self) -> dict:
        return {"mean": [float(v) for v in self.mean], "scale": [float(v) for v in self.scale]}

    @classmethod
    def from_dict(cls, d: dict) -> "Standardizer":
        return cls(np.array(d["mean"], dtype=float), np.array(d["scale"], dtype=float))


def canonical_order(X: np.ndarray, y: np.ndarray) -> np.ndarray:
    """Row permutation that depends only on row contents, not input order."""
    keys = [y] + [X[:, j] for j in range(X.shape[1] - 1, -1, -1)]
    return np.lexsort(keys[::-1])


def prepare(X, y) -> tuple[np.ndarray, np.ndarray]:
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=np.int64)
    if X.ndim != 2 or len(X) != len(y):
        raise ModelError("X must be 2-D with one label per row")
    if len(y) == 0:
        raise ModelError("cannot train on zero rows")
    if not np.isin(y, (0, 1)).all():
        raise ModelError("labels must be 0/1")
    order = canonical_order(X, y)
    return X[order], y[order]


class TrainedModel:
    """Fitted classifier. ``score`` returns P(stress) in [0, 1]."""

    family: str = ""

    def __init__(self, spec: ModelSpec, standardizer: Standardizer, feature_names=FEATURE_NAMES):
        self.spec = spec
        self.standardizer = standardizer
        self.feature_names = tuple(feature_names)

    @property
    def hyperparameters(self) -> dict:
        return self.spec.resolved()

    def score(self, X) -> np.ndarray:
        raise NotImplementedError

    def predict(self, X, threshold: float = 0.5) -> np.ndarray:
        return (self.score(X) >= threshold).astype(np.int64)

    def _state(self) -> dict:
        raise NotImplementedError

    def to_dict(self) -> dict:
        return {
            "format_version": FORMAT_VERSION,
            "family": self.family,
            "spec": self.spec.to_dict(),
            "hyperparameters": self.spec.resolved(),
            "feature_names": list(self.feature_names),
            "standardizer": self.standardizer.to_dict(),
            "state": self._state(),
        }


def floats(a) -> list:
    return [float(v) for v in np.asarray(a, dtype=float).ravel()]
