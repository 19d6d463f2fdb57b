from __future__ import annotations

import numpy as np

from .base import ModelError, ModelSpec, Standardizer, TrainedModel, floats, prepare


class NearestNeighbors(TrainedModel):
    """Stress fraction among the k nearest standardized training rows.

    Equal distances resolve toward the lower (canonical) training row index.
    """

    family = "knn"

    def __init__(self, spec, standardizer, Z, y, k):
        super().__init__(spec, standardizer)
        self.Z = np.asarray(Z, dtype=float).reshape(-1, len(standardizer.mean))
        self.y = np.asarray(y, dtype=float)
        self.k = int(k)

    def neighbors(self, X) -> np.ndarray:
        Q = self.standardizer.transform(np.atleast_2d(X))
        out = np.empty((len(Q), self.k), dtype=np.int64)
        for start in range(0, len(Q), 128):
            chunk = Q[start : start + 128]
            d2 = ((chunk[:, None, :] - self.Z[None, :, :]) ** 2).sum(-1)
            out[start : start + 128] = np.argsort(d2, axis=1, kind="stable")[:, : self.k]
        return out

    def score(self, X) -> np.ndarray:
        return self.y[self.neighbors(X)].mean(axis=1)

    def _state(self) -> dict:
        return {"k": self.k, "rows": [floats(r) for r in self.Z], "labels": [int(v) for v in self.y]}

    @classmethod
    def from_state(cls, spec, state, standardizer):
        return cls(spec, standardizer, state["rows"], state["labels"], state["k"])


def train_knn(X, y, spec: ModelSpec | None = None, **hyperparameters) -> NearestNeighbors:
    spec = spec or ModelSpec("knn", hyperparameters)
    hp = spec.resolved()
    X, y = prepare(X, y)
    if hp["k"] > len(y):
        raise ModelError(f"k={hp['k']} exceeds the {len(y)} training rows")
    std = Standardizer.fit(X)
    return NearestNeighbors(spec, std, std.transform(X), y, hp["k"])
