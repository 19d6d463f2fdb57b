"""Exhaustive hyperparameter grid search."""

from __future__ import annotations

import itertools
import numbers
import warnings
from dataclasses import dataclass, field

import numpy as np

from ..dataset import SplitDataset, participant_split, upsample_stress
from .base import ModelSpec
from . import train


class LeakageWarning(UserWarning):
    """Hyperparameters are being selected on the held-out test set."""


@dataclass
class GridEntry:
    hyperparameters: dict
    score: float | None
    error: str | None = None

    @property
    def failed(self) -> bool:
        return self.error is not None

    def to_dict(self) -> dict:
        return {
            "hyperparameters": dict(self.hyperparameters),
            "accuracy": self.score,
            "status": "failed" if self.failed else "trained",
            "error": self.error,
        }


@dataclass
class GridResult:
    best: ModelSpec | None
    leaderboard: list[GridEntry] = field(default_factory=list)
    n_combinations: int = 0
    objective: str = "test_accuracy"

    def to_dict(self) -> dict:
        return {
            "objective": self.objective,
            "n_combinations": self.n_combinations,
            "best": self.best.to_dict() if self.best else None,
            "leaderboard": [e.to_dict() for e in self.leaderboard],
        }


def _sortable(v):
    if isinstance(v, numbers.Real) and not isinstance(v, bool):
        return (0, float(v), "")
    return (1, 0.0, str(v))


def expand_grid(grid: dict[str, list]) -> list[dict]:
    names = list(grid)
    return [dict(zip(names, combo)) for combo in itertools.product(*(grid[n] for n in names))]


def tie_key(hp: dict) -> tuple:
    return tuple((name, _sortable(hp[name])) for name in sorted(hp))


def grid_search(
    family: str,
    grid: dict[str, list],
    data: SplitDataset,
    objective: str = "test_accuracy",
    seed: int = 0,
    base_hyperparameters: dict | None = None,
    upsample_ratio: tuple[int, int] | None = (10, 7),
) -> GridResult:
    """Train every grid combination and rank by accuracy at threshold 0.5.

    ``test_accuracy`` scores on the test participants (tuning on test data
    leaks, hence the warning); ``validation_accuracy`` carves a participant
    split out of the training side and scores there. Equal accuracies are
    ordered by the hyperparameter values, compared name by name.
    """
    if not grid or any(len(v) == 0 for v in grid.values()):
        raise ValueError("grid must be non-empty")
    if objective == "test_accuracy":
        warnings.warn(
            "grid_search objective=test_accuracy tunes on the test set; "
            "use validation_accuracy for an unbiased estimate",
            LeakageWarning,
            stacklevel=2,
        )
        fit_rows, eval_rows = data.train, data.test
    elif objective == "validation_accuracy":
        inner = participant_split(data.train, data.target_fraction, seed)
        fit_rows, eval_rows = inner.train, inner.test
    else:
        raise ValueError(f"unknown objective {objective!r}")
    if upsample_ratio is not None:
        fit_rows = upsample_stress(fit_rows, upsample_ratio, seed)

    combos = expand_grid(grid)
    entries = []
    for hp in combos:
        full = {**(base_hyperparameters or {}), **hp}
        try:
            model = train(ModelSpec(family, full, seed), fit_rows.X, fit_rows.y)
            acc = float(np.mean(model.predict(eval_rows.X) == eval_rows.y))
            entries.append(GridEntry(full, acc))
        except Exception as exc:  # recorded, search continues
            entries.append(GridEntry(full, None, f"{type(exc).__name__}: {exc}"))

    entries.sort(key=lambda e: (e.failed, -(e.score or 0.0), tie_key(e.hyperparameters)))
    ok = [e for e in entries if not e.failed]
    best = ModelSpec(family, ok[0].hyperparameters, seed) if ok else None
    return GridResult(best, entries, len(combos), objective)


# 2 x 2 x 2 x 3 = 24 combinations for the boosted model.
GBT_TUNING_GRID = {
    "loss": ["deviance", "exponential"],
    "criterion": ["friedman_mse", "mse"],
    "n_estimators": [100, 200],
    "max_depth": [3, 5, 7],
}
