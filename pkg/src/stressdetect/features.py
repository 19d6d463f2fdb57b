"""Time-domain window features for heart rate and hand acceleration."""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from .windowing import STRESS, Window

FEATURE_NAMES = (
    "mean_hr",
    "max_hr",
    "min_hr",
    "std_hr",
    "range_hr",
    "mean_acc",
    "max_acc",
    "min_acc",
    "std_acc",
    "range_acc",
)
CSV_HEADER = ("participant_id", "label", *FEATURE_NAMES)


class EmptyWindowError(ValueError):
    """A window with no samples reached featurization."""


def acc_magnitude(ax, ay, az):
    """Euclidean norm of the acceleration vector; works on scalars or arrays."""
    return np.sqrt(np.square(ax) + np.square(ay) + np.square(az))


def _stats(x: np.ndarray) -> tuple[float, float, float, float, float]:
    lo, hi = float(x.min()), float(x.max())
    std = float(x.std(ddof=1)) if len(x) > 1 else 0.0
    return float(x.mean()), hi, lo, std, hi - lo


@dataclass(frozen=True)
class FeatureVector:
    participant_id: str
    label: int
    mean_hr: float
    max_hr: float
    min_hr: float
    std_hr: float
    range_hr: float
    mean_acc: float
    max_acc: float
    min_acc: float
    std_acc: float
    range_acc: float

    def values(self) -> np.ndarray:
        return np.array([getattr(self, n) for n in FEATURE_NAMES], dtype=float)


def featurize(window: Window) -> FeatureVector:
    if window.n_samples == 0:
        raise EmptyWindowError(
            f"window [{window.start_t}, {window.end_t}) of {window.participant_id} has no samples"
        )
    hr = _stats(np.asarray(window.hr, dtype=float))
    acc = _stats(acc_magnitude(window.ax, window.ay, window.az))
    return FeatureVector(window.participant_id, int(window.label), *hr, *acc)


@dataclass
class FeatureTable:
    """Column-oriented feature matrix: ``X`` is n x 10 in ``FEATURE_NAMES`` order."""

    X: np.ndarray
    y: np.ndarray
    participant: np.ndarray

    def __post_init__(self):
        self.X = np.asarray(self.X, dtype=float).reshape(-1, len(FEATURE_NAMES))
        self.y = np.asarray(self.y, dtype=np.int64)
        self.participant = np.asarray(self.participant, dtype=object)

    def __len__(self) -> int:
        return len(self.y)

    @classmethod
    def from_vectors(cls, rows: Sequence[FeatureVector]) -> "FeatureTable":
        return cls(
            X=np.array([r.values() for r in rows], dtype=float).reshape(-1, len(FEATURE_NAMES)),
            y=np.array([r.label for r in rows], dtype=np.int64),
            participant=np.array([r.participant_id for r in rows], dtype=object),
        )

    def vectors(self) -> list[FeatureVector]:
        return [
            FeatureVector(str(p), int(lab), *(float(v) for v in x))
            for p, lab, x in zip(self.participant, self.y, self.X)
        ]

    def subset(self, mask_or_index) -> "FeatureTable":
        return FeatureTable(self.X[mask_or_index], self.y[mask_or_index], self.participant[mask_or_index])

    def participants(self) -> list[str]:
        return sorted(set(str(p) for p in self.participant))

    def counts(self) -> dict[str, int]:
        n_stress = int((self.y == STRESS).sum())
        return {"stress": n_stress, "non-stress": len(self) - n_stress}

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(CSV_HEADER)
        for p, lab, x in zip(self.participant, self.y, self.X):
            w.writerow([p, int(lab), *(repr(float(v)) for v in x)])
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text: str) -> "FeatureTable":
        reader = csv.reader(io.StringIO(text))
        header = next(reader, None)
        if header is None or tuple(header) != CSV_HEADER:
            raise ValueError(f"unexpected feature CSV header: {header}")
        pids, labels, xs = [], [], []
        for row in reader:
            if not row:
                continue
            pids.append(row[0])
            labels.append(int(row[1]))
            xs.append([float(v) for v in row[2:]])
        return cls(np.array(xs, dtype=float).reshape(-1, len(FEATURE_NAMES)), labels, pids)

    def write(self, path: str | Path) -> None:
        Path(path).write_text(self.to_csv(), encoding="utf-8")

    @classmethod
    def read(cls, path: str | Path) -> "FeatureTable":
        return cls.from_csv(Path(path).read_text(encoding="utf-8"))


def featurize_windows(windows: Sequence[Window]) -> FeatureTable:
    return FeatureTable.from_vectors([featurize(w) for w in windows])

