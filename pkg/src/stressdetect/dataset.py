"""Participant-level train/test partitioning and minority upsampling."""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .features import FeatureTable
from .windowing import NONSTRESS, STRESS


class SplitError(ValueError):
    pass


class ResampleError(ValueError):
    pass


@dataclass
class SplitDataset:
    train: FeatureTable
    test: FeatureTable
    train_participants: list[str]
    test_participants: list[str]
    seed: int
    target_fraction: float
    achieved_fraction: float
    method: str = "greedy"

    def manifest(self) -> dict:
        return {
            "seed": int(self.seed),
            "target_train_fraction": float(self.target_fraction),
            "achieved_train_fraction": float(self.achieved_fraction),
            "method": self.method,
            "train_participants": list(self.train_participants),
            "test_participants": list(self.test_participants),
            "train_counts": self.train.counts(),
            "test_counts": self.test.counts(),
        }


def _deviation(n_train: int, total: int, target: Fraction) -> Fraction:
    return abs(Fraction(n_train, total) - target)


def _greedy(counts: list[int], target: Fraction) -> list[bool]:
    in_train, n_train, n_seen = [], 0, 0
    for c in counts:
        n_seen += c
        as_train = abs(Fraction(n_train + c, n_seen) - target)
        as_test = abs(Fraction(n_train, n_seen) - target)
        take = as_train <= as_test
        in_train.append(take)
        n_train += c if take else 0
    return in_train


def _exact(counts: list[int], target: Fraction) -> list[bool]:
    """Subset-sum over participant row counts, Python ints as bitsets."""
    total = sum(counts)
    reach = [1]
    for c in counts:
        reach.append(reach[-1] | (reach[-1] << c))
    best = min(
        (s for s in range(1, total) if (reach[-1] >> s) & 1),
        key=lambda s: (_deviation(s, total, target), -s),
    )
    in_train = [False] * len(counts)
    s = best
    for i in range(len(counts), 0, -1):
        c = counts[i - 1]
        if c <= s and (reach[i - 1] >> (s - c)) & 1:
            in_train[i - 1] = True
            s -= c
    return in_train


def participant_split(
    table: FeatureTable, target_train_fraction: float = 0.8, seed: int = 0
) -> SplitDataset:
    """Partition participants so the train row share is closest to the target.

    Participants are visited largest first (seeded shuffle breaks count ties)
    and each goes to the side that keeps the running train share nearest the
    target. If a subset-sum search finds a strictly closer partition, that one
    is used instead.
    """
    if not 0 < target_train_fraction < 1:
        raise SplitError("target_train_fraction must lie strictly between 0 and 1")
    ids = table.participants()
    if len(ids) < 2:
        raise SplitError(f"need at least 2 participants, got {len(ids)}")
    per = {pid: 0 for pid in ids}
    for p in table.participant:
        per[str(p)] += 1
    rng = np.random.default_rng(seed)
    shuffled = [ids[i] for i in rng.permutation(len(ids))]
    order = sorted(shuffled, key=lambda pid: -per[pid])
    counts = [per[pid] for pid in order]
    total = sum(counts)
    target = Fraction(str(target_train_fraction))

    in_train, method = _greedy(counts, target), "greedy"
    if all(in_train) or not any(in_train):
        in_train = None
    exact = _exact(counts, target)
    if in_train is None or _deviation(
        sum(c for c, k in zip(counts, exact) if k), total, target
    ) < _deviation(sum(c for c, k in zip(counts, in_train) if k), total, target):
        in_train, method = exact, "exact"

    train_ids = sorted(pid for pid, k in zip(order, in_train) if k)
    test_ids = sorted(pid for pid, k in zip(order, in_train) if not k)
    mask = np.isin(table.participant.astype(str), train_ids)
    n_train = int(mask.sum())
    return SplitDataset(
        train=table.subset(mask),
        test=table.subset(~mask),
        train_participants=train_ids,
        test_participants=test_ids,
        seed=seed,
        target_fraction=target_train_fraction,
        achieved_fraction=n_train / total,
        method=method,
    )


def upsample_target(n_nonstress: int, ratio: tuple[int, int] = (10, 7)) -> int:
    """Stress rows needed for ``nonstress:stress == ratio`` (floored)."""
    return n_nonstress * ratio[1] // ratio[0]


def upsample_stress(
    table: FeatureTable, ratio: tuple[int, int] = (10, 7), seed: int = 0
) -> FeatureTable:
    """Duplicate stress rows (uniformly, with replacement) up to the target ratio.

    The original rows come first, unchanged; extra stress copies are appended.
    """
    stress_idx = np.flatnonzero(table.y == STRESS)
    n_nonstress = int((table.y == NONSTRESS).sum())
    if len(stress_idx) == 0:
        raise ResampleError("cannot upsample: no stress rows")
    target = upsample_target(n_nonstress, ratio)
    extra = target - len(stress_idx)
    if extra < 0:
        warnings.warn(
            f"stress rows ({len(stress_idx)}) already exceed the target ({target}); not upsampling",
            stacklevel=2,
        )
        return table
    rng = np.random.default_rng(seed)
    picks = stress_idx[rng.integers(0, len(stress_idx), size=extra)]
    index = np.concatenate([np.arange(len(table)), picks])
    return table.subset(index)
