"""Glue between stages: records to feature table, and one seeded train/test run."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence

from .dataset import SplitDataset, participant_split, upsample_stress
from .features import FeatureTable, featurize_windows
from .ingest import ParticipantRecord
from .windowing import Window, WindowingSummary, window_record


@dataclass
class WindowParams:
    half_width: int = 30
    length: int = 60
    min_coverage: float = 0.8


def records_to_windows(
    records: Iterable[ParticipantRecord], params: WindowParams = WindowParams()
) -> tuple[list[Window], WindowingSummary]:
    summary = WindowingSummary()
    windows: list[Window] = []
    for rec in records:
        windows.extend(window_record(rec, params.half_width, params.length, params.min_coverage, summary))
    return windows, summary


def records_to_features(
    records: Sequence[ParticipantRecord], params: WindowParams = WindowParams()
) -> FeatureTable:
    windows, _ = records_to_windows(records, params)
    return featurize_windows(windows)


@dataclass
class PreparedData:
    split: SplitDataset
    train_fit: FeatureTable  # training side after upsampling
    upsample_ratio: tuple[int, int] | None = (10, 7)
    summary: dict = field(default_factory=dict)


def prepare_split(
    table: FeatureTable,
    train_fraction: float = 0.8,
    upsample_ratio: tuple[int, int] | None = (10, 7),
    seed: int = 0,
) -> PreparedData:
    split = participant_split(table, train_fraction, seed)
    fit = upsample_stress(split.train, upsample_ratio, seed) if upsample_ratio else split.train
    return PreparedData(split, fit, upsample_ratio)
