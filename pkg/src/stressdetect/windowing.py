"""Event-anchored labelling of 1 Hz streams into fixed 60 s windows."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .ingest import ParticipantRecord

STRESS = 1
NONSTRESS = 0
WINDOW_SECONDS = 60


@dataclass
class Window:
    participant_id: str
    start_t: int
    end_t: int
    label: int
    t: np.ndarray
    hr: np.ndarray
    ax: np.ndarray
    ay: np.ndarray
    az: np.ndarray

    @property
    def n_samples(self) -> int:
        return len(self.t)

    def to_json(self) -> str:
        return json.dumps(
            {
                "participant_id": self.participant_id,
                "start_t": int(self.start_t),
                "end_t": int(self.end_t),
                "label": "stress" if self.label == STRESS else "non-stress",
                "n_samples": self.n_samples,
                "t": [int(v) for v in self.t],
                "hr": [float(v) for v in self.hr],
                "ax": [float(v) for v in self.ax],
                "ay": [float(v) for v in self.ay],
                "az": [float(v) for v in self.az],
            }
        )


@dataclass
class StressWindows:
    windows: list[Window]
    n_merged: int = 0


@dataclass
class CoverageResult:
    windows: list[Window]
    dropped: dict[str, int] = field(default_factory=dict)


def _slice(record: ParticipantRecord, start: int, end: int, label: int) -> Window:
    lo, hi = np.searchsorted(record.t, [start, end], side="left")
    return Window(
        participant_id=record.id,
        start_t=int(start),
        end_t=int(end),
        label=label,
        t=record.t[lo:hi],
        hr=record.hr[lo:hi],
        ax=record.ax[lo:hi],
        ay=record.ay[lo:hi],
        az=record.az[lo:hi],
    )


def extract_stress_windows(record: ParticipantRecord, half_width: int = 30) -> StressWindows:
    """One window ``[e - half_width, e + half_width)`` per retained self-report.

    A report falling within ``2 * half_width`` seconds of the last retained
    report is merged into it.
    """
    if half_width <= 0:
        raise ValueError("half_width must be positive")
    windows, merged, last = [], 0, None
    for e in record.events:
        e = int(e)
        if last is not None and e - last < 2 * half_width:
            merged += 1
            continue
        windows.append(_slice(record, e - half_width, e + half_width, STRESS))
        last = e
    return StressWindows(windows, merged)


def extract_nonstress_windows(
    record: ParticipantRecord,
    stress_windows: Sequence[Window],
    length: int = WINDOW_SECONDS,
) -> list[Window]:
    """Tile the sample span with back-to-back windows, skipping stress overlap.

    Tiles are anchored at the first sample timestamp.
    """
    if len(record.t) == 0:
        return []
    blocked = sorted((w.start_t, w.end_t) for w in stress_windows)
    t0, t_last = int(record.t[0]), int(record.t[-1])
    out = []
    for start in range(t0, t_last + 1, length):
        end = start + length
        if any(s < end and start < e for s, e in blocked):
            continue
        out.append(_slice(record, start, end, NONSTRESS))
    return out


def coverage_filter(
    windows: Iterable[Window], min_fraction: float = 0.8, length: int = WINDOW_SECONDS
) -> CoverageResult:
    if not 0 < min_fraction <= 1:
        raise ValueError("min_fraction must lie in (0, 1]")
    # round before ceil so 0.8 * 60 gives 48, not 49
    required = math.ceil(round(min_fraction * length, 9))
    kept, dropped = [], {"stress": 0, "non-stress": 0}
    for w in windows:
        if w.n_samples >= required:
            kept.append(w)
        else:
            dropped["stress" if w.label == STRESS else "non-stress"] += 1
    return CoverageResult(kept, dropped)


@dataclass
class WindowingSummary:
    n_stress: int = 0
    n_nonstress: int = 0
    n_merged_events: int = 0
    dropped: dict[str, int] = field(default_factory=lambda: {"stress": 0, "non-stress": 0})

    def as_dict(self) -> dict:
        return {
            "n_stress": self.n_stress,
            "n_nonstress": self.n_nonstress,
            "n_merged_events": self.n_merged_events,
            "dropped": dict(self.dropped),
        }


def window_record(
    record: ParticipantRecord,
    half_width: int = 30,
    length: int = WINDOW_SECONDS,
    min_fraction: float = 0.8,
    summary: WindowingSummary | None = None,
) -> list[Window]:
    """Stress windows followed by non-stress tiles, both coverage-filtered."""
    sw = extract_stress_windows(record, half_width)
    ns = extract_nonstress_windows(record, sw.windows, length)
    res = coverage_filter(sw.windows + ns, min_fraction, length)
    if summary is not None:
        summary.n_merged_events += sw.n_merged
        for k, v in res.dropped.items():
            summary.dropped[k] += v
        summary.n_stress += sum(w.label == STRESS for w in res.windows)
        summary.n_nonstress += sum(w.label == NONSTRESS for w in res.windows)
    return res.windows
