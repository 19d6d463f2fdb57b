"""Parsing and canonicalization of raw per-participant sensor streams.

Each participant is stored as two CSV files:

* ``<id>.sensor.csv`` with header ``t,hr,ax,ay,az`` (1 Hz samples)
* ``<id>.events.csv`` with header ``t`` (self-reported stress taps)

Timestamps are integral unix seconds.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import IO, Iterable, Sequence

import numpy as np

SENSOR_HEADER = ("t", "hr", "ax", "ay", "az")
EVENT_HEADER = ("t",)


class IngestFormatError(ValueError):
    """The file structure itself is unusable (bad header, bad encoding)."""


@dataclass(frozen=True)
class SensorSample:
    t: int
    hr: float
    ax: float
    ay: float
    az: float


@dataclass(frozen=True)
class StressEvent:
    t: int


@dataclass(frozen=True)
class RejectedRow:
    line: int
    raw: str
    reason: str


@dataclass
class ParseResult:
    """Parsed records plus the rows that could not be used."""

    records: list
    rejects: list[RejectedRow] = field(default_factory=list)

    @property
    def n_rejected(self) -> int:
        return len(self.rejects)

    def __len__(self) -> int:
        return len(self.records)


def _as_text(source) -> IO[str]:
    if isinstance(source, (bytes, bytearray)):
        try:
            return io.StringIO(bytes(source).decode("utf-8"))
        except UnicodeDecodeError as exc:
            raise IngestFormatError(f"source is not valid UTF-8: {exc}") from exc
    if isinstance(source, str):
        return io.StringIO(source)
    if isinstance(source, io.TextIOBase):
        return source
    data = source.read()
    return _as_text(data)


def _parse_timestamp(text: str) -> int:
    text = text.strip()
    try:
        return int(text)
    except ValueError:
        pass
    value = float(text)
    if not math.isfinite(value) or value != math.floor(value):
        raise ValueError(f"timestamp {text!r} is not an integral second")
    return int(value)


def _parse_real(text: str) -> float:
    value = float(text.strip())
    if not math.isfinite(value):
        raise ValueError(f"non-finite value {text!r}")
    return value


def _rows(source, header: Sequence[str]):
    reader = csv.reader(_as_text(source))
    try:
        first = next(reader)
    except StopIteration:
        raise IngestFormatError("empty file: missing header") from None
    if tuple(c.strip() for c in first) != tuple(header):
        raise IngestFormatError(
            f"malformed header {','.join(first)!r}; expected {','.join(header)!r}"
        )
    for row in reader:
        if not row or all(not c.strip() for c in row):
            continue
        yield reader.line_num, row


def parse_sensor_stream(source) -> ParseResult:
    """Parse sensor-CSV text/bytes into :class:`SensorSample` records.

    Malformed rows are collected in ``rejects``; only a bad header is fatal.
    """
    out = ParseResult(records=[])
    for line, row in _rows(source, SENSOR_HEADER):
        raw = ",".join(row)
        if len(row) != len(SENSOR_HEADER):
            out.rejects.append(RejectedRow(line, raw, f"expected 5 fields, got {len(row)}"))
            continue
        try:
            t = _parse_timestamp(row[0])
            hr, ax, ay, az = (_parse_real(c) for c in row[1:])
        except ValueError as exc:
            out.rejects.append(RejectedRow(line, raw, str(exc)))
            continue
        if hr < 0:
            out.rejects.append(RejectedRow(line, raw, "negative heart rate"))
            continue
        out.records.append(SensorSample(t, hr, ax, ay, az))
    return out


def parse_event_log(source) -> ParseResult:
    """Parse event-CSV into :class:`StressEvent` records (duplicates kept)."""
    out = ParseResult(records=[])
    for line, row in _rows(source, EVENT_HEADER):
        raw = ",".join(row)
        if len(row) != 1:
            out.rejects.append(RejectedRow(line, raw, f"expected 1 field, got {len(row)}"))
            continue
        try:
            out.records.append(StressEvent(_parse_timestamp(row[0])))
        except ValueError as exc:
            out.rejects.append(RejectedRow(line, raw, str(exc)))
    return out


@dataclass
class ParticipantRecord:
    """Canonical per-participant data held as column arrays.

    ``t`` is strictly ascending; ``events`` is sorted ascending.
    """

    id: str
    t: np.ndarray
    hr: np.ndarray
    ax: np.ndarray
    ay: np.ndarray
    az: np.ndarray
    events: np.ndarray
    n_duplicates_collapsed: int = 0

    @property
    def samples(self) -> list[SensorSample]:
        return [
            SensorSample(int(t), float(h), float(x), float(y), float(z))
            for t, h, x, y, z in zip(self.t, self.hr, self.ax, self.ay, self.az)
        ]

    @property
    def stress_events(self) -> list[StressEvent]:
        return [StressEvent(int(t)) for t in self.events]

    def __eq__(self, other) -> bool:
        if not isinstance(other, ParticipantRecord):
            return NotImplemented
        return self.id == other.id and all(
            np.array_equal(getattr(self, k), getattr(other, k))
            for k in ("t", "hr", "ax", "ay", "az", "events")
        )


def assemble_participant(
    id: str, samples: Iterable[SensorSample], events: Iterable[StressEvent]
) -> ParticipantRecord:
    samples = list(samples)
    t = np.array([s.t for s in samples], dtype=np.int64)
    cols = np.array([(s.hr, s.ax, s.ay, s.az) for s in samples], dtype=float).reshape(-1, 4)
    # stable sort keeps the first-encountered sample first among equal timestamps
    order = np.argsort(t, kind="stable")
    t, cols = t[order], cols[order]
    keep = np.ones(len(t), dtype=bool)
    keep[1:] = t[1:] != t[:-1]
    ev = np.sort(np.array([e.t for e in events], dtype=np.int64))
    return ParticipantRecord(
        id=str(id),
        t=t[keep],
        hr=cols[keep, 0],
        ax=cols[keep, 1],
        ay=cols[keep, 2],
        az=cols[keep, 3],
        events=ev,
        n_duplicates_collapsed=int((~keep).sum()),
    )


def format_sensor_csv(record: ParticipantRecord) -> str:
    lines = [",".join(SENSOR_HEADER)]
    for t, h, x, y, z in zip(record.t, record.hr, record.ax, record.ay, record.az):
        lines.append(f"{int(t)},{float(h)!r},{float(x)!r},{float(y)!r},{float(z)!r}")
    return "\n".join(lines) + "\n"


def format_event_csv(record: ParticipantRecord) -> str:
    return "\n".join(["t", *(str(int(t)) for t in record.events)]) + "\n"


def write_participant(record: ParticipantRecord, directory: str | Path) -> None:
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    (directory / f"{record.id}.sensor.csv").write_text(format_sensor_csv(record), encoding="utf-8")
    (directory / f"{record.id}.events.csv").write_text(format_event_csv(record), encoding="utf-8")


@dataclass
class CohortLoad:
    records: list[ParticipantRecord]
    rejects: dict[str, list[RejectedRow]]


def load_cohort(directory: str | Path) -> CohortLoad:
    """Load every ``<id>.sensor.csv`` (+ optional events file) in ``directory``."""
    directory = Path(directory)
    records, rejects = [], {}
    for sensor_path in sorted(directory.glob("*.sensor.csv")):
        pid = sensor_path.name[: -len(".sensor.csv")]
        sensors = parse_sensor_stream(sensor_path.read_bytes())
        event_path = directory / f"{pid}.events.csv"
        events = parse_event_log(event_path.read_bytes()) if event_path.exists() else ParseResult([])
        records.append(assemble_participant(pid, sensors.records, events.records))
        bad = sensors.rejects + events.rejects
        if bad:
            rejects[pid] = bad
    return CohortLoad(records, rejects)
