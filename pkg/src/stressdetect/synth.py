"""Deterministic synthetic cohorts with planted stress signatures.

Each participant gets a 1 Hz stream:

* heart rate: participant mean + mean-reverting AR(1) fluctuation, plus short
  activity bouts that ramp heart rate up and shake the wrist;
* acceleration: gravity in a slowly drifting orientation, scaled by a slowly
  drifting sensor gain, plus sensor noise and occasional one-sample knocks;
  strong oscillation during activity bouts;
* stress reports placed as a Poisson process. Within +-30 s of each report
  heart rate fluctuates more (``delta_std_hr``), its floor is lifted by
  ``delta_min_hr`` and the hand fidgets with a random amplitude
  (``stress_acc_sd``), which sits between rest and walking levels.

Activity bouts are placed independently of stress, so with all effect sizes at
zero the labels carry no signal.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, fields
from pathlib import Path

import numpy as np

from .ingest import ParticipantRecord

GRAVITY = 9.81
_MASK64 = (1 << 64) - 1


def splitmix64(state: int) -> tuple[int, int]:
    """One splitmix64 step: returns ``(next_state, output)``."""
    state = (state + 0x9E3779B97F4A7C15) & _MASK64
    z = state
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return state, z ^ (z >> 31)


def participant_seeds(seed: int, n: int) -> list[int]:
    state, out = int(seed) & _MASK64, []
    for _ in range(n):
        state, value = splitmix64(state)
        out.append(value)
    return out


@dataclass(frozen=True)
class CohortConfig:
    n_participants: int = 12
    days: float = 2.0 / 24.0
    events_per_day: float = 96.0
    baseline_hr_mean: float = 72.0
    baseline_hr_between_sd: float = 4.0
    baseline_hr_sd: float = 3.0
    hr_autocorrelation: float = 0.9
    delta_std_hr: float = 5.0
    delta_min_hr: float = 8.0
    stress_acc_sd: float = 0.6
    rest_acc_sd: float = 0.05
    acc_gain_drift_sd: float = 1.0
    taps_per_minute: float = 1.0
    tap_amplitude: tuple[float, float] = (1.5, 4.0)
    bouts_per_hour: float = 6.0
    bout_seconds: tuple[float, float] = (15.0, 45.0)
    bout_acc_amplitude: float = 3.0
    bout_hr_rise: float = 15.0
    min_event_gap: int = 180
    missing_fraction: float = 0.0
    start_t: int = 1_700_000_000
    seed: int = 0

    def __post_init__(self):
        if self.n_participants < 1 or self.days <= 0 or self.events_per_day < 0:
            raise ValueError("n_participants, days must be positive and events_per_day >= 0")
        if not 0 <= self.hr_autocorrelation < 1:
            raise ValueError("hr_autocorrelation must lie in [0, 1)")
        if not 0 <= self.missing_fraction < 1:
            raise ValueError("missing_fraction must lie in [0, 1)")
        for f in fields(self):
            v = getattr(self, f.name)
            if isinstance(v, float) and not np.isfinite(v):
                raise ValueError(f"{f.name} must be finite")

    @classmethod
    def null(cls, **overrides) -> "CohortConfig":
        """Same protocol with every stress effect switched off."""
        return cls(**{"delta_std_hr": 0.0, "delta_min_hr": 0.0, "stress_acc_sd": 0.0, **overrides})

    def to_dict(self) -> dict:
        d = asdict(self)
        d["bout_seconds"] = list(self.bout_seconds)
        d["tap_amplitude"] = list(self.tap_amplitude)
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "CohortConfig":
        known = {f.name for f in fields(cls)}
        unknown = sorted(set(d) - known)
        if unknown:
            raise ValueError(f"unknown cohort config keys: {unknown}")
        d = dict(d)
        for key in ("bout_seconds", "tap_amplitude"):
            if key in d:
                d[key] = tuple(d[key])
        return cls(**d)

    @classmethod
    def read(cls, path: str | Path) -> "CohortConfig":
        return cls.from_dict(json.loads(Path(path).read_text(encoding="utf-8")))


def _place_events(rng, n, lo, hi, gap):
    """n sorted integer times in [lo, hi) at least ``gap`` apart."""
    span = hi - lo
    n = min(n, span // gap + 1) if span > 0 else 0
    if n <= 0:
        return np.zeros(0, dtype=np.int64)
    slack = span - (n - 1) * gap
    base = np.sort(rng.integers(0, max(slack, 1), size=n))
    return lo + base + gap * np.arange(n)


def _ar1(rng, n, phi, sd):
    noise = rng.normal(0.0, sd * np.sqrt(1.0 - phi * phi), size=n)
    out = np.empty(n)
    out[0] = rng.normal(0.0, sd)
    for i in range(1, n):
        out[i] = phi * out[i - 1] + noise[i]
    return out


def _random_rotation(rng) -> np.ndarray:
    q, r = np.linalg.qr(rng.normal(size=(3, 3)))
    return q * np.sign(np.diag(r))


def generate_participant(config: CohortConfig, index: int, seed: int) -> ParticipantRecord:
    rng = np.random.default_rng(seed)
    n = int(round(config.days * 86400))
    t0 = config.start_t
    t = t0 + np.arange(n, dtype=np.int64)

    mean_hr = rng.normal(config.baseline_hr_mean, config.baseline_hr_between_sd)
    hr = mean_hr + _ar1(rng, n, config.hr_autocorrelation, config.baseline_hr_sd)

    # gravity direction drifts slowly; magnitude stays ~g at rest
    drift = np.cumsum(rng.normal(0.0, 0.01, size=(n, 3)), axis=0)
    direction = np.array([0.0, 0.0, 1.0]) + drift
    direction /= np.linalg.norm(direction, axis=1, keepdims=True)
    # slow gain drift moves the magnitude level, not its within-window spread
    gain = GRAVITY + _ar1(rng, n, 0.999, config.acc_gain_drift_sd)
    acc = gain[:, None] * direction + rng.normal(0.0, config.rest_acc_sd, size=(n, 3))

    # single-sample knocks: they move the extremes far more than the spread
    n_taps = rng.poisson(config.taps_per_minute * n / 60.0)
    at = rng.integers(0, n, size=n_taps)
    sign = rng.choice([-1.0, 1.0], size=n_taps)
    acc[at] += (sign * rng.uniform(*config.tap_amplitude, size=n_taps))[:, None] * direction[at]

    n_bouts = rng.poisson(config.bouts_per_hour * n / 3600.0)
    for _ in range(n_bouts):
        length = int(rng.uniform(*config.bout_seconds))
        start = int(rng.integers(0, max(n - length, 1)))
        seg = slice(start, start + length)
        m = len(t[seg])
        ramp = np.minimum(np.arange(m) / 10.0, 1.0)
        hr[seg] += config.bout_hr_rise * rng.uniform(0.6, 1.2) * ramp
        amp = config.bout_acc_amplitude * rng.uniform(0.7, 1.3)
        phase = rng.uniform(0, 2 * np.pi)
        swing = amp * np.sin(2 * np.pi * 0.37 * np.arange(m) + phase)
        axis = _random_rotation(rng)[0]
        acc[seg] += swing[:, None] * axis[None, :] + rng.normal(0.0, 0.3 * amp, size=(m, 3))

    n_events = rng.poisson(config.events_per_day * config.days)
    events = _place_events(rng, n_events, 30, n - 30, config.min_event_gap)
    for e in events:
        seg = slice(e - 30, e + 30)
        m = len(t[seg])
        if config.delta_std_hr > 0:
            hr[seg] += _ar1(rng, m, 0.3, config.delta_std_hr)
        if config.delta_min_hr > 0:
            floor = mean_hr + config.delta_min_hr + rng.normal(0.0, 1.0)
            hr[seg] = np.maximum(hr[seg], floor + np.abs(rng.normal(0.0, 0.5, size=m)))
        if config.stress_acc_sd > 0:
            amp = config.stress_acc_sd * rng.lognormal(0.0, 0.4)
            acc[seg] += rng.normal(0.0, amp, size=(m, 3))

    hr = np.round(np.maximum(hr, 30.0), 2)
    acc = np.round(acc, 4)
    keep = np.ones(n, dtype=bool)
    if config.missing_fraction > 0:
        keep = rng.random(n) >= config.missing_fraction
    return ParticipantRecord(
        id=f"P{index:03d}",
        t=t[keep],
        hr=hr[keep],
        ax=acc[keep, 0],
        ay=acc[keep, 1],
        az=acc[keep, 2],
        events=(t0 + events).astype(np.int64),
    )


def generate_cohort(config: CohortConfig = CohortConfig()) -> list[ParticipantRecord]:
    seeds = participant_seeds(config.seed, config.n_participants)
    return [generate_participant(config, i, s) for i, s in enumerate(seeds)]
