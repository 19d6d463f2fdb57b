from __future__ import annotations

import json

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from stressdetect.ingest import ParticipantRecord
from stressdetect.windowing import (
    NONSTRESS,
    STRESS,
    Window,
    WindowingSummary,
    coverage_filter,
    extract_nonstress_windows,
    extract_stress_windows,
    window_record,
)


def record(t, events=()):
    t = np.asarray(t, dtype=np.int64)
    z = np.zeros(len(t))
    return ParticipantRecord("P", t, z + 70, z, z, z + 9.8, np.asarray(events, dtype=np.int64))


def bounds(ws):
    return [(w.start_t, w.end_t) for w in ws]


def test_event_window_is_centred():
    sw = extract_stress_windows(record(range(900, 1100), [1000]))
    assert bounds(sw.windows) == [(970, 1030)]
    assert sw.windows[0].n_samples == 60 and sw.windows[0].label == STRESS


def test_close_events_merge_into_earlier():
    sw = extract_stress_windows(record(range(900, 1100), [1000, 1020]))
    assert bounds(sw.windows) == [(970, 1030)] and sw.n_merged == 1


def test_merge_is_relative_to_last_retained():
    # 1050 is 50 s after 1000 (merged); 1070 is 70 s after 1000 (kept)
    sw = extract_stress_windows(record(range(900, 1200), [1000, 1050, 1070]))
    assert bounds(sw.windows) == [(970, 1030), (1040, 1100)] and sw.n_merged == 1


def test_event_without_samples_kept_then_filtered():
    rec = record(range(0, 100), [5000])
    sw = extract_stress_windows(rec)
    assert sw.windows[0].n_samples == 0
    assert coverage_filter(sw.windows).windows == []


def test_half_width_must_be_positive():
    with pytest.raises(ValueError):
        extract_stress_windows(record([1]), 0)


def test_pure_tiling():
    assert bounds(extract_nonstress_windows(record(range(180)), [])) == [(0, 60), (60, 120), (120, 180)]


def test_tiles_intersecting_stress_are_skipped():
    stress = [Window("P", 50, 110, STRESS, *[np.zeros(0)] * 5)]
    assert bounds(extract_nonstress_windows(record(range(180)), stress)) == [(120, 180)]


def test_empty_record():
    assert extract_nonstress_windows(record([]), []) == []


def test_tiling_anchored_at_first_sample():
    assert bounds(extract_nonstress_windows(record(range(7, 130)), [])) == [(7, 67), (67, 127), (127, 187)]


def _window(n):
    return Window("P", 0, 60, NONSTRESS, np.arange(n), *[np.zeros(n)] * 4)


@pytest.mark.parametrize("n,frac,kept", [(60, 0.8, True), (48, 0.8, True), (47, 0.8, False), (59, 1.0, False), (60, 1.0, True)])
def test_coverage_threshold(n, frac, kept):
    res = coverage_filter([_window(n)], frac)
    assert (len(res.windows) == 1) is kept
    assert res.dropped["non-stress"] == (0 if kept else 1)


def test_coverage_bad_fraction():
    with pytest.raises(ValueError):
        coverage_filter([], 0.0)


@given(
    st.lists(st.integers(0, 2000), min_size=1, max_size=400, unique=True),
    st.lists(st.integers(-100, 2100), max_size=12),
)
def test_no_instant_in_both_labels(times, events):
    rec = record(sorted(times), sorted(events))
    ws = window_record(rec, min_fraction=0.05)
    stress = [(w.start_t, w.end_t) for w in ws if w.label == STRESS]
    for w in ws:
        if w.label == STRESS:
            assert w.end_t - w.start_t == 60
            continue
        for t in w.t:
            assert not any(s <= t < e for s, e in stress)
        assert all(w.start_t <= t < w.end_t for t in w.t)
    again = window_record(rec, min_fraction=0.05)
    assert bounds(again) == bounds(ws)


def test_summary_and_jsonl():
    summary = WindowingSummary()
    ws = window_record(record(range(0, 600), [100, 130, 400]), summary=summary)
    assert summary.n_merged_events == 1
    assert summary.n_stress == 2
    assert summary.n_nonstress == len(ws) - 2
    doc = json.loads(ws[0].to_json())
    assert doc["label"] == "stress" and doc["start_t"] == 70 and len(doc["hr"]) == 60
