"""Stress detection from 1 Hz wrist heart rate and hand acceleration.

Stages: ingest -> windowing -> features -> dataset (split, upsample) ->
models -> evaluation -> explain, with a synthetic cohort generator and a CLI
tying them together.
"""

__version__ = "0.1.0"
