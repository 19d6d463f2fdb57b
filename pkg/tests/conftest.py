from __future__ import annotations

import warnings

import numpy as np
import pytest
from hypothesis import settings

from stressdetect.pipeline import records_to_features
from stressdetect.synth import CohortConfig, generate_cohort

settings.register_profile("repo", deadline=None, max_examples=60)
settings.load_profile("repo")


@pytest.fixture(scope="session")
def small_cohort():
    return generate_cohort(CohortConfig(n_participants=6, days=1 / 24, seed=11))


@pytest.fixture(scope="session")
def small_table(small_cohort):
    return records_to_features(small_cohort)


@pytest.fixture(scope="session")
def default_table():
    return records_to_features(generate_cohort(CohortConfig()))


@pytest.fixture
def toy_xy():
    """Two noisy Gaussian blobs in 10 dimensions, 0/1 labels."""
    rng = np.random.default_rng(5)
    n = 160
    y = (np.arange(n) % 4 == 0).astype(int)
    X = rng.normal(size=(n, 10)) + 1.5 * y[:, None] * np.r_[1, 0, 1, 1, 0, 0, 0, 0, 1, 0]
    return X, y


@pytest.fixture(autouse=True)
def _quiet_convergence():
    with warnings.catch_warnings():
        warnings.filterwarnings("ignore", message="IRLS did not converge")
        yield
