"""Shared fixtures"""

import os

import numpy as np
import pytest

from ionsynth.targets import cat_state, correlated_state


@pytest.fixture(autouse=True)
def clean_environment(monkeypatch):
    """Tests never pick up a developer's IONSYNTH_* settings"""
    for key in list(os.environ):
        if key.startswith("IONSYNTH_"):
            monkeypatch.delenv(key)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture
def small_cat():
    return cat_state(2.0, 3, 3)


@pytest.fixture
def small_correlated():
    return correlated_state(2.0, 3)
